fn main() {
    std::process::exit(grf_lab::run());
}
