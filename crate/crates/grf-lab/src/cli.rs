//! Command-line interface: argument parsing, config resolution and command
//! dispatch.
//!
//! Exit codes: 0 success / converged, 2 usage error, 3 positivity escape,
//! 4 time limit reached, 5 step underflow, 1 any other failure. Reports are
//! printed to stdout as JSON and written under `--out` together with the CSV
//! artifacts; identical configuration and seed produce byte-identical files.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use grf_core::curvature::grf_rhs_closed;
use grf_core::flow::{
    check_invariant_subspace, integrate, portrait, FlowError, GridSpec, IntegratorConfig, Plane,
    Trajectory, Verdict,
};
use grf_core::math::{hypot, inf_norm};
use grf_core::son::{
    build_nice_basis, harmonicity_residual, son_integrate, son_jacobian_at_killing, son_jacobian_fd,
};
use grf_core::space::{parse_ratio, AlignedParams};
use grf_core::stability::{
    case1_certificate, global_positivity_scan, interval_i, q_polynomial, q_polynomial_int,
    spectrum_at_fixed_point,
};

use crate::catalog::{builtin_catalog, find, load_catalog, SpaceDescriptor};
use crate::output;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "grf-lab",
    version,
    about = "Numerical laboratory for the generalized Ricci flow on diagonal invariant metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report the Bismut Ricci flat metric, its flow residual and spectrum
    FixedPoint(FixedPointArgs),
    /// Integrate the flow from an initial diagonal metric
    Simulate(SimulateArgs),
    /// Sample the in-plane flow field of an invariant plane
    Portrait(PortraitArgs),
    /// Run the Lyapunov verification suite (requires c1 = 2)
    Lyapunov(LyapunovArgs),
    /// SO(n) tooling: constant dump, Jacobian, harmonicity, simulation
    Son(SonArgs),
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// RNG seed for reproducible runs
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for generated files
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// JSON config file; values found in it override the flags
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct SpaceArgs {
    /// Catalog name of the space (e.g. su7so8so7)
    #[arg(long)]
    space: Option<String>,
    /// Extra catalog file (JSON array of space descriptors)
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Alignment constant c1 in (1, 2]; plain number or p/q
    #[arg(long)]
    c1: Option<String>,
    /// Killing constant λ >= 0
    #[arg(long)]
    lambda: Option<String>,
    /// Casimir eigenvalue κ1 in (0, 1/2]
    #[arg(long)]
    kappa1: Option<String>,
    /// Casimir eigenvalue κ2 in (0, 1/2]
    #[arg(long)]
    kappa2: Option<String>,
    /// Shorthand setting both κ1 and κ2
    #[arg(long)]
    kappa: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct IntegratorArgs {
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    abs_tol: f64,
    #[arg(long, default_value_t = 500.0)]
    max_time: f64,
    #[arg(long, default_value_t = 1e-12)]
    min_step: f64,
    #[arg(long, default_value_t = 1e-8)]
    positivity_floor: f64,
    #[arg(long, default_value_t = 1e-9)]
    convergence_radius: f64,
    #[arg(long, default_value_t = 1e-12)]
    stall_rhs_norm: f64,
}

impl IntegratorArgs {
    fn to_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_time: self.max_time,
            min_step: self.min_step,
            positivity_floor: self.positivity_floor,
            convergence_radius: self.convergence_radius,
            stall_rhs_norm: self.stall_rhs_norm,
        }
    }
}

#[derive(Args, Debug)]
struct FixedPointArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// Initial metric `x1,x2,x3` (components may be p/q)
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Copy, Clone, Debug, ValueEnum, PartialEq, Eq)]
enum PlaneArg {
    /// the plane x3 = c1/(c1-1)
    X3Fixed,
    /// the plane x1 = (c1-1) x2 (requires κ1 = κ2)
    X1PropX2,
}

impl From<PlaneArg> for Plane {
    fn from(p: PlaneArg) -> Plane {
        match p {
            PlaneArg::X3Fixed => Plane::X3Fixed,
            PlaneArg::X1PropX2 => Plane::X1PropX2,
        }
    }
}

#[derive(Args, Debug)]
struct PortraitArgs {
    #[command(flatten)]
    space: SpaceArgs,
    #[arg(long, value_enum)]
    plane: PlaneArg,
    #[arg(long, default_value_t = 0.2)]
    u_min: f64,
    #[arg(long, default_value_t = 4.0)]
    u_max: f64,
    #[arg(long, default_value_t = 0.2)]
    v_min: f64,
    #[arg(long, default_value_t = 4.0)]
    v_max: f64,
    #[arg(long, default_value_t = 20)]
    nu: usize,
    #[arg(long, default_value_t = 20)]
    nv: usize,
    /// Trace a streamline from every grid point into the JSON sidecar
    #[arg(long)]
    streamlines: bool,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct LyapunovArgs {
    #[command(flatten)]
    space: SpaceArgs,
    /// λ for a direct (space-less) run with c1 = 2
    #[arg(long = "lambda-direct")]
    lambda_direct: Option<String>,
    /// κ for a direct run
    #[arg(long = "kappa-direct")]
    kappa_direct: Option<String>,
    /// Total sample budget for the positivity scan
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    /// Upper edge of the scan box (0, box-max]²
    #[arg(long, default_value_t = 10.0)]
    box_max: f64,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum SonAction {
    /// Dump nonzero structure constants as CSV
    Dump,
    /// Jacobian diagonal at the Killing metric plus a finite-difference check
    Jacobian,
    /// Harmonicity residual on random diagonal metrics
    Harmonicity,
    /// Integrate the flow from a perturbed metric
    Simulate,
}

#[derive(Args, Debug)]
struct SonArgs {
    /// Rank parameter n of SO(n), n >= 3
    #[arg(long)]
    n: usize,
    #[arg(value_enum)]
    action: SonAction,
    /// Initial metric for `simulate`: comma-separated, n(n-1)/2 entries
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Perturbation amplitude for the default random start
    #[arg(long, default_value_t = 0.05)]
    amplitude: f64,
    #[command(flatten)]
    integrator: IntegratorArgs,
    #[command(flatten)]
    common: CommonArgs,
}

// ---------------------------------------------------------------------------
// errors and exit codes
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum CliError {
    /// exit 2
    Usage(String),
    /// exit 1
    Failed(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failed(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn failed(msg: impl std::fmt::Display) -> CliError {
    CliError::Failed(msg.to_string())
}

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::FixedPoint(a) => cmd_fixed_point(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Portrait(a) => cmd_portrait(a),
        Command::Lyapunov(a) => cmd_lyapunov(a),
        Command::Son(a) => cmd_son(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    }
}

// ---------------------------------------------------------------------------
// config file overrides
// ---------------------------------------------------------------------------

/// Flat override set readable from `--config`; any present field replaces the
/// corresponding flag. Fields not used by the invoked command are ignored.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    space: Option<String>,
    catalog: Option<PathBuf>,
    c1: Option<crate::catalog::NumOrRatio>,
    lambda: Option<crate::catalog::NumOrRatio>,
    kappa1: Option<crate::catalog::NumOrRatio>,
    kappa2: Option<crate::catalog::NumOrRatio>,
    kappa: Option<crate::catalog::NumOrRatio>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    x0: Option<String>,
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    max_time: Option<f64>,
    min_step: Option<f64>,
    positivity_floor: Option<f64>,
    convergence_radius: Option<f64>,
    stall_rhs_norm: Option<f64>,
    plane: Option<String>,
    u_min: Option<f64>,
    u_max: Option<f64>,
    v_min: Option<f64>,
    v_max: Option<f64>,
    nu: Option<usize>,
    nv: Option<usize>,
    streamlines: Option<bool>,
    samples: Option<usize>,
    box_max: Option<f64>,
    n: Option<usize>,
    amplitude: Option<f64>,
}

fn load_file_config(common: &CommonArgs) -> Result<FileConfig, CliError> {
    match &common.config {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| failed(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| usage(format!("bad config {}: {e}", path.display())))
        }
    }
}

fn apply_common(fc: &FileConfig, common: &mut CommonArgs) {
    if let Some(s) = fc.seed {
        common.seed = s;
    }
    if let Some(o) = &fc.out {
        common.out = o.clone();
    }
}

fn apply_space(fc: &FileConfig, space: &mut SpaceArgs) {
    if let Some(s) = &fc.space {
        space.space = Some(s.clone());
    }
    if let Some(c) = &fc.catalog {
        space.catalog = Some(c.clone());
    }
    for (src, dst) in [
        (&fc.c1, &mut space.c1),
        (&fc.lambda, &mut space.lambda),
        (&fc.kappa1, &mut space.kappa1),
        (&fc.kappa2, &mut space.kappa2),
        (&fc.kappa, &mut space.kappa),
    ] {
        if let Some(v) = src {
            *dst = Some(v.to_string());
        }
    }
}

fn apply_integrator(fc: &FileConfig, it: &mut IntegratorArgs) {
    if let Some(v) = fc.rel_tol {
        it.rel_tol = v;
    }
    if let Some(v) = fc.abs_tol {
        it.abs_tol = v;
    }
    if let Some(v) = fc.max_time {
        it.max_time = v;
    }
    if let Some(v) = fc.min_step {
        it.min_step = v;
    }
    if let Some(v) = fc.positivity_floor {
        it.positivity_floor = v;
    }
    if let Some(v) = fc.convergence_radius {
        it.convergence_radius = v;
    }
    if let Some(v) = fc.stall_rhs_norm {
        it.stall_rhs_norm = v;
    }
}

// ---------------------------------------------------------------------------
// space resolution and report plumbing
// ---------------------------------------------------------------------------

/// Fully resolved space parameters, echoed into every report.
#[derive(Debug, Clone, Serialize)]
struct ResolvedSpace {
    name: Option<String>,
    c1: f64,
    c2: f64,
    lambda: f64,
    kappa1: f64,
    kappa2: f64,
    a1: f64,
    a2: f64,
    warnings: Vec<String>,
}

impl ResolvedSpace {
    fn new(name: Option<String>, p: &AlignedParams) -> Self {
        let mut warnings = Vec::new();
        if p.is_abelian() {
            warnings.push("lambda = 0: K is abelian; Lyapunov tooling unavailable".into());
        }
        if p.a2_exceeds_unity() {
            warnings.push(format!(
                "a2 = lambda*c2 = {} >= 1: outside the geometric regime a2 < 1",
                p.a2
            ));
        }
        ResolvedSpace {
            name,
            c1: p.c1,
            c2: p.c2,
            lambda: p.lambda,
            kappa1: p.kappa1,
            kappa2: p.kappa2,
            a1: p.a1,
            a2: p.a2,
            warnings,
        }
    }
}

fn resolve_space(args: &SpaceArgs) -> Result<(AlignedParams, ResolvedSpace), CliError> {
    if let Some(name) = &args.space {
        let user = match &args.catalog {
            Some(path) => load_catalog(path).map_err(failed)?,
            None => Vec::new(),
        };
        let builtin = builtin_catalog();
        let desc: &SpaceDescriptor = find(&user, &builtin, name)
            .ok_or_else(|| failed(format!("unknown catalog space {name:?}")))?;
        let p = desc.params().map_err(failed)?;
        return Ok((p, ResolvedSpace::new(Some(name.clone()), &p)));
    }
    let c1 = args
        .c1
        .as_deref()
        .ok_or_else(|| usage("either --space or --c1 is required"))?;
    let lambda = args
        .lambda
        .as_deref()
        .ok_or_else(|| usage("--lambda is required"))?;
    let kappa1 = args
        .kappa1
        .as_deref()
        .or(args.kappa.as_deref())
        .ok_or_else(|| usage("--kappa1 (or --kappa) is required"))?;
    let kappa2 = args
        .kappa2
        .as_deref()
        .or(args.kappa.as_deref())
        .ok_or_else(|| usage("--kappa2 (or --kappa) is required"))?;
    let p =
        AlignedParams::from_strs(c1, lambda, kappa1, kappa2).map_err(|e| usage(e.to_string()))?;
    Ok((p, ResolvedSpace::new(None, &p)))
}

#[derive(Debug, Clone, Serialize)]
struct IntegratorEcho {
    rel_tol: f64,
    abs_tol: f64,
    max_time: f64,
    min_step: f64,
    positivity_floor: f64,
    convergence_radius: f64,
    stall_rhs_norm: f64,
}

impl From<&IntegratorConfig> for IntegratorEcho {
    fn from(c: &IntegratorConfig) -> Self {
        IntegratorEcho {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            max_time: c.max_time,
            min_step: c.min_step,
            positivity_floor: c.positivity_floor,
            convergence_radius: c.convergence_radius,
            stall_rhs_norm: c.stall_rhs_norm,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct ComplexOut {
    re: f64,
    im: f64,
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| failed(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents)
        .map_err(|e| failed(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn emit_report<T: Serialize>(dir: &Path, name: &str, report: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| failed(format!("report serialization: {e}")))?;
    text.push('\n');
    print!("{text}");
    write_out(dir, name, &text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// fixed-point
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FixedPointReport {
    version: &'static str,
    command: &'static str,
    config: FixedPointConfigEcho,
    fixed_point: [f64; 3],
    rhs_inf_norm: f64,
    analytic_eigenvalues: [f64; 3],
    fd_eigenvalues: Vec<ComplexOut>,
    hyperbolic: bool,
    verdict: String,
}

#[derive(Serialize)]
struct FixedPointConfigEcho {
    space: ResolvedSpace,
    seed: u64,
    out: String,
}

fn cmd_fixed_point(mut args: FixedPointArgs) -> Result<i32, CliError> {
    let fc = load_file_config(&args.common)?;
    apply_common(&fc, &mut args.common);
    apply_space(&fc, &mut args.space);

    let (params, resolved) = resolve_space(&args.space)?;
    let g0 = params.brf_fixed_point();
    let residual = inf_norm(&grf_rhs_closed(&params, &g0).map_err(failed)?.as_array());
    let spectrum = spectrum_at_fixed_point(&params, 1e-6).map_err(failed)?;

    let report = FixedPointReport {
        version: VERSION,
        command: "fixed-point",
        config: FixedPointConfigEcho {
            space: resolved,
            seed: args.common.seed,
            out: args.common.out.display().to_string(),
        },
        fixed_point: g0.as_array(),
        rhs_inf_norm: residual,
        analytic_eigenvalues: spectrum.analytic_eigenvalues.expect("at fixed point"),
        fd_eigenvalues: spectrum
            .eigenvalues
            .iter()
            .map(|z| ComplexOut { re: z.re, im: z.im })
            .collect(),
        hyperbolic: spectrum.hyperbolic,
        verdict: spectrum.verdict.to_string(),
    };
    emit_report(&args.common.out, "fixed_point.json", &report)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn parse_x0(text: &str, expected: usize) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != expected {
        return Err(usage(format!(
            "--x0 needs {expected} comma-separated entries"
        )));
    }
    parts
        .iter()
        .map(|s| parse_ratio(s).map_err(|e| usage(e.to_string())))
        .collect()
}

#[derive(Serialize)]
struct SimulateReport {
    version: &'static str,
    command: &'static str,
    config: SimulateConfigEcho,
    verdict: String,
    endpoint: Vec<f64>,
    t_end: f64,
    accepted_steps: usize,
    final_rhs_norm: f64,
    distance_to_fixed_point: f64,
    trajectory_csv: String,
}

#[derive(Serialize)]
struct SimulateConfigEcho {
    space: ResolvedSpace,
    x0: Vec<f64>,
    integrator: IntegratorEcho,
    seed: u64,
    out: String,
}

fn verdict_exit(v: Verdict) -> i32 {
    match v {
        Verdict::ConvergedToBrf => 0,
        Verdict::EscapedPositivity => 3,
        Verdict::MaxTimeReached => 4,
        Verdict::StepUnderflow => 5,
    }
}

fn cmd_simulate(mut args: SimulateArgs) -> Result<i32, CliError> {
    let fc = load_file_config(&args.common)?;
    apply_common(&fc, &mut args.common);
    apply_space(&fc, &mut args.space);
    apply_integrator(&fc, &mut args.integrator);
    if let Some(x0) = &fc.x0 {
        args.x0 = Some(x0.clone());
    }

    let (params, resolved) = resolve_space(&args.space)?;
    let x0_text = args
        .x0
        .as_deref()
        .ok_or_else(|| usage("--x0 is required"))?;
    let x0 = parse_x0(x0_text, 3)?;
    let cfg = args.integrator.to_config();

    let traj = match integrate(&params, &[x0[0], x0[1], x0[2]].into(), &cfg) {
        Ok(t) => t,
        Err(FlowError::InvalidInitialCondition(e)) => {
            return Err(usage(format!("invalid --x0: {e}")))
        }
        Err(e) => return Err(failed(e)),
    };

    let csv = output::aligned_trajectory_csv(&traj);
    write_out(&args.common.out, "trajectory.csv", &csv)?;

    let end = traj.last();
    let g0 = params.brf_fixed_point();
    let report = SimulateReport {
        version: VERSION,
        command: "simulate",
        config: SimulateConfigEcho {
            space: resolved,
            x0,
            integrator: IntegratorEcho::from(&cfg),
            seed: args.common.seed,
            out: args.common.out.display().to_string(),
        },
        verdict: traj.verdict.to_string(),
        endpoint: end.state.clone(),
        t_end: end.t,
        accepted_steps: traj.samples.len() - 1,
        final_rhs_norm: end.rhs_norm,
        distance_to_fixed_point: grf_core::math::inf_dist(&end.state, &g0.as_array()),
        trajectory_csv: "trajectory.csv".into(),
    };
    emit_report(&args.common.out, "simulate.json", &report)?;
    Ok(verdict_exit(traj.verdict))
}

// ---------------------------------------------------------------------------
// portrait
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PortraitReport {
    version: &'static str,
    command: &'static str,
    config: PortraitConfigEcho,
    plane: String,
    in_plane_fixed_point: [f64; 2],
    arrows: usize,
    invariance_residual: f64,
    csv: String,
    streamlines: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Serialize)]
struct PortraitConfigEcho {
    space: ResolvedSpace,
    plane: String,
    u_min: f64,
    u_max: f64,
    v_min: f64,
    v_max: f64,
    nu: usize,
    nv: usize,
    streamlines: bool,
    integrator: IntegratorEcho,
    seed: u64,
    out: String,
}

fn cmd_portrait(mut args: PortraitArgs) -> Result<i32, CliError> {
    let fc = load_file_config(&args.common)?;
    apply_common(&fc, &mut args.common);
    apply_space(&fc, &mut args.space);
    apply_integrator(&fc, &mut args.integrator);
    if let Some(p) = &fc.plane {
        args.plane = match p.as_str() {
            "x3-fixed" => PlaneArg::X3Fixed,
            "x1-prop-x2" => PlaneArg::X1PropX2,
            other => return Err(usage(format!("unknown plane {other:?}"))),
        };
    }
    for (src, dst) in [
        (fc.u_min, &mut args.u_min),
        (fc.u_max, &mut args.u_max),
        (fc.v_min, &mut args.v_min),
        (fc.v_max, &mut args.v_max),
    ] {
        if let Some(v) = src {
            *dst = v;
        }
    }
    if let Some(v) = fc.nu {
        args.nu = v;
    }
    if let Some(v) = fc.nv {
        args.nv = v;
    }
    if let Some(v) = fc.streamlines {
        args.streamlines = v;
    }

    let (params, resolved) = resolve_space(&args.space)?;
    let plane: Plane = args.plane.into();
    let grid = GridSpec {
        u_min: args.u_min,
        u_max: args.u_max,
        v_min: args.v_min,
        v_max: args.v_max,
        nu: args.nu,
        nv: args.nv,
    };
    let cfg = args.integrator.to_config();
    let pg = portrait(&params, plane, &grid, args.streamlines, &cfg).map_err(failed)?;

    // tangency residual over the sampled slice, as a sanity value in the sidecar
    let invariance = check_invariant_subspace(&params, plane, 256, 1e-11, args.common.seed)
        .map_err(failed)?
        .max_residual;

    write_out(&args.common.out, "portrait.csv", &output::portrait_csv(&pg))?;
    let report = PortraitReport {
        version: VERSION,
        command: "portrait",
        config: PortraitConfigEcho {
            space: resolved,
            plane: plane.name().into(),
            u_min: grid.u_min,
            u_max: grid.u_max,
            v_min: grid.v_min,
            v_max: grid.v_max,
            nu: grid.nu,
            nv: grid.nv,
            streamlines: args.streamlines,
            integrator: IntegratorEcho::from(&cfg),
            seed: args.common.seed,
            out: args.common.out.display().to_string(),
        },
        plane: plane.name().into(),
        in_plane_fixed_point: plane.fixed_point(&params),
        arrows: pg.arrows.len(),
        invariance_residual: invariance,
        csv: "portrait.csv".into(),
        streamlines: if args.streamlines {
            Some(pg.streamlines.clone())
        } else {
            None
        },
    };
    emit_report(&args.common.out, "portrait.json", &report)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// lyapunov
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct LyapunovReport {
    version: &'static str,
    command: &'static str,
    config: LyapunovConfigEcho,
    scan: ScanOut,
    case1: Case1Out,
    q_suite: QSuiteOut,
    verdict: String,
}

#[derive(Serialize)]
struct LyapunovConfigEcho {
    lambda: f64,
    kappa: f64,
    samples: usize,
    box_max: f64,
    seed: u64,
    out: String,
}

#[derive(Serialize)]
struct ScanOut {
    min: f64,
    argmin: [f64; 2],
    samples: usize,
    case_tallies: TalliesOut,
    max_identity_residual: f64,
}

#[derive(Serialize)]
struct TalliesOut {
    case1: usize,
    case2: usize,
    case3: usize,
    both_positive: usize,
}

#[derive(Serialize)]
struct Case1Out {
    samples: usize,
    max_residual_factorization: f64,
    max_residual_critical_value: f64,
    min_value: f64,
    argmin: [f64; 2],
    nonnegative: bool,
    positive_outside_exclusion: bool,
    min_p_at_zero: f64,
}

#[derive(Serialize)]
struct QSuiteOut {
    q_at_2: i64,
    sign_pattern_ok: bool,
    interval: [f64; 2],
    negative_throughout_interval: bool,
}

fn cmd_lyapunov(mut args: LyapunovArgs) -> Result<i32, CliError> {
    let fc = load_file_config(&args.common)?;
    apply_common(&fc, &mut args.common);
    apply_space(&fc, &mut args.space);
    if let Some(v) = fc.samples {
        args.samples = v;
    }
    if let Some(v) = fc.box_max {
        args.box_max = v;
    }

    // resolve (λ, κ): either from a space (which must satisfy the theorem
    // hypotheses) or directly
    let (lambda, kappa) = if args.space.space.is_some() || args.space.c1.is_some() {
        let (p, _) = resolve_space(&args.space)?;
        if p.c1 != 2.0 {
            return Err(failed(format!(
                "outside theorem hypotheses: c1 = {} but global stability requires c1 = 2",
                p.c1
            )));
        }
        if p.kappa1 != p.kappa2 {
            return Err(failed("outside theorem hypotheses: kappa1 != kappa2"));
        }
        (p.lambda, p.kappa1)
    } else {
        let l = args
            .lambda_direct
            .as_deref()
            .ok_or_else(|| usage("provide --space/--c1 … or --lambda-direct/--kappa-direct"))?;
        let k = args
            .kappa_direct
            .as_deref()
            .ok_or_else(|| usage("--kappa-direct is required with --lambda-direct"))?;
        (
            parse_ratio(l).map_err(|e| usage(e.to_string()))?,
            parse_ratio(k).map_err(|e| usage(e.to_string()))?,
        )
    };
    let lambda_positive = lambda > 0.0;
    if !lambda_positive {
        return Err(failed(format!(
            "outside theorem hypotheses: lambda = {lambda} must be positive"
        )));
    }

    let scan = global_positivity_scan(
        lambda,
        kappa,
        (0.0, args.box_max),
        (0.0, args.box_max),
        args.samples,
        args.common.seed,
    )
    .map_err(failed)?;
    let case1 = case1_certificate(args.samples.clamp(1, 100_000), args.common.seed ^ 0x9e37)
        .map_err(failed)?;

    let (ilo, ihi) = interval_i();
    let sign_pattern_ok = q_polynomial(7.0 / 5.0) > 0.0
        && q_polynomial(3.0 / 2.0) < 0.0
        && q_polynomial(13.0 / 5.0) < 0.0
        && q_polynomial(3.0) > 0.0;
    let negative_throughout = (0..200).all(|i| {
        let y = ilo + (ihi - ilo) * (i as f64 + 0.5) / 200.0;
        q_polynomial(y) < 0.0
    });

    let scan_ok = scan.min >= 0.0 && hypot(scan.argmin[0] - 1.0, scan.argmin[1] - 2.0) <= 1e-2;
    let case1_ok = case1.nonnegative
        && case1.positive_outside_exclusion
        && case1.max_residual_factorization < 1e-9
        && case1.max_residual_critical_value < 1e-9
        && case1.min_p_at_zero > 0.0;
    let q_ok = q_polynomial_int(2) == -10240 && sign_pattern_ok && negative_throughout;
    let verdict = if scan_ok && case1_ok && q_ok {
        "PASS"
    } else {
        "FAIL"
    };

    let report = LyapunovReport {
        version: VERSION,
        command: "lyapunov",
        config: LyapunovConfigEcho {
            lambda,
            kappa,
            samples: args.samples,
            box_max: args.box_max,
            seed: args.common.seed,
            out: args.common.out.display().to_string(),
        },
        scan: ScanOut {
            min: scan.min,
            argmin: scan.argmin,
            samples: scan.samples,
            case_tallies: TalliesOut {
                case1: scan.tallies.case1,
                case2: scan.tallies.case2,
                case3: scan.tallies.case3,
                both_positive: scan.tallies.both_positive,
            },
            max_identity_residual: scan.max_identity_residual,
        },
        case1: Case1Out {
            samples: case1.samples,
            max_residual_factorization: case1.max_residual_factorization,
            max_residual_critical_value: case1.max_residual_critical_value,
            min_value: case1.min_value,
            argmin: case1.argmin,
            nonnegative: case1.nonnegative,
            positive_outside_exclusion: case1.positive_outside_exclusion,
            min_p_at_zero: case1.min_p_at_zero,
        },
        q_suite: QSuiteOut {
            q_at_2: q_polynomial_int(2),
            sign_pattern_ok,
            interval: [ilo, ihi],
            negative_throughout_interval: negative_throughout,
        },
        verdict: verdict.into(),
    };
    emit_report(&args.common.out, "lyapunov.json", &report)?;
    Ok(if verdict == "PASS" { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// son
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SonConfigEcho {
    n: usize,
    action: String,
    seed: u64,
    out: String,
}

fn cmd_son(mut args: SonArgs) -> Result<i32, CliError> {
    let fc = load_file_config(&args.common)?;
    apply_common(&fc, &mut args.common);
    apply_integrator(&fc, &mut args.integrator);
    if let Some(v) = fc.n {
        args.n = v;
    }
    if let Some(x0) = &fc.x0 {
        args.x0 = Some(x0.clone());
    }
    if let Some(a) = fc.amplitude {
        args.amplitude = a;
    }

    if args.n < 3 {
        return Err(usage(format!(
            "--n {} is not supported; n must be >= 3",
            args.n
        )));
    }
    let basis = build_nice_basis(args.n).map_err(failed)?;
    let echo = |action: &str, args: &SonArgs| SonConfigEcho {
        n: args.n,
        action: action.into(),
        seed: args.common.seed,
        out: args.common.out.display().to_string(),
    };

    match args.action {
        SonAction::Dump => {
            #[derive(Serialize)]
            struct DumpReport {
                version: &'static str,
                command: &'static str,
                config: SonConfigEcho,
                dim: usize,
                norm_factor: f64,
                nonzero_constants: usize,
                simple: bool,
                csv: String,
            }
            write_out(
                &args.common.out,
                "son_constants.csv",
                &output::constants_csv(&basis),
            )?;
            let report = DumpReport {
                version: VERSION,
                command: "son-dump",
                config: echo("dump", &args),
                dim: basis.dim(),
                norm_factor: basis.norm_factor(),
                nonzero_constants: basis.triples().len(),
                simple: basis.is_simple(),
                csv: "son_constants.csv".into(),
            };
            emit_report(&args.common.out, "son_dump.json", &report)?;
            Ok(0)
        }
        SonAction::Jacobian => {
            #[derive(Serialize)]
            struct JacobianReport {
                version: &'static str,
                command: &'static str,
                config: SonConfigEcho,
                dim: usize,
                diagonal: Vec<f64>,
                max_deviation_from_minus_one: f64,
                fd_max_error: f64,
            }
            let diag = son_jacobian_at_killing(&basis);
            let max_dev = diag.iter().fold(0.0_f64, |m, &v| m.max((v + 1.0).abs()));
            let ones = vec![1.0; basis.dim()];
            let fd = son_jacobian_fd(&basis, &ones, 1e-6).map_err(failed)?;
            let mut fd_err = 0.0_f64;
            for k in 0..basis.dim() {
                for m in 0..basis.dim() {
                    let expect = if k == m { diag[k] } else { 0.0 };
                    fd_err = fd_err.max((fd[k * basis.dim() + m] - expect).abs());
                }
            }
            let report = JacobianReport {
                version: VERSION,
                command: "son-jacobian",
                config: echo("jacobian", &args),
                dim: basis.dim(),
                diagonal: diag,
                max_deviation_from_minus_one: max_dev,
                fd_max_error: fd_err,
            };
            emit_report(&args.common.out, "son_jacobian.json", &report)?;
            Ok(0)
        }
        SonAction::Harmonicity => {
            #[derive(Serialize)]
            struct HarmonicityReport {
                version: &'static str,
                command: &'static str,
                config: SonConfigEcho,
                dim: usize,
                metrics_tested: usize,
                max_residual: f64,
            }
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.common.seed);
            let mut max_res = 0.0_f64;
            let mut tested = 0;
            if let Some(text) = &args.x0 {
                let x = parse_x0(text, basis.dim())?;
                max_res = max_res.max(harmonicity_residual(&basis, &x).map_err(failed)?);
                tested += 1;
            } else {
                for _ in 0..5 {
                    let x: Vec<f64> = (0..basis.dim()).map(|_| rng.gen_range(0.2..5.0)).collect();
                    max_res = max_res.max(harmonicity_residual(&basis, &x).map_err(failed)?);
                    tested += 1;
                }
            }
            let report = HarmonicityReport {
                version: VERSION,
                command: "son-harmonicity",
                config: echo("harmonicity", &args),
                dim: basis.dim(),
                metrics_tested: tested,
                max_residual: max_res,
            };
            emit_report(&args.common.out, "son_harmonicity.json", &report)?;
            Ok(0)
        }
        SonAction::Simulate => {
            #[derive(Serialize)]
            struct SonSimulateReport {
                version: &'static str,
                command: &'static str,
                config: SonConfigEcho,
                dim: usize,
                x0: Vec<f64>,
                verdict: String,
                t_end: f64,
                distance_to_killing: f64,
                final_rhs_norm: f64,
                trajectory_csv: String,
            }
            use rand::{Rng, SeedableRng};
            let x0 = match &args.x0 {
                Some(text) => parse_x0(text, basis.dim())?,
                None => {
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.common.seed);
                    (0..basis.dim())
                        .map(|_| 1.0 + rng.gen_range(-args.amplitude..=args.amplitude))
                        .collect()
                }
            };
            let cfg = args.integrator.to_config();
            let traj: Trajectory = match son_integrate(&basis, &x0, &cfg) {
                Ok(t) => t,
                Err(FlowError::InvalidInitialCondition(e)) => {
                    return Err(usage(format!("invalid --x0: {e}")))
                }
                Err(e) => return Err(failed(e)),
            };
            write_out(
                &args.common.out,
                "son_trajectory.csv",
                &output::son_trajectory_csv(&traj),
            )?;
            let ones = vec![1.0; basis.dim()];
            let end = traj.last();
            let report = SonSimulateReport {
                version: VERSION,
                command: "son-simulate",
                config: echo("simulate", &args),
                dim: basis.dim(),
                x0,
                verdict: traj.verdict.to_string(),
                t_end: end.t,
                distance_to_killing: grf_core::math::inf_dist(&end.state, &ones),
                final_rhs_norm: end.rhs_norm,
                trajectory_csv: "son_trajectory.csv".into(),
            };
            emit_report(&args.common.out, "son_simulate.json", &report)?;
            Ok(verdict_exit(traj.verdict))
        }
    }
}
