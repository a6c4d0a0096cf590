//! CSV writers. Floats are printed with 17 significant digits so that
//! identical runs produce byte-identical files.

use grf_core::flow::{PortraitGrid, Trajectory};
use grf_core::son::NiceBasis;
use std::fmt::Write as _;

/// Cap on emitted trajectory rows; longer runs are thinned (first and last
/// samples always kept).
pub const MAX_CSV_ROWS: usize = 10_000;

/// 17 significant digits, scientific.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn thin_indices(len: usize, max_rows: usize) -> Vec<usize> {
    if len <= max_rows {
        return (0..len).collect();
    }
    let stride = len.div_ceil(max_rows);
    let mut idx: Vec<usize> = (0..len).step_by(stride).collect();
    if *idx.last().unwrap() != len - 1 {
        idx.push(len - 1);
    }
    idx
}

/// Trajectory of the three-coefficient flow:
/// `t,x1,x2,x3,rhs_norm,lyapunov` with the last column empty when the run
/// does not carry the Lyapunov diagnostic.
pub fn aligned_trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,x1,x2,x3,rhs_norm,lyapunov\n");
    for i in thin_indices(traj.samples.len(), MAX_CSV_ROWS) {
        let s = &traj.samples[i];
        let lyap = s.lyapunov.map(fmt_f64).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(s.t),
            fmt_f64(s.state[0]),
            fmt_f64(s.state[1]),
            fmt_f64(s.state[2]),
            fmt_f64(s.rhs_norm),
            lyap
        );
    }
    out
}

/// Trajectory of the SO(n) flow: `t,x1..x_dim,rhs_norm`.
pub fn son_trajectory_csv(traj: &Trajectory) -> String {
    let dim = traj.samples.first().map_or(0, |s| s.state.len());
    let mut out = String::from("t");
    for k in 1..=dim {
        let _ = write!(out, ",x{k}");
    }
    out.push_str(",rhs_norm\n");
    for i in thin_indices(traj.samples.len(), MAX_CSV_ROWS) {
        let s = &traj.samples[i];
        let _ = write!(out, "{}", fmt_f64(s.t));
        for v in &s.state {
            let _ = write!(out, ",{}", fmt_f64(*v));
        }
        let _ = writeln!(out, ",{}", fmt_f64(s.rhs_norm));
    }
    out
}

/// Portrait arrows: `u,v,du,dv` (normalized directions).
pub fn portrait_csv(grid: &PortraitGrid) -> String {
    let mut out = String::from("u,v,du,dv\n");
    for a in &grid.arrows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(a.u),
            fmt_f64(a.v),
            fmt_f64(a.du),
            fmt_f64(a.dv)
        );
    }
    out
}

/// Nonzero structure constants `i,j,k,c` (1-based indices, `i < j`) in the
/// Killing-orthonormal basis.
pub fn constants_csv(basis: &NiceBasis) -> String {
    let mut out = String::from("i,j,k,c\n");
    for t in basis.triples() {
        let _ = writeln!(out, "{},{},{},{}", t.i + 1, t.j + 1, t.k + 1, fmt_f64(t.c));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_has_17_digits() {
        assert_eq!(fmt_f64(2.5), "2.5000000000000000e0");
        assert_eq!(fmt_f64(-1.0 / 3.0), "-3.3333333333333331e-1");
    }

    #[test]
    fn thinning_keeps_ends() {
        let idx = thin_indices(25_000, MAX_CSV_ROWS);
        assert!(idx.len() <= MAX_CSV_ROWS + 1);
        assert_eq!(*idx.first().unwrap(), 0);
        assert_eq!(*idx.last().unwrap(), 24_999);
        assert_eq!(thin_indices(3, MAX_CSV_ROWS), vec![0, 1, 2]);
    }

    #[test]
    fn constants_dump_has_header_and_rows() {
        let b = grf_core::son::build_nice_basis(3).unwrap();
        let csv = constants_csv(&b);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "i,j,k,c");
        assert_eq!(lines.len(), 1 + b.triples().len());
    }
}
