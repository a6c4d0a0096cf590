//! Flow integration, invariant-subspace checks and phase-portrait sampling.
//!
//! The integrator is an embedded Dormand-Prince 5(4) pair with mixed
//! absolute/relative step control. Positivity of the metric coefficients is
//! enforced by event detection, never by clamping: a trajectory that crosses
//! the positivity floor terminates with [`Verdict::EscapedPositivity`].
//! Convergence to the Bismut Ricci flat point is detected either by proximity
//! to the analytic fixed point or by the right-hand side stalling below a
//! threshold (for parameters where no fixed point is known a priori).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::curvature::{grf_rhs_closed, DomainError};
use crate::math::{abs, hypot, inf_dist, inf_norm, pow, sqrt};
use crate::space::{AlignedParams, DiagonalMetric};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Step-size and termination controls for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_time: f64,
    pub min_step: f64,
    /// Any state coordinate at or below this value terminates the run.
    pub positivity_floor: f64,
    /// Max-norm radius around the analytic fixed point that counts as
    /// converged.
    pub convergence_radius: f64,
    /// Right-hand-side max-norm below which the flow counts as stalled at a
    /// fixed point.
    pub stall_rhs_norm: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_time: 500.0,
            min_step: 1e-12,
            positivity_floor: 1e-8,
            convergence_radius: 1e-9,
            stall_rhs_norm: 1e-12,
        }
    }
}

impl IntegratorConfig {
    fn validate(&self) -> Result<(), FlowError> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_time > 0.0
            && self.min_step > 0.0
            && self.min_step < 1.0
            && self.positivity_floor > 0.0
            && self.convergence_radius > 0.0
            && self.stall_rhs_norm > 0.0;
        if ok {
            Ok(())
        } else {
            Err(FlowError::Config(
                "integrator tolerances must be positive and min_step < 1",
            ))
        }
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ConvergedToBrf,
    EscapedPositivity,
    MaxTimeReached,
    StepUnderflow,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::ConvergedToBrf => "ConvergedToBRF",
            Verdict::EscapedPositivity => "EscapedPositivity",
            Verdict::MaxTimeReached => "MaxTimeReached",
            Verdict::StepUnderflow => "StepUnderflow",
        };
        f.write_str(s)
    }
}

/// One accepted integration step.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<f64>,
    pub rhs_norm: f64,
    /// Lyapunov value, populated only when the run qualifies for the global
    /// stability diagnostics (`c1 = 2`, `κ1 = κ2`, `λ > 0`).
    pub lyapunov: Option<f64>,
}

/// Time-ordered accepted steps plus the terminating verdict. The first sample
/// is always the initial condition at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub verdict: Verdict,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectory holds at least the initial sample")
    }

    /// Largest increase of the Lyapunov value over one accepted step, or
    /// `None` when the diagnostic was not recorded. Non-positive values mean
    /// the value never increased.
    pub fn max_lyapunov_increase(&self) -> Option<f64> {
        let vals: Vec<f64> = self.samples.iter().filter_map(|s| s.lyapunov).collect();
        if vals.len() != self.samples.len() || vals.len() < 2 {
            return None;
        }
        Some(
            vals.windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::NEG_INFINITY, f64::max),
        )
    }
}

/// Integration or precondition failure.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowError {
    /// A state outside the positive cone was fed to the flow field.
    Domain(DomainError),
    /// The initial condition is degenerate.
    InvalidInitialCondition(DomainError),
    Config(&'static str),
    /// The requested plane is only defined when `κ1 = κ2`.
    PlaneRequiresEqualKappas,
}

impl From<DomainError> for FlowError {
    fn from(e: DomainError) -> Self {
        FlowError::Domain(e)
    }
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::Domain(e) => write!(f, "{e}"),
            FlowError::InvalidInitialCondition(e) => write!(f, "invalid initial condition: {e}"),
            FlowError::Config(s) => f.write_str(s),
            FlowError::PlaneRequiresEqualKappas => {
                f.write_str("plane x1 = (c1-1) x2 requires kappa1 = kappa2")
            }
        }
    }
}

// Dormand-Prince 5(4) tableau. The last A row equals the 5th-order weights,
// so the 7th stage is the FSAL evaluation at the proposed point. The stage
// times are not needed: the flow field is autonomous.
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// difference between the 5th- and 4th-order weights
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MAX_STEPS: usize = 10_000_000;

type Rhs<'a> = &'a dyn Fn(&[f64], &mut [f64]) -> Result<(), DomainError>;
type LyapFn<'a> = &'a dyn Fn(&[f64]) -> f64;

/// Integrates `x' = rhs(x)` from `x0` under the termination rules of `cfg`.
///
/// `target`, when given, is the analytic fixed point used for the proximity
/// test; `lyapunov` is an optional per-sample diagnostic.
pub(crate) fn integrate_raw(
    rhs: Rhs<'_>,
    x0: &[f64],
    target: Option<&[f64]>,
    lyapunov: Option<LyapFn<'_>>,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, FlowError> {
    cfg.validate()?;
    let dim = x0.len();
    for (i, &v) in x0.iter().enumerate() {
        let ok = v.is_finite() && v > cfg.positivity_floor;
        if !ok {
            return Err(FlowError::InvalidInitialCondition(DomainError {
                index: i + 1,
                value: v,
            }));
        }
    }

    let mut y = x0.to_vec();
    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; dim]).collect();
    let mut ystage = vec![0.0; dim];
    let mut ynew = vec![0.0; dim];

    rhs(&y, &mut k[0]).map_err(FlowError::InvalidInitialCondition)?;

    let mut samples = Vec::new();
    let push = |samples: &mut Vec<Sample>, t: f64, y: &[f64], rhs_norm: f64| {
        samples.push(Sample {
            t,
            state: y.to_vec(),
            rhs_norm,
            lyapunov: lyapunov.map(|v| v(y)),
        });
    };

    let mut t = 0.0;
    let mut rhs_norm = inf_norm(&k[0]);
    push(&mut samples, t, &y, rhs_norm);

    let converged = |y: &[f64], rhs_norm: f64| -> bool {
        rhs_norm <= cfg.stall_rhs_norm
            || target.is_some_and(|x0| inf_dist(y, x0) <= cfg.convergence_radius)
    };
    if converged(&y, rhs_norm) {
        return Ok(Trajectory {
            samples,
            verdict: Verdict::ConvergedToBrf,
        });
    }

    // initial step from the crude curvature-free heuristic
    let mut h = (0.01 * inf_norm(&y).max(1.0) / rhs_norm.max(1e-10))
        .min(0.1 * cfg.max_time)
        .max(1e-10);

    let verdict = 'outer: {
        for _ in 0..MAX_STEPS {
            let clipped = t + h >= cfg.max_time;
            if clipped {
                h = cfg.max_time - t;
            }

            // stages 2..=7; the 7th stage state is the proposed point itself
            let mut failed = false;
            for s in 0..6 {
                for i in 0..dim {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s + 1) {
                        acc += DP_A[s][j] * kj[i];
                    }
                    ystage[i] = y[i] + h * acc;
                }
                if s == 5 {
                    ynew.copy_from_slice(&ystage);
                }
                if rhs(&ystage, &mut k[s + 1]).is_err() {
                    failed = true;
                    break;
                }
            }
            if failed {
                h *= 0.5;
                if h < cfg.min_step {
                    break 'outer Verdict::StepUnderflow;
                }
                continue;
            }

            // Embedded error estimate against mixed tolerance. Near a known
            // fixed point the scale follows the distance to it, so the orbit
            // tracks the decaying deviation itself and can actually settle
            // inside `convergence_radius`; with the plain `|y|`-relative
            // scale the orbit would hover at `rel_tol * |y|` forever.
            let dev = target.map(|x0| inf_dist(&y, x0)).unwrap_or(f64::INFINITY);
            let mut err_sq = 0.0;
            for i in 0..dim {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += DP_E[j] * kj[i];
                }
                let mag = abs(y[i]).max(abs(ynew[i])).min(dev);
                let sc = cfg.abs_tol + cfg.rel_tol * mag;
                let r = h * e / sc;
                err_sq += r * r;
            }
            let err = sqrt(err_sq / dim as f64);

            // a non-finite estimate (stage overflow) must reject, not accept
            let accepted = err <= 1.0;
            if !accepted {
                h *= (0.9 * pow(err, -0.2)).max(0.2);
                if h < cfg.min_step {
                    break 'outer Verdict::StepUnderflow;
                }
                continue;
            }

            // accept; the last stage evaluation becomes the next first stage
            t += h;
            y.copy_from_slice(&ynew);
            k.swap(0, 6);
            rhs_norm = inf_norm(&k[0]);
            push(&mut samples, t, &y, rhs_norm);

            if y.iter().any(|&v| v <= cfg.positivity_floor) {
                break 'outer Verdict::EscapedPositivity;
            }
            if converged(&y, rhs_norm) {
                break 'outer Verdict::ConvergedToBrf;
            }
            if clipped {
                break 'outer Verdict::MaxTimeReached;
            }
            h *= (0.9 * pow(err.max(1e-16), -0.2)).clamp(0.2, 5.0);
        }
        // iteration budget exhausted
        Verdict::MaxTimeReached
    };

    Ok(Trajectory { samples, verdict })
}

/// Integrates the diagonal flow from `g0`, detecting convergence to the
/// Bismut Ricci flat metric of `params`.
pub fn integrate(
    params: &AlignedParams,
    g0: &DiagonalMetric,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, FlowError> {
    let rhs = aligned_rhs(params);
    let target = params.brf_fixed_point().as_array();
    let lam = params.lambda;
    let lyap = move |x: &[f64]| crate::stability::lyapunov_value_unchecked(lam, x);
    let lyap_ref: Option<LyapFn<'_>> =
        if params.c1 == 2.0 && params.kappa1 == params.kappa2 && params.lambda > 0.0 {
            Some(&lyap)
        } else {
            None
        };
    integrate_raw(&rhs, &g0.as_array(), Some(&target), lyap_ref, cfg)
}

fn aligned_rhs(
    params: &AlignedParams,
) -> impl Fn(&[f64], &mut [f64]) -> Result<(), DomainError> + '_ {
    move |x: &[f64], dx: &mut [f64]| {
        let g = DiagonalMetric::new(x[0], x[1], x[2]);
        let f = grf_rhs_closed(params, &g)?;
        dx.copy_from_slice(&f.as_array());
        Ok(())
    }
}

/// The two flow-invariant 2-dimensional slices used for phase portraits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    /// `x3 = c1/(c1-1)`, coordinates `(u, v) = (x1, x2)`. Invariant for all
    /// admissible parameters.
    X3Fixed,
    /// `x1 = (c1-1) x2`, coordinates `(u, v) = (x2, x3)`. Requires
    /// `κ1 = κ2`; an exact invariant plane of the flow for `c1 = 2`, and the
    /// section through the fixed point used for portraits otherwise.
    X1PropX2,
}

impl Plane {
    pub fn name(&self) -> &'static str {
        match self {
            Plane::X3Fixed => "x3-fixed",
            Plane::X1PropX2 => "x1-prop-x2",
        }
    }

    pub fn requires_equal_kappas(&self) -> bool {
        matches!(self, Plane::X1PropX2)
    }

    /// Lifts plane coordinates to a full metric.
    pub fn embed(&self, p: &AlignedParams, u: f64, v: f64) -> [f64; 3] {
        match self {
            Plane::X3Fixed => [u, v, p.c1 / (p.c1 - 1.0)],
            Plane::X1PropX2 => [(p.c1 - 1.0) * u, u, v],
        }
    }

    /// In-plane components of a flow vector.
    pub fn project(&self, f: &[f64; 3]) -> [f64; 2] {
        match self {
            Plane::X3Fixed => [f[0], f[1]],
            Plane::X1PropX2 => [f[1], f[2]],
        }
    }

    /// The Bismut Ricci flat point in plane coordinates.
    pub fn fixed_point(&self, p: &AlignedParams) -> [f64; 2] {
        let g0 = p.brf_fixed_point();
        match self {
            Plane::X3Fixed => [g0.x1, g0.x2],
            Plane::X1PropX2 => [g0.x2, g0.x3],
        }
    }

    /// Residual of the tangency identity at a point of the slice:
    /// `f3` for the `x3`-plane, `f1 - (c1-1) f2` for the proportional plane.
    pub fn tangency_residual(&self, p: &AlignedParams, u: f64, v: f64) -> Result<f64, FlowError> {
        let x = self.embed(p, u, v);
        let f = grf_rhs_closed(p, &DiagonalMetric::new(x[0], x[1], x[2]))?;
        Ok(match self {
            Plane::X3Fixed => abs(f.f3),
            Plane::X1PropX2 => abs(f.f1 - (p.c1 - 1.0) * f.f2),
        })
    }
}

/// Result of sampling the tangency residual over a subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceReport {
    pub plane: Plane,
    pub samples: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Evaluates the invariant-subspace tangency residual at `samples` random
/// points of the slice (coordinates drawn uniformly from `[0.2, 5]`).
pub fn check_invariant_subspace(
    params: &AlignedParams,
    plane: Plane,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<SubspaceReport, FlowError> {
    if plane.requires_equal_kappas() && params.kappa1 != params.kappa2 {
        return Err(FlowError::PlaneRequiresEqualKappas);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual = 0.0_f64;
    for _ in 0..samples {
        let u = rng.gen_range(0.2..5.0);
        let v = rng.gen_range(0.2..5.0);
        max_residual = max_residual.max(plane.tangency_residual(params, u, v)?);
    }
    Ok(SubspaceReport {
        plane,
        samples,
        max_residual,
        tol,
        pass: max_residual <= tol,
    })
}

/// Rectangular sampling grid for a portrait.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub nu: usize,
    pub nv: usize,
}

impl GridSpec {
    fn coord(lo: f64, hi: f64, i: usize, n: usize) -> f64 {
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * i as f64 / (n - 1) as f64
        }
    }
}

/// A normalized flow direction sampled at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arrow {
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
}

/// Sampled in-plane flow directions, with optional traced streamlines.
#[derive(Debug, Clone, PartialEq)]
pub struct PortraitGrid {
    pub plane: Plane,
    pub grid: GridSpec,
    pub arrows: Vec<Arrow>,
    pub streamlines: Vec<Vec<[f64; 2]>>,
}

/// Samples the in-plane flow directions on `grid`; when `trace` is set, a
/// streamline is integrated in-plane from every grid point.
pub fn portrait(
    params: &AlignedParams,
    plane: Plane,
    grid: &GridSpec,
    trace: bool,
    cfg: &IntegratorConfig,
) -> Result<PortraitGrid, FlowError> {
    if plane.requires_equal_kappas() && params.kappa1 != params.kappa2 {
        return Err(FlowError::PlaneRequiresEqualKappas);
    }
    let mut arrows = Vec::with_capacity(grid.nu * grid.nv);
    let mut streamlines = Vec::new();
    for iu in 0..grid.nu {
        let u = GridSpec::coord(grid.u_min, grid.u_max, iu, grid.nu);
        for iv in 0..grid.nv {
            let v = GridSpec::coord(grid.v_min, grid.v_max, iv, grid.nv);
            let x = plane.embed(params, u, v);
            let f = grf_rhs_closed(params, &DiagonalMetric::new(x[0], x[1], x[2]))?;
            let [du, dv] = plane.project(&f.as_array());
            let n = hypot(du, dv);
            let (du, dv) = if n > 0.0 {
                (du / n, dv / n)
            } else {
                (0.0, 0.0)
            };
            arrows.push(Arrow { u, v, du, dv });
            if trace {
                let traj = trace_streamline(params, plane, [u, v], cfg)?;
                streamlines.push(
                    traj.samples
                        .iter()
                        .map(|s| [s.state[0], s.state[1]])
                        .collect(),
                );
            }
        }
    }
    Ok(PortraitGrid {
        plane,
        grid: *grid,
        arrows,
        streamlines,
    })
}

/// Integrates the projected in-plane field from `start` until it converges to
/// the in-plane fixed point or another termination rule fires.
pub fn trace_streamline(
    params: &AlignedParams,
    plane: Plane,
    start: [f64; 2],
    cfg: &IntegratorConfig,
) -> Result<Trajectory, FlowError> {
    if plane.requires_equal_kappas() && params.kappa1 != params.kappa2 {
        return Err(FlowError::PlaneRequiresEqualKappas);
    }
    let rhs = move |uv: &[f64], duv: &mut [f64]| -> Result<(), DomainError> {
        let x = plane.embed(params, uv[0], uv[1]);
        let f = grf_rhs_closed(params, &DiagonalMetric::new(x[0], x[1], x[2]))?;
        let pr = plane.project(&f.as_array());
        duv.copy_from_slice(&pr);
        Ok(())
    };
    let target = plane.fixed_point(params);
    integrate_raw(&rhs, &start, Some(&target), None, cfg)
}

/// Outcome of the qualitative sink check on a portrait grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkReport {
    pub plane: Plane,
    pub streamlines: usize,
    pub converged: usize,
    /// Largest final distance to the in-plane fixed point.
    pub max_final_distance: f64,
    /// Largest observed retreat factor `d_j / min_{i<j} d_i`; a value of 1
    /// means the distance never increased along any streamline.
    pub max_backslide: f64,
    pub pass: bool,
}

/// Verifies the sink property of the in-plane fixed point on a grid of
/// streamline seeds: every streamline must converge, and it must fall through
/// a `10%`-shrinking sequence of neighborhoods of the fixed point without
/// retreating out of one already entered (a backslide factor above `1/0.9`
/// would step back out of the previous neighborhood of the sequence).
pub fn sink_certificate(
    params: &AlignedParams,
    plane: Plane,
    grid: &GridSpec,
    tol_final: f64,
    cfg: &IntegratorConfig,
) -> Result<SinkReport, FlowError> {
    let fp = plane.fixed_point(params);
    let mut report = SinkReport {
        plane,
        streamlines: 0,
        converged: 0,
        max_final_distance: 0.0,
        max_backslide: 1.0,
        pass: true,
    };
    for iu in 0..grid.nu {
        let u = GridSpec::coord(grid.u_min, grid.u_max, iu, grid.nu);
        for iv in 0..grid.nv {
            let v = GridSpec::coord(grid.v_min, grid.v_max, iv, grid.nv);
            let traj = trace_streamline(params, plane, [u, v], cfg)?;
            report.streamlines += 1;
            if traj.verdict == Verdict::ConvergedToBrf {
                report.converged += 1;
            }
            let mut running_min = f64::INFINITY;
            let mut dist = 0.0;
            for s in &traj.samples {
                dist = hypot(s.state[0] - fp[0], s.state[1] - fp[1]);
                if dist > running_min && running_min > 0.0 {
                    report.max_backslide = report.max_backslide.max(dist / running_min);
                }
                running_min = running_min.min(dist);
            }
            report.max_final_distance = report.max_final_distance.max(dist);
        }
    }
    report.pass = report.streamlines == report.converged
        && report.max_final_distance <= tol_final
        && report.max_backslide <= 1.0 / 0.9;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rel_residual;

    fn params(c1: f64, lam: f64, k1: f64, k2: f64) -> AlignedParams {
        AlignedParams::new(c1, lam, k1, k2).unwrap()
    }

    #[test]
    fn starting_at_fixed_point_converges_immediately() {
        let p = params(2.0, 0.25, 0.5, 0.5);
        let traj = integrate(&p, &p.brf_fixed_point(), &IntegratorConfig::default()).unwrap();
        assert_eq!(traj.verdict, Verdict::ConvergedToBrf);
        assert_eq!(traj.samples.len(), 1);
    }

    #[test]
    fn local_convergence_for_c1_two() {
        let p = params(2.0, 0.25, 0.5, 0.5);
        let cfg = IntegratorConfig::default();
        let traj = integrate(&p, &DiagonalMetric::new(1.1, 0.9, 2.2), &cfg).unwrap();
        assert_eq!(traj.verdict, Verdict::ConvergedToBrf);
        let end = traj.last();
        assert!(inf_dist(&end.state, &[1.0, 1.0, 2.0]) <= 1e-6);
        // the stopping rule itself: stalled right-hand side or inside the
        // convergence radius
        assert!(
            end.rhs_norm <= cfg.stall_rhs_norm
                || inf_dist(&end.state, &[1.0, 1.0, 2.0]) <= cfg.convergence_radius
        );
        // Lyapunov diagnostics recorded and never increasing; strictly
        // decreasing while still away from the fixed point
        let worst = traj.max_lyapunov_increase().unwrap();
        assert!(worst <= 1e-9, "V increased by {worst}");
        for w in traj.samples.windows(2) {
            assert!(w[1].t > w[0].t, "sample times must be strictly increasing");
            if inf_dist(&w[0].state, &[1.0, 1.0, 2.0]) > 1e-6 {
                assert!(w[1].lyapunov.unwrap() < w[0].lyapunov.unwrap());
            }
        }
    }

    #[test]
    fn bad_integrator_config_is_rejected() {
        let p = params(2.0, 0.25, 0.5, 0.5);
        for cfg in [
            IntegratorConfig {
                rel_tol: 0.0,
                ..IntegratorConfig::default()
            },
            IntegratorConfig {
                min_step: 2.0,
                ..IntegratorConfig::default()
            },
            IntegratorConfig {
                max_time: -1.0,
                ..IntegratorConfig::default()
            },
        ] {
            assert!(matches!(
                integrate(&p, &p.brf_fixed_point(), &cfg),
                Err(FlowError::Config(_))
            ));
        }
    }

    #[test]
    fn local_convergence_for_catalog_space() {
        let p = params(10.0 / 7.0, 0.25, 0.5, 0.5);
        let g0 = p.brf_fixed_point();
        let start = DiagonalMetric::new(g0.x1 + 0.01, g0.x2 - 0.01, g0.x3 + 0.01);
        let traj = integrate(&p, &start, &IntegratorConfig::default()).unwrap();
        assert_eq!(traj.verdict, Verdict::ConvergedToBrf);
        assert!(inf_dist(&traj.last().state, &g0.as_array()) <= 1e-6);
        // not a c1 = 2 run: no Lyapunov column
        assert!(traj.samples[0].lyapunov.is_none());
    }

    #[test]
    fn invalid_initial_condition_is_an_error() {
        let p = params(2.0, 0.25, 0.5, 0.5);
        let cfg = IntegratorConfig::default();
        assert!(matches!(
            integrate(&p, &DiagonalMetric::new(-1.0, 1.0, 2.0), &cfg),
            Err(FlowError::InvalidInitialCondition(_))
        ));
    }

    #[test]
    fn toy_field_hits_positivity_floor() {
        // x' = -1 crosses zero in finite time
        let rhs = |_: &[f64], dx: &mut [f64]| {
            dx[0] = -1.0;
            Ok(())
        };
        let cfg = IntegratorConfig {
            max_time: 10.0,
            ..IntegratorConfig::default()
        };
        let traj = integrate_raw(&rhs, &[0.5], None, None, &cfg).unwrap();
        assert_eq!(traj.verdict, Verdict::EscapedPositivity);
        assert!(traj.last().state[0] <= cfg.positivity_floor * 2.0);
    }

    #[test]
    fn toy_field_reaches_max_time() {
        let rhs = |x: &[f64], dx: &mut [f64]| {
            dx[0] = x[0];
            Ok(())
        };
        let cfg = IntegratorConfig {
            max_time: 1.0,
            ..IntegratorConfig::default()
        };
        let traj = integrate_raw(&rhs, &[1.0], None, None, &cfg).unwrap();
        assert_eq!(traj.verdict, Verdict::MaxTimeReached);
        let end = traj.last();
        assert!(abs(end.t - 1.0) < 1e-12);
        // e^1 to integrator accuracy
        assert!(rel_residual(end.state[0], core::f64::consts::E) < 1e-7);
    }

    #[test]
    fn explosive_field_rejects_instead_of_accepting_nan() {
        // stages overflow to infinity for any reasonable step; the error
        // estimate goes non-finite and the step must be rejected until the
        // step size underflows, never emitting a non-finite sample
        let rhs = |x: &[f64], dx: &mut [f64]| {
            dx[0] = 1e300 * x[0];
            Ok(())
        };
        let cfg = IntegratorConfig { max_time: 1.0, ..IntegratorConfig::default() };
        let traj = integrate_raw(&rhs, &[1.0], None, None, &cfg).unwrap();
        assert_eq!(traj.verdict, Verdict::StepUnderflow);
        for s in &traj.samples {
            assert!(s.state.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn toy_field_step_underflow() {
        // rhs fails for x < 0.4: the step halves until it underflows
        let rhs = |x: &[f64], dx: &mut [f64]| {
            if x[0] < 0.4 {
                return Err(DomainError {
                    index: 1,
                    value: x[0],
                });
            }
            dx[0] = -1.0;
            Ok(())
        };
        let cfg = IntegratorConfig {
            max_time: 10.0,
            ..IntegratorConfig::default()
        };
        let traj = integrate_raw(&rhs, &[0.5], None, None, &cfg).unwrap();
        assert_eq!(traj.verdict, Verdict::StepUnderflow);
    }

    #[test]
    fn integrator_self_consistency_under_tolerance_halving() {
        let p = params(2.0, 0.25, 0.5, 0.5);
        let start = DiagonalMetric::new(3.0, 0.4, 5.0);
        let cfg = IntegratorConfig::default();
        let tight = IntegratorConfig {
            rel_tol: cfg.rel_tol / 2.0,
            ..cfg
        };
        let a = integrate(&p, &start, &cfg).unwrap();
        let b = integrate(&p, &start, &tight).unwrap();
        assert_eq!(a.verdict, Verdict::ConvergedToBrf);
        assert_eq!(b.verdict, Verdict::ConvergedToBrf);
        assert!(inf_dist(&a.last().state, &b.last().state) < 1e-7);
    }

    #[test]
    fn x3_plane_is_exactly_invariant() {
        for &(c1, lam, k1, k2) in &[
            (1.2, 0.0, 0.5, 0.3),
            (10.0 / 7.0, 0.25, 0.5, 0.5),
            (1.9, 0.3, 0.1, 0.2),
        ] {
            let p = params(c1, lam, k1, k2);
            let rep = check_invariant_subspace(&p, Plane::X3Fixed, 200, 1e-11, 1).unwrap();
            assert!(rep.pass, "residual {}", rep.max_residual);
        }
    }

    #[test]
    fn proportional_plane_invariant_at_c1_two() {
        let p = params(2.0, 0.25, 0.37, 0.37);
        let rep = check_invariant_subspace(&p, Plane::X1PropX2, 200, 1e-11, 2).unwrap();
        assert!(rep.pass, "residual {}", rep.max_residual);
    }

    #[test]
    fn proportional_plane_requires_equal_kappas() {
        let p = params(2.0, 0.25, 0.4, 0.5);
        assert!(matches!(
            check_invariant_subspace(&p, Plane::X1PropX2, 10, 1e-11, 3),
            Err(FlowError::PlaneRequiresEqualKappas)
        ));
    }

    #[test]
    fn trajectory_started_in_x3_plane_stays_there() {
        let p = params(10.0 / 7.0, 0.25, 0.5, 0.5);
        let s = p.c1 / (p.c1 - 1.0);
        let traj = integrate(
            &p,
            &DiagonalMetric::new(1.6, 1.9, s),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(traj.verdict, Verdict::ConvergedToBrf);
        for sample in &traj.samples {
            assert!(abs(sample.state[2] - s) <= 1e-6);
        }
    }

    #[test]
    fn trajectory_started_in_diagonal_plane_stays_there_for_c1_two() {
        let p = params(2.0, 0.25, 0.5, 0.5);
        let traj = integrate(
            &p,
            &DiagonalMetric::new(1.7, 1.7, 3.1),
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(traj.verdict, Verdict::ConvergedToBrf);
        for sample in &traj.samples {
            assert!(abs(sample.state[0] - sample.state[1]) <= 1e-6);
        }
    }

    #[test]
    fn empty_grid_gives_empty_portrait() {
        let p = params(10.0 / 7.0, 0.25, 0.5, 0.5);
        let grid = GridSpec {
            u_min: 0.2,
            u_max: 4.0,
            v_min: 0.2,
            v_max: 4.0,
            nu: 0,
            nv: 0,
        };
        let pg = portrait(
            &p,
            Plane::X3Fixed,
            &grid,
            false,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert!(pg.arrows.is_empty() && pg.streamlines.is_empty());
    }

    #[test]
    fn portrait_arrows_are_normalized_and_in_plane() {
        let p = params(10.0 / 7.0, 0.25, 0.5, 0.5);
        let grid = GridSpec {
            u_min: 0.2,
            u_max: 4.0,
            v_min: 0.2,
            v_max: 4.0,
            nu: 7,
            nv: 7,
        };
        let pg = portrait(
            &p,
            Plane::X3Fixed,
            &grid,
            false,
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(pg.arrows.len(), 49);
        for a in &pg.arrows {
            let n = hypot(a.du, a.dv);
            assert!(n == 0.0 || abs(n - 1.0) < 1e-12);
        }
    }

    #[test]
    fn sink_certificate_small_grid() {
        let p = params(10.0 / 7.0, 0.25, 0.5, 0.5);
        let grid = GridSpec {
            u_min: 0.2,
            u_max: 4.0,
            v_min: 0.2,
            v_max: 4.0,
            nu: 4,
            nv: 4,
        };
        for plane in [Plane::X3Fixed, Plane::X1PropX2] {
            let rep =
                sink_certificate(&p, plane, &grid, 1e-6, &IntegratorConfig::default()).unwrap();
            assert!(rep.pass, "{rep:?}");
            assert_eq!(rep.streamlines, 16);
        }
    }

    #[test]
    fn streamline_sinks_into_plane_fixed_point() {
        // proportional-plane slice for the catalog space: sink at (7/3, 10/3)
        let p = params(10.0 / 7.0, 0.25, 0.5, 0.5);
        let traj = trace_streamline(
            &p,
            Plane::X1PropX2,
            [2.0, 3.0],
            &IntegratorConfig::default(),
        )
        .unwrap();
        assert_eq!(traj.verdict, Verdict::ConvergedToBrf);
        let end = traj.last();
        assert!(abs(end.state[0] - 7.0 / 3.0) <= 1e-6);
        assert!(abs(end.state[1] - 10.0 / 3.0) <= 1e-6);
    }
}
