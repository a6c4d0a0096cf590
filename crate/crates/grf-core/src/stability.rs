//! Linear stability at the fixed point and the Lyapunov machinery of the
//! global-stability analysis for `c1 = 2`.
//!
//! The Lyapunov derivative `F` is computed as `∇V · f` — the single source of
//! truth. The expanded polynomial form survives only through the identity
//! `F = -(x1² g(x2,x3) + x2² g(x1,x3)) / (4 x1² x2² x3²)`, which the tests and
//! the scan tooling check against [`g_function`]. Sign analysis of `g` is by
//! dense sampling (Monte-Carlo, boundary-biased grids and a refinement cloud
//! around the analytic minimum), not by symbolic certification.

use alloc::vec::Vec;
use core::fmt;

use crate::curvature::{grf_rhs_closed, DomainError};
use crate::eigen::eigen3;
use crate::math::{abs, rel_residual, sq, sqrt};
use crate::space::{AlignedParams, DiagonalMetric};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Precondition or domain failure in the stability toolkit.
#[derive(Debug, Clone, PartialEq)]
pub enum StabilityError {
    Domain(DomainError),
    /// Finite-difference step must lie in `[1e-8, 1e-4]`.
    FdStepOutOfRange(f64),
    /// The Lyapunov function is positive definite only for `λ > 0`.
    LambdaNotPositive(f64),
    /// The global-stability machinery requires `c1 = 2` and `κ1 = κ2`.
    OutsideTheoremHypotheses(&'static str),
    /// Positivity scans require `λ ∈ (0, 1/2)`.
    LambdaOutsideScanRange(f64),
    /// Positivity scans require `κ ∈ (0, 1/2]`.
    KappaOutOfRange(f64),
    /// At least one sample is required.
    NoSamples,
}

impl From<DomainError> for StabilityError {
    fn from(e: DomainError) -> Self {
        StabilityError::Domain(e)
    }
}

impl fmt::Display for StabilityError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StabilityError::Domain(e) => write!(f, "{e}"),
            StabilityError::FdStepOutOfRange(h) => {
                write!(f, "finite-difference step h = {h:e} outside [1e-8, 1e-4]")
            }
            StabilityError::LambdaNotPositive(l) => {
                write!(f, "lambda = {l} must be positive for the Lyapunov function")
            }
            StabilityError::OutsideTheoremHypotheses(s) => {
                write!(f, "outside theorem hypotheses: {s}")
            }
            StabilityError::LambdaOutsideScanRange(l) => {
                write!(f, "lambda = {l} outside the scan range (0, 1/2)")
            }
            StabilityError::KappaOutOfRange(k) => {
                write!(f, "kappa = {k} outside (0, 1/2]")
            }
            StabilityError::NoSamples => f.write_str("at least one sample is required"),
        }
    }
}

// ---------------------------------------------------------------------------
// Linear stability
// ---------------------------------------------------------------------------

/// Stability classification of an equilibrium from its spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityVerdict {
    AsymptoticallyStable,
    Unstable,
    NonHyperbolic,
}

impl fmt::Display for StabilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StabilityVerdict::AsymptoticallyStable => "AsymptoticallyStable",
            StabilityVerdict::Unstable => "Unstable",
            StabilityVerdict::NonHyperbolic => "NonHyperbolic",
        };
        f.write_str(s)
    }
}

/// Jacobian, spectrum and verdict at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub jacobian: [[f64; 3]; 3],
    pub eigenvalues: [Complex64; 3],
    /// Closed-form eigenvalues, available at the fixed point.
    pub analytic_eigenvalues: Option<[f64; 3]>,
    pub hyperbolic: bool,
    pub verdict: StabilityVerdict,
}

/// Central-difference Jacobian of the closed-form flow field;
/// column `j` is `(f(g + h eⱼ) - f(g - h eⱼ)) / 2h`.
pub fn jacobian_fd(
    params: &AlignedParams,
    g: &DiagonalMetric,
    h: f64,
) -> Result<[[f64; 3]; 3], StabilityError> {
    if !(1e-8..=1e-4).contains(&h) {
        return Err(StabilityError::FdStepOutOfRange(h));
    }
    let x = g.as_array();
    let mut jac = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[j] += h;
        xm[j] -= h;
        let fp = grf_rhs_closed(params, &xp.into())?.as_array();
        let fm = grf_rhs_closed(params, &xm.into())?.as_array();
        for i in 0..3 {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}

/// The diagonal of `Df(g0)` in closed form: `(-1, 1-c1, c1(λ-1))`.
/// The off-diagonal entries vanish.
pub fn jacobian_analytic_at_fixed_point(params: &AlignedParams) -> [f64; 3] {
    [-1.0, 1.0 - params.c1, params.c1 * (params.lambda - 1.0)]
}

/// Classifies a spectrum. Real parts within `1e-7 · (1 + max |Re λ|)` of zero
/// count as zero, which makes the verdict agree between the closed-form and
/// finite-difference routes.
pub fn classify(eigenvalues: &[Complex64; 3]) -> (bool, StabilityVerdict) {
    let scale = eigenvalues.iter().fold(0.0_f64, |m, z| m.max(abs(z.re)));
    let eps = 1e-7 * (1.0 + scale);
    if eigenvalues.iter().any(|z| abs(z.re) <= eps) {
        (false, StabilityVerdict::NonHyperbolic)
    } else if eigenvalues.iter().all(|z| z.re < 0.0) {
        (true, StabilityVerdict::AsymptoticallyStable)
    } else {
        (true, StabilityVerdict::Unstable)
    }
}

/// Full spectrum report at the Bismut Ricci flat point: finite-difference
/// Jacobian, its eigenvalues, and the closed-form diagonal alongside.
pub fn spectrum_at_fixed_point(
    params: &AlignedParams,
    h: f64,
) -> Result<SpectrumReport, StabilityError> {
    let g0 = params.brf_fixed_point();
    let jacobian = jacobian_fd(params, &g0, h)?;
    let eigenvalues = eigen3(&jacobian);
    let (hyperbolic, verdict) = classify(&eigenvalues);
    Ok(SpectrumReport {
        jacobian,
        eigenvalues,
        analytic_eigenvalues: Some(jacobian_analytic_at_fixed_point(params)),
        hyperbolic,
        verdict,
    })
}

/// Spectrum report at an arbitrary point (no closed form available there).
pub fn spectrum_at(
    params: &AlignedParams,
    g: &DiagonalMetric,
    h: f64,
) -> Result<SpectrumReport, StabilityError> {
    let jacobian = jacobian_fd(params, g, h)?;
    let eigenvalues = eigen3(&jacobian);
    let (hyperbolic, verdict) = classify(&eigenvalues);
    Ok(SpectrumReport {
        jacobian,
        eigenvalues,
        analytic_eigenvalues: None,
        hyperbolic,
        verdict,
    })
}

// ---------------------------------------------------------------------------
// Lyapunov machinery (c1 = 2)
// ---------------------------------------------------------------------------

/// `V(x) = (λ/10 (x1-1)² + λ/10 (x2-1)² + (x3-2)²) / 2`, the Lyapunov
/// function of the globally stable case. Requires `λ > 0` (positive
/// definiteness).
pub fn lyapunov_value(lambda: f64, g: &DiagonalMetric) -> Result<f64, StabilityError> {
    let positive = lambda.is_finite() && lambda > 0.0;
    if !positive {
        return Err(StabilityError::LambdaNotPositive(lambda));
    }
    Ok(lyapunov_value_unchecked(lambda, &g.as_array()))
}

pub(crate) fn lyapunov_value_unchecked(lambda: f64, x: &[f64]) -> f64 {
    (lambda / 10.0 * sq(x[0] - 1.0) + lambda / 10.0 * sq(x[1] - 1.0) + sq(x[2] - 2.0)) / 2.0
}

/// Flow derivative of the Lyapunov function, computed as `∇V · f` with the
/// closed-form field. Preconditions: `c1 = 2`, `κ1 = κ2`, `λ > 0`.
pub fn lyapunov_derivative(
    params: &AlignedParams,
    g: &DiagonalMetric,
) -> Result<f64, StabilityError> {
    if params.c1 != 2.0 {
        return Err(StabilityError::OutsideTheoremHypotheses("c1 must equal 2"));
    }
    if params.kappa1 != params.kappa2 {
        return Err(StabilityError::OutsideTheoremHypotheses(
            "kappa1 must equal kappa2",
        ));
    }
    let positive = params.lambda > 0.0;
    if !positive {
        return Err(StabilityError::LambdaNotPositive(params.lambda));
    }
    let f = grf_rhs_closed(params, g)?;
    let lam = params.lambda;
    Ok(lam / 10.0 * (g.x1 - 1.0) * f.f1 + lam / 10.0 * (g.x2 - 1.0) * f.f2 + (g.x3 - 2.0) * f.f3)
}

/// Sign pattern of `(g1, g2)`, the case split of the positivity analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignCase {
    /// `g1 < 0`, `g2 < 0`
    Case1,
    /// `g1 < 0`, `g2 >= 0`
    Case2,
    /// `g1 >= 0`, `g2 < 0`
    Case3,
    /// `g1 >= 0`, `g2 >= 0`
    BothPositive,
}

/// `g(x, y)` with its full decomposition into the auxiliary polynomials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GBreakdown {
    pub lambda: f64,
    pub kappa: f64,
    /// `g(x, y)`, evaluated from its monomial expansion.
    pub value: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h4: f64,
    /// `g1 = h4 + h1/20`
    pub g1: f64,
    /// `g2 = h3/20`
    pub g2: f64,
    pub case: SignCase,
}

impl GBreakdown {
    /// Relative residual of `g = h2 + 2λ g1 + 4κλ g2`.
    pub fn decomposition_residual(&self) -> f64 {
        let reassembled =
            self.h2 + 2.0 * self.lambda * self.g1 + 4.0 * self.kappa * self.lambda * self.g2;
        rel_residual(self.value, reassembled)
    }
}

fn h_polys(x: f64, y: f64) -> [f64; 4] {
    let (x2, x3) = (sq(x), x * sq(x));
    let (y2, y3, y4, y5) = (sq(y), y * sq(y), sq(sq(y)), y * sq(sq(y)));
    let h1 = 2.0 * y2 - 2.0 * x * y2 - 2.0 * x2 * y2 + 2.0 * x3 * y2;
    let h2 = 8.0 * y2 - 4.0 * y3 - 2.0 * y4 + y5;
    let h3 = 4.0 * x * y - 4.0 * x2 * y - 2.0 * y2 + 2.0 * x * y2 - 2.0 * x2 * y2
        + 2.0 * x3 * y2
        + x * y3
        - x2 * y3;
    let h4 =
        16.0 * x2 - 8.0 * x2 * y - 8.0 * y2 - 4.0 * x2 * y2 + 4.0 * y3 + 2.0 * x2 * y3 + 2.0 * y4
            - y5;
    [h1, h2, h3, h4]
}

/// Evaluates `g(x, y)` from its monomial expansion together with the
/// auxiliary polynomials `h1..h4`, `g1`, `g2` and the sign case.
pub fn g_function(lambda: f64, kappa: f64, x: f64, y: f64) -> GBreakdown {
    let (l, k) = (lambda, kappa);
    let (x2, x3) = (sq(x), x * sq(x));
    let (y2, y3, y4, y5) = (sq(y), y * sq(y), sq(sq(y)), y * sq(sq(y)));

    // monomial expansion, row by row
    let value = 32.0 * l * x2 + 0.8 * l * k * x * y - 0.8 * l * k * x2 * y - 16.0 * l * x2 * y
        + 0.2 * l * y2
        + 8.0 * y2
        - 0.4 * l * k * y2
        - 16.0 * l * y2
        - 0.2 * l * x * y2
        + 0.4 * l * k * x * y2
        - 0.2 * l * x2 * y2
        - 0.4 * l * k * x2 * y2
        - 8.0 * l * x2 * y2
        + 0.2 * l * x3 * y2
        + 0.4 * l * k * x3 * y2
        - 4.0 * y3
        + 8.0 * l * y3
        + 0.2 * l * k * x * y3
        - 0.2 * l * k * x2 * y3
        + 4.0 * l * x2 * y3
        - 2.0 * y4
        + 4.0 * l * y4
        + y5
        - 2.0 * l * y5;

    let [h1, h2, h3, h4] = h_polys(x, y);
    let g1 = h4 + h1 / 20.0;
    let g2 = h3 / 20.0;
    let case = match (g1 < 0.0, g2 < 0.0) {
        (true, true) => SignCase::Case1,
        (true, false) => SignCase::Case2,
        (false, true) => SignCase::Case3,
        (false, false) => SignCase::BothPositive,
    };
    GBreakdown {
        lambda,
        kappa,
        value,
        h1,
        h2,
        h3,
        h4,
        g1,
        g2,
        case,
    }
}

// ---------------------------------------------------------------------------
// Case-1 polynomial apparatus
// ---------------------------------------------------------------------------

/// `q(y) = 25600 - 640 y - 13756 y² - 484 y³ + 1521 y⁴`.
pub fn q_polynomial(y: f64) -> f64 {
    25600.0 + y * (-640.0 + y * (-13756.0 + y * (-484.0 + y * 1521.0)))
}

/// `q` on integers, evaluated exactly.
pub fn q_polynomial_int(y: i64) -> i64 {
    25600 + y * (-640 + y * (-13756 + y * (-484 + y * 1521)))
}

/// The interval `I = ((81-√321)/39, (81+√321)/39)` on which the critical
/// point `x̄(y)` is positive; `q < 0` throughout `I`.
pub fn interval_i() -> (f64, f64) {
    let s = sqrt(321.0);
    ((81.0 - s) / 39.0, (81.0 + s) / 39.0)
}

/// `(h2 + g1 + g2)(x, y)`, the cubic-in-`x` function of the Case-1 argument.
pub fn case1_cubic(x: f64, y: f64) -> f64 {
    let [h1, h2, h3, h4] = h_polys(x, y);
    h2 + (h4 + h1 / 20.0) + h3 / 20.0
}

/// The quadratic `p(x) ∈ R[y][x]` with `(h2+g1+g2)(x,y) = x p(x)`.
pub fn p_quadratic(x: f64, y: f64) -> f64 {
    let y2 = sq(y);
    y * (4.0 + y2) / 20.0
        + x * (320.0 - 164.0 * y - 84.0 * y2 + 39.0 * y * y2) / 20.0
        + sq(x) * y2 / 5.0
}

/// Critical point `x̄(y)` of `p`, a minimum since the leading coefficient
/// `y²/5` is positive.
pub fn xbar(y: f64) -> f64 {
    (10.5 * sq(y) - 40.0 + 20.5 * y - 4.875 * y * sq(y)) / sq(y)
}

/// Closed form of the critical value: `p(x̄) = -(y-2)² q(y) / (320 y²)`.
pub fn p_at_xbar_closed(y: f64) -> f64 {
    -sq(y - 2.0) * q_polynomial(y) / (320.0 * sq(y))
}

/// Numeric certificate for the Case-1 argument over a random sample cloud
/// plus a refinement cloud around the analytic minimum `(1, 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Case1Report {
    pub samples: usize,
    /// worst `|lhs - x p(x)| / (1 + |x p(x)|)`
    pub max_residual_factorization: f64,
    /// worst relative mismatch between `p(x̄)` and its closed form
    pub max_residual_critical_value: f64,
    pub min_value: f64,
    pub argmin: [f64; 2],
    /// `h2 + g1 + g2 >= 0` held on every sample
    pub nonnegative: bool,
    /// strictly positive on every sample farther than `1e-3` from `(1, 2)`
    pub positive_outside_exclusion: bool,
    /// smallest sampled `p(0) = y(4+y²)/20`
    pub min_p_at_zero: f64,
}

/// Radius around the degenerate minimum inside which strict-positivity
/// assertions are skipped: the function is too flat there for floating-point
/// sign tests.
pub const MINIMUM_EXCLUSION_RADIUS: f64 = 1e-3;

fn refinement_cloud(center: [f64; 2], bounds: ((f64, f64), (f64, f64))) -> Vec<[f64; 2]> {
    // Polar rings from 1e-5 out to 1e-1, clipped to the box. The innermost
    // radius must resolve the attained minimum at the center more finely than
    // the boundary-biased grid approaches the unattained infimum at the
    // origin corner, while staying far enough out that the function value
    // dominates evaluation roundoff.
    const RADII: [f64; 9] = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
    const ANGLES: usize = 24;
    let mut pts = Vec::with_capacity(RADII.len() * ANGLES);
    for &r in &RADII {
        for a in 0..ANGLES {
            let th = 2.0 * core::f64::consts::PI * a as f64 / ANGLES as f64;
            let x = center[0] + r * crate::math::cos(th);
            let y = center[1] + r * crate::math::sin(th);
            let ((xl, xh), (yl, yh)) = bounds;
            if x > xl && x <= xh && y > yl && y <= yh {
                pts.push([x, y]);
            }
        }
    }
    pts
}

/// Verifies the Case-1 identities and the sign of `h2 + g1 + g2` on `samples`
/// points of `(0, 10]²` (uniform, plus the refinement cloud near `(1, 2)`).
pub fn case1_certificate(samples: usize, seed: u64) -> Result<Case1Report, StabilityError> {
    if samples == 0 {
        return Err(StabilityError::NoSamples);
    }
    let bounds = ((0.0, 10.0), (0.0, 10.0));
    let mut cloud = refinement_cloud([1.0, 2.0], bounds);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while cloud.len() < samples.max(cloud.len()) {
        let x = 10.0 - rng.gen_range(0.0..10.0);
        let y = 10.0 - rng.gen_range(0.0..10.0);
        cloud.push([x, y]);
    }

    let mut rep = Case1Report {
        samples: cloud.len(),
        max_residual_factorization: 0.0,
        max_residual_critical_value: 0.0,
        min_value: f64::INFINITY,
        argmin: [f64::NAN, f64::NAN],
        nonnegative: true,
        positive_outside_exclusion: true,
        min_p_at_zero: f64::INFINITY,
    };
    for &[x, y] in &cloud {
        let lhs = case1_cubic(x, y);
        let rhs = x * p_quadratic(x, y);
        rep.max_residual_factorization = rep.max_residual_factorization.max(rel_residual(lhs, rhs));

        let xb = xbar(y);
        rep.max_residual_critical_value = rep
            .max_residual_critical_value
            .max(rel_residual(p_quadratic(xb, y), p_at_xbar_closed(y)));

        if lhs < rep.min_value {
            rep.min_value = lhs;
            rep.argmin = [x, y];
        }
        if lhs < 0.0 {
            rep.nonnegative = false;
        }
        let far = crate::math::hypot(x - 1.0, y - 2.0) > MINIMUM_EXCLUSION_RADIUS;
        if far && lhs <= 0.0 {
            rep.positive_outside_exclusion = false;
        }
        let p0 = y * (4.0 + sq(y)) / 20.0;
        rep.min_p_at_zero = rep.min_p_at_zero.min(p0);
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Global positivity scan
// ---------------------------------------------------------------------------

/// Sample counts per sign case.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CaseTallies {
    pub case1: usize,
    pub case2: usize,
    pub case3: usize,
    pub both_positive: usize,
}

impl CaseTallies {
    fn bump(&mut self, case: SignCase) {
        match case {
            SignCase::Case1 => self.case1 += 1,
            SignCase::Case2 => self.case2 += 1,
            SignCase::Case3 => self.case3 += 1,
            SignCase::BothPositive => self.both_positive += 1,
        }
    }
}

/// Outcome of a positivity scan of `g` over a box.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanReport {
    pub min: f64,
    pub argmin: [f64; 2],
    pub samples: usize,
    pub tallies: CaseTallies,
    /// worst relative residual of `g = h2 + 2λ g1 + 4κλ g2`
    pub max_identity_residual: f64,
}

/// Samples `g` over `x_range × y_range` (half-open at the lower ends) with
/// Monte-Carlo points, a boundary-biased grid and a refinement cloud around
/// `(1, 2)`; reports the minimum, its location, sign-case tallies and the
/// decomposition residual. Admissible range: `λ ∈ (0, 1/2)`, `κ ∈ (0, 1/2]`.
pub fn global_positivity_scan(
    lambda: f64,
    kappa: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
    samples: usize,
    seed: u64,
) -> Result<ScanReport, StabilityError> {
    let lambda_ok = lambda > 0.0 && lambda < 0.5;
    if !lambda_ok {
        return Err(StabilityError::LambdaOutsideScanRange(lambda));
    }
    let kappa_ok = kappa > 0.0 && kappa <= 0.5;
    if !kappa_ok {
        return Err(StabilityError::KappaOutOfRange(kappa));
    }
    if samples == 0 {
        return Err(StabilityError::NoSamples);
    }

    let mut report = ScanReport {
        min: f64::INFINITY,
        argmin: [f64::NAN, f64::NAN],
        samples: 0,
        tallies: CaseTallies::default(),
        max_identity_residual: 0.0,
    };
    let eval = |x: f64, y: f64, report: &mut ScanReport| {
        let b = g_function(lambda, kappa, x, y);
        report.samples += 1;
        report.tallies.bump(b.case);
        report.max_identity_residual = report.max_identity_residual.max(b.decomposition_residual());
        if b.value < report.min {
            report.min = b.value;
            report.argmin = [x, y];
        }
    };

    // refinement cloud around the analytic minimum
    for pt in refinement_cloud([1.0, 2.0], (x_range, y_range)) {
        eval(pt[0], pt[1], &mut report);
    }

    // boundary-biased grid: cubically clustered toward both ends of each axis
    let m = (sqrt(samples as f64 / 10.0) as usize).clamp(2, 100);
    let axis = |lo: f64, hi: f64| -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * m);
        for i in 1..=m {
            let t = i as f64 / m as f64;
            v.push(lo + (hi - lo) * t * t * t);
            if i < m {
                v.push(lo + (hi - lo) * (1.0 - t * t * t));
            }
        }
        v
    };
    for &x in &axis(x_range.0, x_range.1) {
        for &y in &axis(y_range.0, y_range.1) {
            eval(x, y, &mut report);
        }
    }

    // Monte-Carlo fill, sampling the half-open box (lo, hi]
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while report.samples < samples {
        let x = x_range.1 - rng.gen_range(0.0..(x_range.1 - x_range.0));
        let y = y_range.1 - rng.gen_range(0.0..(y_range.1 - y_range.0));
        eval(x, y, &mut report);
    }
    Ok(report)
}
