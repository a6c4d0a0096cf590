//! Scalar parameter model for aligned homogeneous spaces `G₁×G₂/ΔK` with
//! Einstein standard factors.
//!
//! A space enters the flow equations only through a handful of scalars: the
//! alignment constant `c₁` (with `c₂ = c₁/(c₁-1)` forced by `1/c₁ + 1/c₂ = 1`),
//! the common Killing constant `λ` of the isotropy ideals, and the Casimir
//! eigenvalues `κ₁, κ₂` of the two isotropy representations. Everything else
//! (`a_i = λ c_i` and the curvature constants `A₃, B₃, B₄`) is derived.

use alloc::string::String;
use core::fmt;

/// Floor below which a metric coefficient counts as degenerate; every
/// curvature formula has a pole at zero.
pub const METRIC_FLOOR: f64 = 1e-10;

/// Validation failure for space parameters, naming the violated bound.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamError {
    /// `c1` must lie in `(1, 2]`.
    C1OutOfRange(f64),
    /// `lambda` must be finite and `>= 0`.
    LambdaOutOfRange(f64),
    /// `kappa1` must lie in `(0, 1/2]`.
    Kappa1OutOfRange(f64),
    /// `kappa2` must lie in `(0, 1/2]`.
    Kappa2OutOfRange(f64),
    /// A numeric field could not be parsed.
    BadNumber(String),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::C1OutOfRange(v) => write!(f, "c1 = {v} violates 1 < c1 <= 2"),
            ParamError::LambdaOutOfRange(v) => write!(f, "lambda = {v} violates lambda >= 0"),
            ParamError::Kappa1OutOfRange(v) => write!(f, "kappa1 = {v} violates 0 < kappa1 <= 1/2"),
            ParamError::Kappa2OutOfRange(v) => write!(f, "kappa2 = {v} violates 0 < kappa2 <= 1/2"),
            ParamError::BadNumber(s) => write!(f, "cannot parse {s:?} as a number or p/q ratio"),
        }
    }
}

/// Scalar invariants of an aligned space, with all derived constants populated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedParams {
    /// Alignment constant, in `(1, 2]`.
    pub c1: f64,
    /// Second alignment constant, `c1/(c1-1)`; satisfies `1/c1 + 1/c2 = 1`.
    pub c2: f64,
    /// Common Killing constant of the isotropy ideals; `0` means `K` abelian.
    pub lambda: f64,
    /// Casimir eigenvalue of the first isotropy representation, in `(0, 1/2]`.
    pub kappa1: f64,
    /// Casimir eigenvalue of the second isotropy representation.
    pub kappa2: f64,
    /// Killing ratio `a1 = lambda * c1`.
    pub a1: f64,
    /// Killing ratio `a2 = lambda * c2`.
    pub a2: f64,
    /// Curvature constant `A3 = -c2/c1 = -1/(c1-1)`.
    pub a3: f64,
    /// Curvature constant `B3 = 1/c1 + A3²/c2 = 1/(c1-1)`.
    pub b3: f64,
    /// Curvature constant `B4 = 1/c1 + 1/c2 = 1`.
    pub b4: f64,
}

impl AlignedParams {
    /// Validates `(c1, λ, κ1, κ2)` and populates the derived constants.
    pub fn new(c1: f64, lambda: f64, kappa1: f64, kappa2: f64) -> Result<Self, ParamError> {
        if !(c1 > 1.0 && c1 <= 2.0) {
            return Err(ParamError::C1OutOfRange(c1));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(ParamError::LambdaOutOfRange(lambda));
        }
        if !(kappa1 > 0.0 && kappa1 <= 0.5) {
            return Err(ParamError::Kappa1OutOfRange(kappa1));
        }
        if !(kappa2 > 0.0 && kappa2 <= 0.5) {
            return Err(ParamError::Kappa2OutOfRange(kappa2));
        }
        let c2 = c1 / (c1 - 1.0);
        Ok(AlignedParams {
            c1,
            c2,
            lambda,
            kappa1,
            kappa2,
            a1: lambda * c1,
            a2: lambda * c2,
            a3: -1.0 / (c1 - 1.0),
            b3: 1.0 / (c1 - 1.0),
            b4: 1.0,
        })
    }

    /// Same constructor, but with every argument given as `"p/q"` or a plain
    /// decimal string, so values like `10/7` enter without decimal truncation.
    pub fn from_strs(
        c1: &str,
        lambda: &str,
        kappa1: &str,
        kappa2: &str,
    ) -> Result<Self, ParamError> {
        Self::new(
            parse_ratio(c1)?,
            parse_ratio(lambda)?,
            parse_ratio(kappa1)?,
            parse_ratio(kappa2)?,
        )
    }

    /// True when `K` is abelian (`λ = 0`); the flow equations remain valid but
    /// the Lyapunov suite requires `λ > 0`.
    pub fn is_abelian(&self) -> bool {
        self.lambda == 0.0
    }

    /// True when `a2 = λ c2 >= 1`. The underlying geometry assumes `a2 < 1`;
    /// the formulas stay evaluable, so this is a warning, not an error.
    pub fn a2_exceeds_unity(&self) -> bool {
        self.lambda > 0.0 && self.a2 >= 1.0
    }

    /// The Bismut Ricci flat metric `g0 = (1, 1/(c1-1), c1/(c1-1))`, the
    /// unique diagonal fixed point of the flow up to scaling.
    pub fn brf_fixed_point(&self) -> DiagonalMetric {
        DiagonalMetric::new(1.0, 1.0 / (self.c1 - 1.0), self.c1 / (self.c1 - 1.0))
    }

    /// Coefficients of the harmonic 3-form `H₀` (`y1 = 1`, `y2 = -1/(c1-1)`).
    pub fn h0_coefficients(&self) -> CartanCoefficients {
        CartanCoefficients::from_y1(self, 1.0)
    }
}

/// A diagonal invariant metric `(x1, x2, x3)` relative to the Killing
/// background metric on `p₁ ⊕ p₂ ⊕ p₃`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalMetric {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl DiagonalMetric {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Self {
        DiagonalMetric { x1, x2, x3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x1, self.x2, self.x3]
    }

    /// All coefficients strictly above the degeneracy floor.
    pub fn is_positive(&self) -> bool {
        self.x1 > METRIC_FLOOR && self.x2 > METRIC_FLOOR && self.x3 > METRIC_FLOOR
    }
}

impl From<[f64; 3]> for DiagonalMetric {
    fn from(x: [f64; 3]) -> Self {
        DiagonalMetric::new(x[0], x[1], x[2])
    }
}

/// Coefficients `(y1, y2)` of a bi-invariant form `Q = y1 B₁ + y2 B₂` subject
/// to the harmonicity constraint `y1/c1 + y2/c2 = 0`, together with the
/// derived quantities entering the `H²` formulas. `S1`, `S2` depend on the
/// metric coefficient `x3` and are exposed as evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartanCoefficients {
    pub y1: f64,
    pub y2: f64,
    pub c3: f64,
    a3: f64,
    b3: f64,
    b4: f64,
}

impl CartanCoefficients {
    /// Builds the coefficient pair from `y1`; `y2 = A3·y1` is forced by the
    /// harmonicity constraint.
    pub fn from_y1(params: &AlignedParams, y1: f64) -> Self {
        let y2 = params.a3 * y1;
        let c3 = y1 / params.c1 + params.a3 * y2 / params.c2;
        CartanCoefficients {
            y1,
            y2,
            c3,
            a3: params.a3,
            b3: params.b3,
            b4: params.b4,
        }
    }

    /// `S1(x3) = (y1 + C3/B4)² / (x3 B3)`.
    pub fn s1(&self, x3: f64) -> f64 {
        let t = self.y1 + self.c3 / self.b4;
        t * t / (x3 * self.b3)
    }

    /// `S2(x3) = (A3 y2 + C3/B4)² / (x3 B3)`.
    pub fn s2(&self, x3: f64) -> f64 {
        let t = self.a3 * self.y2 + self.c3 / self.b4;
        t * t / (x3 * self.b3)
    }

    /// Residual of the harmonicity constraint `y1/c1 + y2/c2`; zero up to
    /// rounding by construction.
    pub fn constraint_residual(&self, params: &AlignedParams) -> f64 {
        self.y1 / params.c1 + self.y2 / params.c2
    }
}

/// Parses `"p/q"`, `"0.25"` or `"2"` into a double. Rational inputs are
/// evaluated as one division, which is all the precision the ODE integration
/// can use anyway.
pub fn parse_ratio(s: &str) -> Result<f64, ParamError> {
    let bad = || ParamError::BadNumber(String::from(s));
    let t = s.trim();
    let v = if let Some((num, den)) = t.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| bad())?;
        let d: f64 = den.trim().parse().map_err(|_| bad())?;
        if d == 0.0 {
            return Err(bad());
        }
        n / d
    } else {
        t.parse().map_err(|_| bad())?
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::abs;

    fn su7so8so7() -> AlignedParams {
        AlignedParams::from_strs("10/7", "1/4", "1/2", "1/2").unwrap()
    }

    #[test]
    fn catalog_space_derived_constants() {
        let p = su7so8so7();
        assert!(abs(p.c2 - 10.0 / 3.0) < 1e-15);
        assert!(abs(p.a1 - 5.0 / 14.0) < 1e-15);
        assert!(abs(p.a2 - 5.0 / 6.0) < 1e-15);
        assert!(abs(p.a3 + 7.0 / 3.0) < 1e-15);
        assert!(abs(p.b3 - 7.0 / 3.0) < 1e-15);
        assert_eq!(p.b4, 1.0);
        assert!(!p.is_abelian());
        assert!(!p.a2_exceeds_unity());
    }

    #[test]
    fn c1_equal_two_forces_c2_equal_two() {
        let p = AlignedParams::new(2.0, 0.25, 0.5, 0.5).unwrap();
        assert_eq!(p.c2, 2.0);
        assert_eq!(p.a3, -1.0);
        assert_eq!(p.b3, 1.0);
    }

    #[test]
    fn rejects_out_of_range_parameters() {
        assert!(matches!(
            AlignedParams::new(3.0, 0.25, 0.5, 0.5),
            Err(ParamError::C1OutOfRange(_))
        ));
        assert!(matches!(
            AlignedParams::new(1.0, 0.25, 0.5, 0.5),
            Err(ParamError::C1OutOfRange(_))
        ));
        assert!(matches!(
            AlignedParams::new(1.5, -0.1, 0.5, 0.5),
            Err(ParamError::LambdaOutOfRange(_))
        ));
        assert!(matches!(
            AlignedParams::new(1.5, 0.25, 0.0, 0.5),
            Err(ParamError::Kappa1OutOfRange(_))
        ));
        assert!(matches!(
            AlignedParams::new(1.5, 0.25, 0.5, 0.6),
            Err(ParamError::Kappa2OutOfRange(_))
        ));
        assert!(matches!(
            AlignedParams::new(f64::NAN, 0.25, 0.5, 0.5),
            Err(ParamError::C1OutOfRange(_))
        ));
    }

    #[test]
    fn abelian_and_a2_diagnostics() {
        let p = AlignedParams::new(1.5, 0.0, 0.5, 0.5).unwrap();
        assert!(p.is_abelian());
        assert!(!p.a2_exceeds_unity());
        // c2 = 3 so lambda = 0.4 gives a2 = 1.2 >= 1
        let q = AlignedParams::new(1.5, 0.4, 0.5, 0.5).unwrap();
        assert!(q.a2_exceeds_unity());
    }

    #[test]
    fn brf_fixed_point_values() {
        let g = su7so8so7().brf_fixed_point();
        assert!(abs(g.x1 - 1.0) == 0.0);
        assert!(abs(g.x2 - 7.0 / 3.0) < 1e-15);
        assert!(abs(g.x3 - 10.0 / 3.0) < 1e-15);

        let g = AlignedParams::new(2.0, 0.25, 0.5, 0.5)
            .unwrap()
            .brf_fixed_point();
        assert_eq!(g.as_array(), [1.0, 1.0, 2.0]);

        let g = AlignedParams::new(1.5, 0.25, 0.5, 0.5)
            .unwrap()
            .brf_fixed_point();
        assert_eq!(g.as_array(), [1.0, 2.0, 3.0]);
    }

    #[test]
    fn brf_fixed_point_block_ratios() {
        for &c1 in &[1.1, 1.3, 10.0 / 7.0, 1.7, 2.0] {
            let p = AlignedParams::new(c1, 0.1, 0.4, 0.3).unwrap();
            let g = p.brf_fixed_point();
            assert!(abs(g.x3 - p.c1 * g.x2) < 1e-15 * g.x3);
            assert!(abs(g.x1 - (p.c1 - 1.0) * g.x2) < 1e-15);
        }
    }

    #[test]
    fn h0_coefficient_values() {
        let p = AlignedParams::new(2.0, 0.25, 0.5, 0.5).unwrap();
        let q = p.h0_coefficients();
        assert_eq!(q.y1, 1.0);
        assert_eq!(q.y2, -1.0);
        assert_eq!(q.c3, 1.0);
        assert!(abs(q.s1(2.0) - 2.0) < 1e-15);
        assert!(abs(q.s2(2.0) - 2.0) < 1e-15);

        let p = su7so8so7();
        let q = p.h0_coefficients();
        assert!(abs(q.y2 + 7.0 / 3.0) < 1e-15);
        assert!(abs(q.c3 - 7.0 / 3.0) < 1e-14);
        // closed forms for S1, S2 with these coefficients
        for &x3 in &[0.5, 1.0, 10.0 / 3.0, 7.0] {
            let c1 = p.c1;
            let s1 = c1 * c1 / ((c1 - 1.0) * x3);
            let s2 = c1 * c1 / ((c1 - 1.0) * (c1 - 1.0) * (c1 - 1.0) * x3);
            assert!(abs(q.s1(x3) - s1) < 1e-13 * s1);
            assert!(abs(q.s2(x3) - s2) < 1e-13 * s2);
        }
    }

    #[test]
    fn harmonicity_constraint_holds() {
        for i in 0..40 {
            let c1 = 1.0 + 0.025 * (i + 1) as f64;
            let p = AlignedParams::new(c1, 0.1, 0.3, 0.5).unwrap();
            let q = p.h0_coefficients();
            assert!(abs(q.constraint_residual(&p)) < 1e-15);
        }
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(parse_ratio("10/7").unwrap(), 10.0 / 7.0);
        assert_eq!(parse_ratio(" 1 / 4 ").unwrap(), 0.25);
        assert_eq!(parse_ratio("0.25").unwrap(), 0.25);
        assert_eq!(parse_ratio("2").unwrap(), 2.0);
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("").is_err());
        assert!(parse_ratio("a/b").is_err());
        assert!(parse_ratio("inf").is_err());
    }
}
