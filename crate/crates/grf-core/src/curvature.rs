//! Ricci operator, `H²` bilinear form and the flow vector field.
//!
//! The flow right-hand side is computed along two independent routes:
//!
//! * [`grf_rhs_assembled`] builds `-2 Ric + ½ H²` from the per-block curvature
//!   formulas (the Ricci operator eigenvalues and the `H²` coefficients);
//! * [`grf_rhs_closed`] transcribes the closed-form rational system verbatim,
//!   including its unsimplified denominators.
//!
//! Agreement between the two is the transcription-correctness argument, so
//! neither side is algebraically "cleaned up".

use crate::math::sq;
use crate::space::{AlignedParams, CartanCoefficients, DiagonalMetric, METRIC_FLOOR};
use core::fmt;

/// A metric coefficient at or below the degeneracy floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainError {
    /// Which block (1-based) is degenerate.
    pub index: usize,
    pub value: f64,
}

impl fmt::Display for DomainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "metric coefficient x{} = {} is not positive (floor {METRIC_FLOOR:e})",
            self.index, self.value
        )
    }
}

fn check_metric(g: &DiagonalMetric) -> Result<(), DomainError> {
    for (i, &v) in g.as_array().iter().enumerate() {
        let ok = v.is_finite() && v > METRIC_FLOOR;
        if !ok {
            return Err(DomainError {
                index: i + 1,
                value: v,
            });
        }
    }
    Ok(())
}

/// Eigenvalues of the Ricci operator on the blocks `p₁, p₂, p₃`; the operator
/// is `rᵢ·Id` on each block. The Ricci *tensor* coefficient relative to the
/// Killing metric is `xᵢ·rᵢ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciDiag {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

/// Coefficients of `(H_Q)²_g` relative to the Killing metric on each block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct H2Diag {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

/// The time derivatives `(x1', x2', x3')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowField {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl FlowField {
    pub fn as_array(&self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }
}

/// Ricci operator eigenvalues of `g = (x1, x2, x3)` for Einstein standard
/// factors (`Cas_χᵢ = κᵢ Id`).
pub fn ricci_diag(p: &AlignedParams, g: &DiagonalMetric) -> Result<RicciDiag, DomainError> {
    check_metric(g)?;
    let (x1, x2, x3) = (g.x1, g.x2, g.x3);
    let (c1, c2, a3, b3) = (p.c1, p.c2, p.a3, p.b3);
    let lam = p.lambda;

    let r1 = 1.0 / (4.0 * x1) + (p.kappa1 / (2.0 * x1)) * (1.0 - x3 / (x1 * c1 * b3));
    let r2 = 1.0 / (4.0 * x2) + (p.kappa2 / (2.0 * x2)) * (1.0 - x3 * sq(a3) / (x2 * c2 * b3));

    // r3 keeps the two visual groups of the source formula separate: the
    // λ-weighted group and the 1/cᵢ-weighted group.
    let lam_group = (2.0 * sq(x1) - sq(x3)) / sq(x1) + (2.0 * sq(x2) - sq(x3)) * sq(a3) / sq(x2)
        - ((1.0 + a3) / b3) * (1.0 / c1 + a3 * a3 * a3 / c2);
    let c_group = 2.0 * (1.0 / c1 + sq(a3) / c2)
        - (2.0 * sq(x1) - sq(x3)) / (sq(x1) * c1)
        - (2.0 * sq(x2) - sq(x3)) * sq(a3) / (sq(x2) * c2);
    let r3 = lam / (4.0 * x3 * b3) * lam_group + 1.0 / (4.0 * x3 * b3) * c_group;

    Ok(RicciDiag { r1, r2, r3 })
}

/// `(H_Q)²_g` block coefficients for a harmonic form with coefficients `q`.
pub fn h2_diag(
    p: &AlignedParams,
    q: &CartanCoefficients,
    g: &DiagonalMetric,
) -> Result<H2Diag, DomainError> {
    check_metric(g)?;
    let (x1, x2, x3) = (g.x1, g.x2, g.x3);
    let (c1, c2, a3, b3, b4) = (p.c1, p.c2, p.a3, p.b3, p.b4);
    let lam = p.lambda;

    let s1 = q.s1(x3);
    let s2 = q.s2(x3);
    let h1 = (2.0 * s1 / (x1 * c1) - 2.0 * sq(q.y1) / sq(x1)) * p.kappa1 + sq(q.y1) / sq(x1);
    let h2 = (2.0 * s2 / (x2 * c2) - 2.0 * sq(q.y2) / sq(x2)) * p.kappa2 + sq(q.y2) / sq(x2);

    // h3 on the p₃ block, evaluated on a Killing-unit vector.
    let t1 = sq(q.y1 + q.c3 / b4) * (1.0 - c1 * lam) / c1 / (sq(x1) * b3);
    let t2 = sq(q.y2 * a3 + q.c3 / b4) * (1.0 - c2 * lam) / c2 / (sq(x2) * b3);
    let t3 = lam / (sq(x3) * b3 * b3 * b3)
        * sq(q.y1 / c1 + a3 * a3 * a3 * q.y2 / c2 + 3.0 * q.c3 / b4 * (1.0 / c1 + sq(a3) / c2));
    let h3 = t1 + t2 + t3;

    Ok(H2Diag { h1, h2, h3 })
}

/// Flow field `-2 Ric + ½ H²` assembled from curvature blocks. The Ricci
/// tensor on block `i` is `xᵢ rᵢ` relative to the Killing metric, while the
/// `H²` coefficients are already Killing-relative, hence
/// `fᵢ = -2 xᵢ rᵢ + ½ hᵢ`.
pub fn grf_rhs_assembled(p: &AlignedParams, g: &DiagonalMetric) -> Result<FlowField, DomainError> {
    let r = ricci_diag(p, g)?;
    let h = h2_diag(p, &p.h0_coefficients(), g)?;
    Ok(FlowField {
        f1: -2.0 * g.x1 * r.r1 + 0.5 * h.h1,
        f2: -2.0 * g.x2 * r.r2 + 0.5 * h.h2,
        f3: -2.0 * g.x3 * r.r3 + 0.5 * h.h3,
    })
}

/// Flow field in closed form: the three rational functions transcribed
/// verbatim, with the original denominators
/// `2(c1-1)c1 x1²x3`, `2(c1-1)²c1 x2²x3` and `2(c1-1)³c1 x1²x2²x3²`.
pub fn grf_rhs_closed(p: &AlignedParams, g: &DiagonalMetric) -> Result<FlowField, DomainError> {
    check_metric(g)?;
    let (x1, x2, x3) = (g.x1, g.x2, g.x3);
    let c1 = p.c1;
    let (k1, k2, lam) = (p.kappa1, p.kappa2, p.lambda);
    let cm = c1 - 1.0;

    let f1 = (2.0 * k1 * x1 * sq(x3)
        + c1 * x3 * (-1.0 + sq(x1) + 2.0 * k1 * (1.0 + sq(x1) - 2.0 * x1 * x3))
        + sq(c1) * (x3 - sq(x1) * x3 - 2.0 * k1 * (x3 + sq(x1) * x3 - x1 * (1.0 + sq(x3)))))
        / (2.0 * cm * c1 * sq(x1) * x3);

    let f2 = -(c1 * c1 * c1 * (1.0 + 2.0 * k2) * sq(x2) * x3 - 2.0 * k2 * x2 * sq(x3)
        + c1 * x3 * (-1.0 + sq(x2) + 2.0 * k2 * (1.0 + sq(x2) + 2.0 * x2 * x3))
        - 2.0 * sq(c1) * x2 * (x2 * x3 + k2 * (1.0 + 2.0 * x2 * x3 + sq(x3))))
        / (2.0 * sq(cm) * c1 * sq(x2) * x3);

    let f3 = ((sq(x3) - 2.0 * c1 * sq(x3) + sq(c1) * (sq(x3) - 1.0))
        * (-sq(c1) * (1.0 + 2.0 * lam) * sq(x2) * sq(x3)
            + (sq(x1) - sq(x2)) * sq(x3)
            + c1 * ((lam - 1.0) * sq(x1) + (2.0 + lam) * sq(x2)) * sq(x3)
            + c1 * c1 * c1 * lam * sq(x2) * (sq(x3) - sq(x1))))
        / (2.0 * cm * cm * cm * c1 * sq(x1) * sq(x2) * sq(x3));

    Ok(FlowField { f1, f2, f3 })
}

/// The `c1 = 2`, `κ1 = κ2 = κ` specialization of the flow in its own closed
/// form (the system the global-stability analysis works with).
pub fn grf_rhs_c12(lambda: f64, kappa: f64, g: &DiagonalMetric) -> Result<FlowField, DomainError> {
    check_metric(g)?;
    let (x1, x2, x3) = (g.x1, g.x2, g.x3);

    let f1 = (x3 - sq(x1) * x3 + kappa * (-2.0 * x3 - 2.0 * sq(x1) * x3 + x1 * (4.0 + sq(x3))))
        / (2.0 * sq(x1) * x3);
    let f2 = (x3 - sq(x2) * x3 + kappa * (-2.0 * x3 - 2.0 * sq(x2) * x3 + x2 * (4.0 + sq(x3))))
        / (2.0 * sq(x2) * x3);
    let f3 = -((sq(x3) - 4.0)
        * ((sq(x1) + sq(x2)) * sq(x3)
            - 2.0 * lambda * (sq(x2) * sq(x3) + sq(x1) * (-4.0 * sq(x2) + sq(x3)))))
        / (4.0 * sq(x1) * sq(x2) * sq(x3));

    Ok(FlowField { f1, f2, f3 })
}
