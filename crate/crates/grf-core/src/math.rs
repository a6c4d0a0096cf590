//! Small float helpers shared across the crate.
//!
//! Transcendentals go through `libm` so the crate builds without `std`.

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn cbrt(x: f64) -> f64 {
    libm::cbrt(x)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}

#[inline]
pub fn hypot(x: f64, y: f64) -> f64 {
    libm::hypot(x, y)
}

#[inline]
pub fn pow(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

/// `x²` without going through a pow call.
#[inline]
pub fn sq(x: f64) -> f64 {
    x * x
}

/// Max-norm of a vector.
pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(abs(x)))
}

/// Max-norm distance between two vectors of equal length.
pub fn inf_dist(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (&x, &y)| m.max(abs(x - y)))
}

/// Relative residual `|a - b| / (1 + |b|)`, the convention used by all
/// identity checks in this crate.
#[inline]
pub fn rel_residual(a: f64, b: f64) -> f64 {
    abs(a - b) / (1.0 + abs(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        assert_eq!(inf_norm(&[1.0, -3.0, 2.0]), 3.0);
        assert_eq!(inf_dist(&[1.0, 2.0], &[0.5, 4.0]), 2.0);
        assert_eq!(sq(-3.0), 9.0);
    }

    #[test]
    fn rel_residual_is_symmetric_enough() {
        assert!(rel_residual(1.0 + 1e-12, 1.0) < 1e-11);
        assert_eq!(rel_residual(0.0, 0.0), 0.0);
    }
}
