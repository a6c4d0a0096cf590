//! Closed-form eigenvalues of real 3×3 matrices.
//!
//! The characteristic cubic is solved by the trigonometric method when all
//! roots are real and by Cardano's formula otherwise. The matrix is balanced
//! by its largest entry first, so the coefficients of the cubic stay near unit
//! scale even for extreme inputs.

use crate::math::{abs, acos, cbrt, cos, sqrt};
use num_complex::Complex64;

const PI: f64 = core::f64::consts::PI;

/// Eigenvalues of `m`, sorted by real part (then imaginary part).
pub fn eigen3(m: &[[f64; 3]; 3]) -> [Complex64; 3] {
    let scale = m.iter().flatten().fold(0.0_f64, |acc, &v| acc.max(abs(v)));
    if scale == 0.0 || !scale.is_finite() {
        return [Complex64::new(0.0, 0.0); 3];
    }
    let a: [[f64; 3]; 3] = core::array::from_fn(|i| core::array::from_fn(|j| m[i][j] / scale));

    let tr = a[0][0] + a[1][1] + a[2][2];
    // sum of principal 2x2 minors
    let m2 = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0]
        + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);

    let mut roots = cubic_roots_monic(-tr, m2, -det);
    for r in &mut roots {
        *r *= scale;
    }
    roots.sort_unstable_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    roots
}

/// Roots of the monic cubic `t³ + p t² + q t + r`.
pub fn cubic_roots_monic(p: f64, q: f64, r: f64) -> [Complex64; 3] {
    // depress with t = u - p/3
    let shift = -p / 3.0;
    let a = q - p * p / 3.0;
    let b = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;

    if a == 0.0 && b == 0.0 {
        return [Complex64::new(shift, 0.0); 3];
    }

    let disc = -4.0 * a * a * a - 27.0 * b * b;
    if disc >= 0.0 {
        // three real roots; disc >= 0 forces a <= 0
        let m = 2.0 * sqrt(-a / 3.0);
        let cos3t = (3.0 * b / (a * m)).clamp(-1.0, 1.0);
        let theta = acos(cos3t) / 3.0;
        let u0 = m * cos(theta);
        let u1 = m * cos(theta - 2.0 * PI / 3.0);
        let u2 = m * cos(theta - 4.0 * PI / 3.0);
        [
            Complex64::new(u0 + shift, 0.0),
            Complex64::new(u1 + shift, 0.0),
            Complex64::new(u2 + shift, 0.0),
        ]
    } else {
        // one real root and a conjugate pair; pick the cube root without
        // cancellation between -b/2 and the radical
        let s = sqrt(b * b / 4.0 + a * a * a / 27.0);
        let big = if b >= 0.0 { -b / 2.0 - s } else { -b / 2.0 + s };
        let c = cbrt(big);
        let d = if c != 0.0 { -a / (3.0 * c) } else { 0.0 };
        let real = c + d + shift;
        let re_pair = -(c + d) / 2.0 + shift;
        let im_pair = sqrt(3.0) / 2.0 * (c - d);
        [
            Complex64::new(real, 0.0),
            Complex64::new(re_pair, abs(im_pair)),
            Complex64::new(re_pair, -abs(im_pair)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(z: Complex64, re: f64, im: f64, tol: f64) {
        assert!(
            abs(z.re - re) < tol && abs(z.im - im) < tol,
            "{z} != {re}+{im}i"
        );
    }

    #[test]
    fn identity_matrix() {
        let e = eigen3(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        for z in e {
            assert_close(z, 1.0, 0.0, 1e-14);
        }
    }

    #[test]
    fn diagonal_matrix() {
        let c1 = 10.0 / 7.0;
        let lam = 0.25;
        let d = [-1.0, 1.0 - c1, c1 * (lam - 1.0)];
        let e = eigen3(&[[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]]);
        // sorted ascending by real part: -15/14 < -1 < -3/7
        assert_close(e[0], -15.0 / 14.0, 0.0, 1e-12);
        assert_close(e[1], -1.0, 0.0, 1e-12);
        assert_close(e[2], -3.0 / 7.0, 0.0, 1e-12);
    }

    #[test]
    fn companion_of_t3_minus_1() {
        // cube roots of unity
        let e = eigen3(&[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        let h = sqrt(3.0) / 2.0;
        assert_close(e[0], -0.5, -h, 1e-12);
        assert_close(e[1], -0.5, h, 1e-12);
        assert_close(e[2], 1.0, 0.0, 1e-12);
    }

    #[test]
    fn companion_with_distinct_roots() {
        // (t-1)(t-2)(t-3) = t³ - 6t² + 11t - 6
        let mut r = cubic_roots_monic(-6.0, 11.0, -6.0);
        r.sort_unstable_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert_close(r[0], 1.0, 0.0, 1e-10);
        assert_close(r[1], 2.0, 0.0, 1e-10);
        assert_close(r[2], 3.0, 0.0, 1e-10);
    }

    #[test]
    fn repeated_and_triple_roots() {
        let e = eigen3(&[[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 5.0]]);
        assert_close(e[0], 2.0, 0.0, 1e-7);
        assert_close(e[1], 2.0, 0.0, 1e-7);
        assert_close(e[2], 5.0, 0.0, 1e-7);

        let r = cubic_roots_monic(-3.0, 3.0, -1.0); // (t-1)³
        for z in r {
            assert_close(z, 1.0, 0.0, 1e-5);
        }
    }

    #[test]
    fn balancing_handles_extreme_scales() {
        let e = eigen3(&[[1e150, 0.0, 0.0], [0.0, 2e150, 0.0], [0.0, 0.0, 3e150]]);
        assert!(abs(e[0].re - 1e150) < 1e140);
        assert!(abs(e[2].re - 3e150) < 1e140);

        let e = eigen3(&[[1e-200, 0.0, 0.0], [0.0, 2e-200, 0.0], [0.0, 0.0, 3e-200]]);
        assert!(abs(e[1].re - 2e-200) < 1e-210);
    }

    #[test]
    fn general_matrix_satisfies_char_poly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let m: [[f64; 3]; 3] =
                core::array::from_fn(|_| core::array::from_fn(|_| rng.gen_range(-3.0..3.0)));
            let tr = m[0][0] + m[1][1] + m[2][2];
            let sum: Complex64 = eigen3(&m).iter().sum();
            assert!(abs(sum.re - tr) < 1e-9 && abs(sum.im) < 1e-9);
        }
    }
}
