//! Generalized Ricci flow on the Lie group SO(n) with its nice basis.
//!
//! The basis `e_rs = E_rs - E_sr`, `r < s`, enumerated lexicographically, is
//! nice: `c_ij^k c_ij^l = 0` for `k ≠ l`, so diagonal left-invariant metrics
//! stay diagonal under the flow. Structure constants are computed by explicit
//! matrix commutators, projected onto the basis and normalized to the
//! Killing-orthonormal frame `ē_k = e_k / √(2(n-2))`. With that normalization
//! `Σ_{i,j} (c_ij^k)² = 1` for every `k` (the adjoint Casimir is the identity
//! with respect to the Killing form), so the Jacobian of the flow at the
//! Killing metric is minus the identity.
//!
//! Sparse storage keeps one entry per unordered pair `(i, j)`, `i < j`; sums
//! over the unrestricted ordered pairs of the flow formulas double each
//! stored term.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::flow::{integrate_raw, FlowError, IntegratorConfig, Trajectory};
use crate::math::{abs, sqrt};

/// Largest `n` accepted by [`son_integrate`]; constant generation itself is
/// uncapped.
pub const MAX_INTEGRATION_N: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub enum SonError {
    /// `so(n)` needs `n >= 3` to be semisimple with a nonzero Killing form.
    NTooSmall(usize),
    /// Metric vector length does not match `n(n-1)/2`.
    DimensionMismatch { expected: usize, got: usize },
    /// A metric coefficient is not positive.
    NonPositiveEntry { index: usize, value: f64 },
}

impl fmt::Display for SonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SonError::NTooSmall(n) => write!(f, "so({n}) is not supported; n must be >= 3"),
            SonError::DimensionMismatch { expected, got } => {
                write!(
                    f,
                    "metric has {got} entries, expected n(n-1)/2 = {expected}"
                )
            }
            SonError::NonPositiveEntry { index, value } => {
                write!(f, "metric entry x{} = {value} is not positive", index + 1)
            }
        }
    }
}

/// One nonzero structure constant `c_ij^k` (orthonormal basis), stored for
/// `i < j` only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

/// Indexed structure constants of `so(n)` in the Killing-orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct NiceBasis {
    n: usize,
    dim: usize,
    /// basis index -> matrix index pair `(r, s)`, `r < s`, 0-based
    pairs: Vec<(usize, usize)>,
    /// `√(2(n-2))`, the Killing norm of each `e_rs`
    norm_factor: f64,
    /// nonzero constants, sorted by `(i, j)`
    triples: Vec<Triple>,
    /// per-`k` value of `Σ_{i,j} (c_ij^k)²` over ordered pairs
    sum_sq: Vec<f64>,
}

impl NiceBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `n(n-1)/2`
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    /// `so(4)` is semisimple but not simple.
    pub fn is_simple(&self) -> bool {
        self.n != 4
    }

    /// 0-based matrix index pair of basis element `k`.
    pub fn pair(&self, k: usize) -> (usize, usize) {
        self.pairs[k]
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    /// `Σ_{i,j} (c_ij^k)²` for each `k`; identically 1 with the Killing
    /// normalization.
    pub fn sum_sq(&self) -> &[f64] {
        &self.sum_sq
    }

    fn check_metric(&self, x: &[f64]) -> Result<(), SonError> {
        if x.len() != self.dim {
            return Err(SonError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        for (i, &v) in x.iter().enumerate() {
            let ok = v.is_finite() && v > 0.0;
            if !ok {
                return Err(SonError::NonPositiveEntry { index: i, value: v });
            }
        }
        Ok(())
    }
}

fn skew_basis_matrix(n: usize, r: usize, s: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    m[r * n + s] = 1.0;
    m[s * n + r] = -1.0;
    m
}

fn commutator(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let mut acc = 0.0;
            for t in 0..n {
                acc += a[r * n + t] * b[t * n + c] - b[r * n + t] * a[t * n + c];
            }
            m[r * n + c] = acc;
        }
    }
    m
}

fn trace_product(n: usize, a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            acc += a[r * n + c] * b[c * n + r];
        }
    }
    acc
}

/// Killing metric of `so(n)` on matrices: `g_kil(X, Y) = -(n-2) tr(XY)`.
pub fn killing_metric(n: usize, a: &[f64], b: &[f64]) -> f64 {
    -((n as f64) - 2.0) * trace_product(n, a, b)
}

/// Builds the nice basis of `so(n)` by brute-force commutators.
pub fn build_nice_basis(n: usize) -> Result<NiceBasis, SonError> {
    if n < 3 {
        return Err(SonError::NTooSmall(n));
    }
    let dim = n * (n - 1) / 2;
    let mut pairs = Vec::with_capacity(dim);
    for r in 0..n {
        for s in (r + 1)..n {
            pairs.push((r, s));
        }
    }
    let mats: Vec<Vec<f64>> = pairs
        .iter()
        .map(|&(r, s)| skew_basis_matrix(n, r, s))
        .collect();
    let norm_sq = 2.0 * ((n as f64) - 2.0);
    let norm_factor = sqrt(norm_sq);

    let mut triples = Vec::new();
    let mut sum_sq = vec![0.0; dim];
    for i in 0..dim {
        for j in (i + 1)..dim {
            let bracket = commutator(n, &mats[i], &mats[j]);
            for (k, ek) in mats.iter().enumerate() {
                // c_ij^k = g_kil([ē_i, ē_j], ē_k) with ē = e / norm_factor
                let c = killing_metric(n, &bracket, ek) / (norm_sq * norm_factor);
                if c != 0.0 {
                    triples.push(Triple { i, j, k, c });
                    // the ordered-pair sum counts (i,j) and (j,i)
                    sum_sq[k] += 2.0 * c * c;
                }
            }
        }
    }
    Ok(NiceBasis {
        n,
        dim,
        pairs,
        norm_factor,
        triples,
        sum_sq,
    })
}

/// Max over `k ≠ l` with `x_k ≠ x_l` of `|Σ_{i,j} c_ij^k c_ij^l / (x_i x_j)|`,
/// the obstruction to `H_kil` being `g`-harmonic. Each unordered pair carries
/// a single nonzero constant in a nice basis, so every summand vanishes and
/// the residual is exactly zero.
pub fn harmonicity_residual(basis: &NiceBasis, x: &[f64]) -> Result<f64, SonError> {
    basis.check_metric(x)?;
    Ok(harmonicity_residual_raw(basis.dim, &basis.triples, x))
}

/// Same residual over a raw triple table (which need not be nice); used as a
/// negative control in tests.
pub(crate) fn harmonicity_residual_raw(dim: usize, triples: &[Triple], x: &[f64]) -> f64 {
    let mut accum = vec![0.0f64; dim * dim];
    let mut idx = 0;
    while idx < triples.len() {
        // group the table entries sharing the same unordered pair (i, j)
        let (i, j) = (triples[idx].i, triples[idx].j);
        let mut end = idx;
        while end < triples.len() && triples[end].i == i && triples[end].j == j {
            end += 1;
        }
        let w = 2.0 / (x[i] * x[j]);
        for a in idx..end {
            for b in idx..end {
                if triples[a].k != triples[b].k {
                    accum[triples[a].k * dim + triples[b].k] += w * triples[a].c * triples[b].c;
                }
            }
        }
        idx = end;
    }
    let mut max = 0.0f64;
    for k in 0..dim {
        for l in 0..dim {
            if k != l && x[k] != x[l] {
                max = max.max(abs(accum[k * dim + l]));
            }
        }
    }
    max
}

/// Flow field of the diagonal generalized Ricci flow on SO(n):
/// `x_k' = -Σ (c_ij^k)² + ½ Σ (c_ij^k)² (x_i² + x_j² - x_k²)/(x_i x_j)
///        + ½ Σ (c_ij^k)² / (x_i x_j)`.
pub fn son_rhs(basis: &NiceBasis, x: &[f64]) -> Result<Vec<f64>, SonError> {
    basis.check_metric(x)?;
    Ok(son_rhs_unchecked(basis, x))
}

fn son_rhs_unchecked(basis: &NiceBasis, x: &[f64]) -> Vec<f64> {
    let dim = basis.dim;
    let mut term1 = vec![0.0; dim];
    let mut term2 = vec![0.0; dim];
    let mut term3 = vec![0.0; dim];
    for t in &basis.triples {
        let c2 = 2.0 * t.c * t.c; // both orders of (i, j)
        let prod = x[t.i] * x[t.j];
        term1[t.k] += c2;
        term2[t.k] += 0.5 * c2 * (x[t.i] * x[t.i] + x[t.j] * x[t.j] - x[t.k] * x[t.k]) / prod;
        term3[t.k] += 0.5 * c2 / prod;
    }
    (0..dim).map(|k| -term1[k] + term2[k] + term3[k]).collect()
}

/// The same field assembled from the Ricci tensor and `H²` of a bi-invariant
/// background: `x_k' = -2 ric_kk + ½ (H²)_kk` with
/// `ric_kk = ½ Σ (c_ij^k)² - ¼ Σ (c_ij^k)² (x_i² + x_j² - x_k²)/(x_i x_j)` and
/// `(H²)_kk = Σ (c_ij^k)² / (x_i x_j)`. A dual route for transcription checks.
pub fn son_rhs_assembled(basis: &NiceBasis, x: &[f64]) -> Result<Vec<f64>, SonError> {
    basis.check_metric(x)?;
    let dim = basis.dim;
    let mut ric = vec![0.0; dim];
    let mut h2 = vec![0.0; dim];
    for t in &basis.triples {
        let c2 = 2.0 * t.c * t.c;
        let prod = x[t.i] * x[t.j];
        ric[t.k] +=
            0.5 * c2 - 0.25 * c2 * (x[t.i] * x[t.i] + x[t.j] * x[t.j] - x[t.k] * x[t.k]) / prod;
        h2[t.k] += c2 / prod;
    }
    Ok((0..dim).map(|k| -2.0 * ric[k] + 0.5 * h2[k]).collect())
}

/// Diagonal of the flow Jacobian at the Killing metric, `(-Σ (c_ij^k)²)_k`;
/// all entries are -1 with the Killing normalization.
pub fn son_jacobian_at_killing(basis: &NiceBasis) -> Vec<f64> {
    basis.sum_sq.iter().map(|s| -s).collect()
}

/// Full analytic Jacobian of the flow field at `x` (row-major `dim × dim`):
/// `∂f_k/∂x_k = -x_k Σ (c_ij^k)²/(x_i x_j)` and, for `m ≠ k`,
/// `∂f_k/∂x_m = Σ_j (c_mj^k)² (x_m² - x_j² + x_k² - 1)/(x_m² x_j)`.
pub fn son_jacobian_analytic(basis: &NiceBasis, x: &[f64]) -> Result<Vec<f64>, SonError> {
    basis.check_metric(x)?;
    let dim = basis.dim;
    let mut jac = vec![0.0; dim * dim];
    for t in &basis.triples {
        let (i, j, k, c) = (t.i, t.j, t.k, t.c);
        let c2 = 2.0 * c * c;
        // diagonal: both orders of the pair
        jac[k * dim + k] += -x[k] * c2 / (x[i] * x[j]);
        // off-diagonal: differentiate with respect to each pair member
        jac[k * dim + i] +=
            c2 * (x[i] * x[i] - x[j] * x[j] + x[k] * x[k] - 1.0) / (2.0 * x[i] * x[i] * x[j]);
        jac[k * dim + j] +=
            c2 * (x[j] * x[j] - x[i] * x[i] + x[k] * x[k] - 1.0) / (2.0 * x[j] * x[j] * x[i]);
    }
    Ok(jac)
}

/// Finite-difference Jacobian of [`son_rhs`] (row-major), the oracle for the
/// analytic formulas.
pub fn son_jacobian_fd(basis: &NiceBasis, x: &[f64], h: f64) -> Result<Vec<f64>, SonError> {
    basis.check_metric(x)?;
    let dim = basis.dim;
    let mut jac = vec![0.0; dim * dim];
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    for m in 0..dim {
        xp[m] += h;
        xm[m] -= h;
        let fp = son_rhs(basis, &xp)?;
        let fm = son_rhs(basis, &xm)?;
        for k in 0..dim {
            jac[k * dim + m] = (fp[k] - fm[k]) / (2.0 * h);
        }
        xp[m] = x[m];
        xm[m] = x[m];
    }
    Ok(jac)
}

/// Integrates the SO(n) flow from `x0`, detecting convergence to the Killing
/// metric (all ones).
pub fn son_integrate(
    basis: &NiceBasis,
    x0: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory, FlowError> {
    if basis.n > MAX_INTEGRATION_N {
        return Err(FlowError::Config("n exceeds the integration cap"));
    }
    if x0.len() != basis.dim {
        return Err(FlowError::Config("initial metric has the wrong dimension"));
    }
    let rhs = move |x: &[f64], dx: &mut [f64]| -> Result<(), crate::curvature::DomainError> {
        for (i, &v) in x.iter().enumerate() {
            let ok = v.is_finite() && v > crate::space::METRIC_FLOOR;
            if !ok {
                return Err(crate::curvature::DomainError {
                    index: i + 1,
                    value: v,
                });
            }
        }
        dx.copy_from_slice(&son_rhs_unchecked(basis, x));
        Ok(())
    };
    let target = vec![1.0; basis.dim];
    integrate_raw(&rhs, x0, Some(&target), None, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::inf_norm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_n_rejected_and_so4_flagged() {
        assert!(matches!(build_nice_basis(2), Err(SonError::NTooSmall(2))));
        assert!(matches!(build_nice_basis(0), Err(SonError::NTooSmall(0))));
        let b4 = build_nice_basis(4).unwrap();
        assert!(!b4.is_simple());
        assert!(build_nice_basis(5).unwrap().is_simple());
    }

    #[test]
    fn so3_structure() {
        let b = build_nice_basis(3).unwrap();
        assert_eq!(b.dim(), 3);
        assert!(abs(b.norm_factor() - sqrt(2.0)) < 1e-15);
        // one unordered triangle, |c| = 1/√2
        assert_eq!(b.triples().len(), 3);
        for t in b.triples() {
            assert!(abs(abs(t.c) - 1.0 / sqrt(2.0)) < 1e-15);
        }
        for &s in b.sum_sq() {
            assert!(abs(s - 1.0) < 1e-15);
        }
    }

    #[test]
    fn sum_of_squares_is_one_up_to_n8() {
        for n in 3..=8 {
            let b = build_nice_basis(n).unwrap();
            assert_eq!(b.dim(), n * (n - 1) / 2);
            for (k, &s) in b.sum_sq().iter().enumerate() {
                assert!(abs(s - 1.0) < 1e-12, "n={n} k={k}: {s}");
            }
        }
    }

    #[test]
    fn niceness_exhaustive() {
        for n in 3..=8 {
            let b = build_nice_basis(n).unwrap();
            // a nice table stores at most one k per unordered pair
            let mut seen = alloc::collections::BTreeSet::new();
            for t in b.triples() {
                assert!(
                    seen.insert((t.i, t.j)),
                    "pair ({}, {}) has two targets",
                    t.i,
                    t.j
                );
            }
        }
    }

    #[test]
    fn orthonormality_of_normalized_basis() {
        for n in 3..=6 {
            let b = build_nice_basis(n).unwrap();
            let nf = b.norm_factor();
            for i in 0..b.dim() {
                for j in 0..b.dim() {
                    let (ri, si) = b.pair(i);
                    let (rj, sj) = b.pair(j);
                    let mi = skew_basis_matrix(n, ri, si);
                    let mj = skew_basis_matrix(n, rj, sj);
                    let gk = killing_metric(n, &mi, &mj) / (nf * nf);
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(abs(gk - expect) < 1e-13);
                }
            }
        }
    }

    #[test]
    fn killing_form_brute_force_self_check() {
        // B(X, Y) = tr(ad X ad Y) computed over the basis equals (n-2) tr(XY)
        for n in 3..=6 {
            let b = build_nice_basis(n).unwrap();
            let dim = b.dim();
            // unnormalized constants m_ij^k: [e_i, e_j] = Σ_k m_ij^k e_k
            let mut m = vec![0.0; dim * dim * dim];
            for t in b.triples() {
                let c_unnorm = t.c * b.norm_factor(); // m_ij^k = c_ij^k · √(2(n-2))
                m[(t.i * dim + t.j) * dim + t.k] = c_unnorm;
                m[(t.j * dim + t.i) * dim + t.k] = -c_unnorm;
            }
            for a in 0..dim {
                for c in 0..dim {
                    // tr(ad_a ad_c) = Σ_{k,l} m_ak^l m_cl^k
                    let mut tr = 0.0;
                    for k in 0..dim {
                        for l in 0..dim {
                            tr += m[(a * dim + k) * dim + l] * m[(c * dim + l) * dim + k];
                        }
                    }
                    let (ra, sa) = b.pair(a);
                    let (rc, sc) = b.pair(c);
                    let ma = skew_basis_matrix(n, ra, sa);
                    let mc = skew_basis_matrix(n, rc, sc);
                    let killing = ((n as f64) - 2.0) * trace_product(n, &ma, &mc);
                    assert!(
                        abs(tr - killing) < 1e-10,
                        "n={n} B[{a}][{c}]: {tr} vs {killing}"
                    );
                }
            }
        }
    }

    #[test]
    fn harmonicity_residual_is_exactly_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 3..=8 {
            let b = build_nice_basis(n).unwrap();
            let x: Vec<f64> = (0..b.dim()).map(|_| rng.gen_range(0.2..5.0)).collect();
            assert_eq!(harmonicity_residual(&b, &x).unwrap(), 0.0);
            let ones = vec![1.0; b.dim()];
            assert_eq!(harmonicity_residual(&b, &ones).unwrap(), 0.0);
        }
    }

    #[test]
    fn corrupted_constants_break_harmonicity() {
        let b = build_nice_basis(4).unwrap();
        let mut bad = b.triples().to_vec();
        // give one pair a second target index: no longer nice
        let t0 = bad[0];
        let spurious = Triple {
            i: t0.i,
            j: t0.j,
            k: (t0.k + 1) % b.dim(),
            c: 0.3,
        };
        bad.insert(1, spurious);
        let x: Vec<f64> = (0..b.dim()).map(|i| 1.0 + 0.1 * i as f64).collect();
        assert!(harmonicity_residual_raw(b.dim(), &bad, &x) > 1e-3);
    }

    #[test]
    fn rhs_vanishes_exactly_at_killing_metric() {
        for n in 3..=8 {
            let b = build_nice_basis(n).unwrap();
            let ones = vec![1.0; b.dim()];
            let f = son_rhs(&b, &ones).unwrap();
            for v in f {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn isotropic_so3_metric_scalar_reduction() {
        // x = (a, a, a) gives f_k = (1/a² - 1)/2 for every k
        let b = build_nice_basis(3).unwrap();
        for &a in &[0.5, 0.9, 1.0, 2.0, 3.0] {
            let f = son_rhs(&b, &[a; 3]).unwrap();
            let expect = (1.0 / (a * a) - 1.0) / 2.0;
            for &v in &f {
                assert!(abs(v - expect) < 1e-14);
                if a > 1.0 {
                    assert!(v < 0.0);
                }
                if a < 1.0 {
                    assert!(v > 0.0);
                }
            }
        }
    }

    #[test]
    fn dual_route_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [4, 5] {
            let b = build_nice_basis(n).unwrap();
            for _ in 0..200 {
                let x: Vec<f64> = (0..b.dim()).map(|_| rng.gen_range(0.2..5.0)).collect();
                let f1 = son_rhs(&b, &x).unwrap();
                let f2 = son_rhs_assembled(&b, &x).unwrap();
                for k in 0..b.dim() {
                    assert!(
                        abs(f1[k] - f2[k]) <= 1e-10 * (1.0 + abs(f1[k])),
                        "n={n} k={k}: {} vs {}",
                        f1[k],
                        f2[k]
                    );
                }
            }
        }
    }

    #[test]
    fn jacobian_at_killing_is_minus_identity() {
        for n in 3..=8 {
            let b = build_nice_basis(n).unwrap();
            for v in son_jacobian_at_killing(&b) {
                assert!(abs(v + 1.0) < 1e-12);
            }
            // FD agreement including zero off-diagonals
            let ones = vec![1.0; b.dim()];
            let fd = son_jacobian_fd(&b, &ones, 1e-6).unwrap();
            for k in 0..b.dim() {
                for m in 0..b.dim() {
                    let expect = if k == m { -1.0 } else { 0.0 };
                    assert!(abs(fd[k * b.dim() + m] - expect) < 1e-5);
                }
            }
        }
    }

    #[test]
    fn analytic_jacobian_matches_fd_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in [4, 5] {
            let b = build_nice_basis(n).unwrap();
            for _ in 0..20 {
                let x: Vec<f64> = (0..b.dim()).map(|_| rng.gen_range(0.5..2.0)).collect();
                let an = son_jacobian_analytic(&b, &x).unwrap();
                let fd = son_jacobian_fd(&b, &x, 1e-5).unwrap();
                for e in 0..an.len() {
                    assert!(
                        abs(an[e] - fd[e]) < 1e-6,
                        "n={n} entry {e}: {} vs {}",
                        an[e],
                        fd[e]
                    );
                }
            }
        }
    }

    #[test]
    fn integration_converges_near_killing() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let cfg = IntegratorConfig::default();
        let b = build_nice_basis(4).unwrap();
        for _ in 0..5 {
            let x0: Vec<f64> = (0..b.dim())
                .map(|_| 1.0 + 0.05 * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            let traj = son_integrate(&b, &x0, &cfg).unwrap();
            assert_eq!(traj.verdict, crate::flow::Verdict::ConvergedToBrf);
            let end = &traj.last().state;
            let ones = vec![1.0; b.dim()];
            assert!(crate::math::inf_dist(end, &ones) <= 1e-6);
        }
    }

    #[test]
    fn large_perturbation_reports_honestly() {
        // far outside the local theorem's reach: one entry at 10; the verdict
        // is whatever the run produces, reported as-is
        let b = build_nice_basis(5).unwrap();
        let mut x0 = vec![1.0; b.dim()];
        x0[3] = 10.0;
        let traj = son_integrate(&b, &x0, &IntegratorConfig::default()).unwrap();
        assert!(!traj.samples.is_empty());
        let end = traj.last();
        assert!(end.t >= 0.0 && end.rhs_norm.is_finite());
        if traj.verdict == crate::flow::Verdict::ConvergedToBrf {
            let ones = vec![1.0; b.dim()];
            assert!(crate::math::inf_dist(&end.state, &ones) <= 1e-6);
        }
    }

    #[test]
    fn killing_start_converges_immediately() {
        let b = build_nice_basis(5).unwrap();
        let ones = vec![1.0; b.dim()];
        let traj = son_integrate(&b, &ones, &IntegratorConfig::default()).unwrap();
        assert_eq!(traj.verdict, crate::flow::Verdict::ConvergedToBrf);
        assert_eq!(traj.samples.len(), 1);
        assert_eq!(inf_norm(&son_rhs(&b, &ones).unwrap()), 0.0);
    }

    #[test]
    fn integration_cap_and_dimension_checks() {
        let b = build_nice_basis(13).unwrap(); // building is fine
        let x0 = vec![1.0; b.dim()];
        assert!(son_integrate(&b, &x0, &IntegratorConfig::default()).is_err());

        let b = build_nice_basis(4).unwrap();
        assert!(son_integrate(&b, &[1.0, 1.0], &IntegratorConfig::default()).is_err());
        assert!(matches!(
            son_rhs(&b, &[1.0; 3]),
            Err(SonError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            son_rhs(&b, &[1.0, -1.0, 1.0, 1.0, 1.0, 1.0]),
            Err(SonError::NonPositiveEntry { .. })
        ));
    }
}
