//! Spectral primitives: full SVD, blocked randomized QB factorization with a
//! fixed-precision stopping rule, sinΘ subspace distance, condition numbers.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::net::AdjacencyMatrix;

/// Max-norm tolerance for the orthonormality invariants.
pub const ORTHO_TOL: f64 = 1e-10;

/// Relative σ_min threshold below which a matrix is reported as numerically
/// rank-deficient (condition number +inf).
pub const RANK_TOL: f64 = 1e-13;

const SKETCH_STREAM: u64 = 0x51;

/// Thin SVD `A = U diag(S) Vt` with `S` nonnegative and non-increasing.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub s: Vec<f64>,
    pub vt: DMatrix<f64>,
}

impl SvdFactors {
    pub fn rank(&self) -> usize {
        self.s.len()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.u.clone();
        for (k, &sv) in self.s.iter().enumerate() {
            scaled.column_mut(k).scale_mut(sv);
        }
        scaled * &self.vt
    }

    /// Checks column/row orthonormality of the factors within [`ORTHO_TOL`].
    pub fn validate(&self) -> Result<()> {
        if self.u.ncols() != self.s.len() || self.vt.nrows() != self.s.len() {
            return Err(Error::ShapeMismatch(format!(
                "factor ranks disagree: u has {} columns, s has {}, vt has {} rows",
                self.u.ncols(),
                self.s.len(),
                self.vt.nrows()
            )));
        }
        let du = max_orthonormality_deviation(&self.u);
        if du > ORTHO_TOL {
            return Err(Error::NotOrthonormal { deviation: du });
        }
        let dv = max_orthonormality_deviation(&self.vt.transpose());
        if dv > ORTHO_TOL {
            return Err(Error::NotOrthonormal { deviation: dv });
        }
        if self.s.windows(2).any(|w| w[0] < w[1]) || self.s.iter().any(|&x| x < 0.0) {
            return Err(Error::Numerical(
                "singular values not nonnegative non-increasing".into(),
            ));
        }
        Ok(())
    }
}

/// Largest absolute entry of `MᵀM - I`.
pub fn max_orthonormality_deviation(m: &DMatrix<f64>) -> f64 {
    let k = m.ncols();
    let gram = m.transpose() * m;
    let mut dev: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((gram[(i, j)] - target).abs());
        }
    }
    dev
}

/// Relative reconstruction tolerance every returned factorization must meet.
const RECON_TOL: f64 = 1e-10;

/// Full thin SVD of a dense matrix, singular values sorted descending.
///
/// Every factorization is verified (reconstruction and orthonormality)
/// before being returned. The implicit-shift algorithm silently produces
/// wrong factors on some exactly rank-deficient inputs, so a failed check
/// falls back to an eigendecomposition of the smaller Gram matrix; if that
/// fails verification too, the error is reported instead of returning
/// unusable factors.
pub fn svd_dense(m: &DMatrix<f64>) -> Result<SvdFactors> {
    let dim = m.nrows().max(m.ncols());
    if let Some(svd) =
        nalgebra::SVD::try_new(m.clone(), true, true, f64::EPSILON, 4096 * dim.max(8))
    {
        if let (Some(u), Some(vt)) = (svd.u, svd.v_t) {
            let factors = SvdFactors {
                u,
                s: svd.singular_values.iter().copied().collect(),
                vt,
            };
            if factors_verified(m, &factors) {
                return Ok(factors);
            }
        }
    }
    let fallback = gram_eigen_svd(m)?;
    if factors_verified(m, &fallback) {
        Ok(fallback)
    } else {
        Err(Error::SvdFailed)
    }
}

fn factors_verified(m: &DMatrix<f64>, f: &SvdFactors) -> bool {
    if f.validate().is_err() {
        return false;
    }
    let scale = m.norm().max(f64::MIN_POSITIVE);
    (m - f.reconstruct()).norm() <= RECON_TOL * scale
}

/// SVD through the eigendecomposition of the smaller of `A Aᵀ` and `Aᵀ A`.
/// Singular values below the Gram noise floor are reported as exact zeros
/// and their vectors filled with an orthonormal complement.
fn gram_eigen_svd(m: &DMatrix<f64>) -> Result<SvdFactors> {
    let (n, mm) = (m.nrows(), m.ncols());
    let d = n.min(mm);
    let left_side = n <= mm;
    let gram = if left_side {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let gram_dim = gram.nrows();
    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
    let mut s: Vec<f64> = order
        .iter()
        .take(d)
        .map(|&i| eig.eigenvalues[i].max(0.0).sqrt())
        .collect();
    let smax = s.first().copied().unwrap_or(0.0);
    // eigenvalues of the Gram matrix are only resolved down to ~ε·λ₁, i.e.
    // singular values down to ~√ε·σ₁
    let cutoff = smax * 1e-7;
    let rank = s.iter().filter(|&&x| x > cutoff).count();
    for x in s.iter_mut().skip(rank) {
        *x = 0.0;
    }
    let mut w = DMatrix::zeros(gram_dim, d);
    for (c, &i) in order.iter().take(d).enumerate() {
        w.set_column(c, &eig.eigenvectors.column(i));
    }
    // the multiplied-through side: columns for zero singular values come from
    // an orthonormal complement of the leading ones
    let mut other = DMatrix::zeros(if left_side { mm } else { n }, d);
    for c in 0..rank {
        let col = if left_side {
            m.transpose() * w.column(c) / s[c]
        } else {
            m * w.column(c) / s[c]
        };
        other.set_column(c, &col);
    }
    if rank < d {
        let lead = other.columns(0, rank).into_owned();
        let comp = orthonormal_complement(&lead, d - rank);
        other.columns_mut(rank, d - rank).copy_from(&comp);
    }
    let factors = if left_side {
        SvdFactors {
            u: w,
            s,
            vt: other.transpose(),
        }
    } else {
        SvdFactors {
            u: other,
            s,
            vt: w.transpose(),
        }
    };
    Ok(factors)
}

/// `count` orthonormal columns orthogonal to the (orthonormal) columns of
/// `basis`, from a Householder QR of `[basis | I]`.
fn orthonormal_complement(basis: &DMatrix<f64>, count: usize) -> DMatrix<f64> {
    let n = basis.nrows();
    let r = basis.ncols();
    let mut stacked = DMatrix::zeros(n, r + n);
    stacked.columns_mut(0, r).copy_from(basis);
    stacked
        .columns_mut(r, n)
        .copy_from(&DMatrix::identity(n, n));
    let q = stacked.qr().q();
    q.columns(r, count).into_owned()
}

/// Full SVD of an adjacency matrix with `k = min(n, m)` retained factors.
pub fn full_svd(a: &AdjacencyMatrix) -> Result<SvdFactors> {
    svd_dense(a.values())
}

/// Stopping rule for [`randqb_fp`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QbMode {
    /// Stop once `k` singular directions are captured and truncate to `k`.
    Rank(usize),
    /// Stop once the Frobenius error indicator drops to `tol`.
    Tolerance(f64),
}

/// Blocked randomized QB factorization `A ≈ Q B` with column-orthonormal `Q`.
#[derive(Debug, Clone)]
pub struct QbFactors {
    pub q: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Frobenius estimate of `‖A - QB‖_F` from the incremental indicator
    /// `E = ‖A‖_F² - ‖B‖_F²`, clamped at zero.
    pub achieved_error: f64,
    /// Set in tolerance mode when even the full-rank factorization could not
    /// reach the requested tolerance.
    pub tolerance_unmet: bool,
}

/// Fixed-precision randomized QB factorization.
///
/// Blocks of `block` Gaussian sketches are drawn from a ChaCha stream seeded
/// by `seed`, refined with `power` subspace iterations (re-orthonormalizing
/// after every product), and appended until the stopping rule fires. The
/// error indicator `E = ‖A‖_F² - ‖B‖_F²` tracks the residual without ever
/// forming it. Deterministic: identical inputs give bit-identical factors.
pub fn randqb_fp(
    a: &AdjacencyMatrix,
    mode: QbMode,
    block: usize,
    power: usize,
    seed: u64,
) -> Result<QbFactors> {
    let m = a.values();
    let (n, mm) = (m.nrows(), m.ncols());
    let maxrank = n.min(mm);
    if block == 0 {
        return Err(Error::InvalidParameter("block size must be >= 1".into()));
    }
    let (target_cols, tol2) = match mode {
        QbMode::Rank(k) => {
            if k == 0 {
                return Err(Error::InvalidParameter("rank must be >= 1".into()));
            }
            if k > maxrank {
                return Err(Error::InvalidParameter(format!(
                    "rank {k} exceeds min(n, m) = {maxrank}"
                )));
            }
            (k.div_ceil(block).saturating_mul(block).min(maxrank), None)
        }
        QbMode::Tolerance(tol) => {
            if !(tol > 0.0) {
                return Err(Error::InvalidParameter("tolerance must be > 0".into()));
            }
            (maxrank, Some(tol * tol))
        }
    };

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(SKETCH_STREAM);

    let fro2 = m.iter().map(|x| x * x).sum::<f64>();
    let mut error2 = fro2;
    let mut q = DMatrix::<f64>::zeros(n, 0);
    let mut b = DMatrix::<f64>::zeros(0, mm);

    while q.ncols() < target_cols {
        if let Some(t2) = tol2 {
            if error2 <= t2 {
                break;
            }
        }
        let bs = block.min(target_cols - q.ncols());
        let omega = gaussian(&mut rng, mm, bs);
        let mut qi = orthonormal_columns(&(m * &omega - &q * (&b * &omega)));
        for _ in 0..power {
            let y = m.transpose() * &qi - b.transpose() * (q.transpose() * &qi);
            let z = orthonormal_columns(&y);
            qi = orthonormal_columns(&(m * &z - &q * (&b * &z)));
        }
        // re-orthonormalize against everything captured so far
        qi = orthonormal_columns(&(&qi - &q * (q.transpose() * &qi)));
        let bi = qi.transpose() * m - (qi.transpose() * &q) * &b;
        error2 -= bi.iter().map(|x| x * x).sum::<f64>();
        q = stack_columns(&q, &qi);
        b = stack_rows(&b, &bi);
    }

    let mut out = QbFactors {
        q,
        b,
        achieved_error: error2.max(0.0).sqrt(),
        tolerance_unmet: false,
    };
    match mode {
        QbMode::Rank(k) => {
            if out.q.ncols() > k {
                let small = svd_dense(&out.b)?;
                let ub = small.u.columns(0, k).into_owned();
                out.q *= ub;
                let mut bt = small.vt.rows(0, k).into_owned();
                for (i, &sv) in small.s.iter().take(k).enumerate() {
                    bt.row_mut(i).scale_mut(sv);
                }
                out.b = bt;
                let captured2 = small.s.iter().take(k).map(|x| x * x).sum::<f64>();
                out.achieved_error = (fro2 - captured2).max(0.0).sqrt();
            }
        }
        QbMode::Tolerance(tol) => {
            if error2.max(0.0).sqrt() > tol {
                out.tolerance_unmet = true;
            }
        }
    }
    Ok(out)
}

/// Lifts the small factor of a QB factorization to a rank-`k` SVD:
/// `QB = Q (Ub S Vt) → (Q Ub) S Vt`.
pub fn truncate_to_svd(qb: &QbFactors, k: usize) -> Result<SvdFactors> {
    let available = qb.q.ncols().min(qb.b.ncols());
    if k == 0 {
        return Err(Error::InvalidParameter("rank must be >= 1".into()));
    }
    if k > available {
        return Err(Error::InvalidParameter(format!(
            "rank {k} exceeds the {available} available factor columns"
        )));
    }
    let small = svd_dense(&qb.b)?;
    let u = &qb.q * small.u.columns(0, k).into_owned();
    let s = small.s[..k].to_vec();
    let vt = small.vt.rows(0, k).into_owned();
    Ok(SvdFactors { u, s, vt })
}

/// Largest principal-angle sine between the column spans of two orthonormal
/// matrices of identical shape: `‖U⊥ᵀ V‖₂` computed as `σ_max((I - UUᵀ)V)`.
pub fn sin_theta(u1: &DMatrix<f64>, u2: &DMatrix<f64>) -> Result<f64> {
    if u1.shape() != u2.shape() {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} vs {}x{}",
            u1.nrows(),
            u1.ncols(),
            u2.nrows(),
            u2.ncols()
        )));
    }
    for m in [u1, u2] {
        let dev = max_orthonormality_deviation(m);
        if dev > 1e-8 {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
    }
    let rejected = u2 - u1 * (u1.transpose() * u2);
    let top = svd_dense(&rejected)?.s.first().copied().unwrap_or(0.0);
    Ok(top.clamp(0.0, 1.0))
}

/// `σ_max / σ_min` over the `min(n, m)` singular values, or `+inf` when the
/// matrix is numerically rank-deficient (`σ_min ≤ RANK_TOL · σ_max`).
pub fn condition_number(a: &AdjacencyMatrix) -> Result<f64> {
    let s = svd_dense(a.values())?.s;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(Error::InvalidParameter(
            "condition number is undefined for the zero matrix".into(),
        ));
    }
    let smin = s.last().copied().unwrap_or(0.0);
    if smin <= RANK_TOL * smax {
        Ok(f64::INFINITY)
    } else {
        Ok(smax / smin)
    }
}

fn gaussian(rng: &mut ChaCha12Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Householder Q of the input; orthonormal columns even for rank-deficient
/// input.
fn orthonormal_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    m.clone().qr().q()
}

fn stack_columns(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

fn stack_rows(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{
        adjacency, gaussian_matrix, matrix_with_spectrum, random_orthonormal, rng,
    };

    #[test]
    fn identity_svd() {
        let f = full_svd(&adjacency(DMatrix::identity(3, 3))).unwrap();
        assert_eq!(f.s, vec![1.0, 1.0, 1.0]);
        f.validate().unwrap();
    }

    #[test]
    fn diagonal_svd_sorted() {
        let f = full_svd(&adjacency(DMatrix::from_diagonal(
            &nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]),
        )))
        .unwrap();
        assert_eq!(f.s, vec![3.0, 2.0, 1.0]);
        // signed permutations of the identity: each column has a single ±1
        for j in 0..3 {
            let col = f.u.column(j);
            let big: Vec<f64> = col.iter().filter(|x| x.abs() > 0.5).copied().collect();
            assert_eq!(big.len(), 1);
            assert!((big[0].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_rectangular_reconstructs() {
        let mut r = rng(11);
        let m = gaussian_matrix(&mut r, 10, 8);
        let f = svd_dense(&m).unwrap();
        f.validate().unwrap();
        let err = (&m - f.reconstruct()).norm();
        assert!(err <= 1e-8 * m.norm(), "reconstruction error {err}");
    }

    #[test]
    fn randqb_exact_rank_two() {
        let mut r = rng(5);
        let m = matrix_with_spectrum(&mut r, 50, 40, &[4.0, 1.5]);
        let a = adjacency(m.clone());
        let qb = randqb_fp(&a, QbMode::Rank(2), 16, 1, 7).unwrap();
        assert_eq!(qb.q.ncols(), 2);
        let err = (&m - &qb.q * &qb.b).norm();
        assert!(err <= 1e-8 * m.norm(), "residual {err}");
        assert!(qb.achieved_error <= 1e-8 * m.norm());
    }

    #[test]
    fn randqb_identity_full_rank() {
        let n = 12;
        let a = adjacency(DMatrix::identity(n, n));
        let qb = randqb_fp(&a, QbMode::Rank(n), 16, 1, 3).unwrap();
        let err = (a.values() - &qb.q * &qb.b).amax();
        assert!(err <= 1e-10, "max-abs residual {err}");
    }

    #[test]
    fn randqb_tolerance_mode_meets_requested_residual() {
        let mut r = rng(9);
        let m = gaussian_matrix(&mut r, 200, 150);
        let a = adjacency(m.clone());
        let tol = 0.1 * m.norm();
        let qb = randqb_fp(&a, QbMode::Tolerance(tol), 16, 1, 21).unwrap();
        assert!(!qb.tolerance_unmet);
        let explicit = (&m - &qb.q * &qb.b).norm();
        assert!(explicit <= tol, "explicit residual {explicit} > tol {tol}");
    }

    #[test]
    fn randqb_unreachable_tolerance_sets_flag() {
        let mut r = rng(13);
        let m = gaussian_matrix(&mut r, 12, 10);
        let a = adjacency(m.clone());
        let qb = randqb_fp(&a, QbMode::Tolerance(1e-30), 4, 1, 2).unwrap();
        assert!(qb.tolerance_unmet);
        assert_eq!(qb.q.ncols(), 10); // full factorization returned
    }

    #[test]
    fn randqb_is_deterministic() {
        let mut r = rng(17);
        let a = adjacency(gaussian_matrix(&mut r, 30, 25));
        let x = randqb_fp(&a, QbMode::Rank(8), 4, 1, 99).unwrap();
        let y = randqb_fp(&a, QbMode::Rank(8), 4, 1, 99).unwrap();
        assert_eq!(x.q, y.q);
        assert_eq!(x.b, y.b);
        let z = randqb_fp(&a, QbMode::Rank(8), 4, 1, 100).unwrap();
        assert_ne!(x.q, z.q);
    }

    #[test]
    fn randqb_rejects_bad_rank() {
        let a = adjacency(DMatrix::identity(4, 4));
        assert!(randqb_fp(&a, QbMode::Rank(5), 2, 1, 0).is_err());
        assert!(randqb_fp(&a, QbMode::Rank(0), 2, 1, 0).is_err());
    }

    #[test]
    fn truncate_recovers_diagonal_spectrum() {
        let a = adjacency(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            3.0, 2.0, 1.0,
        ])));
        let qb = randqb_fp(&a, QbMode::Rank(3), 16, 1, 1).unwrap();
        let f = truncate_to_svd(&qb, 2).unwrap();
        assert!((f.s[0] - 3.0).abs() < 1e-10);
        assert!((f.s[1] - 2.0).abs() < 1e-10);
        assert!(truncate_to_svd(&qb, 0).is_err());
    }

    #[test]
    fn truncate_matches_best_rank_k_of_qb() {
        let mut r = rng(23);
        let m = gaussian_matrix(&mut r, 20, 15);
        let a = adjacency(m);
        let qb = randqb_fp(&a, QbMode::Rank(10), 4, 1, 5).unwrap();
        let product = &qb.q * &qb.b;
        let direct = svd_dense(&product).unwrap();
        let lifted = truncate_to_svd(&qb, 6).unwrap();
        lifted.validate().unwrap();
        for i in 0..6 {
            assert!(
                (lifted.s[i] - direct.s[i]).abs() <= 1e-9 * direct.s[0],
                "singular value {i} mismatch"
            );
        }
        // same reconstruction as the direct best rank-6 of QB
        let mut udir = direct.u.columns(0, 6).into_owned();
        for (i, &sv) in direct.s.iter().take(6).enumerate() {
            udir.column_mut(i).scale_mut(sv);
        }
        let best = udir * direct.vt.rows(0, 6).into_owned();
        assert!((lifted.reconstruct() - best).amax() <= 1e-9 * direct.s[0]);
    }

    #[test]
    fn sin_theta_extremes() {
        let mut r = rng(31);
        let u = random_orthonormal(&mut r, 8, 3);
        assert!(sin_theta(&u, &u).unwrap() <= 1e-12);

        // orthogonal spans: first three vs last three coordinate axes
        let e = DMatrix::<f64>::identity(6, 6);
        let u1 = e.columns(0, 3).into_owned();
        let u2 = e.columns(3, 3).into_owned();
        assert!((sin_theta(&u1, &u2).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn sin_theta_matches_principal_angle_oracle_and_symmetry() {
        let mut r = rng(37);
        for _ in 0..20 {
            let u1 = random_orthonormal(&mut r, 12, 4);
            let u2 = random_orthonormal(&mut r, 12, 4);
            let ours = sin_theta(&u1, &u2).unwrap();
            // oracle: smallest singular value of U1ᵀU2 gives cos of the
            // largest principal angle
            let smin = svd_dense(&(u1.transpose() * &u2))
                .unwrap()
                .s
                .last()
                .copied()
                .unwrap();
            let oracle = (1.0 - smin * smin).max(0.0).sqrt();
            assert!((ours - oracle).abs() <= 1e-10, "{ours} vs oracle {oracle}");
            let flipped = sin_theta(&u2, &u1).unwrap();
            assert!((ours - flipped).abs() <= 1e-10);
            assert!((0.0..=1.0).contains(&ours));
        }
    }

    #[test]
    fn sin_theta_rejects_bad_input() {
        let mut r = rng(41);
        let u1 = random_orthonormal(&mut r, 8, 3);
        let u2 = random_orthonormal(&mut r, 8, 2);
        assert!(matches!(sin_theta(&u1, &u2), Err(Error::ShapeMismatch(_))));
        let not_ortho = gaussian_matrix(&mut r, 8, 3);
        assert!(matches!(
            sin_theta(&not_ortho, &not_ortho),
            Err(Error::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn weyl_inequality_on_random_perturbations() {
        let mut r = rng(43);
        for _ in 0..20 {
            let a = gaussian_matrix(&mut r, 10, 8);
            let h = gaussian_matrix(&mut r, 10, 8) * 0.05;
            let sa = svd_dense(&a).unwrap().s;
            let sp = svd_dense(&(&a + &h)).unwrap().s;
            let hnorm = svd_dense(&h).unwrap().s[0];
            for k in 0..sa.len() {
                assert!(
                    (sp[k] - sa[k]).abs() <= hnorm + 1e-12,
                    "Weyl violated at {k}"
                );
            }
        }
    }

    #[test]
    fn condition_numbers() {
        assert_eq!(
            condition_number(&adjacency(DMatrix::identity(4, 4))).unwrap(),
            1.0
        );
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![10.0, 1.0]));
        assert!((condition_number(&adjacency(d)).unwrap() - 10.0).abs() < 1e-12);

        // rank-2 3x3 matrix: one row is the sum of the others
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 2.0]);
        assert!(condition_number(&adjacency(m)).unwrap().is_infinite());

        assert!(condition_number(&adjacency(DMatrix::zeros(2, 2))).is_err());
    }

    #[test]
    fn gapped_spectrum_rank_mode_matches_full_svd() {
        let mut r = rng(47);
        // spectrum with a factor-2 gap after index 2; default block size 16
        // gives the oversampling the accuracy contract assumes
        let spectrum = [8.0, 6.0, 4.0, 1.9, 1.2, 0.7, 0.3];
        for _ in 0..5 {
            let m = matrix_with_spectrum(&mut r, 40, 30, &spectrum);
            let a = adjacency(m.clone());
            let qb = randqb_fp(&a, QbMode::Rank(3), 16, 1, 77).unwrap();
            let approx = truncate_to_svd(&qb, 3).unwrap();
            let full = svd_dense(&m).unwrap();
            for i in 0..3 {
                assert!(
                    (approx.s[i] - full.s[i]).abs() <= 1e-6 * full.s[0],
                    "σ_{i}: {} vs {}",
                    approx.s[i],
                    full.s[i]
                );
            }
        }
    }
}
