//! Latent-distance matrix and the spectral network-enhancement maps.
//!
//! The distance matrix `D = A Aᵀ (λI + A Aᵀ)⁻¹` is never formed through an
//! inversion: with `A = U Σ Vᵀ` it equals `U diag(σ²/(σ²+λ)) Uᵀ`, and the
//! enhanced network `A* = D A` equals `U diag(σ³/(σ²+λ)) Vᵀ`. The spectral
//! route sidesteps the conditioning problems that plague these matrices and
//! makes the low-rank (`fastnr`) variant a one-line change.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::net::AdjacencyMatrix;
use crate::spectral::{full_svd, randqb_fp, truncate_to_svd, QbMode, SvdFactors, RANK_TOL};

/// Regularization weight λ controlling how strongly node degree discounts
/// the even-hop path sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopoLaParams {
    lambda: f64,
}

impl TopoLaParams {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive and finite, got {lambda}"
            )));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Dense symmetric distance matrix with eigenvalues `σᵢ²/(σᵢ²+λ)`.
#[derive(Debug, Clone)]
pub struct TopoLaDistanceMatrix {
    values: DMatrix<f64>,
    lambda: f64,
}

impl TopoLaDistanceMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Latent distance matrix `U diag(σ²/(σ²+λ)) Uᵀ` from the left singular
/// factors of `A`. Rectangular (bipartite) inputs are fine: the result is
/// always `n×n` over the row space.
pub fn topola_distance(a: &AdjacencyMatrix, params: &TopoLaParams) -> Result<TopoLaDistanceMatrix> {
    let svd = full_svd(a)?;
    Ok(distance_from_svd(&svd, params))
}

pub(crate) fn distance_from_svd(svd: &SvdFactors, params: &TopoLaParams) -> TopoLaDistanceMatrix {
    let lambda = params.lambda();
    let mut scaled = svd.u.clone();
    for (k, &sv) in svd.s.iter().enumerate() {
        scaled.column_mut(k).scale_mut(sv * sv / (sv * sv + lambda));
    }
    let mut values = scaled * svd.u.transpose();
    // the product is symmetric up to roundoff; make it exact
    let n = values.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (values[(i, j)] + values[(j, i)]);
            values[(i, j)] = avg;
            values[(j, i)] = avg;
        }
    }
    TopoLaDistanceMatrix { values, lambda }
}

/// Alternating-sign partial sum of the Neumann expansion
/// `Σ_{t=1..terms} (−1)^{t+1} (A Aᵀ / λ)ᵗ`.
#[derive(Debug, Clone)]
pub struct NeumannSeries {
    pub partial_sum: DMatrix<f64>,
    /// True when `σ_max² ≥ λ`, i.e. the series does not converge and the
    /// partial sum is not a valid approximation of the closed form. The
    /// closed form itself stays well defined.
    pub divergent: bool,
}

/// Brute-force series evaluation of the distance matrix; the oracle against
/// which the closed form is checked in the convergent regime.
pub fn topola_series(
    a: &AdjacencyMatrix,
    params: &TopoLaParams,
    terms: usize,
) -> Result<NeumannSeries> {
    if terms == 0 {
        return Err(Error::InvalidParameter(
            "need at least one series term".into(),
        ));
    }
    let lambda = params.lambda();
    let gram = a.values() * a.values().transpose();
    let top_eigen = gram
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0f64, |acc, &x| acc.max(x));
    let divergent = top_eigen >= lambda;
    let m = gram / lambda;
    let mut term = m.clone();
    let mut sum = m.clone();
    for _ in 2..=terms {
        term = -(&term * &m);
        sum += &term;
    }
    Ok(NeumannSeries {
        partial_sum: sum,
        divergent,
    })
}

/// Singular-value map of the enhancement: `σ ↦ σ³/(σ²+λ)`.
///
/// Monotone increasing in σ, always below σ, and gap-expanding above `√λ`.
pub fn singular_transform(sigma: f64, lambda: f64) -> f64 {
    debug_assert!(sigma >= 0.0 && lambda > 0.0);
    sigma * sigma * sigma / (sigma * sigma + lambda)
}

pub(crate) fn enhanced_from_svd(svd: &SvdFactors, params: &TopoLaParams) -> DMatrix<f64> {
    let lambda = params.lambda();
    let mut scaled = svd.u.clone();
    for (k, &sv) in svd.s.iter().enumerate() {
        scaled
            .column_mut(k)
            .scale_mut(singular_transform(sv, lambda));
    }
    scaled * &svd.vt
}

fn wrap_enhanced(a: &AdjacencyMatrix, values: DMatrix<f64>) -> Result<AdjacencyMatrix> {
    AdjacencyMatrix::new(
        values,
        a.labels_row().map(<[String]>::to_vec),
        a.labels_col().map(<[String]>::to_vec),
        false,
    )
    .and_then(|m| {
        // keep the symmetric flag when it still verifies
        if a.is_symmetric() {
            AdjacencyMatrix::new(
                m.values().clone(),
                a.labels_row().map(<[String]>::to_vec),
                a.labels_col().map(<[String]>::to_vec),
                true,
            )
            .or(Ok(m))
        } else {
            Ok(m)
        }
    })
}

/// Enhanced network `A* = D A = U diag(σ³/(σ²+λ)) Vᵀ`.
pub fn nr_enhance(a: &AdjacencyMatrix, params: &TopoLaParams) -> Result<AdjacencyMatrix> {
    let svd = full_svd(a)?;
    wrap_enhanced(a, enhanced_from_svd(&svd, params))
}

/// Enhancement of a randomized low-rank approximation: identical to
/// [`nr_enhance`] on exactly low-rank inputs, cheap on large ones.
pub fn fastnr_enhance(
    a: &AdjacencyMatrix,
    params: &TopoLaParams,
    mode: QbMode,
    block: usize,
    power: usize,
    seed: u64,
) -> Result<AdjacencyMatrix> {
    let qb = randqb_fp(a, mode, block, power, seed)?;
    let k = qb.q.ncols().min(qb.b.ncols());
    let svd = truncate_to_svd(&qb, k)?;
    wrap_enhanced(a, enhanced_from_svd(&svd, params))
}

/// Common-neighbor matrix `A Aᵀ`; on a 0/1 symmetric graph, entry (i, j)
/// counts shared neighbors.
pub fn cn_matrix(a: &AdjacencyMatrix) -> DMatrix<f64> {
    a.values() * a.values().transpose()
}

/// Candidate λ values `10^g · σ_median²` for `g ∈ -3..=3`, with the median
/// taken over singular values above the numerical-rank floor.
pub fn lambda_grid(a: &AdjacencyMatrix) -> Result<Vec<f64>> {
    let s = full_svd(a)?.s;
    let smax = s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Err(Error::InvalidParameter(
            "lambda grid is undefined for the zero matrix".into(),
        ));
    }
    let kept: Vec<f64> = s.iter().copied().filter(|&x| x > RANK_TOL * smax).collect();
    let median = kept[kept.len() / 2];
    Ok((-3..=3).map(|g| median * median * 10f64.powi(g)).collect())
}

/// Diagnostic: counts ordered triples where the distance entries break the
/// triangle inequality `d(i,j) ≤ d(i,k) + d(k,j)`, with the worst excess.
///
/// The latent distance is not proven to be metric; this reports the
/// empirical picture instead of asserting one.
pub fn triangle_inequality_violations(d: &TopoLaDistanceMatrix) -> (u64, f64) {
    let m = d.values();
    let n = m.nrows();
    let mut count = 0u64;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                let excess = m[(i, j)] - (m[(i, k)] + m[(k, j)]);
                if excess > 0.0 {
                    count += 1;
                    worst = worst.max(excess);
                }
            }
        }
    }
    (count, worst)
}

/// Maximum over all (row r, pair i<j) of
/// `(D[r,i] - D[r,j])² - (‖A(r)‖²/λ)·‖A(i) - A(j)‖²`.
///
/// The distance rows are ridge-regression solutions, so this quantity is
/// nonpositive up to roundoff: rows with similar topology get similar
/// distance profiles.
pub fn distance_row_bound_violation(a: &AdjacencyMatrix, params: &TopoLaParams) -> Result<f64> {
    let d = topola_distance(a, params)?;
    let d = d.values();
    let m = a.values();
    let n = m.nrows();
    let lambda = params.lambda();
    let row_norm2: Vec<f64> = (0..n).map(|r| m.row(r).norm_squared()).collect();
    let mut worst = f64::NEG_INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let diff2 = (m.row(i) - m.row(j)).norm_squared();
            for r in 0..n {
                let lhs = d[(r, i)] - d[(r, j)];
                let v = lhs * lhs - row_norm2[r] / lambda * diff2;
                if v > worst {
                    worst = v;
                }
            }
        }
    }
    Ok(worst)
}
