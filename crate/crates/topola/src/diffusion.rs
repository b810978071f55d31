//! Restart-diffusion closed forms.
//!
//! The converged state of a restart walk is `(1-α)(I - αW)⁻¹ P0`, solved as a
//! dense linear system. The enhanced variant (`trwr`) swaps the initial state
//! `P0 = A` for the enhanced network `A* = D A`; the common-neighbor variant
//! (`cnrwr`) swaps in `AAᵀA`.

use nalgebra::DMatrix;

use crate::enhance::{cn_matrix, nr_enhance, TopoLaParams};
use crate::error::{Error, Result};
use crate::net::AdjacencyMatrix;

/// How the transition matrix is built from the raw adjacency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `W[:,j] = A[:,j] / colsum(j)`; zero columns become uniform `1/n`.
    ColumnStochastic,
    /// `W[i,:] = A[i,:] / rowsum(i)`; zero rows become uniform `1/n`.
    RowStochastic,
    /// `D^{-1/2} A D^{-1/2}`; zero-degree nodes keep zero rows/columns.
    Symmetric,
}

impl Normalization {
    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::ColumnStochastic => "column-stochastic",
            Normalization::RowStochastic => "row-stochastic",
            Normalization::Symmetric => "symmetric",
        }
    }
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "column-stochastic" | "column" => Ok(Normalization::ColumnStochastic),
            "row-stochastic" | "row" => Ok(Normalization::RowStochastic),
            "symmetric" => Ok(Normalization::Symmetric),
            other => Err(Error::InvalidParameter(format!(
                "unknown normalization {other:?} (expected column-stochastic, row-stochastic or symmetric)"
            ))),
        }
    }
}

/// Restart-walk parameters: `alpha` is the walk-continuation weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RwrParams {
    alpha: f64,
    normalization: Normalization,
}

impl RwrParams {
    pub fn new(alpha: f64, normalization: Normalization) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            normalization,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffusionMethod {
    Rwr,
    Trwr,
    Cnrwr,
}

impl DiffusionMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DiffusionMethod::Rwr => "rwr",
            DiffusionMethod::Trwr => "trwr",
            DiffusionMethod::Cnrwr => "cnrwr",
        }
    }
}

impl std::str::FromStr for DiffusionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rwr" => Ok(DiffusionMethod::Rwr),
            "trwr" => Ok(DiffusionMethod::Trwr),
            "cnrwr" => Ok(DiffusionMethod::Cnrwr),
            other => Err(Error::InvalidParameter(format!(
                "unknown diffusion method {other:?}"
            ))),
        }
    }
}

/// Converged score matrix plus the parameters that produced it.
#[derive(Debug, Clone)]
pub struct DiffusionResult {
    pub scores: DMatrix<f64>,
    pub method: DiffusionMethod,
    pub alpha: f64,
    pub lambda: Option<f64>,
    pub normalization: Normalization,
}

/// Builds the transition matrix from a square nonnegative adjacency.
pub fn transition_matrix(
    a: &AdjacencyMatrix,
    normalization: Normalization,
) -> Result<DMatrix<f64>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let v = a.values();
    let n = a.rows();
    for j in 0..n {
        for i in 0..n {
            if v[(i, j)] < 0.0 {
                return Err(Error::NegativeEntry {
                    row: i,
                    col: j,
                    value: v[(i, j)],
                });
            }
        }
    }
    let mut w = v.clone();
    match normalization {
        Normalization::ColumnStochastic => {
            for j in 0..n {
                let s: f64 = w.column(j).sum();
                if s == 0.0 {
                    w.column_mut(j).fill(1.0 / n as f64);
                } else {
                    w.column_mut(j).scale_mut(1.0 / s);
                }
            }
        }
        Normalization::RowStochastic => {
            for i in 0..n {
                let s: f64 = w.row(i).sum();
                if s == 0.0 {
                    w.row_mut(i).fill(1.0 / n as f64);
                } else {
                    w.row_mut(i).scale_mut(1.0 / s);
                }
            }
        }
        Normalization::Symmetric => {
            let inv_sqrt: Vec<f64> = (0..n)
                .map(|i| {
                    let d: f64 = v.row(i).sum();
                    if d > 0.0 {
                        1.0 / d.sqrt()
                    } else {
                        0.0
                    }
                })
                .collect();
            for j in 0..n {
                for i in 0..n {
                    w[(i, j)] *= inv_sqrt[i] * inv_sqrt[j];
                }
            }
        }
    }
    Ok(w)
}

/// Solves `(I - αW) X = P0` by dense LU with partial pivoting and returns
/// `(1-α) X`. The residual is checked against `1e-10 · ‖P0‖_F`.
pub fn rwr_closed_form(w: &DMatrix<f64>, p0: &DMatrix<f64>, alpha: f64) -> Result<DMatrix<f64>> {
    if w.nrows() != w.ncols() {
        return Err(Error::NotSquare {
            rows: w.nrows(),
            cols: w.ncols(),
        });
    }
    if p0.nrows() != w.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "initial state has {} rows, transition matrix is {}x{}",
            p0.nrows(),
            w.nrows(),
            w.ncols()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let n = w.nrows();
    let system = DMatrix::identity(n, n) - w * alpha;
    let solution = system.clone().lu().solve(p0).ok_or(Error::SingularSystem)?;
    let residual = (&system * &solution - p0).norm();
    if residual > 1e-10 * p0.norm().max(1.0) {
        return Err(Error::SingularSystem);
    }
    Ok(solution * (1.0 - alpha))
}

/// Folds a rectangular relation into its square symmetric block form
/// `[[0, A], [Aᵀ, 0]]`.
pub fn fold_bipartite(a: &AdjacencyMatrix) -> AdjacencyMatrix {
    let v = a.values();
    let (n, m) = (v.nrows(), v.ncols());
    let mut block = DMatrix::zeros(n + m, n + m);
    block.view_mut((0, n), (n, m)).copy_from(v);
    block.view_mut((n, 0), (m, n)).copy_from(&v.transpose());
    AdjacencyMatrix::new(block, None, None, true).expect("block form is symmetric and finite")
}

fn fold_initial_state(p0: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, m) = (p0.nrows(), p0.ncols());
    let mut block = DMatrix::zeros(n + m, n + m);
    block.view_mut((0, n), (n, m)).copy_from(p0);
    block.view_mut((n, 0), (m, n)).copy_from(&p0.transpose());
    block
}

fn unfold_scores(scores: &DMatrix<f64>, n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |i, j| 0.5 * (scores[(i, n + j)] + scores[(n + j, i)]))
}

/// Runs the closed form with the network itself as the initial state. On a
/// rectangular input the diffusion happens on the folded block form and the
/// scores come back in the original `n×m` shape.
pub fn rwr(a: &AdjacencyMatrix, params: &RwrParams) -> Result<DiffusionResult> {
    let scores = diffuse_initial_state(a, a.values().clone(), params)?;
    Ok(DiffusionResult {
        scores,
        method: DiffusionMethod::Rwr,
        alpha: params.alpha(),
        lambda: None,
        normalization: params.normalization(),
    })
}

/// Enhanced restart walk: identical to enhancing the network first and then
/// running the plain closed form on it as the initial state.
pub fn trwr(
    a: &AdjacencyMatrix,
    params: &RwrParams,
    topo: &TopoLaParams,
) -> Result<DiffusionResult> {
    let enhanced = nr_enhance(a, topo)?;
    let scores = diffuse_initial_state(a, enhanced.into_values(), params)?;
    Ok(DiffusionResult {
        scores,
        method: DiffusionMethod::Trwr,
        alpha: params.alpha(),
        lambda: Some(topo.lambda()),
        normalization: params.normalization(),
    })
}

/// Common-neighbor-enhanced restart walk: initial state `(AAᵀ) A`.
pub fn cnrwr(a: &AdjacencyMatrix, params: &RwrParams) -> Result<DiffusionResult> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let p0 = cn_matrix(a) * a.values();
    let scores = diffuse_initial_state(a, p0, params)?;
    Ok(DiffusionResult {
        scores,
        method: DiffusionMethod::Cnrwr,
        alpha: params.alpha(),
        lambda: None,
        normalization: params.normalization(),
    })
}

/// Shared diffusion core: square inputs run directly, rectangular inputs run
/// on the folded block form. `p0` must have the shape of `a`.
pub(crate) fn diffuse_initial_state(
    a: &AdjacencyMatrix,
    p0: DMatrix<f64>,
    params: &RwrParams,
) -> Result<DMatrix<f64>> {
    if a.is_square() {
        let w = transition_matrix(a, params.normalization())?;
        rwr_closed_form(&w, &p0, params.alpha())
    } else {
        let folded = fold_bipartite(a);
        let w = transition_matrix(&folded, params.normalization())?;
        let scores = rwr_closed_form(&w, &fold_initial_state(&p0), params.alpha())?;
        Ok(unfold_scores(&scores, a.rows(), a.cols()))
    }
}
