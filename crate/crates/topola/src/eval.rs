//! Cross-validated link-prediction experiments, node-pair analysis, and
//! feature-to-similarity ingestion.

use std::collections::HashSet;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::diffusion::{
    cnrwr, rwr, transition_matrix, trwr, DiffusionMethod, Normalization, RwrParams,
};
use crate::enhance::{cn_matrix, enhanced_from_svd, topola_distance, TopoLaParams};
use crate::error::{Error, Result};
use crate::metrics::{auc, aupr};
use crate::net::AdjacencyMatrix;
use crate::spectral::full_svd;

const FOLD_STREAM: u64 = 0xf0;
const INNER_STREAM: u64 = 0x1700;

/// Cells over which edges live and predictions are ranked: the strict upper
/// triangle for symmetric square matrices, all off-diagonal cells for
/// directed square ones, every cell for rectangular (bipartite) ones.
fn domain_cells(a: &AdjacencyMatrix) -> Vec<(usize, usize)> {
    let (n, m) = (a.rows(), a.cols());
    let mut cells = Vec::new();
    if !a.is_square() {
        for i in 0..n {
            for j in 0..m {
                cells.push((i, j));
            }
        }
    } else if a.is_symmetric() {
        for i in 0..n {
            for j in (i + 1)..n {
                cells.push((i, j));
            }
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    cells.push((i, j));
                }
            }
        }
    }
    cells
}

fn positive_cells(a: &AdjacencyMatrix) -> Vec<(usize, usize)> {
    let v = a.values();
    domain_cells(a)
        .into_iter()
        .filter(|&(i, j)| v[(i, j)] != 0.0)
        .collect()
}

/// Removes the given cells from a copy of the matrix, zeroing the mirrored
/// cell too when the matrix is symmetric.
fn matrix_without(a: &AdjacencyMatrix, cells: &[(usize, usize)]) -> AdjacencyMatrix {
    let mut values = a.values().clone();
    let mirror = a.is_square() && a.is_symmetric();
    for &(i, j) in cells {
        values[(i, j)] = 0.0;
        if mirror {
            values[(j, i)] = 0.0;
        }
    }
    AdjacencyMatrix::new(
        values,
        a.labels_row().map(<[String]>::to_vec),
        a.labels_col().map(<[String]>::to_vec),
        a.is_symmetric(),
    )
    .expect("zeroing cells preserves the invariants")
}

/// One cross-validation fold over the positive edge set.
#[derive(Debug, Clone)]
pub struct FoldSplit {
    pub fold_id: usize,
    pub train_edges: Vec<(usize, usize)>,
    pub test_edges: Vec<(usize, usize)>,
    pub seed: u64,
}

/// Partitions the positive cells into `k` folds of near-equal size,
/// deterministically for a given seed.
pub fn kfold_edge_split(a: &AdjacencyMatrix, k: usize, seed: u64) -> Result<Vec<FoldSplit>> {
    if k < 2 {
        return Err(Error::InvalidParameter("need at least two folds".into()));
    }
    let mut positives = positive_cells(a);
    if positives.len() < k {
        return Err(Error::TooFewEdges {
            have: positives.len(),
            need: k,
        });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(FOLD_STREAM);
    positives.shuffle(&mut rng);
    let mut folds: Vec<FoldSplit> = (0..k)
        .map(|fold_id| FoldSplit {
            fold_id,
            train_edges: Vec::new(),
            test_edges: Vec::new(),
            seed,
        })
        .collect();
    for (pos, &cell) in positives.iter().enumerate() {
        let f = pos % k;
        for (id, fold) in folds.iter_mut().enumerate() {
            if id == f {
                fold.test_edges.push(cell);
            } else {
                fold.train_edges.push(cell);
            }
        }
    }
    Ok(folds)
}

#[derive(Debug, Clone, Serialize)]
pub struct FoldScore {
    pub fold: usize,
    pub auc: f64,
    pub aupr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamRecord {
    pub alpha: f64,
    pub lambda: Option<f64>,
    pub normalization: String,
    pub seed: u64,
    /// Whether training edges were excluded from the ranked candidates.
    pub mask_train: bool,
    /// Negative-pool cap, when the absent pairs were thinned.
    pub max_negatives: Option<usize>,
}

/// Per-fold and aggregate scores of one cross-validated experiment.
#[derive(Debug, Clone, Serialize)]
pub struct LinkPredictionReport {
    pub method: String,
    pub params: ParamRecord,
    pub folds: Vec<FoldScore>,
    pub auc_mean: f64,
    pub auc_std: f64,
    pub aupr_mean: f64,
    pub aupr_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize(method: &str, params: ParamRecord, mut folds: Vec<FoldScore>) -> LinkPredictionReport {
    folds.sort_by_key(|f| f.fold);
    let (auc_mean, auc_std) = mean_std(&folds.iter().map(|f| f.auc).collect::<Vec<_>>());
    let (aupr_mean, aupr_std) = mean_std(&folds.iter().map(|f| f.aupr).collect::<Vec<_>>());
    LinkPredictionReport {
        method: method.to_string(),
        params,
        folds,
        auc_mean,
        auc_std,
        aupr_mean,
        aupr_std,
    }
}

fn cell_key(i: usize, j: usize) -> u64 {
    (i as u64) << 32 | j as u64
}

/// Scores of one trained model over the candidate cells, ranked against the
/// held-out positives.
///
/// Candidates are all domain cells except the training positives (which are
/// instead scored as negatives when `mask_train` is off). Self-pairs never
/// participate: the domain excludes them. With `negative_cap` set, absent
/// pairs beyond the cap are thinned by a deterministic stride over the
/// domain enumeration; positives are always kept.
fn evaluate_ranking(
    scores: &DMatrix<f64>,
    domain: &[(usize, usize)],
    symmetric_pairs: bool,
    test: &HashSet<u64>,
    train: &HashSet<u64>,
    mask_train: bool,
    negative_cap: Option<usize>,
) -> Result<(f64, f64)> {
    let mut values = Vec::with_capacity(domain.len());
    let mut labels = Vec::with_capacity(domain.len());
    for &(i, j) in domain {
        let key = cell_key(i, j);
        let is_train = train.contains(&key);
        if is_train && mask_train {
            continue;
        }
        let s = if symmetric_pairs {
            0.5 * (scores[(i, j)] + scores[(j, i)])
        } else {
            scores[(i, j)]
        };
        values.push(s);
        labels.push(!is_train && test.contains(&key));
    }
    if let Some(cap) = negative_cap {
        let negatives = labels.iter().filter(|&&l| !l).count();
        if cap == 0 {
            return Err(Error::InvalidParameter("negative cap must be >= 1".into()));
        }
        if negatives > cap {
            let stride = negatives.div_ceil(cap);
            let mut seen = 0usize;
            let mut kept_values = Vec::with_capacity(values.len());
            let mut kept_labels = Vec::with_capacity(labels.len());
            for (v, l) in values.into_iter().zip(labels) {
                if l || seen % stride == 0 {
                    kept_values.push(v);
                    kept_labels.push(l);
                }
                if !l {
                    seen += 1;
                }
            }
            values = kept_values;
            labels = kept_labels;
        }
    }
    Ok((auc(&values, &labels)?, aupr(&values, &labels)?))
}

/// Runs one diffusion method on a training matrix.
fn score_matrix(
    train: &AdjacencyMatrix,
    method: DiffusionMethod,
    rwr_params: &RwrParams,
    topo: Option<&TopoLaParams>,
) -> Result<DMatrix<f64>> {
    let result = match method {
        DiffusionMethod::Rwr => rwr(train, rwr_params)?,
        DiffusionMethod::Trwr => {
            let topo = topo
                .ok_or_else(|| Error::InvalidParameter("trwr needs a lambda parameter".into()))?;
            trwr(train, rwr_params, topo)?
        }
        DiffusionMethod::Cnrwr => cnrwr(train, rwr_params)?,
    };
    Ok(result.scores)
}

struct FoldContext {
    domain: Vec<(usize, usize)>,
    symmetric_pairs: bool,
}

impl FoldContext {
    fn new(a: &AdjacencyMatrix) -> Self {
        Self {
            domain: domain_cells(a),
            symmetric_pairs: a.is_square() && a.is_symmetric(),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_fold(
    a: &AdjacencyMatrix,
    ctx: &FoldContext,
    fold: &FoldSplit,
    method: DiffusionMethod,
    rwr_params: &RwrParams,
    topo: Option<&TopoLaParams>,
    mask_train: bool,
    max_negatives: Option<usize>,
) -> Result<FoldScore> {
    if fold.test_edges.is_empty() {
        return Err(Error::EmptyFold { fold: fold.fold_id });
    }
    let train_matrix = matrix_without(a, &fold.test_edges);
    for &(i, j) in &fold.test_edges {
        assert_eq!(
            train_matrix.values()[(i, j)],
            0.0,
            "test edge leaked into the training matrix"
        );
    }
    let scores = score_matrix(&train_matrix, method, rwr_params, topo)?;
    let test: HashSet<u64> = fold
        .test_edges
        .iter()
        .map(|&(i, j)| cell_key(i, j))
        .collect();
    let train: HashSet<u64> = fold
        .train_edges
        .iter()
        .map(|&(i, j)| cell_key(i, j))
        .collect();
    let (auc, aupr) = evaluate_ranking(
        &scores,
        &ctx.domain,
        ctx.symmetric_pairs,
        &test,
        &train,
        mask_train,
        max_negatives,
    )?;
    Ok(FoldScore {
        fold: fold.fold_id,
        auc,
        aupr,
    })
}

/// Ten-fold (by default) cross-validated link prediction with fixed
/// parameters. Per fold, the test edges are zeroed out of the input, the
/// diffusion runs on the training matrix, and every candidate cell is ranked:
/// held-out positives against absent pairs, training positives masked out
/// (or, with `mask_train` off, kept in the negative pool). `max_negatives`
/// thins the absent pairs on large networks; `None` ranks them all.
#[allow(clippy::too_many_arguments)]
pub fn run_link_prediction(
    a: &AdjacencyMatrix,
    method: DiffusionMethod,
    rwr_params: &RwrParams,
    topo: Option<&TopoLaParams>,
    k: usize,
    seed: u64,
    mask_train: bool,
    max_negatives: Option<usize>,
) -> Result<LinkPredictionReport> {
    let folds = kfold_edge_split(a, k, seed)?;
    let ctx = FoldContext::new(a);
    let scores: Result<Vec<FoldScore>> = folds
        .par_iter()
        .map(|fold| {
            run_fold(
                a,
                &ctx,
                fold,
                method,
                rwr_params,
                topo,
                mask_train,
                max_negatives,
            )
        })
        .collect();
    let params = ParamRecord {
        alpha: rwr_params.alpha(),
        lambda: topo.map(TopoLaParams::lambda),
        normalization: rwr_params.normalization().as_str().to_string(),
        seed,
        mask_train,
        max_negatives,
    };
    Ok(summarize(method.as_str(), params, scores?))
}

/// Parameters chosen on one fold's inner validation split.
#[derive(Debug, Clone, Serialize)]
pub struct FoldSelection {
    pub fold: usize,
    pub alpha: f64,
    pub lambda: Option<f64>,
}

/// Cross-validated experiment with per-fold grid selection of α (and λ for
/// the enhanced method) on an inner validation split.
#[derive(Debug, Clone, Serialize)]
pub struct GridSearchReport {
    pub method: String,
    pub normalization: String,
    pub seed: u64,
    pub folds: Vec<FoldScore>,
    pub selections: Vec<FoldSelection>,
    pub auc_mean: f64,
    pub auc_std: f64,
    pub aupr_mean: f64,
    pub aupr_std: f64,
}

/// Inner-validation grid search, one fold: holds out 10% of the training
/// edges, scores every (α, λ) combination against them, and returns the best
/// pair by validation average precision (first in grid order wins ties).
#[allow(clippy::too_many_arguments)]
fn select_parameters(
    a: &AdjacencyMatrix,
    ctx: &FoldContext,
    fold: &FoldSplit,
    method: DiffusionMethod,
    alpha_grid: &[f64],
    lambda_grid: &[f64],
    normalization: Normalization,
    mask_train: bool,
    max_negatives: Option<usize>,
) -> Result<(f64, Option<f64>)> {
    let mut rng = ChaCha12Rng::seed_from_u64(fold.seed);
    rng.set_stream(INNER_STREAM + fold.fold_id as u64);
    let mut train = fold.train_edges.clone();
    train.shuffle(&mut rng);
    let n_val = (train.len() / 10).max(1);
    let (val, inner_train) = train.split_at(n_val);

    let outer_train_matrix = matrix_without(a, &fold.test_edges);
    let inner_matrix = matrix_without(&outer_train_matrix, val);

    let val_set: HashSet<u64> = val.iter().map(|&(i, j)| cell_key(i, j)).collect();
    let inner_set: HashSet<u64> = inner_train.iter().map(|&(i, j)| cell_key(i, j)).collect();

    // initial states per λ; rwr and cnrwr have a single λ-independent state
    let lambdas: Vec<Option<f64>> = match method {
        DiffusionMethod::Trwr => lambda_grid.iter().map(|&l| Some(l)).collect(),
        _ => vec![None],
    };
    let states: Vec<DMatrix<f64>> = match method {
        DiffusionMethod::Rwr => vec![inner_matrix.values().clone()],
        DiffusionMethod::Cnrwr => vec![cn_matrix(&inner_matrix) * inner_matrix.values()],
        DiffusionMethod::Trwr => {
            let svd = full_svd(&inner_matrix)?;
            lambdas
                .iter()
                .map(|l| {
                    let params = TopoLaParams::new(l.unwrap())?;
                    Ok(enhanced_from_svd(&svd, &params))
                })
                .collect::<Result<Vec<_>>>()?
        }
    };

    let w = transition_matrix(&inner_matrix, normalization)?;
    let n = w.nrows();
    let mut best: Option<(f64, f64, Option<f64>)> = None;
    for &alpha in alpha_grid {
        let system = DMatrix::identity(n, n) - &w * alpha;
        let lu = system.lu();
        for (lambda, p0) in lambdas.iter().zip(&states) {
            let solved = lu.solve(p0).ok_or(Error::SingularSystem)?;
            let scores = solved * (1.0 - alpha);
            let (_, ap) = evaluate_ranking(
                &scores,
                &ctx.domain,
                ctx.symmetric_pairs,
                &val_set,
                &inner_set,
                mask_train,
                max_negatives,
            )?;
            if best.as_ref().is_none_or(|(b, _, _)| ap > *b) {
                best = Some((ap, alpha, *lambda));
            }
        }
    }
    let (_, alpha, lambda) = best.expect("grids are non-empty");
    Ok((alpha, lambda))
}

/// Cross-validated link prediction with per-fold (α, λ) selection on an
/// inner 10% validation split of the training edges.
#[allow(clippy::too_many_arguments)]
pub fn run_link_prediction_grid(
    a: &AdjacencyMatrix,
    method: DiffusionMethod,
    alpha_grid: &[f64],
    lambda_grid: &[f64],
    normalization: Normalization,
    k: usize,
    seed: u64,
    mask_train: bool,
    max_negatives: Option<usize>,
) -> Result<GridSearchReport> {
    if alpha_grid.is_empty() {
        return Err(Error::InvalidParameter("alpha grid is empty".into()));
    }
    if method == DiffusionMethod::Trwr && lambda_grid.is_empty() {
        return Err(Error::InvalidParameter("lambda grid is empty".into()));
    }
    let folds = kfold_edge_split(a, k, seed)?;
    let ctx = FoldContext::new(a);
    let outcome: Result<Vec<(FoldScore, FoldSelection)>> = folds
        .par_iter()
        .map(|fold| {
            let (alpha, lambda) = select_parameters(
                a,
                &ctx,
                fold,
                method,
                alpha_grid,
                lambda_grid,
                normalization,
                mask_train,
                max_negatives,
            )?;
            let rwr_params = RwrParams::new(alpha, normalization)?;
            let topo = lambda.map(TopoLaParams::new).transpose()?;
            let score = run_fold(
                a,
                &ctx,
                fold,
                method,
                &rwr_params,
                topo.as_ref(),
                mask_train,
                max_negatives,
            )?;
            Ok((
                score,
                FoldSelection {
                    fold: fold.fold_id,
                    alpha,
                    lambda,
                },
            ))
        })
        .collect();
    let (mut folds, mut selections): (Vec<FoldScore>, Vec<FoldSelection>) =
        outcome?.into_iter().unzip();
    folds.sort_by_key(|f| f.fold);
    selections.sort_by_key(|s| s.fold);
    let (auc_mean, auc_std) = mean_std(&folds.iter().map(|f| f.auc).collect::<Vec<_>>());
    let (aupr_mean, aupr_std) = mean_std(&folds.iter().map(|f| f.aupr).collect::<Vec<_>>());
    Ok(GridSearchReport {
        method: method.as_str().to_string(),
        normalization: normalization.as_str().to_string(),
        seed,
        folds,
        selections,
        auc_mean,
        auc_std,
        aupr_mean,
        aupr_std,
    })
}

/// The nine-value α grid used for model selection.
pub const ALPHA_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Per-pair topology record: shared neighbors, neighborhood union, Jaccard
/// similarity, latent distance, and the similarity band the pair falls in.
#[derive(Debug, Clone)]
pub struct PairRecord {
    pub i: usize,
    pub j: usize,
    pub cn: u64,
    pub union: u64,
    pub jaccard: f64,
    pub dtopo: f64,
    /// Band center (e.g. 0.05) when `jaccard` lies within `band ± width`.
    pub band: Option<f64>,
}

/// Default similarity bands (5%, 10%, 15%) and half-width (0.5%).
pub const DEFAULT_BANDS: [f64; 3] = [0.05, 0.10, 0.15];
pub const DEFAULT_BAND_WIDTH: f64 = 0.005;

/// Emits one record per unordered node pair with a nonempty neighborhood
/// union, on a symmetric 0/1 network.
pub fn pair_analysis(
    a: &AdjacencyMatrix,
    topo: &TopoLaParams,
    bands: &[f64],
    band_width: f64,
) -> Result<Vec<PairRecord>> {
    if !a.is_square() || !a.is_symmetric() {
        return Err(Error::InvalidParameter(
            "pair analysis needs a symmetric square matrix".into(),
        ));
    }
    a.require_binary()?;
    let n = a.rows();
    let cn = cn_matrix(a);
    let deg = a.row_sums();
    let d = topola_distance(a, topo)?;
    let mut records = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let shared = cn[(i, j)].round() as u64;
            let union = (deg[i] + deg[j]).round() as u64 - shared;
            if union == 0 {
                continue;
            }
            let jaccard = shared as f64 / union as f64;
            let band = bands
                .iter()
                .copied()
                .find(|b| (jaccard - b).abs() <= band_width);
            records.push(PairRecord {
                i,
                j,
                cn: shared,
                union,
                jaccard,
                dtopo: d.values()[(i, j)],
                band,
            });
        }
    }
    Ok(records)
}

/// CSV rendering of pair records with header
/// `i,j,cn,union,jaccard,dtopo,band`; the band column holds the band center
/// as a percentage (`5`, `10`, ...) or stays empty.
pub fn pair_records_csv(records: &[PairRecord]) -> String {
    let mut out = String::from("i,j,cn,union,jaccard,dtopo,band\n");
    for r in records {
        let band = r.band.map(|b| format!("{}", b * 100.0)).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.i, r.j, r.cn, r.union, r.jaccard, r.dtopo, band
        );
    }
    out
}

/// Similarity network from feature rows through a locally scaled Gaussian
/// kernel: `εᵢ` is the mean distance to the k nearest neighbors and
/// `G[i,j] = exp(-‖xᵢ-xⱼ‖² / (σ²(εᵢ+εⱼ)²))`.
pub fn local_scaling_kernel(
    features: &DMatrix<f64>,
    k: usize,
    sigma: f64,
) -> Result<AdjacencyMatrix> {
    let n = features.nrows();
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if n <= k {
        return Err(Error::InvalidParameter(format!(
            "need more rows than neighbors: n = {n}, k = {k}"
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter("sigma must be positive".into()));
    }
    let mut dist2 = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d2 = (features.row(i) - features.row(j)).norm_squared();
            dist2[(i, j)] = d2;
            dist2[(j, i)] = d2;
        }
    }
    let mut eps = vec![0.0f64; n];
    for i in 0..n {
        let mut d: Vec<f64> = (0..n)
            .filter(|&j| j != i)
            .map(|j| dist2[(i, j)].sqrt())
            .collect();
        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mean = d[..k].iter().sum::<f64>() / k as f64;
        // duplicate points collapse ε to zero; clamp to keep the kernel defined
        eps[i] = mean.max(1e-12);
    }
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let denom = sigma * sigma * (eps[i] + eps[j]) * (eps[i] + eps[j]);
            let v = (-dist2[(i, j)] / denom).exp();
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    AdjacencyMatrix::new(g, None, None, true)
}

/// Kernel defaults: 20 neighbors, σ = 0.5.
pub const KERNEL_DEFAULT_K: usize = 20;
pub const KERNEL_DEFAULT_SIGMA: f64 = 0.5;
