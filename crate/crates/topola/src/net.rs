//! Graph/matrix data model and file ingestion.
//!
//! Everything downstream consumes a dense [`AdjacencyMatrix`]. Networks are
//! small enough (a few thousand nodes) that densifying at ingestion keeps the
//! spectral code simple and exact.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative tolerance for declaring a matrix symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dense real network/similarity matrix. Immutable after construction; all
/// entries are guaranteed finite.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    values: DMatrix<f64>,
    labels_row: Option<Vec<String>>,
    labels_col: Option<Vec<String>>,
    symmetric: bool,
}

impl AdjacencyMatrix {
    /// Builds a matrix, verifying finiteness and (when declared) symmetry
    /// within `SYMMETRY_TOL * max|A|`.
    pub fn new(
        values: DMatrix<f64>,
        labels_row: Option<Vec<String>>,
        labels_col: Option<Vec<String>>,
        symmetric: bool,
    ) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::EmptyInput);
        }
        check_finite(&values)?;
        if let Some(labels) = &labels_row {
            if labels.len() != values.nrows() {
                return Err(Error::ShapeMismatch(format!(
                    "{} row labels for {} rows",
                    labels.len(),
                    values.nrows()
                )));
            }
        }
        if let Some(labels) = &labels_col {
            if labels.len() != values.ncols() {
                return Err(Error::ShapeMismatch(format!(
                    "{} column labels for {} columns",
                    labels.len(),
                    values.ncols()
                )));
            }
        }
        if symmetric {
            if values.nrows() != values.ncols() {
                return Err(Error::NotSquare {
                    rows: values.nrows(),
                    cols: values.ncols(),
                });
            }
            if let Some((i, j)) = asymmetry_witness(&values) {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
        Ok(Self {
            values,
            labels_row,
            labels_col,
            symmetric,
        })
    }

    /// Wraps a dense matrix, auto-detecting the symmetric flag.
    pub fn from_dense(values: DMatrix<f64>) -> Result<Self> {
        let symmetric = values.nrows() == values.ncols() && asymmetry_witness(&values).is_none();
        Self::new(values, None, None, symmetric)
    }

    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn cols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn labels_row(&self) -> Option<&[String]> {
        self.labels_row.as_deref()
    }

    pub fn labels_col(&self) -> Option<&[String]> {
        self.labels_col.as_deref()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// True when every entry is exactly 0.0 or 1.0.
    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Row sums; on a 0/1 symmetric matrix these are node degrees.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows()).map(|i| self.values.row(i).sum()).collect()
    }

    /// Returns the index pair of the first non-0/1 entry, if any.
    pub(crate) fn binary_witness(&self) -> Option<(usize, usize, f64)> {
        for j in 0..self.cols() {
            for i in 0..self.rows() {
                let v = self.values[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Some((i, j, v));
                }
            }
        }
        None
    }

    pub(crate) fn require_binary(&self) -> Result<()> {
        match self.binary_witness() {
            Some((row, col, value)) => Err(Error::NotBinary { row, col, value }),
            None => Ok(()),
        }
    }
}

fn check_finite(values: &DMatrix<f64>) -> Result<()> {
    for j in 0..values.ncols() {
        for i in 0..values.nrows() {
            if !values[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

fn asymmetry_witness(values: &DMatrix<f64>) -> Option<(usize, usize)> {
    if values.nrows() != values.ncols() {
        return None;
    }
    let scale = values.amax();
    let tol = SYMMETRY_TOL * scale.max(1e-300);
    for i in 0..values.nrows() {
        for j in (i + 1)..values.ncols() {
            if (values[(i, j)] - values[(j, i)]).abs() > tol {
                return Some((i, j));
            }
        }
    }
    None
}

/// Bijection between node labels and zero-based indices, in a stable order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeIndex {
    labels: Vec<String>,
    positions: HashMap<String, usize>,
}

impl NodeIndex {
    pub fn from_labels(labels: Vec<String>) -> Result<Self> {
        let mut positions = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if positions.insert(label.clone(), i).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate node label {label:?}"
                )));
            }
        }
        Ok(Self { labels, positions })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(String::as_str)
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.positions.get(label).copied()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Parsed edge list before densification. Weights are finite and duplicate
/// edges with conflicting weights have already been rejected.
#[derive(Debug, Clone, Default)]
pub struct EdgeList {
    edges: Vec<(String, String, f64)>,
}

impl EdgeList {
    pub fn edges(&self) -> &[(String, String, f64)] {
        &self.edges
    }

    /// Parses edge-list text: one `u v [w]` triple per line, `#` comments and
    /// blank lines ignored. With `weighted` unset a third field is an error
    /// and every edge gets weight 1. Identical duplicates are dropped;
    /// duplicates with a different weight (in either orientation when
    /// undirected) are an ingestion error.
    pub fn parse(text: &str, directed: bool, weighted: bool) -> Result<Self> {
        let mut edges = Vec::new();
        let mut seen: HashMap<(String, String), f64> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let (u, v, w) = match (fields.len(), weighted) {
                (2, _) => (fields[0], fields[1], 1.0),
                (3, true) => {
                    let w: f64 = fields[2].parse().map_err(|_| Error::Parse {
                        line: lineno + 1,
                        message: format!("invalid weight {:?}", fields[2]),
                    })?;
                    if !w.is_finite() {
                        return Err(Error::Parse {
                            line: lineno + 1,
                            message: format!("non-finite weight {w}"),
                        });
                    }
                    (fields[0], fields[1], w)
                }
                (3, false) => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: "unexpected weight field on unweighted input".into(),
                    })
                }
                (n, _) => {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("expected `u v [w]`, found {n} fields"),
                    })
                }
            };
            let key = if directed || u <= v {
                (u.to_string(), v.to_string())
            } else {
                (v.to_string(), u.to_string())
            };
            match seen.get(&key) {
                Some(&prev) if prev != w => {
                    return Err(Error::ConflictingEdge {
                        u: u.to_string(),
                        v: v.to_string(),
                        first: prev,
                        second: w,
                    });
                }
                Some(_) => continue, // identical duplicate
                None => {
                    seen.insert(key, w);
                    edges.push((u.to_string(), v.to_string(), w));
                }
            }
        }
        if edges.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(Self { edges })
    }

    /// Densifies into a square matrix over the label universe. Node order is
    /// first-seen unless `sort_labels` asks for lexicographic.
    pub fn to_matrix(
        &self,
        directed: bool,
        sort_labels: bool,
    ) -> Result<(AdjacencyMatrix, NodeIndex)> {
        let mut order: Vec<String> = Vec::new();
        let mut known: HashMap<&str, ()> = HashMap::new();
        for (u, v, _) in &self.edges {
            for label in [u, v] {
                if known.insert(label, ()).is_none() {
                    order.push(label.clone());
                }
            }
        }
        if sort_labels {
            order.sort();
        }
        let index = NodeIndex::from_labels(order)?;
        let n = index.len();
        let mut values = DMatrix::zeros(n, n);
        for (u, v, w) in &self.edges {
            let i = index.index(u).expect("label indexed above");
            let j = index.index(v).expect("label indexed above");
            values[(i, j)] = *w;
            if !directed {
                values[(j, i)] = *w;
            }
        }
        let labels = index.labels().to_vec();
        let matrix = AdjacencyMatrix::new(values, Some(labels.clone()), Some(labels), !directed)?;
        Ok((matrix, index))
    }
}

/// Loads an edge-list file. See [`EdgeList::parse`] for the format.
pub fn load_edge_list(
    path: impl AsRef<Path>,
    directed: bool,
    weighted: bool,
    sort_labels: bool,
) -> Result<(AdjacencyMatrix, NodeIndex)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    parse_edge_list(&text, directed, weighted, sort_labels)
}

/// String-level ingestion used by [`load_edge_list`] and the tests.
pub fn parse_edge_list(
    text: &str,
    directed: bool,
    weighted: bool,
    sort_labels: bool,
) -> Result<(AdjacencyMatrix, NodeIndex)> {
    EdgeList::parse(text, directed, weighted)?.to_matrix(directed, sort_labels)
}

/// Loads a dense CSV matrix (no header, one row per line). The symmetric flag
/// is auto-detected.
pub fn load_dense_matrix(path: impl AsRef<Path>) -> Result<AdjacencyMatrix> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })?;
    parse_dense_matrix(&text)
}

pub fn parse_dense_matrix(text: &str) -> Result<AdjacencyMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for cell in line.split(',') {
            let cell = cell.trim();
            let value: f64 = cell.parse().map_err(|_| Error::Parse {
                line: lineno + 1,
                message: format!("invalid number {cell:?} in column {}", row.len() + 1),
            })?;
            row.push(value);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("ragged row: {} cells, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    let nrows = rows.len();
    let ncols = rows[0].len();
    let values = DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]);
    AdjacencyMatrix::from_dense(values)
}

/// Formats a matrix as CSV using shortest round-trip decimal representation,
/// so `load(save(A))` reproduces `A` exactly.
pub fn format_dense_matrix(matrix: &AdjacencyMatrix) -> String {
    let values = matrix.values();
    let mut out = String::new();
    for i in 0..values.nrows() {
        for j in 0..values.ncols() {
            if j > 0 {
                out.push(',');
            }
            let _ = write!(out, "{}", values[(i, j)]);
        }
        out.push('\n');
    }
    out
}

pub fn save_dense_matrix(matrix: &AdjacencyMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_dense_matrix(matrix)).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}

/// Formats a square labeled matrix as an edge list. One self-edge line per
/// node comes first, carrying the diagonal value (usually 0): it registers
/// every label in index order, so reloading reproduces the matrix and the
/// label order exactly. Symmetric matrices then emit the upper triangle
/// (reload with `directed = false`), others every nonzero off-diagonal cell
/// (reload with `directed = true`). Weights are always written; reload with
/// `weighted = true`.
pub fn format_edge_list(matrix: &AdjacencyMatrix, index: &NodeIndex) -> Result<String> {
    if !matrix.is_square() {
        return Err(Error::NotSquare {
            rows: matrix.rows(),
            cols: matrix.cols(),
        });
    }
    if index.len() != matrix.rows() {
        return Err(Error::ShapeMismatch(format!(
            "index has {} labels for a {}-node matrix",
            index.len(),
            matrix.rows()
        )));
    }
    let values = matrix.values();
    let n = matrix.rows();
    let mut out = String::new();
    for i in 0..n {
        let label = index.label(i).unwrap();
        let _ = writeln!(out, "{} {} {}", label, label, values[(i, i)]);
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || (matrix.is_symmetric() && j < i) {
                continue;
            }
            let w = values[(i, j)];
            if w != 0.0 {
                let _ = writeln!(
                    out,
                    "{} {} {}",
                    index.label(i).unwrap(),
                    index.label(j).unwrap(),
                    w
                );
            }
        }
    }
    Ok(out)
}

pub fn save_edge_list(
    matrix: &AdjacencyMatrix,
    index: &NodeIndex,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_edge_list(matrix, index)?).map_err(|source| Error::Io {
        path: path.into(),
        source,
    })
}
