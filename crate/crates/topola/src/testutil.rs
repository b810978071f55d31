//! Shared helpers for the unit tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::net::{parse_edge_list, AdjacencyMatrix, NodeIndex};

/// 8-node example graph with a known path-count table between D and E.
pub const EIGHT_NODE_EXAMPLE: &str = "\
D A
D C
A B
A C
B E
B G
C E
C H
G E
G H
H F
";

pub fn eight_node_graph() -> (AdjacencyMatrix, NodeIndex) {
    parse_edge_list(EIGHT_NODE_EXAMPLE, false, false, false).unwrap()
}

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha12Rng, n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| rng.sample(StandardNormal))
}

/// Random matrix with orthonormal factors via thin QR.
pub fn random_orthonormal(rng: &mut ChaCha12Rng, n: usize, k: usize) -> DMatrix<f64> {
    gaussian_matrix(rng, n, k).qr().q()
}

/// Builds `U diag(s) Vᵀ` with random orthonormal `U`, `V`: a matrix with a
/// prescribed spectrum.
pub fn matrix_with_spectrum(rng: &mut ChaCha12Rng, n: usize, m: usize, s: &[f64]) -> DMatrix<f64> {
    let k = s.len();
    assert!(k <= n.min(m));
    let u = random_orthonormal(rng, n, k);
    let v = random_orthonormal(rng, m, k);
    let mut scaled = u;
    for (i, &sv) in s.iter().enumerate() {
        scaled.column_mut(i).scale_mut(sv);
    }
    scaled * v.transpose()
}

/// Random symmetric 0/1 graph with edge probability `p`.
pub fn random_graph(rng: &mut ChaCha12Rng, n: usize, p: f64) -> AdjacencyMatrix {
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p {
                values[(i, j)] = 1.0;
                values[(j, i)] = 1.0;
            }
        }
    }
    adjacency(values)
}

pub fn adjacency(values: DMatrix<f64>) -> AdjacencyMatrix {
    AdjacencyMatrix::from_dense(values).unwrap()
}
