//! Shared fixtures for the integration suites.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use topola::net::{load_edge_list, AdjacencyMatrix, NodeIndex};

pub fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha12Rng, n: usize, m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, m, |_, _| rng.sample(StandardNormal))
}

pub fn random_orthonormal(rng: &mut ChaCha12Rng, n: usize, k: usize) -> DMatrix<f64> {
    gaussian_matrix(rng, n, k).qr().q()
}

/// `U diag(s) Vᵀ` with random orthonormal factors: a matrix with an exactly
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

/// The bundled 8-node example graph with known walk counts between D and E.
pub fn path_example() -> (AdjacencyMatrix, NodeIndex) {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/path_example.edges");
    load_edge_list(path, false, false, false).expect("bundled example graph loads")
}
