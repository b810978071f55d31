//! Seeded synthetic graphs for benchmarks and statistical checks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::net::AdjacencyMatrix;

const GNM_STREAM: u64 = 0x6e;
const PLANTED_STREAM: u64 = 0x9a;

/// Uniform random simple graph with exactly `edges` undirected edges.
pub fn gnm_random_graph(nodes: usize, edges: usize, seed: u64) -> Result<AdjacencyMatrix> {
    if nodes < 2 {
        return Err(Error::InvalidParameter("need at least two nodes".into()));
    }
    let max_edges = nodes * (nodes - 1) / 2;
    if edges > max_edges {
        return Err(Error::InvalidParameter(format!(
            "{edges} edges exceed the {max_edges} possible on {nodes} nodes"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(GNM_STREAM);
    let mut values = DMatrix::zeros(nodes, nodes);
    let mut placed = 0usize;
    while placed < edges {
        let i = rng.gen_range(0..nodes);
        let j = rng.gen_range(0..nodes);
        if i == j || values[(i, j)] == 1.0 {
            continue;
        }
        values[(i, j)] = 1.0;
        values[(j, i)] = 1.0;
        placed += 1;
    }
    AdjacencyMatrix::new(values, None, None, true)
}

/// Planted-partition graph: `blocks` equal groups, within-group edges with
/// probability `p_in`, cross-group with `p_out`.
pub fn planted_partition(
    nodes: usize,
    blocks: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<AdjacencyMatrix> {
    if blocks == 0 || blocks > nodes {
        return Err(Error::InvalidParameter(format!(
            "block count {blocks} invalid for {nodes} nodes"
        )));
    }
    for p in [p_in, p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "probability {p} outside [0, 1]"
            )));
        }
    }
    let block_size = nodes.div_ceil(blocks);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(PLANTED_STREAM);
    let mut values = DMatrix::zeros(nodes, nodes);
    for i in 0..nodes {
        for j in (i + 1)..nodes {
            let p = if i / block_size == j / block_size {
                p_in
            } else {
                p_out
            };
            if rng.gen::<f64>() < p {
                values[(i, j)] = 1.0;
                values[(j, i)] = 1.0;
            }
        }
    }
    AdjacencyMatrix::new(values, None, None, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gnm_places_exact_edge_count() {
        let g = gnm_random_graph(50, 200, 7).unwrap();
        let total: f64 = g.values().iter().sum();
        assert_eq!(total as usize, 400); // both orientations
        assert!(g.is_symmetric());
        assert!(g.is_binary());
        assert!(gnm_random_graph(5, 11, 0).is_err());
    }

    #[test]
    fn generators_are_seed_deterministic() {
        let a = gnm_random_graph(30, 100, 42).unwrap();
        let b = gnm_random_graph(30, 100, 42).unwrap();
        assert_eq!(a.values(), b.values());
        let c = gnm_random_graph(30, 100, 43).unwrap();
        assert_ne!(a.values(), c.values());

        let p = planted_partition(60, 6, 0.4, 0.02, 5).unwrap();
        let q = planted_partition(60, 6, 0.4, 0.02, 5).unwrap();
        assert_eq!(p.values(), q.values());
    }

    #[test]
    fn planted_partition_is_denser_within_blocks() {
        let g = planted_partition(100, 5, 0.5, 0.01, 11).unwrap();
        let v = g.values();
        let mut within = 0.0;
        let mut within_pairs = 0.0;
        let mut cross = 0.0;
        let mut cross_pairs = 0.0;
        for i in 0..100 {
            for j in (i + 1)..100 {
                if i / 20 == j / 20 {
                    within += v[(i, j)];
                    within_pairs += 1.0;
                } else {
                    cross += v[(i, j)];
                    cross_pairs += 1.0;
                }
            }
        }
        assert!(within / within_pairs > 10.0 * (cross / cross_pairs));
    }
}
