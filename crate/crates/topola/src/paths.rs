//! Exact walk counting and the loop-free / endpoint-loop / remainder
//! decomposition of n-hop walk counts on 0/1 graphs.
//!
//! These are enumeration oracles: they verify the spectral code on small
//! graphs and are guarded against combinatorial blowup.

use crate::error::{Error, Result};
use crate::net::AdjacencyMatrix;

/// Node-count guard for the simple-path enumerations.
pub const ENUMERATION_GUARD: usize = 20;

/// Decomposition of the `hops`-walk count between one node pair:
/// `total = loop_free[hops] + endpoint_loops + remainder`.
///
/// `endpoint_loops` counts walks that are a shorter loop-free path decorated
/// with out-and-back excursions at the two endpoints; with endpoint degrees
/// κᵢ, κⱼ it equals `Σ_{t<h/2} Σ_{u+v=h/2-t} κᵢᵘ κⱼᵛ · loop_free[2t]` for even
/// hop counts (the `t = h/2` term of that sum is the plain loop-free count
/// and is reported in `loop_free` instead, so the three parts are disjoint).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCensus {
    pub hops: usize,
    pub total: u64,
    /// `loop_free[l-1]` counts simple paths of exactly `l` edges, `l = 1..=hops`.
    pub loop_free: Vec<u64>,
    pub endpoint_loops: u64,
    pub remainder: u64,
}

impl PathCensus {
    pub fn loop_free_at(&self, l: usize) -> u64 {
        self.loop_free[l - 1]
    }
}

fn checked_index(a: &AdjacencyMatrix, i: usize, j: usize) -> Result<()> {
    let n = a.rows();
    if i >= n || j >= n {
        return Err(Error::InvalidParameter(format!(
            "node index out of range: ({i}, {j}) on {n} nodes"
        )));
    }
    Ok(())
}

fn binary_square(a: &AdjacencyMatrix) -> Result<Vec<Vec<u64>>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    a.require_binary()?;
    let n = a.rows();
    let v = a.values();
    Ok((0..n)
        .map(|i| (0..n).map(|j| v[(i, j)] as u64).collect())
        .collect())
}

fn checked_matmul(x: &[Vec<u64>], y: &[Vec<u64>]) -> Result<Vec<Vec<u64>>> {
    let n = x.len();
    let mut out = vec![vec![0u64; n]; n];
    for i in 0..n {
        for k in 0..n {
            let xv = x[i][k];
            if xv == 0 {
                continue;
            }
            for j in 0..n {
                let add = xv.checked_mul(y[k][j]).ok_or(Error::CountOverflow)?;
                out[i][j] = out[i][j].checked_add(add).ok_or(Error::CountOverflow)?;
            }
        }
    }
    Ok(out)
}

/// `(Aⁿ)_{ij}` by exact integer matrix powers; errors on overflow of the
/// exact range rather than losing precision.
pub fn walk_count(a: &AdjacencyMatrix, hops: usize, i: usize, j: usize) -> Result<u64> {
    if hops == 0 {
        return Err(Error::InvalidParameter("hop count must be >= 1".into()));
    }
    checked_index(a, i, j)?;
    let base = binary_square(a)?;
    let mut power = base.clone();
    for _ in 1..hops {
        power = checked_matmul(&power, &base)?;
    }
    Ok(power[i][j])
}

/// Number of simple paths (no repeated vertex) with exactly `len` edges from
/// `i` to `j`, by depth-first enumeration. Guarded to graphs of at most
/// [`ENUMERATION_GUARD`] nodes.
pub fn loop_free_paths(a: &AdjacencyMatrix, len: usize, i: usize, j: usize) -> Result<u64> {
    if len == 0 {
        return Err(Error::InvalidParameter("path length must be >= 1".into()));
    }
    checked_index(a, i, j)?;
    let adj = binary_square(a)?;
    let n = adj.len();
    if n > ENUMERATION_GUARD {
        return Err(Error::EnumerationGuard {
            nodes: n,
            limit: ENUMERATION_GUARD,
        });
    }
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|u| (0..n).filter(|&v| adj[u][v] == 1).collect())
        .collect();
    let mut count = 0u64;
    // iterative DFS with an explicit stack of (node, depth, visited bitmask)
    let mut stack = vec![(i, 0usize, 1u32 << i)];
    while let Some((v, depth, visited)) = stack.pop() {
        if depth == len {
            if v == j {
                count += 1;
            }
            continue;
        }
        for &w in &neighbors[v] {
            if visited >> w & 1 == 1 {
                continue;
            }
            // the target may only appear as the final vertex
            if w == j && depth + 1 != len {
                continue;
            }
            stack.push((w, depth + 1, visited | (1 << w)));
        }
    }
    Ok(count)
}

/// Splits the even `hops`-walk count between `i` and `j` into loop-free
/// paths, endpoint-loop walks, and the remainder. See [`PathCensus`].
pub fn path_census(a: &AdjacencyMatrix, hops: usize, i: usize, j: usize) -> Result<PathCensus> {
    if hops == 0 || hops % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "hop count must be even and >= 2, got {hops}"
        )));
    }
    let total = walk_count(a, hops, i, j)?;
    let mut loop_free = Vec::with_capacity(hops);
    for l in 1..=hops {
        loop_free.push(loop_free_paths(a, l, i, j)?);
    }
    let deg = a.row_sums();
    let ki = deg[i] as u64;
    let kj = deg[j] as u64;
    let half = hops / 2;
    let mut endpoint_loops: u64 = 0;
    for t in 1..half {
        let a2t = loop_free[2 * t - 1];
        if a2t == 0 {
            continue;
        }
        let mut weight: u64 = 0;
        for h in 0..=(half - t) {
            let term = checked_pow(ki, h as u32)?
                .checked_mul(checked_pow(kj, (half - t - h) as u32)?)
                .ok_or(Error::CountOverflow)?;
            weight = weight.checked_add(term).ok_or(Error::CountOverflow)?;
        }
        endpoint_loops = endpoint_loops
            .checked_add(weight.checked_mul(a2t).ok_or(Error::CountOverflow)?)
            .ok_or(Error::CountOverflow)?;
    }
    let decorated = loop_free[hops - 1]
        .checked_add(endpoint_loops)
        .ok_or(Error::CountOverflow)?;
    let remainder = total.checked_sub(decorated).ok_or_else(|| {
        Error::Numerical(format!(
            "walk decomposition exceeded the total: {decorated} > {total}"
        ))
    })?;
    Ok(PathCensus {
        hops,
        total,
        loop_free,
        endpoint_loops,
        remainder,
    })
}

fn checked_pow(base: u64, exp: u32) -> Result<u64> {
    base.checked_pow(exp).ok_or(Error::CountOverflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::parse_edge_list;
    use crate::testutil::{eight_node_graph, random_graph, rng};

    #[test]
    fn eight_node_walk_counts() {
        let (g, idx) = eight_node_graph();
        let d = idx.index("D").unwrap();
        let e = idx.index("E").unwrap();
        assert_eq!(walk_count(&g, 2, d, e).unwrap(), 1);
        assert_eq!(walk_count(&g, 4, d, e).unwrap(), 10);
        assert_eq!(walk_count(&g, 6, d, e).unwrap(), 89);
    }

    #[test]
    fn eight_node_loop_free_counts() {
        let (g, idx) = eight_node_graph();
        let d = idx.index("D").unwrap();
        let e = idx.index("E").unwrap();
        assert_eq!(loop_free_paths(&g, 2, d, e).unwrap(), 1);
        assert_eq!(loop_free_paths(&g, 4, d, e).unwrap(), 3);
        assert_eq!(loop_free_paths(&g, 6, d, e).unwrap(), 2);
    }

    #[test]
    fn eight_node_census_table() {
        let (g, idx) = eight_node_graph();
        let d = idx.index("D").unwrap();
        let e = idx.index("E").unwrap();

        let c2 = path_census(&g, 2, d, e).unwrap();
        assert_eq!(
            (
                c2.total,
                c2.loop_free_at(2),
                c2.endpoint_loops,
                c2.remainder
            ),
            (1, 1, 0, 0)
        );

        // κ_D = 2, κ_E = 3: weight (κ_D + κ_E) = 5 on the single 2-path
        let c4 = path_census(&g, 4, d, e).unwrap();
        assert_eq!(
            (
                c4.total,
                c4.loop_free_at(4),
                c4.endpoint_loops,
                c4.remainder
            ),
            (10, 3, 5, 2)
        );

        // t=1: (κ_D² + κ_Dκ_E + κ_E²)·a₂ = 19, t=2: (κ_D + κ_E)·a₄ = 15
        let c6 = path_census(&g, 6, d, e).unwrap();
        assert_eq!(
            (
                c6.total,
                c6.loop_free_at(6),
                c6.endpoint_loops,
                c6.remainder
            ),
            (89, 2, 34, 53)
        );
    }

    #[test]
    fn census_is_symmetric_in_the_pair() {
        let (g, idx) = eight_node_graph();
        let d = idx.index("D").unwrap();
        let e = idx.index("E").unwrap();
        let de = path_census(&g, 6, d, e).unwrap();
        let ed = path_census(&g, 6, e, d).unwrap();
        assert_eq!(de.total, ed.total);
        assert_eq!(de.endpoint_loops, ed.endpoint_loops);
        assert_eq!(de.remainder, ed.remainder);
    }

    #[test]
    fn decomposition_identity_on_random_graphs() {
        let mut r = rng(51);
        for _ in 0..40 {
            let g = random_graph(&mut r, 7, 0.45);
            for i in 0..7 {
                for j in (i + 1)..7 {
                    for hops in [2usize, 4, 6] {
                        let c = path_census(&g, hops, i, j).unwrap();
                        assert_eq!(
                            c.total,
                            c.loop_free_at(hops) + c.endpoint_loops + c.remainder
                        );
                        assert_eq!(c.total, walk_count(&g, hops, i, j).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let (g, _) = eight_node_graph();
        assert!(matches!(
            path_census(&g, 3, 0, 1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            walk_count(&g, 0, 0, 1),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            walk_count(&g, 2, 0, 99),
            Err(Error::InvalidParameter(_))
        ));

        let (w, _) = parse_edge_list("a b 2.0", false, true, false).unwrap();
        assert!(matches!(
            walk_count(&w, 2, 0, 1),
            Err(Error::NotBinary { .. })
        ));
    }

    #[test]
    fn guard_refuses_large_graphs() {
        let n = ENUMERATION_GUARD + 1;
        let mut values = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n - 1 {
            values[(i, i + 1)] = 1.0;
            values[(i + 1, i)] = 1.0;
        }
        let g = crate::net::AdjacencyMatrix::from_dense(values).unwrap();
        assert!(matches!(
            loop_free_paths(&g, 2, 0, 2),
            Err(Error::EnumerationGuard { .. })
        ));
        // walk_count has no guard: powers stay exact
        assert_eq!(walk_count(&g, 2, 0, 2).unwrap(), 1);
    }

    #[test]
    fn walk_count_overflows_cleanly() {
        // complete graph on 20 nodes: counts reach 19^h quickly
        let n = 20;
        let values = nalgebra::DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
        let g = crate::net::AdjacencyMatrix::from_dense(values).unwrap();
        let mut overflowed = false;
        for hops in (2..60).step_by(2) {
            match walk_count(&g, hops, 0, 1) {
                Ok(_) => {}
                Err(Error::CountOverflow) => {
                    overflowed = true;
                    break;
                }
                Err(other) => panic!("unexpected error {other:?}"),
            }
        }
        assert!(overflowed);
    }
}
