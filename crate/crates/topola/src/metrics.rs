//! Ranking and clustering metrics for the evaluation harness.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Mann–Whitney AUC: `P(score⁺ > score⁻) + 0.5·P(tie)`, computed through
/// tie-averaged ranks.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_scored(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    let ranks = average_ranks(scores);
    let rank_sum: f64 = ranks
        .iter()
        .zip(labels)
        .filter(|(_, &l)| l)
        .map(|(r, _)| r)
        .sum();
    let p = pos as f64;
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * neg as f64))
}

/// Average precision: mean over positives of the precision at each positive's
/// position, items ordered by (score desc, index asc).
pub fn aupr(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_scored(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 {
        return Err(Error::SingleClass);
    }
    let order = ranked_order(scores);
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (seen, &idx) in order.iter().enumerate() {
        if labels[idx] {
            hits += 1;
            sum += hits as f64 / (seen + 1) as f64;
        }
    }
    Ok(sum / pos as f64)
}

/// Indices sorted by score descending; ties keep ascending index order.
pub fn ranked_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    order
}

fn check_scored(scores: &[f64], labels: &[bool]) -> Result<()> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::Numerical(format!("non-finite score at index {bad}")));
    }
    Ok(())
}

/// 1-based ranks with ties averaged.
fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end) as f64 / 2.0 + 1.0;
        for &idx in &order[start..=end] {
            ranks[idx] = avg;
        }
        start = end + 1;
    }
    ranks
}

fn comb2(x: f64) -> f64 {
    x * (x - 1.0) / 2.0
}

struct Contingency {
    cells: BTreeMap<(usize, usize), f64>,
    row_sums: BTreeMap<usize, f64>,
    col_sums: BTreeMap<usize, f64>,
    n: f64,
}

fn contingency(x: &[usize], y: &[usize]) -> Result<Contingency> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut row_sums: BTreeMap<usize, f64> = BTreeMap::new();
    let mut col_sums: BTreeMap<usize, f64> = BTreeMap::new();
    for (&a, &b) in x.iter().zip(y) {
        *cells.entry((a, b)).or_default() += 1.0;
        *row_sums.entry(a).or_default() += 1.0;
        *col_sums.entry(b).or_default() += 1.0;
    }
    Ok(Contingency {
        cells,
        row_sums,
        col_sums,
        n: x.len() as f64,
    })
}

/// Adjusted Rand index between two partitions given as per-element cluster
/// ids. Label-invariant; 1.0 on identical partitions.
pub fn ari(x: &[usize], y: &[usize]) -> Result<f64> {
    let c = contingency(x, y)?;
    let sum_cells: f64 = c.cells.values().map(|&v| comb2(v)).sum();
    let sum_rows: f64 = c.row_sums.values().map(|&v| comb2(v)).sum();
    let sum_cols: f64 = c.col_sums.values().map(|&v| comb2(v)).sum();
    let pairs = comb2(c.n);
    if pairs == 0.0 {
        return Ok(1.0);
    }
    let expected = sum_rows * sum_cols / pairs;
    let denom = 0.5 * (sum_rows + sum_cols) - expected;
    if denom == 0.0 {
        // both partitions all-singletons or both one cluster: they agree
        return Ok(1.0);
    }
    Ok((sum_cells - expected) / denom)
}

/// Normalized mutual information `I(U,V) / max{H(U), H(V)}` with natural
/// logarithms and `0·log 0 = 0`. Both partitions constant gives 1, exactly
/// one constant gives 0.
pub fn nmi(x: &[usize], y: &[usize]) -> Result<f64> {
    let c = contingency(x, y)?;
    let n = c.n;
    let entropy = |sums: &BTreeMap<usize, f64>| -> f64 {
        -sums
            .values()
            .filter(|&&v| v > 0.0)
            .map(|&v| v / n * (v / n).ln())
            .sum::<f64>()
    };
    let hu = entropy(&c.row_sums);
    let hv = entropy(&c.col_sums);
    let hmax = hu.max(hv);
    if hmax == 0.0 {
        return Ok(1.0);
    }
    let mut info = 0.0;
    for (&(a, b), &nij) in &c.cells {
        if nij > 0.0 {
            let pa = c.row_sums[&a];
            let pb = c.col_sums[&b];
            info += nij / n * ((nij * n) / (pa * pb)).ln();
        }
    }
    let ratio = (info / hmax).clamp(0.0, 1.0);
    // the ratio is 1 only for identical partitions; the nearest genuinely
    // different value at n elements is Θ(1/n) away, so anything within
    // rounding distance of 1 is 1
    if (ratio - 1.0).abs() < 1e-12 {
        Ok(1.0)
    } else {
        Ok(ratio)
    }
}

/// Per-query and mean top-k retrieval accuracy on a similarity matrix.
///
/// For query `q`, rank the other items by similarity (ties broken by index),
/// count same-class hits in the top k, and divide by `min(k, N_q)` where
/// `N_q` is the size of q's class without q itself.
pub fn retrieval_accuracy(
    similarity: &DMatrix<f64>,
    classes: &[usize],
    k: usize,
) -> Result<(Vec<f64>, f64)> {
    let n = similarity.nrows();
    if similarity.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: similarity.ncols(),
        });
    }
    if classes.len() != n {
        return Err(Error::LengthMismatch {
            left: classes.len(),
            right: n,
        });
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two items".into()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let mut class_sizes: HashMap<usize, usize> = HashMap::new();
    for &c in classes {
        *class_sizes.entry(c).or_default() += 1;
    }
    let mut per_query = Vec::with_capacity(n);
    for q in 0..n {
        let nq = class_sizes[&classes[q]] - 1;
        if nq == 0 {
            return Err(Error::InvalidParameter(format!(
                "item {q} is the only member of its class"
            )));
        }
        let mut others: Vec<usize> = (0..n).filter(|&i| i != q).collect();
        others.sort_by(|&a, &b| similarity[(q, b)].partial_cmp(&similarity[(q, a)]).unwrap());
        let hits = others
            .iter()
            .take(k)
            .filter(|&&i| classes[i] == classes[q])
            .count();
        per_query.push(hits as f64 / nq.min(k) as f64);
    }
    let mean = per_query.iter().sum::<f64>() / n as f64;
    Ok((per_query, mean))
}

/// Spearman rank correlation with tie-averaged ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::InvalidParameter("need at least two points".into()));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for i in 0..x.len() {
        let dx = rx[i] - mx;
        let dy = ry[i] - my;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::Numerical("rank variance is zero".into()));
    }
    Ok(cov / (vx * vy).sqrt())
}

pub mod oracles {
    //! Brute-force reference evaluations of the metrics above, kept
    //! independent of the fast implementations. The test suites pin the two
    //! routes against each other; these are never the production path.

    use std::collections::HashMap;

    /// AUC by exhaustive positive/negative pair comparison.
    pub fn auc_pairwise(scores: &[f64], labels: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            if !li {
                continue;
            }
            for (j, &lj) in labels.iter().enumerate() {
                if lj {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    /// Average precision by re-counting precision/recall from scratch at
    /// every cutoff of the (score desc, index asc) order.
    pub fn aupr_threshold_sweep(scores: &[f64], labels: &[bool]) -> f64 {
        let order = super::ranked_order(scores);
        let total_pos = labels.iter().filter(|&&l| l).count() as f64;
        let mut ap = 0.0;
        let mut prev_recall = 0.0;
        for cut in 1..=order.len() {
            let kept = &order[..cut];
            let tp = kept.iter().filter(|&&i| labels[i]).count() as f64;
            let precision = tp / cut as f64;
            let recall = tp / total_pos;
            if recall > prev_recall {
                ap += precision * (recall - prev_recall);
                prev_recall = recall;
            }
        }
        ap
    }

    /// ARI through the pair-agreement counts (a, b, c, d).
    pub fn ari_pairwise(x: &[usize], y: &[usize]) -> f64 {
        let n = x.len();
        let (mut a, mut b, mut c, mut d) = (0.0f64, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let same_x = x[i] == x[j];
                let same_y = y[i] == y[j];
                match (same_x, same_y) {
                    (true, true) => a += 1.0,
                    (true, false) => b += 1.0,
                    (false, true) => c += 1.0,
                    (false, false) => d += 1.0,
                }
            }
        }
        let denom = (a + b) * (b + d) + (a + c) * (c + d);
        if denom == 0.0 {
            return 1.0;
        }
        2.0 * (a * d - b * c) / denom
    }

    /// NMI through the entropy route `I = H(U) + H(V) - H(U,V)`.
    pub fn nmi_entropy_route(x: &[usize], y: &[usize]) -> f64 {
        let n = x.len() as f64;
        let h = |counts: &HashMap<u64, f64>| -> f64 {
            -counts
                .values()
                .map(|&v| {
                    let p = v / n;
                    p * p.ln()
                })
                .sum::<f64>()
        };
        let mut cx: HashMap<u64, f64> = HashMap::new();
        let mut cy: HashMap<u64, f64> = HashMap::new();
        let mut cxy: HashMap<u64, f64> = HashMap::new();
        for (&a, &b) in x.iter().zip(y) {
            *cx.entry(a as u64).or_default() += 1.0;
            *cy.entry(b as u64).or_default() += 1.0;
            *cxy.entry((a as u64) << 32 | b as u64).or_default() += 1.0;
        }
        let hu = h(&cx);
        let hv = h(&cy);
        let huv = h(&cxy);
        let info = hu + hv - huv;
        let hmax = hu.max(hv);
        if hmax == 0.0 {
            1.0
        } else {
            (info / hmax).clamp(0.0, 1.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::rng;
    use rand::Rng;

    #[test]
    fn auc_basics() {
        assert_eq!(auc(&[0.9, 0.1], &[true, false]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5, 0.5, 0.5], &[true, false, true]).unwrap(), 0.5);
        assert!(matches!(
            auc(&[1.0, 2.0], &[true, true]),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn auc_matches_pairwise_oracle() {
        let mut r = rng(81);
        for _ in 0..50 {
            let n = 8 + (r.gen::<u64>() % 20) as usize;
            let scores: Vec<f64> = (0..n)
                .map(|_| (r.gen::<f64>() * 4.0).round() / 4.0)
                .collect();
            let labels: Vec<bool> = (0..n).map(|_| r.gen::<f64>() < 0.4).collect();
            if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
                continue;
            }
            let got = auc(&scores, &labels).unwrap();
            let want = oracles::auc_pairwise(&scores, &labels);
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn aupr_basics() {
        // single positive ranked first
        assert_eq!(aupr(&[0.9, 0.5, 0.1], &[true, false, false]).unwrap(), 1.0);
        // single positive ranked last of 4
        assert_eq!(
            aupr(&[0.9, 0.8, 0.7, 0.1], &[false, false, false, true]).unwrap(),
            0.25
        );
        assert!(matches!(aupr(&[1.0], &[false]), Err(Error::SingleClass)));
    }

    #[test]
    fn aupr_matches_threshold_sweep_oracle() {
        let mut r = rng(83);
        for _ in 0..50 {
            let n = 6 + (r.gen::<u64>() % 24) as usize;
            let scores: Vec<f64> = (0..n)
                .map(|_| (r.gen::<f64>() * 3.0).round() / 3.0)
                .collect();
            let labels: Vec<bool> = (0..n).map(|_| r.gen::<f64>() < 0.3).collect();
            if !labels.iter().any(|&l| l) {
                continue;
            }
            let got = aupr(&scores, &labels).unwrap();
            let want = oracles::aupr_threshold_sweep(&scores, &labels);
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn ari_hand_case_and_invariance() {
        assert_eq!(ari(&[1, 1, 2, 2], &[1, 1, 2, 2]).unwrap(), 1.0);
        // relabeled copy still agrees perfectly
        assert_eq!(ari(&[1, 1, 2, 2], &[7, 7, 3, 3]).unwrap(), 1.0);
        // 6-element worked case, value frozen from the pair-counting route
        let x = [1, 1, 1, 2, 2, 2];
        let y = [1, 1, 2, 2, 2, 2];
        let got = ari(&x, &y).unwrap();
        assert!((got - 0.32432432432432434).abs() < 1e-15);
        assert!((got - oracles::ari_pairwise(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn nmi_conventions() {
        assert_eq!(nmi(&[1, 1, 2, 2], &[2, 2, 9, 9]).unwrap(), 1.0);
        // both constant
        assert_eq!(nmi(&[3, 3, 3], &[5, 5, 5]).unwrap(), 1.0);
        // singletons vs constant: zero mutual information
        assert_eq!(nmi(&[1, 2, 3, 4], &[1, 1, 1, 1]).unwrap(), 0.0);
        // 6-element case matches the entropy route
        let x = [1, 1, 1, 2, 2, 2];
        let y = [1, 1, 2, 2, 2, 2];
        assert!((nmi(&x, &y).unwrap() - oracles::nmi_entropy_route(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn ari_nmi_match_oracles_on_random_partitions() {
        let mut r = rng(89);
        for _ in 0..60 {
            let n = 5 + (r.gen::<u64>() % 30) as usize;
            let x: Vec<usize> = (0..n).map(|_| (r.gen::<u64>() % 4) as usize).collect();
            let y: Vec<usize> = (0..n).map(|_| (r.gen::<u64>() % 3) as usize).collect();
            assert!((ari(&x, &y).unwrap() - oracles::ari_pairwise(&x, &y)).abs() <= 1e-12);
            assert!((nmi(&x, &y).unwrap() - oracles::nmi_entropy_route(&x, &y)).abs() <= 1e-12);
        }
    }

    #[test]
    fn retrieval_accuracy_cases() {
        // two classes of 3 and 2; similarity favors own class for item 0
        let sim = DMatrix::from_row_slice(
            5,
            5,
            &[
                1.0, 0.9, 0.8, 0.1, 0.2, //
                0.9, 1.0, 0.7, 0.2, 0.1, //
                0.8, 0.7, 1.0, 0.3, 0.2, //
                0.1, 0.2, 0.3, 1.0, 0.9, //
                0.2, 0.1, 0.2, 0.9, 1.0,
            ],
        );
        let classes = [0, 0, 0, 1, 1];
        let (per, mean) = retrieval_accuracy(&sim, &classes, 2).unwrap();
        assert_eq!(per[0], 1.0); // top-2 of item 0 are items 1, 2
        assert_eq!(per[3], 1.0); // N_q = 1, top includes item 4
        assert!((mean - 1.0).abs() < 1e-15);

        // no same-class item retrieved in top-1
        let sim2 = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.1, 0.9, 0.2, //
                0.1, 1.0, 0.2, 0.9, //
                0.9, 0.2, 1.0, 0.1, //
                0.2, 0.9, 0.1, 1.0,
            ],
        );
        let classes2 = [0, 0, 1, 1];
        let (per2, _) = retrieval_accuracy(&sim2, &classes2, 1).unwrap();
        assert_eq!(per2, vec![0.0, 0.0, 0.0, 0.0]);

        assert!(retrieval_accuracy(&sim2, &classes2, 0).is_err());
        assert!(retrieval_accuracy(&sim2, &[0, 1, 2, 3], 1).is_err());
    }

    #[test]
    fn spearman_signs_and_ties() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&x, &[2.0, 4.0, 6.0, 8.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &[8.0, 6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-12);
        // ties handled through average ranks
        let rho = spearman(&[1.0, 1.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(rho > 0.9);
        assert!(spearman(&[1.0, 1.0], &[2.0, 3.0]).is_err());
    }
}
