use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::imbalance::ProblemKind;
use crate::partition::{BlockSum, BlockTotals, Partition};

/// Greedy randomized (GRASP-style) construction.
///
/// Vertices are inserted in a random order. Each one joins a placement
/// drawn uniformly from the restricted candidate list: placements whose
/// cost increase lies within `alpha * (worst - best)` of the best. CC may
/// also open a new cluster; for the relaxed problem the first `k` vertices
/// seed the `k` clusters.
pub fn greedy_randomized_construction<R: Rng + ?Sized>(
    graph: &SignedGraph,
    problem: ProblemKind,
    alpha: f64,
    rng: &mut R,
) -> Result<Partition> {
    let n = graph.vertex_count();
    if n == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha {alpha} outside [0, 1]")));
    }
    let seeds = match problem {
        ProblemKind::Cc => 1,
        ProblemKind::Srcc { k } => {
            if k == 0 {
                return Err(Error::InvalidParameter("cluster count must be positive".into()));
            }
            if n < k {
                return Err(Error::InvalidParameter(format!(
                    "cannot split {n} vertices into {k} non-empty clusters"
                )));
            }
            k
        }
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut blocks = matches!(problem, ProblemKind::Srcc { .. }).then(|| BlockTotals::zeros(seeds));
    let mut k = 0usize;
    let mut candidates: Vec<(usize, f64)> = Vec::new();

    for (step, &v) in order.iter().enumerate() {
        // weight from v into each cluster, counting placed vertices only
        let sums = placed_sums(graph, &labels, k, v);
        let choice = if step < seeds {
            step
        } else {
            candidates.clear();
            match blocks.as_ref() {
                None => {
                    let positive: f64 = sums.iter().map(|s| s.pos).sum();
                    for (c, s) in sums.iter().enumerate() {
                        candidates.push((c, s.neg + positive - s.pos));
                    }
                    candidates.push((k, positive));
                }
                Some(blocks) => {
                    for c in 0..k {
                        let delta: f64 = sums
                            .iter()
                            .enumerate()
                            .map(|(other, s)| {
                                let old = blocks.get(c, other);
                                let new = BlockSum {
                                    pos: old.pos + s.pos,
                                    neg: old.neg + s.neg,
                                };
                                new.min() - old.min()
                            })
                            .sum();
                        candidates.push((c, delta));
                    }
                }
            }
            let best = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            let worst = candidates.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
            let cutoff = best + alpha * (worst - best) + 1e-12;
            let rcl: Vec<usize> = candidates.iter().filter(|c| c.1 <= cutoff).map(|c| c.0).collect();
            rcl[rng.gen_range(0..rcl.len())]
        };

        if choice == k {
            k += 1;
        }
        if let Some(blocks) = blocks.as_mut() {
            for (c, s) in sums.iter().enumerate() {
                let b = blocks.get_mut(choice, c);
                b.pos += s.pos;
                b.neg += s.neg;
            }
        }
        labels[v] = Some(choice);
    }

    let labels = labels.into_iter().map(|l| l.expect("every vertex placed")).collect();
    Partition::new(labels, k)
}

fn placed_sums(graph: &SignedGraph, labels: &[Option<usize>], k: usize, v: usize) -> Vec<BlockSum> {
    let mut sums = vec![BlockSum::default(); k];
    for &(j, w) in graph.neighbors(v) {
        if let Some(c) = labels[j] {
            sums[c].add_weight(w);
        }
    }
    sums
}
