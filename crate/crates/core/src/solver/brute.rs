use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::imbalance::ProblemKind;
use crate::partition::{block_index, BlockSum, Partition};

/// Largest vertex count [`brute_force`] accepts (Bell(12) = 4 213 597).
pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Exhaustive optimum over restricted-growth strings.
///
/// CC enumerates every partition into at most `max_k` clusters; the
/// relaxed problem enumerates those with exactly `k` clusters (its own `k`
/// when `problem` is SRCC, which must equal `max_k`). Ties go to the
/// lexicographically smallest string.
pub fn brute_force(graph: &SignedGraph, problem: ProblemKind, max_k: usize) -> Result<(Partition, f64)> {
    let n = graph.vertex_count();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge {
            n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    if n == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    if max_k == 0 {
        return Err(Error::InvalidParameter("max_k must be positive".into()));
    }
    let exact_k = match problem {
        ProblemKind::Cc => None,
        ProblemKind::Srcc { k } => {
            if k != max_k {
                return Err(Error::InvalidParameter(format!(
                    "relaxed problem has k = {k} but max_k = {max_k}"
                )));
            }
            if k > n {
                return Err(Error::InvalidParameter(format!(
                    "cannot split {n} vertices into {k} non-empty clusters"
                )));
            }
            Some(k)
        }
    };
    let limit = max_k.min(n);

    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut rgs = RestrictedGrowth::new(n, limit);
    let mut scratch = vec![BlockSum::default(); limit * (limit + 1) / 2];
    loop {
        let labels = rgs.current();
        let blocks_used = labels.iter().max().map_or(0, |m| m + 1);
        if exact_k.is_none_or(|k| blocks_used == k) {
            let value = match problem {
                ProblemKind::Cc => cc_value(graph, labels),
                ProblemKind::Srcc { .. } => srcc_value(graph, labels, limit, &mut scratch),
            };
            if best.as_ref().is_none_or(|(_, b)| value < b - 1e-9) {
                best = Some((labels.to_vec(), value));
            }
        }
        if !rgs.advance() {
            break;
        }
    }
    let (labels, value) = best.expect("at least one partition enumerated");
    Ok((Partition::from_labels(&labels)?, value))
}

fn cc_value(graph: &SignedGraph, labels: &[usize]) -> f64 {
    graph
        .edges()
        .iter()
        .map(|e| match (labels[e.u] == labels[e.v], e.weight > 0.0) {
            (true, false) => -e.weight,
            (false, true) => e.weight,
            _ => 0.0,
        })
        .sum()
}

fn srcc_value(graph: &SignedGraph, labels: &[usize], k: usize, scratch: &mut [BlockSum]) -> f64 {
    scratch.fill(BlockSum::default());
    for e in graph.edges() {
        scratch[block_index(k, labels[e.u], labels[e.v])].add_weight(e.weight);
    }
    scratch.iter().map(BlockSum::min).sum()
}

/// Restricted-growth strings of length `n` with at most `max_blocks`
/// distinct values, in lexicographic order.
pub struct RestrictedGrowth {
    labels: Vec<usize>,
    // prefix_max[i] = max(labels[..i]); unused at 0
    prefix_max: Vec<usize>,
    max_blocks: usize,
}

impl RestrictedGrowth {
    pub fn new(n: usize, max_blocks: usize) -> Self {
        assert!(n > 0 && max_blocks > 0);
        Self {
            labels: vec![0; n],
            prefix_max: vec![0; n],
            max_blocks,
        }
    }

    pub fn current(&self) -> &[usize] {
        &self.labels
    }

    pub fn advance(&mut self) -> bool {
        let n = self.labels.len();
        for i in (1..n).rev() {
            let cap = (self.prefix_max[i] + 1).min(self.max_blocks - 1);
            if self.labels[i] < cap {
                self.labels[i] += 1;
                let m = self.prefix_max[i].max(self.labels[i]);
                for j in (i + 1)..n {
                    self.labels[j] = 0;
                    self.prefix_max[j] = m;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for RestrictedGrowth {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        // yields current then advances; an exhausted generator has n = 0
        if self.labels.is_empty() {
            return None;
        }
        let out = self.labels.clone();
        if !self.advance() {
            self.labels.clear();
        }
        Some(out)
    }
}
