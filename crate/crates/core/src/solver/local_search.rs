use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::SignedGraph;
use crate::imbalance::ProblemKind;
use crate::partition::{ensure_valid, Partition};

use super::state::{SearchState, Target};

/// A move must lower the objective by more than this to be taken.
pub const IMPROVEMENT_EPS: f64 = 1e-9;
// candidates closer than this count as ties; the earlier one in scan order wins
const TIE_EPS: f64 = 1e-10;

/// How candidate moves are priced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaMode {
    /// Cached per-cluster sums; `O(k)` per candidate.
    #[default]
    Incremental,
    /// Apply every candidate to a copy and re-evaluate from scratch.
    /// Debug aid only.
    Recompute,
}

/// One applied move, recorded for debugging.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AppliedMove {
    pub vertex: usize,
    /// Cluster index at the time of the move; `None` opened a new cluster.
    pub target: Option<usize>,
    pub delta: f64,
}

/// Best-improvement descent over single-vertex relocations (CC also
/// tries opening a new cluster) until no move improves by more than
/// [`IMPROVEMENT_EPS`].
pub fn local_search(graph: &SignedGraph, start: &Partition, problem: ProblemKind) -> Result<Partition> {
    Ok(local_search_traced(graph, start, problem, DeltaMode::Incremental)?.0)
}

/// [`local_search`] that also returns the applied move sequence.
pub fn local_search_traced(
    graph: &SignedGraph,
    start: &Partition,
    problem: ProblemKind,
    mode: DeltaMode,
) -> Result<(Partition, Vec<AppliedMove>)> {
    ensure_valid(graph, start)?;
    let mut state = SearchState::new(graph, problem, start);
    let moves = descend(&mut state, mode);
    Ok((state.partition(), moves))
}

pub(crate) fn descend(state: &mut SearchState<'_>, mode: DeltaMode) -> Vec<AppliedMove> {
    let mut applied = Vec::new();
    let mut current = match mode {
        DeltaMode::Incremental => 0.0,
        DeltaMode::Recompute => full_value(state, state.labels()),
    };
    loop {
        let mut best: Option<(usize, Target, f64)> = None;
        for v in 0..state.labels().len() {
            let targets = (0..state.k()).map(Target::Cluster).chain(std::iter::once(Target::NewCluster));
            for target in targets {
                if !state.is_legal(v, target) {
                    continue;
                }
                let delta = match mode {
                    DeltaMode::Incremental => state.delta(v, target),
                    DeltaMode::Recompute => recomputed_delta(state, v, target, current),
                };
                if best.is_none_or(|(_, _, b)| delta < b - TIE_EPS) {
                    best = Some((v, target, delta));
                }
            }
        }
        match best {
            Some((vertex, target, delta)) if delta < -IMPROVEMENT_EPS => {
                state.apply(vertex, target);
                if mode == DeltaMode::Recompute {
                    current = full_value(state, state.labels());
                }
                applied.push(AppliedMove {
                    vertex,
                    target: match target {
                        Target::Cluster(c) => Some(c),
                        Target::NewCluster => None,
                    },
                    delta,
                });
            }
            _ => return applied,
        }
    }
}

fn full_value(state: &SearchState<'_>, labels: &[usize]) -> f64 {
    let partition = Partition::from_labels(labels).expect("non-empty labels");
    state
        .problem()
        .evaluate(state.graph(), &partition)
        .expect("labels cover the graph")
}

fn recomputed_delta(state: &SearchState<'_>, vertex: usize, target: Target, current: f64) -> f64 {
    let mut labels = state.labels().to_vec();
    labels[vertex] = match target {
        Target::Cluster(c) => c,
        Target::NewCluster => state.k(),
    };
    full_value(state, &labels) - current
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imbalance::cc_imbalance;

    fn triangle() -> SignedGraph {
        SignedGraph::from_weighted_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, -1.0)]).unwrap()
    }

    #[test]
    fn triangle_from_singletons_reaches_optimum() {
        let g = triangle();
        let out = local_search(&g, &Partition::singletons(3).unwrap(), ProblemKind::Cc).unwrap();
        assert_eq!(cc_imbalance(&g, &out).unwrap(), 1.0);
    }

    #[test]
    fn optimum_is_kept() {
        let g = triangle();
        let start = Partition::single_cluster(3).unwrap();
        let out = local_search(&g, &start, ProblemKind::Cc).unwrap();
        assert_eq!(cc_imbalance(&g, &out).unwrap(), 1.0);
    }

    #[test]
    fn all_positive_relaxed_search_does_nothing() {
        let g = SignedGraph::from_weighted_edges(4, [(0, 1, 1.0), (1, 2, 0.5), (2, 3, 1.0), (0, 3, 0.25)]).unwrap();
        let start = Partition::from_labels(&[0, 1, 0, 1]).unwrap();
        let (out, moves) = local_search_traced(&g, &start, ProblemKind::Srcc { k: 2 }, DeltaMode::Incremental).unwrap();
        assert!(moves.is_empty());
        assert_eq!(out, start);
    }

    #[test]
    fn cc_can_merge_away_a_cluster() {
        // two singletons joined by a positive edge collapse into one cluster
        let g = SignedGraph::from_weighted_edges(2, [(0, 1, 1.0)]).unwrap();
        let out = local_search(&g, &Partition::singletons(2).unwrap(), ProblemKind::Cc).unwrap();
        assert_eq!(out.k(), 1);
    }

    #[test]
    fn invalid_start_is_rejected() {
        let g = triangle();
        assert!(local_search(&g, &Partition::new_unchecked(vec![0, 0], 1), ProblemKind::Cc).is_err());
    }
}
