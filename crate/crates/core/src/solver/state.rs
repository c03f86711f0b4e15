use crate::graph::SignedGraph;
use crate::imbalance::{
    apply_move_to_blocks, cc_delta_from_sums, srcc_delta_from_sums, ProblemKind,
};
use crate::partition::{BlockSum, BlockTotals, Partition};

/// Single-owner mutable search state: labels, cluster sizes and, for each
/// vertex, its positive/negative weight into every cluster. The relaxed
/// problem also keeps the block sums.
#[derive(Clone, Debug)]
pub(crate) struct SearchState<'g> {
    graph: &'g SignedGraph,
    problem: ProblemKind,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    weights: Vec<Vec<BlockSum>>,
    blocks: Option<BlockTotals>,
}

/// Destination of a single-vertex move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Target {
    Cluster(usize),
    NewCluster,
}

impl<'g> SearchState<'g> {
    pub fn new(graph: &'g SignedGraph, problem: ProblemKind, partition: &Partition) -> Self {
        let k = partition.k();
        let labels = partition.labels().to_vec();
        let sizes = partition.cluster_sizes();
        let mut weights = vec![vec![BlockSum::default(); k]; labels.len()];
        for e in graph.edges() {
            weights[e.u][labels[e.v]].add_weight(e.weight);
            weights[e.v][labels[e.u]].add_weight(e.weight);
        }
        let blocks = match problem {
            ProblemKind::Cc => None,
            ProblemKind::Srcc { .. } => {
                Some(BlockTotals::compute(graph, partition).expect("search state from a valid partition"))
            }
        };
        Self {
            graph,
            problem,
            labels,
            sizes,
            weights,
            blocks,
        }
    }

    pub fn graph(&self) -> &'g SignedGraph {
        self.graph
    }

    pub fn problem(&self) -> ProblemKind {
        self.problem
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Whether the move is legal: the target differs from the source, a
    /// new cluster only for CC and never for a singleton, and the relaxed
    /// problem never empties a cluster.
    pub fn is_legal(&self, vertex: usize, target: Target) -> bool {
        let from = self.labels[vertex];
        match (self.problem, target) {
            (_, Target::Cluster(c)) if c == from || c >= self.k() => false,
            (ProblemKind::Cc, Target::Cluster(_)) => true,
            (ProblemKind::Cc, Target::NewCluster) => self.sizes[from] > 1,
            (ProblemKind::Srcc { .. }, Target::Cluster(_)) => self.sizes[from] > 1,
            (ProblemKind::Srcc { .. }, Target::NewCluster) => false,
        }
    }

    /// Objective change of a legal move, from the cached sums only.
    pub fn delta(&self, vertex: usize, target: Target) -> f64 {
        let from = self.labels[vertex];
        let sums = &self.weights[vertex];
        match (self.problem, target) {
            (ProblemKind::Cc, Target::Cluster(c)) => cc_delta_from_sums(sums, from, Some(c)),
            (ProblemKind::Cc, Target::NewCluster) => cc_delta_from_sums(sums, from, None),
            (ProblemKind::Srcc { .. }, Target::Cluster(c)) => {
                srcc_delta_from_sums(self.blocks.as_ref().expect("relaxed state has blocks"), sums, from, c)
            }
            (ProblemKind::Srcc { .. }, Target::NewCluster) => unreachable!("fixed cluster count"),
        }
    }

    pub fn apply(&mut self, vertex: usize, target: Target) {
        let from = self.labels[vertex];
        let to = match target {
            Target::Cluster(c) => c,
            Target::NewCluster => {
                for w in &mut self.weights {
                    w.push(BlockSum::default());
                }
                self.sizes.push(0);
                self.sizes.len() - 1
            }
        };
        if let Some(blocks) = self.blocks.as_mut() {
            apply_move_to_blocks(blocks, &self.weights[vertex], from, to);
        }
        for &(j, w) in self.graph.neighbors(vertex) {
            let row = &mut self.weights[j];
            if w > 0.0 {
                row[from].pos -= w;
                row[to].pos += w;
            } else {
                row[from].neg += w;
                row[to].neg -= w;
            }
        }
        self.labels[vertex] = to;
        self.sizes[from] -= 1;
        self.sizes[to] += 1;
        if self.sizes[from] == 0 {
            self.remove_empty_cluster(from);
        }
    }

    /// Drops an empty cluster by renaming the last cluster into its slot.
    fn remove_empty_cluster(&mut self, cluster: usize) {
        debug_assert!(self.blocks.is_none(), "fixed-k states never empty a cluster");
        let last = self.sizes.len() - 1;
        for l in &mut self.labels {
            if *l == last {
                *l = cluster;
            }
        }
        self.sizes.swap_remove(cluster);
        for w in &mut self.weights {
            w.swap_remove(cluster);
        }
    }

    pub fn partition(&self) -> Partition {
        Partition::new(self.labels.clone(), self.k()).expect("search state keeps clusters non-empty")
    }
}
