//! Imbalance of a partition under correlation clustering (CC) and its
//! symmetric relaxation (SRCC).
//!
//! CC charges negative weight inside clusters plus positive weight between
//! clusters. The relaxed measure lets every cluster pair (including a
//! cluster with itself) be either a positive or a negative block and
//! charges only the minority-sign weight, `min(pos, neg)`, per block. A
//! group positive towards everyone therefore costs nothing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::partition::{ensure_valid, BlockSum, BlockTotals, Partition};
use crate::sum::CompensatedSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "lowercase")]
pub enum ProblemKind {
    Cc,
    Srcc { k: usize },
}

impl ProblemKind {
    pub fn fixed_k(self) -> Option<usize> {
        match self {
            ProblemKind::Cc => None,
            ProblemKind::Srcc { k } => Some(k),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Cc => "cc",
            ProblemKind::Srcc { .. } => "srcc",
        }
    }

    /// Objective value of `partition`.
    pub fn evaluate(self, graph: &SignedGraph, partition: &Partition) -> Result<f64> {
        match self {
            ProblemKind::Cc => cc_imbalance(graph, partition),
            ProblemKind::Srcc { .. } => Ok(srcc_imbalance(graph, partition)?.total),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BlockSign {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceBreakdown {
    pub total: f64,
    pub blocks: BlockTotals,
    /// Majority sign per block, row-major over `a <= b`; relaxed measure only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_signs: Option<Vec<BlockSign>>,
}

impl ImbalanceBreakdown {
    /// Recomputes the objective from the stored block sums.
    pub fn recomputed_total(&self) -> f64 {
        match self.block_signs {
            Some(_) => srcc_total_from_blocks(&self.blocks),
            None => cc_total_from_blocks(&self.blocks),
        }
    }
}

/// Negative weight inside clusters plus positive weight between them.
pub fn cc_imbalance(graph: &SignedGraph, partition: &Partition) -> Result<f64> {
    ensure_valid(graph, partition)?;
    let labels = partition.labels();
    let mut acc = CompensatedSum::new();
    for e in graph.edges() {
        let same = labels[e.u] == labels[e.v];
        if same && e.weight < 0.0 {
            acc.add(-e.weight);
        } else if !same && e.weight > 0.0 {
            acc.add(e.weight);
        }
    }
    Ok(acc.value())
}

/// CC imbalance together with its block sums.
pub fn cc_breakdown(graph: &SignedGraph, partition: &Partition) -> Result<ImbalanceBreakdown> {
    let total = cc_imbalance(graph, partition)?;
    let blocks = BlockTotals::compute(graph, partition)?;
    Ok(ImbalanceBreakdown {
        total,
        blocks,
        block_signs: None,
    })
}

/// Symmetric relaxed imbalance: `sum over blocks of min(pos, neg)`.
pub fn srcc_imbalance(graph: &SignedGraph, partition: &Partition) -> Result<ImbalanceBreakdown> {
    let blocks = BlockTotals::compute(graph, partition)?;
    let signs = blocks
        .iter()
        .map(|(_, _, b)| {
            if b.pos >= b.neg {
                BlockSign::Positive
            } else {
                BlockSign::Negative
            }
        })
        .collect();
    Ok(ImbalanceBreakdown {
        total: srcc_total_from_blocks(&blocks),
        blocks,
        block_signs: Some(signs),
    })
}

pub fn breakdown(problem: ProblemKind, graph: &SignedGraph, partition: &Partition) -> Result<ImbalanceBreakdown> {
    match problem {
        ProblemKind::Cc => cc_breakdown(graph, partition),
        ProblemKind::Srcc { .. } => srcc_imbalance(graph, partition),
    }
}

fn srcc_total_from_blocks(blocks: &BlockTotals) -> f64 {
    blocks.iter().map(|(_, _, b)| b.min()).collect::<CompensatedSum>().value()
}

fn cc_total_from_blocks(blocks: &BlockTotals) -> f64 {
    blocks
        .iter()
        .map(|(a, b, s)| if a == b { s.neg } else { s.pos })
        .collect::<CompensatedSum>()
        .value()
}

/// Imbalance as a percentage of the total absolute edge weight.
pub fn relative_imbalance(graph: &SignedGraph, breakdown: &ImbalanceBreakdown) -> Result<f64> {
    if graph.edge_count() == 0 {
        return Err(Error::EdgelessGraph);
    }
    Ok(100.0 * breakdown.total / graph.total_abs_weight())
}

/// Positive and negative weight from `vertex` into each of the `k` clusters.
pub(crate) fn vertex_cluster_weights(graph: &SignedGraph, labels: &[usize], k: usize, vertex: usize) -> Vec<BlockSum> {
    let mut sums = vec![BlockSum::default(); k];
    for &(j, w) in graph.neighbors(vertex) {
        sums[labels[j]].add_weight(w);
    }
    sums
}

/// CC delta of moving a vertex out of `from` into `to` (`None` opens a new
/// cluster), given its per-cluster weights.
pub(crate) fn cc_delta_from_sums(sums: &[BlockSum], from: usize, to: Option<usize>) -> f64 {
    let leave = sums[from].pos - sums[from].neg;
    let join = to.map_or(0.0, |b| sums[b].neg - sums[b].pos);
    leave + join
}

/// SRCC delta of moving a vertex from `from` to `to`, touching only the
/// `O(k)` blocks that contain either cluster.
pub(crate) fn srcc_delta_from_sums(blocks: &BlockTotals, sums: &[BlockSum], from: usize, to: usize) -> f64 {
    debug_assert_ne!(from, to);
    let shifted = |b: BlockSum, minus: BlockSum, plus: BlockSum| BlockSum {
        pos: b.pos - minus.pos + plus.pos,
        neg: b.neg - minus.neg + plus.neg,
    };
    let zero = BlockSum::default();
    let mut delta = 0.0;
    for (c, &s) in sums.iter().enumerate().take(blocks.k()) {
        if c != to {
            let old = blocks.get(from, c);
            delta += shifted(old, s, zero).min() - old.min();
        }
        if c != from {
            let old = blocks.get(to, c);
            delta += shifted(old, zero, s).min() - old.min();
        }
    }
    let old = blocks.get(from, to);
    delta += shifted(old, sums[to], sums[from]).min() - old.min();
    delta
}

/// Moves a vertex's edge weight from blocks `{from, c}` to `{to, c}`.
pub(crate) fn apply_move_to_blocks(blocks: &mut BlockTotals, sums: &[BlockSum], from: usize, to: usize) {
    for (c, s) in sums.iter().enumerate() {
        let b = blocks.get_mut(from, c);
        b.pos -= s.pos;
        b.neg -= s.neg;
        let b = blocks.get_mut(to, c);
        b.pos += s.pos;
        b.neg += s.neg;
    }
}

fn check_move(partition: &Partition, vertex: usize, target: usize, allow_new: bool) -> Result<()> {
    if vertex >= partition.len() {
        return Err(Error::InvalidMove(format!("vertex {vertex} out of range")));
    }
    let k = partition.k();
    let limit = if allow_new { k } else { k - 1 };
    if target > limit {
        return Err(Error::InvalidMove(format!(
            "target cluster {target} out of range 0..={limit}"
        )));
    }
    if partition.cluster_of(vertex) == target {
        return Err(Error::InvalidMove(format!(
            "vertex {vertex} is already in cluster {target}"
        )));
    }
    Ok(())
}

/// Exact change in CC imbalance when `vertex` moves to `target_cluster`;
/// `target_cluster == k` opens a new singleton cluster. Costs
/// `O(degree(vertex))`.
pub fn cc_move_delta(graph: &SignedGraph, partition: &Partition, vertex: usize, target_cluster: usize) -> Result<f64> {
    ensure_valid(graph, partition)?;
    check_move(partition, vertex, target_cluster, true)?;
    let from = partition.cluster_of(vertex);
    let to = (target_cluster < partition.k()).then_some(target_cluster);
    if to.is_none() && partition.cluster_sizes()[from] == 1 {
        return Err(Error::InvalidMove(format!(
            "vertex {vertex} is alone in cluster {from}; a new singleton would only relabel it"
        )));
    }
    let labels = partition.labels();
    let mut leave = 0.0;
    let mut join = 0.0;
    for &(j, w) in graph.neighbors(vertex) {
        let c = labels[j];
        if c == from {
            leave += w;
        } else if Some(c) == to {
            join -= w;
        }
    }
    Ok(leave + join)
}

/// Exact change in the symmetric relaxed imbalance when `vertex` moves to
/// `target_cluster < k`. `blocks` must describe `partition`.
pub fn srcc_move_delta(
    graph: &SignedGraph,
    partition: &Partition,
    blocks: &BlockTotals,
    vertex: usize,
    target_cluster: usize,
) -> Result<f64> {
    ensure_valid(graph, partition)?;
    check_move(partition, vertex, target_cluster, false)?;
    if blocks.k() != partition.k() {
        return Err(Error::InvalidMove(format!(
            "block sums cover {} clusters, partition has {}",
            blocks.k(),
            partition.k()
        )));
    }
    let from = partition.cluster_of(vertex);
    if partition.cluster_sizes()[from] == 1 {
        return Err(Error::InvalidMove(format!(
            "moving vertex {vertex} would empty cluster {from}"
        )));
    }
    let sums = vertex_cluster_weights(graph, partition.labels(), partition.k(), vertex);
    Ok(srcc_delta_from_sums(blocks, &sums, from, target_cluster))
}
