//! Vertex partitions and the per-block weight sums both imbalance
//! measures are built from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::sum::CompensatedSum;

#[derive(Deserialize)]
struct PartitionRepr {
    k: usize,
    labels: Vec<usize>,
}

/// Assignment of every vertex to one of `k` non-empty clusters labelled
/// `0..k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr")]
pub struct Partition {
    k: usize,
    labels: Vec<usize>,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        check_labels(&labels, k).map_err(Error::InvalidPartition)?;
        Ok(Self { k, labels })
    }

    /// Builds a partition without checking it. Use [`validate_partition`]
    /// before handing the value to anything that assumes the invariants.
    pub fn new_unchecked(labels: Vec<usize>, k: usize) -> Self {
        Self { k, labels }
    }

    /// Relabels arbitrary cluster ids densely in order of first appearance.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidPartition("no vertices".into()));
        }
        let mut map = std::collections::HashMap::new();
        let dense = labels
            .iter()
            .map(|l| {
                let next = map.len();
                *map.entry(*l).or_insert(next)
            })
            .collect();
        Ok(Self {
            k: map.len(),
            labels: dense,
        })
    }

    pub fn single_cluster(n: usize) -> Result<Self> {
        Self::new(vec![0; n], 1)
    }

    pub fn singletons(n: usize) -> Result<Self> {
        Self::new((0..n).collect(), n)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn cluster_of(&self, vertex: usize) -> usize {
        self.labels[vertex]
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&i| self.labels[i] == cluster)
            .collect()
    }

    /// Restricted-growth form: clusters renumbered by first member.
    pub fn canonical(&self) -> Partition {
        Partition::from_labels(&self.labels).expect("non-empty partition")
    }

    /// Applies `mapping[old] = new` to every label.
    pub fn relabeled(&self, mapping: &[usize]) -> Result<Partition> {
        if mapping.len() != self.k {
            return Err(Error::InvalidPartition(format!(
                "relabeling has {} entries for {} clusters",
                mapping.len(),
                self.k
            )));
        }
        Partition::new(self.labels.iter().map(|&l| mapping[l]).collect(), self.k)
    }

    pub(crate) fn into_parts(self) -> (Vec<usize>, usize) {
        (self.labels, self.k)
    }
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;

    fn try_from(repr: PartitionRepr) -> Result<Self> {
        Partition::new(repr.labels, repr.k)
    }
}

fn check_labels(labels: &[usize], k: usize) -> std::result::Result<(), String> {
    if k == 0 {
        return Err("cluster count must be positive".into());
    }
    let mut sizes = vec![0usize; k];
    for (vertex, &l) in labels.iter().enumerate() {
        if l >= k {
            return Err(format!("vertex {vertex} has cluster {l}, expected < {k}"));
        }
        sizes[l] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(format!("cluster {empty} is empty"));
    }
    Ok(())
}

/// True iff `partition` assigns every vertex of `graph` exactly once to a
/// cluster in `0..k` and no cluster is empty.
pub fn validate_partition(graph: &SignedGraph, partition: &Partition) -> bool {
    partition.labels.len() == graph.vertex_count() && check_labels(&partition.labels, partition.k).is_ok()
}

pub(crate) fn ensure_valid(graph: &SignedGraph, partition: &Partition) -> Result<()> {
    if partition.labels.len() != graph.vertex_count() {
        return Err(Error::InvalidPartition(format!(
            "{} labels for {} vertices",
            partition.labels.len(),
            graph.vertex_count()
        )));
    }
    check_labels(&partition.labels, partition.k).map_err(Error::InvalidPartition)
}

/// Positive and (absolute) negative weight between two clusters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlockSum {
    pub pos: f64,
    pub neg: f64,
}

impl BlockSum {
    pub fn add_weight(&mut self, w: f64) {
        if w > 0.0 {
            self.pos += w;
        } else {
            self.neg -= w;
        }
    }

    pub fn min(&self) -> f64 {
        self.pos.min(self.neg)
    }
}

/// Weight sums for every unordered cluster pair `{a, b}`, `a <= b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockTotals {
    k: usize,
    blocks: Vec<BlockSum>,
}

impl BlockTotals {
    pub fn zeros(k: usize) -> Self {
        Self {
            k,
            blocks: vec![BlockSum::default(); k * (k + 1) / 2],
        }
    }

    pub fn compute(graph: &SignedGraph, partition: &Partition) -> Result<Self> {
        ensure_valid(graph, partition)?;
        let k = partition.k;
        let mut pos = vec![CompensatedSum::new(); k * (k + 1) / 2];
        let mut neg = pos.clone();
        for e in graph.edges() {
            let idx = block_index(k, partition.labels[e.u], partition.labels[e.v]);
            if e.weight > 0.0 {
                pos[idx].add(e.weight);
            } else {
                neg[idx].add(-e.weight);
            }
        }
        let blocks = pos
            .iter()
            .zip(&neg)
            .map(|(p, n)| BlockSum {
                pos: p.value(),
                neg: n.value(),
            })
            .collect();
        Ok(Self { k, blocks })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, a: usize, b: usize) -> BlockSum {
        self.blocks[block_index(self.k, a, b)]
    }

    pub fn get_mut(&mut self, a: usize, b: usize) -> &mut BlockSum {
        &mut self.blocks[block_index(self.k, a, b)]
    }

    /// `(a, b, sums)` for every block, `a <= b`, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, BlockSum)> + '_ {
        (0..self.k).flat_map(move |a| (a..self.k).map(move |b| (a, b, self.get(a, b))))
    }

    /// Sum of `pos + neg` over every block.
    pub fn total_weight(&self) -> f64 {
        self.blocks.iter().map(|b| b.pos + b.neg).sum()
    }
}

pub(crate) fn block_index(k: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * (2 * k - a + 1) / 2 + (b - a)
}
