//! Reports computed from a clustered voting network: mediation groups,
//! coalition loyalty, party leadership, cluster composition, polarization
//! and relative imbalance.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{SignedGraph, Vertex};
use crate::imbalance::{relative_imbalance, BlockSign, ImbalanceBreakdown};
use crate::partition::{ensure_valid, Partition};

pub const DEFAULT_MEDIATION_THRESHOLD: f64 = 0.9;
pub const DEFAULT_POLARIZATION_COVERAGE: f64 = 0.9;
pub const WEAK_LEADERSHIP_PERCENT: f64 = 50.0;

/// Party code to alliance label.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoalitionMap {
    pub alliances: BTreeMap<String, String>,
    /// Label for parties missing from `alliances`; `None` makes them an error.
    pub default_alliance: Option<String>,
}

impl CoalitionMap {
    pub fn new(alliances: impl IntoIterator<Item = (String, String)>) -> Self {
        Self {
            alliances: alliances.into_iter().collect(),
            default_alliance: None,
        }
    }

    pub fn with_default(mut self, label: impl Into<String>) -> Self {
        self.default_alliance = Some(label.into());
        self
    }

    pub fn alliance_of(&self, party: &str) -> Result<&str> {
        self.alliances
            .get(party)
            .or(self.default_alliance.as_ref())
            .map(String::as_str)
            .ok_or_else(|| Error::Metadata(format!("party `{party}` has no alliance in the coalition map")))
    }
}

/// Party code to the deputy id of its leader.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderMap {
    pub leaders: BTreeMap<String, String>,
}

impl LeaderMap {
    pub fn new(leaders: impl IntoIterator<Item = (String, String)>) -> Self {
        Self {
            leaders: leaders.into_iter().collect(),
        }
    }
}

fn check_roster(roster: &[Vertex], partition: &Partition) -> Result<()> {
    if roster.len() != partition.len() {
        return Err(Error::InvalidPartition(format!(
            "{} labels for {} deputies",
            partition.len(),
            roster.len()
        )));
    }
    Ok(())
}

fn argmax(counts: &[usize]) -> usize {
    // first maximum wins
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

// ---------------------------------------------------------------- mediation

/// How positive-relationship ratios are measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RatioBasis {
    /// Sums of `|w|`.
    #[default]
    Weight,
    /// Edge counts.
    Count,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MediationVerdict {
    pub cluster: usize,
    pub external_positive_ratio: f64,
    pub internal_positive_ratio: f64,
    pub is_mediator: bool,
}

/// Flags clusters whose internal and external relationships are both
/// positive beyond `threshold`. A cluster with no internal (or no
/// external) edges has ratio 1 on that side.
pub fn detect_mediation(
    graph: &SignedGraph,
    partition: &Partition,
    threshold: f64,
    basis: RatioBasis,
) -> Result<Vec<MediationVerdict>> {
    ensure_valid(graph, partition)?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "mediation threshold {threshold} outside (0, 1)"
        )));
    }
    let k = partition.k();
    // (positive, total) per cluster
    let mut internal = vec![(0.0f64, 0.0f64); k];
    let mut external = vec![(0.0f64, 0.0f64); k];
    for e in graph.edges() {
        let amount = match basis {
            RatioBasis::Weight => e.weight.abs(),
            RatioBasis::Count => 1.0,
        };
        let positive = if e.weight > 0.0 { amount } else { 0.0 };
        let (a, b) = (partition.cluster_of(e.u), partition.cluster_of(e.v));
        if a == b {
            internal[a].0 += positive;
            internal[a].1 += amount;
        } else {
            for c in [a, b] {
                external[c].0 += positive;
                external[c].1 += amount;
            }
        }
    }
    let ratio = |(pos, total): (f64, f64)| if total > 0.0 { pos / total } else { 1.0 };
    Ok((0..k)
        .map(|c| {
            let internal_positive_ratio = ratio(internal[c]);
            let external_positive_ratio = ratio(external[c]);
            MediationVerdict {
                cluster: c,
                external_positive_ratio,
                internal_positive_ratio,
                is_mediator: internal_positive_ratio > threshold && external_positive_ratio > threshold,
            }
        })
        .collect())
}

// ------------------------------------------------------------------ loyalty

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoyaltyRow {
    pub alliance: String,
    pub party: String,
    pub deputies: usize,
    /// Share of the party's deputies in each cluster, in percent.
    pub percentages: Vec<f64>,
    pub plurality_cluster: usize,
    /// Cluster holding the most deputies of the whole alliance.
    pub alliance_cluster: usize,
    pub unfaithful: bool,
}

/// Distribution of each party over the clusters, grouped by alliance. A
/// party is unfaithful when its plurality cluster is not its alliance's
/// most populous cluster.
pub fn coalition_loyalty(roster: &[Vertex], partition: &Partition, coalition: &CoalitionMap) -> Result<Vec<LoyaltyRow>> {
    check_roster(roster, partition)?;
    let k = partition.k();
    let mut alliance_counts: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    let mut party_counts: BTreeMap<(&str, &str), Vec<usize>> = BTreeMap::new();
    for (i, v) in roster.iter().enumerate() {
        let alliance = coalition.alliance_of(&v.party)?;
        let c = partition.cluster_of(i);
        alliance_counts.entry(alliance).or_insert_with(|| vec![0; k])[c] += 1;
        party_counts.entry((alliance, v.party.as_str())).or_insert_with(|| vec![0; k])[c] += 1;
    }
    Ok(party_counts
        .into_iter()
        .map(|((alliance, party), counts)| {
            let size: usize = counts.iter().sum();
            let plurality_cluster = argmax(&counts);
            let alliance_cluster = argmax(&alliance_counts[alliance]);
            LoyaltyRow {
                alliance: alliance.to_string(),
                party: party.to_string(),
                deputies: size,
                percentages: counts.iter().map(|&c| 100.0 * c as f64 / size as f64).collect(),
                plurality_cluster,
                alliance_cluster,
                unfaithful: plurality_cluster != alliance_cluster,
            }
        })
        .collect())
}

// --------------------------------------------------------------- leadership

/// Whether the leader counts towards their own party's percentage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeaderConvention {
    /// `members sharing the leader's cluster (minus the leader) / (size - 1)`.
    #[default]
    ExcludeLeader,
    /// `members sharing the leader's cluster (leader included) / size`.
    IncludeLeader,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadershipRow {
    pub party: String,
    pub leader_id: String,
    pub deputies: usize,
    pub percentage: f64,
    pub weak: bool,
}

/// Share of each party's deputies placed in their leader's cluster.
/// Parties without a leader entry are not reported.
pub fn leadership_strength(
    roster: &[Vertex],
    partition: &Partition,
    leaders: &LeaderMap,
    convention: LeaderConvention,
) -> Result<Vec<LeadershipRow>> {
    check_roster(roster, partition)?;
    let index: HashMap<&str, usize> = roster.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
    leaders
        .leaders
        .iter()
        .map(|(party, leader_id)| {
            let &leader = index.get(leader_id.as_str()).ok_or_else(|| {
                Error::Metadata(format!(
                    "leader `{leader_id}` of party `{party}` is not in the partition"
                ))
            })?;
            if roster[leader].party != *party {
                return Err(Error::Metadata(format!(
                    "leader `{leader_id}` of party `{party}` belongs to party `{}`",
                    roster[leader].party
                )));
            }
            let home = partition.cluster_of(leader);
            let members: Vec<usize> = (0..roster.len()).filter(|&i| roster[i].party == *party).collect();
            let size = members.len();
            let together = members.iter().filter(|&&i| partition.cluster_of(i) == home).count();
            let percentage = if size == 1 {
                100.0
            } else {
                match convention {
                    LeaderConvention::ExcludeLeader => 100.0 * (together - 1) as f64 / (size - 1) as f64,
                    LeaderConvention::IncludeLeader => 100.0 * together as f64 / size as f64,
                }
            };
            Ok(LeadershipRow {
                party: party.clone(),
                leader_id: leader_id.clone(),
                deputies: size,
                percentage,
                weak: size > 1 && percentage < WEAK_LEADERSHIP_PERCENT,
            })
        })
        .collect()
}

// -------------------------------------------------------------- composition

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionRow {
    pub cluster: usize,
    pub party: String,
    pub count: usize,
}

/// Deputies per (cluster, party), ordered by cluster, then count
/// descending, then party code.
pub fn cluster_composition(roster: &[Vertex], partition: &Partition) -> Result<Vec<CompositionRow>> {
    check_roster(roster, partition)?;
    let mut counts: BTreeMap<(usize, &str), usize> = BTreeMap::new();
    for (i, v) in roster.iter().enumerate() {
        *counts.entry((partition.cluster_of(i), v.party.as_str())).or_default() += 1;
    }
    let mut rows: Vec<CompositionRow> = counts
        .into_iter()
        .map(|((cluster, party), count)| CompositionRow {
            cluster,
            party: party.to_string(),
            count,
        })
        .collect();
    rows.sort_by(|a, b| {
        a.cluster
            .cmp(&b.cluster)
            .then(b.count.cmp(&a.count))
            .then_with(|| a.party.cmp(&b.party))
    });
    Ok(rows)
}

// ------------------------------------------------------------- polarization

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizationRow {
    pub cluster: usize,
    pub size: usize,
    pub dominant_alliance: String,
    pub dominance_share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarizationSummary {
    pub rows: Vec<PolarizationRow>,
    /// Share of vertices in the two largest clusters.
    pub top_two_coverage: f64,
    pub polarized: bool,
}

/// Per-cluster dominant alliance. The chamber is polarized when the two
/// largest clusters cover at least `coverage_threshold` of the vertices and
/// are dominated by different alliances.
pub fn polarization_summary(
    roster: &[Vertex],
    partition: &Partition,
    coalition: &CoalitionMap,
    coverage_threshold: f64,
) -> Result<PolarizationSummary> {
    check_roster(roster, partition)?;
    let k = partition.k();
    let mut per_cluster: Vec<BTreeMap<&str, usize>> = vec![BTreeMap::new(); k];
    for (i, v) in roster.iter().enumerate() {
        *per_cluster[partition.cluster_of(i)]
            .entry(coalition.alliance_of(&v.party)?)
            .or_default() += 1;
    }
    let rows: Vec<PolarizationRow> = per_cluster
        .iter()
        .enumerate()
        .map(|(cluster, counts)| {
            let size: usize = counts.values().sum();
            // BTreeMap order: the alphabetically first alliance wins ties
            let (alliance, top) = counts
                .iter()
                .fold(("", 0usize), |best, (a, &c)| if c > best.1 { (a, c) } else { best });
            PolarizationRow {
                cluster,
                size,
                dominant_alliance: alliance.to_string(),
                dominance_share: if size > 0 { top as f64 / size as f64 } else { 0.0 },
            }
        })
        .collect();

    let mut by_size: Vec<&PolarizationRow> = rows.iter().collect();
    by_size.sort_by(|a, b| b.size.cmp(&a.size).then(a.cluster.cmp(&b.cluster)));
    let n = roster.len().max(1) as f64;
    let (top_two_coverage, polarized) = match by_size.as_slice() {
        [first, second, ..] => {
            let coverage = (first.size + second.size) as f64 / n;
            (
                coverage,
                coverage >= coverage_threshold && first.dominant_alliance != second.dominant_alliance,
            )
        }
        [only] => (only.size as f64 / n, false),
        [] => (0.0, false),
    };
    Ok(PolarizationSummary {
        rows,
        top_two_coverage,
        polarized,
    })
}

// ---------------------------------------------------------- relative imbalance

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockRow {
    pub cluster_a: usize,
    pub cluster_b: usize,
    pub pos: f64,
    pub neg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sign: Option<BlockSign>,
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceReport {
    pub total: f64,
    pub total_abs_weight: f64,
    pub percentage: f64,
    pub blocks: Vec<BlockRow>,
}

/// Raw imbalance, percentage of total absolute weight and per-block detail.
pub fn imbalance_report(graph: &SignedGraph, breakdown: &ImbalanceBreakdown) -> Result<ImbalanceReport> {
    let percentage = relative_imbalance(graph, breakdown)?;
    let relaxed = breakdown.block_signs.is_some();
    let blocks = breakdown
        .blocks
        .iter()
        .enumerate()
        .map(|(i, (a, b, sums))| BlockRow {
            cluster_a: a,
            cluster_b: b,
            pos: sums.pos,
            neg: sums.neg,
            sign: breakdown.block_signs.as_ref().map(|s| s[i]),
            contribution: if relaxed {
                sums.min()
            } else if a == b {
                sums.neg
            } else {
                sums.pos
            },
        })
        .collect();
    Ok(ImbalanceReport {
        total: breakdown.total,
        total_abs_weight: graph.total_abs_weight(),
        percentage,
        blocks,
    })
}
