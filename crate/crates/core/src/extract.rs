//! Roll-call records to signed agreement networks.
//!
//! Each pair of deputies gets the mean of a per-proposition agreement
//! score over the extraction period. Pairs whose mean magnitude falls
//! below the edge threshold are dropped.

use std::collections::{HashMap, HashSet};
use std::io::Read;
use std::sync::Arc;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, SignedGraph, Vertex};
use crate::vote::{Deputy, Vote, VoteRecord};

/// How abstentions are scored against other votes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgreementScheme {
    /// Abstention paired with anything scores +0.5.
    #[serde(rename = "v1")]
    V1HalfAgreement,
    /// Abstain/abstain scores +1, abstain with FOR or AGAINST scores 0.
    #[serde(rename = "v2")]
    V2AbsenceOfOpinion,
}

impl std::str::FromStr for AgreementScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "v1" => Ok(Self::V1HalfAgreement),
            "v2" => Ok(Self::V2AbsenceOfOpinion),
            other => Err(format!("unknown agreement scheme `{other}` (expected v1 or v2)")),
        }
    }
}

/// Which propositions count in the denominator of the mean agreement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Denominator {
    /// Every proposition in the period; absent pairs contribute 0.
    #[default]
    AllPropositions,
    /// Only propositions on which neither deputy was absent.
    BothVoted,
}

pub type PeriodFilter = Arc<dyn Fn(&str) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct ExtractionConfig {
    pub scheme: AgreementScheme,
    pub edge_threshold: f64,
    pub denominator: Denominator,
    /// Keeps a proposition when it returns true; `None` keeps all.
    pub period_filter: Option<PeriodFilter>,
}

impl std::fmt::Debug for ExtractionConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExtractionConfig")
            .field("scheme", &self.scheme)
            .field("edge_threshold", &self.edge_threshold)
            .field("denominator", &self.denominator)
            .field("period_filter", &self.period_filter.is_some())
            .finish()
    }
}

pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.001;

impl ExtractionConfig {
    pub fn new(scheme: AgreementScheme) -> Self {
        Self {
            scheme,
            edge_threshold: DEFAULT_EDGE_THRESHOLD,
            denominator: Denominator::AllPropositions,
            period_filter: None,
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.edge_threshold = threshold;
        self
    }

    pub fn with_denominator(mut self, denominator: Denominator) -> Self {
        self.denominator = denominator;
        self
    }

    pub fn with_period_filter(mut self, filter: impl Fn(&str) -> bool + Send + Sync + 'static) -> Self {
        self.period_filter = Some(Arc::new(filter));
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.edge_threshold >= 0.0 && self.edge_threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "edge threshold must be a finite non-negative number, got {}",
                self.edge_threshold
            )));
        }
        Ok(())
    }
}

/// Agreement between two votes on one proposition.
///
/// Obstruction counts as AGAINST; any absence scores 0.
pub fn pairwise_score(vote_u: Vote, vote_v: Vote, scheme: AgreementScheme) -> f64 {
    use Vote::*;
    let normalize = |v: Vote| if v == Obstruction { Against } else { v };
    match (normalize(vote_u), normalize(vote_v)) {
        (Absent, _) | (_, Absent) => 0.0,
        (For, For) | (Against, Against) => 1.0,
        (For, Against) | (Against, For) => -1.0,
        (Abstain, Abstain) => match scheme {
            AgreementScheme::V1HalfAgreement => 0.5,
            AgreementScheme::V2AbsenceOfOpinion => 1.0,
        },
        (Abstain, _) | (_, Abstain) => match scheme {
            AgreementScheme::V1HalfAgreement => 0.5,
            AgreementScheme::V2AbsenceOfOpinion => 0.0,
        },
        (Obstruction, _) | (_, Obstruction) => unreachable!("obstruction normalised to AGAINST"),
    }
}

/// Mean agreement of two deputies over `propositions`.
///
/// A proposition without a record for a deputy counts as ABSENT. With
/// [`Denominator::BothVoted`] and no shared proposition the result is 0.
pub fn average_agreement(
    records_u: &[VoteRecord],
    records_v: &[VoteRecord],
    propositions: &[String],
    scheme: AgreementScheme,
    denominator: Denominator,
) -> Result<f64> {
    if propositions.is_empty() {
        return Err(Error::EmptyPeriod);
    }
    let index = |records: &[VoteRecord]| -> HashMap<String, Vote> {
        records
            .iter()
            .map(|r| (r.proposition_id.clone(), r.vote))
            .collect()
    };
    let (by_u, by_v) = (index(records_u), index(records_v));
    let votes = propositions.iter().map(|p| {
        (
            by_u.get(p).copied().unwrap_or(Vote::Absent),
            by_v.get(p).copied().unwrap_or(Vote::Absent),
        )
    });
    Ok(mean_score(votes, scheme, denominator))
}

fn mean_score(
    votes: impl Iterator<Item = (Vote, Vote)>,
    scheme: AgreementScheme,
    denominator: Denominator,
) -> f64 {
    // scores are multiples of 0.5, so the running sum is exact
    let mut sum = 0.0;
    let mut count = 0usize;
    for (a, b) in votes {
        if denominator == Denominator::BothVoted && (a == Vote::Absent || b == Vote::Absent) {
            continue;
        }
        sum += pairwise_score(a, b, scheme);
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Builds the agreement network for the configured period.
///
/// Vertices are the deputies with at least one non-absent vote in the
/// period, in roster order. An edge is kept when `|m_uv| >= threshold`
/// and `m_uv != 0`.
pub fn build_network(
    records: &[VoteRecord],
    deputies: &[Deputy],
    config: &ExtractionConfig,
) -> Result<SignedGraph> {
    config.validate()?;

    let deputy_index: HashMap<&str, usize> = deputies
        .iter()
        .enumerate()
        .map(|(i, d)| (d.id.as_str(), i))
        .collect();

    let mut propositions: Vec<&str> = Vec::new();
    let mut proposition_index: HashMap<&str, usize> = HashMap::new();
    let mut seen_pairs: HashSet<(&str, &str)> = HashSet::with_capacity(records.len());
    for r in records {
        if !seen_pairs.insert((r.proposition_id.as_str(), r.deputy_id.as_str())) {
            return Err(Error::DuplicateRecord {
                proposition: r.proposition_id.clone(),
                deputy: r.deputy_id.clone(),
            });
        }
        if !deputy_index.contains_key(r.deputy_id.as_str()) {
            return Err(Error::Metadata(format!(
                "vote record references unknown deputy `{}`",
                r.deputy_id
            )));
        }
        let keep = config
            .period_filter
            .as_ref()
            .is_none_or(|f| f(&r.proposition_id));
        if keep && !proposition_index.contains_key(r.proposition_id.as_str()) {
            proposition_index.insert(&r.proposition_id, propositions.len());
            propositions.push(&r.proposition_id);
        }
    }
    if propositions.is_empty() {
        return Err(Error::EmptyPeriod);
    }

    let mut matrix = vec![vec![Vote::Absent; propositions.len()]; deputies.len()];
    for r in records {
        if let Some(&p) = proposition_index.get(r.proposition_id.as_str()) {
            matrix[deputy_index[r.deputy_id.as_str()]][p] = r.vote;
        }
    }

    let active: Vec<usize> = (0..deputies.len())
        .filter(|&d| matrix[d].iter().any(|&v| v != Vote::Absent))
        .collect();
    if active.is_empty() {
        return Err(Error::EmptyVertexSet);
    }

    let threshold = config.edge_threshold;
    let rows: Vec<Vec<Edge>> = (0..active.len())
        .into_par_iter()
        .map(|u| {
            let row_u = &matrix[active[u]];
            ((u + 1)..active.len())
                .filter_map(|v| {
                    let row_v = &matrix[active[v]];
                    let m = mean_score(
                        row_u.iter().copied().zip(row_v.iter().copied()),
                        config.scheme,
                        config.denominator,
                    );
                    (m != 0.0 && m.abs() >= threshold).then_some(Edge { u, v, weight: m })
                })
                .collect()
        })
        .collect();

    let vertices = active
        .iter()
        .map(|&d| {
            let dep = &deputies[d];
            Vertex::new(dep.id.clone(), dep.party.clone(), dep.state.clone())
        })
        .collect();
    SignedGraph::new(vertices, rows.into_iter().flatten())
}

/// A proposition seen in an input file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proposition {
    pub id: String,
    pub date: Option<NaiveDate>,
}

impl Proposition {
    pub fn year(&self) -> Option<i32> {
        self.date.map(|d| d.year())
    }
}

/// Parsed vote file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VoteData {
    pub deputies: Vec<Deputy>,
    pub records: Vec<VoteRecord>,
    pub propositions: Vec<Proposition>,
}

impl VoteData {
    pub fn has_dates(&self) -> bool {
        !self.propositions.is_empty() && self.propositions.iter().all(|p| p.date.is_some())
    }

    /// Ids of propositions dated within `[from, to]`, inclusive.
    pub fn propositions_between(&self, from: NaiveDate, to: NaiveDate) -> HashSet<String> {
        self.propositions
            .iter()
            .filter(|p| p.date.is_some_and(|d| d >= from && d <= to))
            .map(|p| p.id.clone())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Json,
}

impl InputFormat {
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => InputFormat::Json,
            _ => InputFormat::Csv,
        }
    }
}

pub const VOTE_COLUMNS: [&str; 6] = [
    "proposition_id",
    "deputy_id",
    "deputy_name",
    "party",
    "state",
    "vote",
];

/// One input row, shared by the CSV and JSON readers and the writers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteRow {
    pub proposition_id: String,
    pub deputy_id: String,
    pub deputy_name: String,
    pub party: String,
    pub state: String,
    pub vote: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date: Option<String>,
}

/// Parses a vote file into deduplicated deputies (first appearance wins)
/// and validated records. Errors carry the 1-based line (CSV) or
/// record position (JSON).
pub fn parse_vote_records<R: Read>(input: R, format: InputFormat) -> Result<VoteData> {
    let rows: Vec<(usize, VoteRow)> = match format {
        InputFormat::Csv => read_csv_rows(input)?,
        InputFormat::Json => {
            let rows: Vec<serde_json::Value> = serde_json::from_reader(input)?;
            rows.into_iter()
                .enumerate()
                .map(|(i, value)| {
                    serde_json::from_value::<VoteRow>(value)
                        .map(|row| (i + 1, row))
                        .map_err(|e| Error::parse(i + 1, format!("record: {e}")))
                })
                .collect::<Result<_>>()?
        }
    };
    assemble(rows)
}

fn read_csv_rows<R: Read>(input: R) -> Result<Vec<(usize, VoteRow)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| Error::parse(1, e.to_string()))?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let mut positions = [0usize; 6];
    for (slot, name) in positions.iter_mut().zip(VOTE_COLUMNS) {
        *slot = column(name).ok_or_else(|| Error::parse(1, format!("missing column `{name}`")))?;
    }
    let date_column = column("date");

    let mut rows = Vec::new();
    for result in reader.records() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let field = |i: usize| record.get(positions[i]).unwrap_or_default().to_string();
        let date = date_column
            .and_then(|c| record.get(c))
            .filter(|d| !d.is_empty())
            .map(str::to_string);
        rows.push((
            line,
            VoteRow {
                proposition_id: field(0),
                deputy_id: field(1),
                deputy_name: field(2),
                party: field(3),
                state: field(4),
                vote: field(5),
                date,
            },
        ));
    }
    Ok(rows)
}

fn assemble(rows: Vec<(usize, VoteRow)>) -> Result<VoteData> {
    let mut data = VoteData::default();
    let mut deputy_seen: HashSet<String> = HashSet::new();
    let mut proposition_pos: HashMap<String, usize> = HashMap::new();
    let mut pairs: HashSet<(String, String)> = HashSet::new();

    for (line, row) in rows {
        for (name, value) in [
            ("proposition_id", &row.proposition_id),
            ("deputy_id", &row.deputy_id),
            ("party", &row.party),
            ("state", &row.state),
        ] {
            if value.trim().is_empty() {
                return Err(Error::parse(line, format!("empty `{name}`")));
            }
        }
        let vote: Vote = row.vote.parse().map_err(|_| Error::UnknownVote {
            line,
            token: row.vote.clone(),
        })?;
        let date = row
            .date
            .as_deref()
            .map(|d| {
                NaiveDate::parse_from_str(d, "%Y-%m-%d")
                    .map_err(|e| Error::parse(line, format!("bad date `{d}`: {e}")))
            })
            .transpose()?;

        match proposition_pos.get(&row.proposition_id) {
            Some(&pos) => {
                let known = &mut data.propositions[pos];
                match (known.date, date) {
                    (Some(a), Some(b)) if a != b => {
                        return Err(Error::parse(
                            line,
                            format!(
                                "proposition `{}` dated both {a} and {b}",
                                row.proposition_id
                            ),
                        ))
                    }
                    (None, Some(b)) => known.date = Some(b),
                    _ => {}
                }
            }
            None => {
                proposition_pos.insert(row.proposition_id.clone(), data.propositions.len());
                data.propositions.push(Proposition {
                    id: row.proposition_id.clone(),
                    date,
                });
            }
        }

        if !pairs.insert((row.proposition_id.clone(), row.deputy_id.clone())) {
            return Err(Error::DuplicateRecord {
                proposition: row.proposition_id,
                deputy: row.deputy_id,
            });
        }
        if deputy_seen.insert(row.deputy_id.clone()) {
            data.deputies.push(Deputy {
                id: row.deputy_id.clone(),
                name: row.deputy_name,
                party: row.party,
                state: row.state,
            });
        }
        data.records.push(VoteRecord {
            proposition_id: row.proposition_id,
            deputy_id: row.deputy_id,
            vote,
        });
    }
    Ok(data)
}
