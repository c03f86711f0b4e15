//! Planted-coalition roll-call generator.
//!
//! Deputies belong to blocs; on every proposition each bloc takes a stance
//! and its members follow it with probability `discipline`. Mediators
//! ignore blocs and vote FOR with probability `discipline`. The bloc of
//! every deputy (mediators get a label of their own) is returned as the
//! ground-truth partition.

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::Proposition;
use crate::partition::Partition;
use crate::vote::{Deputy, Vote, VoteRecord};

/// How bloc stances are drawn on a contested proposition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StanceModel {
    /// Each bloc flips its own fair coin.
    Independent,
    /// Blocs are split at random into two camps of sizes `ceil(b/2)` and
    /// `floor(b/2)` that take opposite stances.
    #[default]
    Opposed,
}

impl std::str::FromStr for StanceModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "independent" => Ok(Self::Independent),
            "opposed" => Ok(Self::Opposed),
            other => Err(format!("unknown stance model `{other}` (expected independent or opposed)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlocSpec {
    pub size: usize,
    /// `(party code, weight)`; seats are split by largest remainder.
    pub parties: Vec<(String, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_deputies: usize,
    pub n_propositions: usize,
    pub blocs: Vec<BlocSpec>,
    /// Probability of following the bloc stance, in [0.5, 1].
    pub discipline: f64,
    pub abstain_rate: f64,
    pub absent_rate: f64,
    pub obstruction_rate: f64,
    pub mediator_fraction: f64,
    pub seed: u64,
    pub stance_model: StanceModel,
    /// Share of propositions on which every bloc stands FOR.
    pub consensus_rate: f64,
    /// When set, propositions are dated across this calendar year.
    pub year: Option<i32>,
}

pub const DEFAULT_CONSENSUS_RATE: f64 = 0.125;

impl SynthConfig {
    /// `n_blocs` blocs of near-equal size, bloc `b` made of party `P{b+1}`.
    pub fn balanced(n_deputies: usize, n_blocs: usize, n_propositions: usize, seed: u64) -> Self {
        let blocs = (0..n_blocs)
            .map(|b| BlocSpec {
                size: n_deputies / n_blocs + usize::from(b < n_deputies % n_blocs),
                parties: vec![(format!("P{}", b + 1), 1.0)],
            })
            .collect();
        Self {
            n_deputies,
            n_propositions,
            blocs,
            discipline: 0.95,
            abstain_rate: 0.0,
            absent_rate: 0.0,
            obstruction_rate: 0.0,
            mediator_fraction: 0.0,
            seed,
            stance_model: StanceModel::default(),
            consensus_rate: DEFAULT_CONSENSUS_RATE,
            year: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.n_deputies == 0 || self.n_propositions == 0 {
            return bad("need at least one deputy and one proposition".into());
        }
        if self.blocs.is_empty() {
            return bad("need at least one bloc".into());
        }
        let total: usize = self.blocs.iter().map(|b| b.size).sum();
        if total != self.n_deputies {
            return bad(format!("bloc sizes sum to {total}, expected {}", self.n_deputies));
        }
        for (i, bloc) in self.blocs.iter().enumerate() {
            if bloc.size == 0 {
                return bad(format!("bloc {i} is empty"));
            }
            if bloc.parties.is_empty() || bloc.parties.iter().any(|(p, w)| p.trim().is_empty() || !w.is_finite() || *w <= 0.0) {
                return bad(format!("bloc {i} needs parties with positive weights"));
            }
        }
        if !(0.5..=1.0).contains(&self.discipline) {
            return bad(format!("discipline {} outside [0.5, 1]", self.discipline));
        }
        for (name, rate) in [
            ("abstain_rate", self.abstain_rate),
            ("absent_rate", self.absent_rate),
            ("obstruction_rate", self.obstruction_rate),
            ("mediator_fraction", self.mediator_fraction),
            ("consensus_rate", self.consensus_rate),
        ] {
            if !unit(rate) {
                return bad(format!("{name} {rate} outside [0, 1]"));
            }
        }
        if self.abstain_rate + self.absent_rate + self.obstruction_rate > 1.0 {
            return bad("abstain, absent and obstruction rates sum above 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthData {
    pub deputies: Vec<Deputy>,
    pub records: Vec<VoteRecord>,
    pub propositions: Vec<Proposition>,
    /// Bloc per deputy; mediators share one extra label.
    pub ground_truth: Partition,
    /// Deputy indices of the mediators, ascending.
    pub mediators: Vec<usize>,
}

pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.n_deputies;
    let n_blocs = config.blocs.len();

    let mut bloc_of = Vec::with_capacity(n);
    let mut party_of = Vec::with_capacity(n);
    for (b, bloc) in config.blocs.iter().enumerate() {
        for party in apportion(&bloc.parties, bloc.size) {
            bloc_of.push(b);
            party_of.push(party);
        }
    }

    let n_mediators = ((config.mediator_fraction * n as f64).round() as usize).min(n);
    let mut mediators: Vec<usize> = rand::seq::index::sample(&mut rng, n, n_mediators).into_vec();
    mediators.sort_unstable();
    let mut is_mediator = vec![false; n];
    for &m in &mediators {
        is_mediator[m] = true;
    }

    let width = n.to_string().len();
    let deputies: Vec<Deputy> = (0..n)
        .map(|i| Deputy {
            id: format!("d{:0width$}", i + 1),
            name: format!("Deputy {}", i + 1),
            party: party_of[i].clone(),
            state: STATES[i % STATES.len()].to_string(),
        })
        .collect();

    let pwidth = config.n_propositions.to_string().len();
    let propositions: Vec<Proposition> = (0..config.n_propositions)
        .map(|p| Proposition {
            id: format!("p{:0pwidth$}", p + 1),
            date: config.year.and_then(|y| proposition_date(y, p, config.n_propositions)),
        })
        .collect();

    let mut records = Vec::with_capacity(n * config.n_propositions);
    let mut stances = vec![Vote::For; n_blocs];
    let mut order: Vec<usize> = (0..n_blocs).collect();
    for prop in &propositions {
        if rng.gen_bool(config.consensus_rate) {
            stances.fill(Vote::For);
        } else {
            match config.stance_model {
                StanceModel::Independent => {
                    for s in stances.iter_mut() {
                        *s = coin(&mut rng);
                    }
                }
                StanceModel::Opposed => {
                    order.shuffle(&mut rng);
                    let first = coin(&mut rng);
                    let camp = n_blocs.div_ceil(2);
                    for (rank, &b) in order.iter().enumerate() {
                        stances[b] = if rank < camp { first } else { opposite(first) };
                    }
                }
            }
        }
        for d in 0..n {
            let intended = if is_mediator[d] { Vote::For } else { stances[bloc_of[d]] };
            let vote = draw_vote(&mut rng, config, intended);
            records.push(VoteRecord {
                proposition_id: prop.id.clone(),
                deputy_id: deputies[d].id.clone(),
                vote,
            });
        }
    }

    let labels: Vec<usize> = (0..n)
        .map(|d| if is_mediator[d] { n_blocs } else { bloc_of[d] })
        .collect();
    let ground_truth = compact(&labels);

    Ok(SynthData {
        deputies,
        records,
        propositions,
        ground_truth,
        mediators,
    })
}

fn coin<R: Rng>(rng: &mut R) -> Vote {
    if rng.gen_bool(0.5) {
        Vote::For
    } else {
        Vote::Against
    }
}

fn opposite(v: Vote) -> Vote {
    match v {
        Vote::For => Vote::Against,
        _ => Vote::For,
    }
}

fn draw_vote<R: Rng>(rng: &mut R, config: &SynthConfig, intended: Vote) -> Vote {
    let u: f64 = rng.gen();
    if u < config.absent_rate {
        Vote::Absent
    } else if u < config.absent_rate + config.abstain_rate {
        Vote::Abstain
    } else if u < config.absent_rate + config.abstain_rate + config.obstruction_rate {
        Vote::Obstruction
    } else if rng.gen_bool(config.discipline) {
        intended
    } else {
        opposite(intended)
    }
}

/// Dense labels in increasing order of the original label, so bloc `b`
/// keeps index `b` unless an earlier bloc vanished into mediators.
fn compact(labels: &[usize]) -> Partition {
    let max = labels.iter().copied().max().unwrap_or(0);
    let mut present = vec![false; max + 1];
    for &l in labels {
        present[l] = true;
    }
    let mut remap = vec![0; max + 1];
    let mut next = 0;
    for (l, &p) in present.iter().enumerate() {
        if p {
            remap[l] = next;
            next += 1;
        }
    }
    Partition::new(labels.iter().map(|&l| remap[l]).collect(), next).expect("compacted labels")
}

/// Largest-remainder split of `seats` over weighted parties.
fn apportion(parties: &[(String, f64)], seats: usize) -> Vec<String> {
    let total: f64 = parties.iter().map(|p| p.1).sum();
    let quotas: Vec<f64> = parties.iter().map(|p| p.1 / total * seats as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut rest: Vec<usize> = (0..parties.len()).collect();
    rest.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
    let assigned: usize = counts.iter().sum();
    for &i in rest.iter().take(seats - assigned) {
        counts[i] += 1;
    }
    parties
        .iter()
        .zip(counts)
        .flat_map(|((name, _), c)| std::iter::repeat_n(name.clone(), c))
        .collect()
}

fn proposition_date(year: i32, index: usize, total: usize) -> Option<NaiveDate> {
    let start = NaiveDate::from_ymd_opt(year, 1, 1)?;
    let end = NaiveDate::from_ymd_opt(year, 12, 31)?;
    let span = (end - start).num_days() as usize;
    start.checked_add_days(Days::new((index * span / total.max(1)) as u64))
}

const STATES: [&str; 27] = [
    "AC", "AL", "AP", "AM", "BA", "CE", "DF", "ES", "GO", "MA", "MT", "MS", "MG", "PA", "PB", "PR", "PE", "PI",
    "RJ", "RN", "RS", "RO", "RR", "SC", "SP", "SE", "TO",
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_count_and_order() {
        let cfg = SynthConfig::balanced(12, 3, 7, 1);
        let data = generate(&cfg).unwrap();
        assert_eq!(data.records.len(), 12 * 7);
        assert_eq!(data.records[0].proposition_id, "p1");
        assert_eq!(data.records[11].proposition_id, "p1");
        assert_eq!(data.records[12].proposition_id, "p2");
        assert_eq!(data.records[1].deputy_id, "d02");
        assert_eq!(data.ground_truth.k(), 3);
    }

    #[test]
    fn deterministic_for_seed() {
        let mut cfg = SynthConfig::balanced(20, 2, 15, 42);
        cfg.abstain_rate = 0.1;
        cfg.absent_rate = 0.1;
        cfg.mediator_fraction = 0.2;
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let mut other = cfg.clone();
        other.seed = 43;
        assert_ne!(generate(&cfg).unwrap().records, generate(&other).unwrap().records);
    }

    #[test]
    fn mediators_get_their_own_label() {
        let mut cfg = SynthConfig::balanced(40, 4, 5, 3);
        cfg.mediator_fraction = 0.1;
        let data = generate(&cfg).unwrap();
        assert_eq!(data.mediators.len(), 4);
        assert_eq!(data.ground_truth.k(), 5);
        for &m in &data.mediators {
            assert_eq!(data.ground_truth.cluster_of(m), 4);
        }
    }

    #[test]
    fn noise_rates_show_up() {
        let mut cfg = SynthConfig::balanced(50, 2, 200, 8);
        cfg.absent_rate = 0.2;
        cfg.abstain_rate = 0.1;
        cfg.obstruction_rate = 0.05;
        let data = generate(&cfg).unwrap();
        let share = |v: Vote| data.records.iter().filter(|r| r.vote == v).count() as f64 / data.records.len() as f64;
        assert!((share(Vote::Absent) - 0.2).abs() < 0.02);
        assert!((share(Vote::Abstain) - 0.1).abs() < 0.02);
        assert!((share(Vote::Obstruction) - 0.05).abs() < 0.01);
    }

    #[test]
    fn opposed_two_blocs_always_disagree() {
        let mut cfg = SynthConfig::balanced(6, 2, 30, 5);
        cfg.discipline = 1.0;
        cfg.consensus_rate = 0.0;
        let data = generate(&cfg).unwrap();
        for chunk in data.records.chunks(6) {
            assert_eq!(chunk[0].vote, chunk[1].vote);
            assert_ne!(chunk[0].vote, chunk[3].vote);
        }
    }

    #[test]
    fn party_mix_apportioned() {
        let parties = vec![("A".to_string(), 2.0), ("B".to_string(), 1.0)];
        let seats = apportion(&parties, 10);
        assert_eq!(seats.iter().filter(|p| *p == "A").count(), 7);
        assert_eq!(seats.len(), 10);
    }

    #[test]
    fn dated_propositions_stay_in_year() {
        let mut cfg = SynthConfig::balanced(4, 2, 50, 0);
        cfg.year = Some(2014);
        let data = generate(&cfg).unwrap();
        assert!(data.propositions.iter().all(|p| p.year() == Some(2014)));
    }

    #[test]
    fn config_validation() {
        let base = SynthConfig::balanced(10, 2, 5, 0);
        let mut cases = Vec::new();
        let mut c = base.clone();
        c.n_deputies = 11;
        cases.push(c);
        let mut c = base.clone();
        c.discipline = 0.4;
        cases.push(c);
        let mut c = base.clone();
        c.absent_rate = 0.6;
        c.abstain_rate = 0.6;
        cases.push(c);
        let mut c = base.clone();
        c.mediator_fraction = 1.5;
        cases.push(c);
        let mut c = base.clone();
        c.blocs.clear();
        cases.push(c);
        for c in cases {
            assert!(generate(&c).is_err(), "{c:?}");
        }
    }
}
