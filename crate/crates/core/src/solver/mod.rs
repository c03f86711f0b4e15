//! Iterated local search for CC and SRCC, plus an exhaustive oracle for
//! small graphs.
//!
//! Each restart builds a GRASP-style solution, descends to a local optimum
//! and then repeatedly perturbs the incumbent and descends again, keeping
//! the result only when it is strictly better. Restarts are independent
//! replicas seeded `seed ^ restart` and may run on a thread pool; the best
//! replica wins, lower restart index first on ties.
//!
//! Because of the XOR, nearby base seeds share most of their restart
//! streams: seeds 4 and 5 with 8 restarts draw the same 8 streams in a
//! different order. Vary the restart count, not the seed, for diversity.

mod brute;
mod construct;
mod local_search;
mod perturb;
mod state;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use brute::{brute_force, RestrictedGrowth, BRUTE_FORCE_LIMIT};
pub use construct::greedy_randomized_construction;
pub use local_search::{local_search, local_search_traced, AppliedMove, DeltaMode, IMPROVEMENT_EPS};
pub use perturb::perturb;

use crate::error::{Error, Result};
use crate::graph::SignedGraph;
use crate::imbalance::{breakdown, ImbalanceBreakdown, ProblemKind};
use crate::partition::Partition;

pub const DEFAULT_MAX_ITERATIONS: usize = 500;
pub const DEFAULT_MAX_NO_IMPROVE: usize = 50;
pub const DEFAULT_PERTURBATION_STRENGTH: f64 = 0.1;
pub const DEFAULT_CONSTRUCTION_ALPHA: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub problem: ProblemKind,
    pub seed: u64,
    pub max_iterations: usize,
    pub max_no_improve: usize,
    pub time_limit_seconds: Option<f64>,
    /// Fraction of vertices reassigned per perturbation, in (0, 1].
    pub perturbation_strength: f64,
    /// 0 is pure greedy, 1 picks any placement.
    pub construction_alpha: f64,
    pub restarts: usize,
    /// Worker threads for restarts; 1 runs them sequentially.
    pub threads: usize,
    pub delta_mode: DeltaMode,
}

impl SolverParams {
    pub fn new(problem: ProblemKind) -> Self {
        Self {
            problem,
            seed: 0,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            max_no_improve: DEFAULT_MAX_NO_IMPROVE,
            time_limit_seconds: None,
            perturbation_strength: DEFAULT_PERTURBATION_STRENGTH,
            construction_alpha: DEFAULT_CONSTRUCTION_ALPHA,
            restarts: 1,
            threads: 1,
            delta_mode: DeltaMode::Incremental,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if let ProblemKind::Srcc { k: 0 } = self.problem {
            return bad("k must be at least 1".into());
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if self.max_no_improve == 0 {
            return bad("max_no_improve must be positive".into());
        }
        if let Some(t) = self.time_limit_seconds {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("time limit must be a positive number of seconds, got {t}"));
            }
        }
        if !(self.perturbation_strength > 0.0 && self.perturbation_strength <= 1.0) {
            return bad(format!(
                "perturbation strength {} outside (0, 1]",
                self.perturbation_strength
            ));
        }
        if !(0.0..=1.0).contains(&self.construction_alpha) {
            return bad(format!("construction alpha {} outside [0, 1]", self.construction_alpha));
        }
        if self.restarts == 0 {
            return bad("restarts must be positive".into());
        }
        if self.threads == 0 {
            return bad("threads must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub best_partition: Partition,
    pub best_value: f64,
    pub breakdown: ImbalanceBreakdown,
    /// ILS iterations summed over restarts.
    pub iterations_run: usize,
    pub best_restart: usize,
    pub wall_time_seconds: f64,
    /// Incumbent after each improvement, iterations counted across restarts
    /// in restart order.
    pub trace: Vec<TracePoint>,
}

struct RestartOutcome {
    partition: Partition,
    value: f64,
    iterations: usize,
    trace: Vec<TracePoint>,
}

pub fn ils_solve(graph: &SignedGraph, params: &SolverParams) -> Result<SolveResult> {
    params.validate()?;
    let n = graph.vertex_count();
    if n == 0 {
        return Err(Error::InvalidGraph("graph has no vertices".into()));
    }
    if let Some(k) = params.problem.fixed_k() {
        if n < k {
            return Err(Error::InvalidParameter(format!(
                "cannot split {n} vertices into {k} non-empty clusters"
            )));
        }
    }

    let started = Instant::now();
    let outcomes: Vec<RestartOutcome> = if params.threads > 1 && params.restarts > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(params.threads)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
        pool.install(|| {
            (0..params.restarts)
                .into_par_iter()
                .map(|r| run_restart(graph, params, r, started))
                .collect::<Result<Vec<_>>>()
        })?
    } else {
        (0..params.restarts)
            .map(|r| run_restart(graph, params, r, started))
            .collect::<Result<Vec<_>>>()?
    };

    // merge in restart order: ties keep the lower index
    let mut best = 0;
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut offset = 0;
    let mut iterations_run = 0;
    for (r, outcome) in outcomes.iter().enumerate() {
        if outcome.value < outcomes[best].value - IMPROVEMENT_EPS {
            best = r;
        }
        for point in &outcome.trace {
            if trace.last().is_none_or(|last| point.value < last.value - IMPROVEMENT_EPS) {
                trace.push(TracePoint {
                    iteration: offset + point.iteration,
                    value: point.value,
                });
            }
        }
        offset += outcome.iterations + 1;
        iterations_run += outcome.iterations;
    }

    let best_partition = outcomes[best].partition.canonical();
    let breakdown = breakdown(params.problem, graph, &best_partition)?;
    Ok(SolveResult {
        best_value: breakdown.total,
        best_partition,
        breakdown,
        iterations_run,
        best_restart: best,
        wall_time_seconds: started.elapsed().as_secs_f64(),
        trace,
    })
}

fn run_restart(graph: &SignedGraph, params: &SolverParams, restart: usize, started: Instant) -> Result<RestartOutcome> {
    let problem = params.problem;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ restart as u64);
    let out_of_time = || {
        params
            .time_limit_seconds
            .is_some_and(|limit| started.elapsed().as_secs_f64() >= limit)
    };

    let start = greedy_randomized_construction(graph, problem, params.construction_alpha, &mut rng)?;
    let (mut incumbent, _) = local_search_traced(graph, &start, problem, params.delta_mode)?;
    let mut value = problem.evaluate(graph, &incumbent)?;
    let mut trace = vec![TracePoint { iteration: 0, value }];

    let mut iterations = 0;
    let mut stale = 0;
    while iterations < params.max_iterations && stale < params.max_no_improve && !out_of_time() {
        iterations += 1;
        let kicked = perturb(&incumbent, params.perturbation_strength, problem, &mut rng);
        let (candidate, _) = local_search_traced(graph, &kicked, problem, params.delta_mode)?;
        let candidate_value = problem.evaluate(graph, &candidate)?;
        if candidate_value < value - IMPROVEMENT_EPS {
            incumbent = candidate;
            value = candidate_value;
            stale = 0;
            trace.push(TracePoint { iteration: iterations, value });
        } else {
            stale += 1;
        }
    }
    Ok(RestartOutcome {
        partition: incumbent,
        value,
        iterations,
        trace,
    })
}
