//! Signed voting networks from roll-call data, correlation clustering
//! (CC and the symmetric relaxed variant) by iterated local search, and
//! the structural-balance reports built on top of them.
//!
//! The usual flow is [`extract::build_network`] to turn vote records into
//! a [`SignedGraph`], [`solver::ils_solve`] to partition it, and the
//! functions in [`analysis`] to read the partition.

pub mod analysis;
pub mod cli;
pub mod error;
pub mod extract;
pub mod formats;
pub mod graph;
pub mod imbalance;
pub mod metrics;
pub mod partition;
pub mod solver;
pub mod sum;
pub mod synth;
pub mod vote;

pub use error::{Error, Result};
pub use extract::{build_network, AgreementScheme, ExtractionConfig};
pub use graph::{Edge, SignedGraph, Vertex};
pub use imbalance::{cc_imbalance, relative_imbalance, srcc_imbalance, ImbalanceBreakdown, ProblemKind};
pub use partition::Partition;
pub use solver::{ils_solve, SolveResult, SolverParams};
pub use vote::{Deputy, Vote, VoteRecord};
