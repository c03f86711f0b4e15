//! Generates a chamber with planted blocs and a mediator group, solves it
//! and reports how well the blocs were recovered.
//!
//! cargo run --release --example planted -- [seed]

use votebalance::analysis::{detect_mediation, RatioBasis, DEFAULT_MEDIATION_THRESHOLD};
use votebalance::extract::{build_network, AgreementScheme, ExtractionConfig};
use votebalance::imbalance::relative_imbalance;
use votebalance::metrics::adjusted_rand_index;
use votebalance::synth::{generate, SynthConfig};
use votebalance::{ils_solve, ProblemKind, SolverParams};

fn main() -> votebalance::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(0, |s| s.parse().expect("seed must be an integer"));

    let mut config = SynthConfig::balanced(200, 4, 300, seed);
    config.mediator_fraction = 0.1;
    let data = generate(&config)?;
    let graph = build_network(
        &data.records,
        &data.deputies,
        &ExtractionConfig::new(AgreementScheme::V1HalfAgreement),
    )?;
    println!("{} vertices, {} edges", graph.vertex_count(), graph.edge_count());

    let params = SolverParams::new(ProblemKind::Srcc { k: 5 })
        .with_seed(seed)
        .with_restarts(200);
    let result = ils_solve(&graph, &params)?;
    let ari = adjusted_rand_index(result.best_partition.labels(), data.ground_truth.labels())?;
    println!(
        "imbalance {:.3} ({:.3}%), ARI against planted blocs {ari:.3}",
        result.best_value,
        relative_imbalance(&graph, &result.breakdown)?
    );

    for v in detect_mediation(&graph, &result.best_partition, DEFAULT_MEDIATION_THRESHOLD, RatioBasis::Weight)? {
        println!(
            "cluster {} size {:3} internal {:.2} external {:.2}{}",
            v.cluster,
            result.best_partition.members(v.cluster).len(),
            v.internal_positive_ratio,
            v.external_positive_ratio,
            if v.is_mediator { "  mediator" } else { "" }
        );
    }
    Ok(())
}
