use proptest::prelude::*;

use votebalance::extract::{average_agreement, pairwise_score, Denominator};
use votebalance::formats::{parse_graph, read_partition, write_graph, write_partition};
use votebalance::imbalance::{cc_move_delta, srcc_move_delta};
use votebalance::partition::BlockTotals;
use votebalance::solver::{brute_force, local_search, local_search_traced, DeltaMode, IMPROVEMENT_EPS};
use votebalance::{
    cc_imbalance, ils_solve, srcc_imbalance, AgreementScheme, Partition, ProblemKind, SignedGraph, SolverParams,
    Vote, VoteRecord,
};

type Edges = Vec<(usize, usize, f64)>;

fn naive_cc(edges: &Edges, labels: &[usize]) -> f64 {
    edges
        .iter()
        .map(|&(u, v, w)| match (labels[u] == labels[v], w < 0.0) {
            (true, true) => -w,
            (false, false) => w,
            _ => 0.0,
        })
        .sum()
}

fn naive_srcc(edges: &Edges, labels: &[usize]) -> f64 {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut pos = vec![vec![0.0; k]; k];
    let mut neg = vec![vec![0.0; k]; k];
    for &(u, v, w) in edges {
        let (a, b) = (labels[u].min(labels[v]), labels[u].max(labels[v]));
        if w > 0.0 {
            pos[a][b] += w;
        } else {
            neg[a][b] -= w;
        }
    }
    let mut total = 0.0;
    for a in 0..k {
        for b in a..k {
            total += f64::min(pos[a][b], neg[a][b]);
        }
    }
    total
}

fn weight() -> impl Strategy<Value = f64> {
    prop_oneof![-1.0..-0.001f64, 0.001..1.0f64]
}

/// Graph on `lo..=hi` vertices with each pair present with probability 1/2.
fn graph(lo: usize, hi: usize) -> impl Strategy<Value = (usize, Edges)> {
    (lo..=hi).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(proptest::option::of(weight()), pairs).prop_map(move |ws| {
            let mut edges = Vec::new();
            let mut it = ws.into_iter();
            for u in 0..n {
                for v in (u + 1)..n {
                    if let Some(w) = it.next().unwrap() {
                        edges.push((u, v, w));
                    }
                }
            }
            (n, edges)
        })
    })
}

/// Graph plus a partition with exactly `k` non-empty clusters.
fn graph_and_partition(lo: usize, hi: usize) -> impl Strategy<Value = (usize, Edges, Vec<usize>, usize)> {
    graph(lo, hi).prop_flat_map(|(n, edges)| {
        (1..=n).prop_flat_map(move |k| {
            let edges = edges.clone();
            proptest::collection::vec(0..k, n - k)
                .prop_map(move |rest| (0..k).chain(rest).collect::<Vec<usize>>())
                .prop_shuffle()
                .prop_map(move |labels| (n, edges.clone(), labels, k))
        })
    })
}

fn build(n: usize, edges: &Edges) -> SignedGraph {
    SignedGraph::from_weighted_edges(n, edges.iter().copied()).unwrap()
}

fn any_vote() -> impl Strategy<Value = Vote> {
    proptest::sample::select(Vote::ALL.to_vec())
}

fn any_scheme() -> impl Strategy<Value = AgreementScheme> {
    prop_oneof![Just(AgreementScheme::V1HalfAgreement), Just(AgreementScheme::V2AbsenceOfOpinion)]
}

fn records(deputy: &str, votes: &[Vote]) -> Vec<VoteRecord> {
    votes
        .iter()
        .enumerate()
        .map(|(i, &vote)| VoteRecord {
            proposition_id: format!("p{i}"),
            deputy_id: deputy.into(),
            vote,
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn objectives_match_naive((n, edges, labels, k) in graph_and_partition(1, 12)) {
        let g = build(n, &edges);
        let p = Partition::new(labels.clone(), k).unwrap();
        prop_assert!((cc_imbalance(&g, &p).unwrap() - naive_cc(&edges, &labels)).abs() < 1e-9);
        prop_assert!((srcc_imbalance(&g, &p).unwrap().total - naive_srcc(&edges, &labels)).abs() < 1e-9);
    }

    #[test]
    fn bounds_hold((n, edges, labels, k) in graph_and_partition(1, 14)) {
        let g = build(n, &edges);
        let p = Partition::new(labels, k).unwrap();
        let sri = srcc_imbalance(&g, &p).unwrap();
        let cc = cc_imbalance(&g, &p).unwrap();
        prop_assert!(sri.total >= 0.0);
        prop_assert!(sri.total <= cc);
        prop_assert!(cc <= g.total_abs_weight() + 1e-9);
        prop_assert!((sri.recomputed_total() - sri.total).abs() < 1e-9);
    }

    #[test]
    fn relabeling_preserves_objectives(
        (n, edges, labels, k) in graph_and_partition(1, 12),
        salt in any::<u64>(),
    ) {
        let g = build(n, &edges);
        let p = Partition::new(labels, k).unwrap();
        // a rotation by salt is a permutation of 0..k
        let mapping: Vec<usize> = (0..k).map(|c| (c + salt as usize % k) % k).collect();
        let q = p.relabeled(&mapping).unwrap();
        prop_assert!((cc_imbalance(&g, &p).unwrap() - cc_imbalance(&g, &q).unwrap()).abs() < 1e-9);
        prop_assert!((srcc_imbalance(&g, &p).unwrap().total - srcc_imbalance(&g, &q).unwrap().total).abs() < 1e-9);
        prop_assert_eq!(p.canonical(), q.canonical());
    }

    #[test]
    fn objectives_scale_linearly((n, edges, labels, k) in graph_and_partition(1, 12), factor in 0.01..=1.0f64) {
        let g = build(n, &edges);
        let s = g.scaled(factor).unwrap();
        let p = Partition::new(labels, k).unwrap();
        let cc = cc_imbalance(&g, &p).unwrap();
        let sri = srcc_imbalance(&g, &p).unwrap().total;
        prop_assert!((cc_imbalance(&s, &p).unwrap() - factor * cc).abs() < 1e-9 * (1.0 + factor * cc));
        prop_assert!((srcc_imbalance(&s, &p).unwrap().total - factor * sri).abs() < 1e-9 * (1.0 + factor * sri));
    }

    #[test]
    fn deltas_match_recomputation(
        (n, edges, labels, k) in graph_and_partition(2, 12),
        pick in any::<proptest::sample::Index>(),
        target_pick in any::<proptest::sample::Index>(),
    ) {
        let g = build(n, &edges);
        let p = Partition::new(labels.clone(), k).unwrap();
        let vertex = pick.index(n);
        let alone = labels.iter().filter(|&&l| l == labels[vertex]).count() == 1;

        let cc_targets: Vec<usize> = (0..=k).filter(|&t| t != labels[vertex] && !(alone && t == k)).collect();
        if !cc_targets.is_empty() {
            let target = cc_targets[target_pick.index(cc_targets.len())];
            let mut after = labels.clone();
            after[vertex] = target;
            let expected = naive_cc(&edges, &after) - naive_cc(&edges, &labels);
            prop_assert!((cc_move_delta(&g, &p, vertex, target).unwrap() - expected).abs() < 1e-9);
        } else {
            prop_assert!(cc_move_delta(&g, &p, vertex, k).is_err());
        }

        let blocks = BlockTotals::compute(&g, &p).unwrap();
        let srcc_targets: Vec<usize> = (0..k).filter(|&t| t != labels[vertex]).collect();
        if srcc_targets.is_empty() {
            return Ok(());
        }
        let target = srcc_targets[target_pick.index(srcc_targets.len())];
        if alone {
            prop_assert!(srcc_move_delta(&g, &p, &blocks, vertex, target).is_err());
        } else {
            let mut after = labels.clone();
            after[vertex] = target;
            let expected = naive_srcc(&edges, &after) - naive_srcc(&edges, &labels);
            prop_assert!((srcc_move_delta(&g, &p, &blocks, vertex, target).unwrap() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn all_positive_relaxed_is_zero((n, edges, labels, k) in graph_and_partition(1, 14)) {
        let positive: Edges = edges.into_iter().map(|(u, v, w)| (u, v, w.abs())).collect();
        let g = build(n, &positive);
        let p = Partition::new(labels, k).unwrap();
        prop_assert_eq!(srcc_imbalance(&g, &p).unwrap().total, 0.0);
        prop_assert_eq!(cc_imbalance(&g, &Partition::single_cluster(n).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn graph_text_round_trip((n, edges) in graph(1, 15)) {
        // weights on the 1e-6 grid survive the six-decimal format
        let snapped: Edges = edges.iter().map(|&(u, v, w)| (u, v, (w * 1e6).round() / 1e6)).collect();
        let g = build(n, &snapped);
        let text = write_graph(&g).unwrap();
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(back.vertices(), g.vertices());
        prop_assert_eq!(back.edges(), g.edges());
        prop_assert_eq!(write_graph(&back).unwrap(), text);
    }

    #[test]
    fn partition_file_round_trip((n, edges, labels, k) in graph_and_partition(1, 12), with_graph in any::<bool>()) {
        let g = build(n, &edges);
        let p = Partition::new(labels, k).unwrap();
        let graph = with_graph.then_some(&g);
        let text = write_partition(&p, graph).unwrap();
        prop_assert_eq!(read_partition(text.as_bytes(), graph).unwrap(), p);
    }

    #[test]
    fn scores_are_symmetric_and_bounded(a in any_vote(), b in any_vote(), scheme in any_scheme()) {
        let s = pairwise_score(a, b, scheme);
        prop_assert_eq!(s, pairwise_score(b, a, scheme));
        prop_assert!((-1.0..=1.0).contains(&s));
        prop_assert_eq!(pairwise_score(a, Vote::Obstruction, scheme), pairwise_score(a, Vote::Against, scheme));
        prop_assert_eq!(pairwise_score(a, Vote::Absent, scheme), 0.0);
    }

    #[test]
    fn average_agreement_symmetric_and_monotone(
        votes in proptest::collection::vec((any_vote(), any_vote()), 1..40),
        scheme in any_scheme(),
        both_voted in any::<bool>(),
    ) {
        let denominator = if both_voted { Denominator::BothVoted } else { Denominator::AllPropositions };
        let (us, vs): (Vec<Vote>, Vec<Vote>) = votes.iter().copied().unzip();
        let props: Vec<String> = (0..votes.len()).map(|i| format!("p{i}")).collect();
        let (ru, rv) = (records("u", &us), records("v", &vs));
        let m = average_agreement(&ru, &rv, &props, scheme, denominator).unwrap();
        prop_assert_eq!(m, average_agreement(&rv, &ru, &props, scheme, denominator).unwrap());
        prop_assert!((-1.0..=1.0).contains(&m));

        // one more proposition on which both vote FOR cannot lower the mean
        let mut us2 = us.clone();
        let mut vs2 = vs.clone();
        us2.push(Vote::For);
        vs2.push(Vote::For);
        let mut props2 = props.clone();
        props2.push(format!("p{}", votes.len()));
        let m2 = average_agreement(&records("u", &us2), &records("v", &vs2), &props2, scheme, denominator).unwrap();
        prop_assert!(m2 >= m);
        // and one where they oppose cannot raise it
        let mut us3 = us;
        let mut vs3 = vs;
        us3.push(Vote::For);
        vs3.push(Vote::Against);
        let m3 = average_agreement(&records("u", &us3), &records("v", &vs3), &props2, scheme, denominator).unwrap();
        prop_assert!(m3 <= m);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solver_is_deterministic((n, edges) in graph(2, 25), seed in any::<u64>(), srcc in any::<bool>()) {
        let g = build(n, &edges);
        let problem = if srcc { ProblemKind::Srcc { k: 2 } } else { ProblemKind::Cc };
        let params = SolverParams::new(problem).with_seed(seed).with_restarts(2);
        let a = ils_solve(&g, &params).unwrap();
        let b = ils_solve(&g, &params).unwrap();
        prop_assert_eq!(&a.best_partition, &b.best_partition);
        prop_assert_eq!(a.best_value, b.best_value);
        prop_assert_eq!(&a.trace, &b.trace);
        prop_assert_eq!(a.iterations_run, b.iterations_run);
    }

    #[test]
    fn trace_strictly_improves((n, edges) in graph(2, 25), seed in any::<u64>(), srcc in any::<bool>()) {
        let g = build(n, &edges);
        let problem = if srcc { ProblemKind::Srcc { k: 2 } } else { ProblemKind::Cc };
        let result = ils_solve(&g, &SolverParams::new(problem).with_seed(seed).with_restarts(3)).unwrap();
        prop_assert!(!result.trace.is_empty());
        for pair in result.trace.windows(2) {
            prop_assert!(pair[1].value < pair[0].value);
            prop_assert!(pair[1].iteration > pair[0].iteration);
        }
        prop_assert!((result.trace.last().unwrap().value - result.best_value).abs() < 1e-9);
        prop_assert!((problem.evaluate(&g, &result.best_partition).unwrap() - result.best_value).abs() < 1e-9);
    }

    #[test]
    fn local_search_reaches_local_optimum((n, edges, labels, k) in graph_and_partition(2, 14), srcc in any::<bool>()) {
        let g = build(n, &edges);
        let start = Partition::new(labels, k).unwrap();
        let problem = if srcc { ProblemKind::Srcc { k } } else { ProblemKind::Cc };
        let done = local_search(&g, &start, problem).unwrap();
        prop_assert!(problem.evaluate(&g, &done).unwrap() <= problem.evaluate(&g, &start).unwrap() + 1e-9);
        let sizes = done.cluster_sizes();
        for v in 0..n {
            let from = done.cluster_of(v);
            if srcc {
                prop_assert_eq!(done.k(), k);
                if sizes[from] == 1 {
                    continue;
                }
                let blocks = BlockTotals::compute(&g, &done).unwrap();
                for t in (0..k).filter(|&t| t != from) {
                    prop_assert!(srcc_move_delta(&g, &done, &blocks, v, t).unwrap() >= -IMPROVEMENT_EPS);
                }
            } else {
                for t in (0..=done.k()).filter(|&t| t != from && !(sizes[from] == 1 && t == done.k())) {
                    prop_assert!(cc_move_delta(&g, &done, v, t).unwrap() >= -IMPROVEMENT_EPS);
                }
            }
        }
    }

    #[test]
    fn solver_never_beats_brute_force((n, edges) in graph(2, 8), seed in any::<u64>()) {
        let g = build(n, &edges);
        let (_, cc_opt) = brute_force(&g, ProblemKind::Cc, n).unwrap();
        let found = ils_solve(&g, &SolverParams::new(ProblemKind::Cc).with_seed(seed)).unwrap();
        prop_assert!(found.best_value >= cc_opt - 1e-9);
        let (_, sr_opt) = brute_force(&g, ProblemKind::Srcc { k: 2 }, 2).unwrap();
        let relaxed = ils_solve(&g, &SolverParams::new(ProblemKind::Srcc { k: 2 }).with_seed(seed)).unwrap();
        prop_assert!(relaxed.best_value >= sr_opt - 1e-9);
    }

    #[test]
    fn incremental_and_recomputed_descents_agree((n, edges, labels, k) in graph_and_partition(2, 14), srcc in any::<bool>()) {
        let g = build(n, &edges);
        let start = Partition::new(labels, k).unwrap();
        let problem = if srcc { ProblemKind::Srcc { k } } else { ProblemKind::Cc };
        let (a, _) = local_search_traced(&g, &start, problem, DeltaMode::Incremental).unwrap();
        let (b, _) = local_search_traced(&g, &start, problem, DeltaMode::Recompute).unwrap();
        prop_assert_eq!(a, b);
    }
}
