use std::collections::BTreeSet;

use proptest::prelude::*;

use ghznet::cli::{parse_spec, run, RunFlags, Subcommand};
use ghznet::locc::{BranchControl, Event, LoccError, NetworkState};
use ghznet::protocols::{
    protocol_two, protocol_two_cbits, run_protocol_three, setup_tree, BranchMode,
    ProtocolTwoOptions, Step2Variant, Step3Order,
};
use ghznet::statevec::{Choice, Gate, QubitId, StateVector, FIDELITY_EPS, PROB_EPS};
use ghznet::topology::{AgentId, EntangledHypergraph, EprGraph, SpanningTree};

/// Random labelled tree from a Prüfer-like attachment sequence.
fn tree_strategy() -> impl Strategy<Value = (u32, Vec<(u32, u32)>)> {
    (2u32..=7).prop_flat_map(|n| {
        proptest::collection::vec(any::<prop::sample::Index>(), (n - 1) as usize).prop_map(
            move |picks| {
                let edges = picks
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let child = i as u32 + 2;
                        (p.index(child as usize - 1) as u32 + 1, child)
                    })
                    .collect();
                (n, edges)
            },
        )
    })
}

fn hypergraph_strategy() -> impl Strategy<Value = (u32, Vec<Vec<u32>>)> {
    (2u32..=7).prop_flat_map(|n| {
        let edge =
            proptest::sample::subsequence((1..=n).collect::<Vec<_>>(), 2..=(n as usize).min(4));
        (Just(n), proptest::collection::vec(edge, 1..=5))
    })
}

fn gate_strategy(k: u32) -> impl Strategy<Value = Gate> {
    let q = (0..k).prop_map(QubitId);
    prop_oneof![
        q.clone().prop_map(Gate::x),
        q.clone().prop_map(Gate::z),
        q.clone().prop_map(Gate::h),
        (0..k, 0..k)
            .prop_filter("distinct", |(a, b)| a != b)
            .prop_map(|(a, b)| Gate::cnot(QubitId(a), QubitId(b))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gates_preserve_norm(gates in proptest::collection::vec(gate_strategy(4), 1..60)) {
        let ids: Vec<QubitId> = (0..4).map(QubitId).collect();
        let mut sv = StateVector::new_register(&ids).unwrap();
        for g in &gates {
            sv.apply_gate(g).unwrap();
            prop_assert!((sv.norm_sqr() - 1.0).abs() < PROB_EPS);
        }
    }

    #[test]
    fn measurement_probabilities_sum_to_one(
        gates in proptest::collection::vec(gate_strategy(3), 1..30),
        q in 0u32..3,
        draw in 0.0f64..1.0,
    ) {
        let ids: Vec<QubitId> = (0..3).map(QubitId).collect();
        let mut sv = StateVector::new_register(&ids).unwrap();
        for g in &gates {
            sv.apply_gate(g).unwrap();
        }
        let p0 = sv.probability(QubitId(q), 0).unwrap();
        let p1 = sv.probability(QubitId(q), 1).unwrap();
        prop_assert!((p0 + p1 - 1.0).abs() < PROB_EPS);
        let out = sv.measure(QubitId(q), Choice::Draw(draw)).unwrap();
        prop_assert!((sv.norm_sqr() - 1.0).abs() < PROB_EPS);
        prop_assert!((sv.probability(QubitId(q), out.bit).unwrap() - 1.0).abs() < PROB_EPS);
        sv.discard(QubitId(q)).unwrap();
        prop_assert_eq!(sv.num_qubits(), 2);
    }

    #[test]
    fn spanning_tree_shape((n, edges) in tree_strategy(), extra in proptest::collection::vec((1u32..=7, 1u32..=7), 0..6)) {
        let mut g = EprGraph::from_edges(n, &edges).unwrap();
        for (a, b) in extra {
            if a != b && a <= n && b <= n && !g.has_edge(AgentId(a), AgentId(b)) {
                g.add_edge(a, b).unwrap();
            }
        }
        let t = g.spanning_tree().unwrap();
        prop_assert_eq!(t.edges().len(), n as usize - 1);
        prop_assert!(t.edges().iter().all(|&(a, b)| g.has_edge(a, b)));
        prop_assert!(t.to_graph().is_connected());
        prop_assert!(t.leaves().contains(&t.root_leaf()));
        prop_assert_eq!(t.neighbors(t.root_leaf()), vec![t.start()]);
        prop_assert_eq!(t.root_leaf(), *t.leaves().first().unwrap());
        let mst = g.minimum_spanning_tree().unwrap();
        prop_assert!(g.tree_weight(&mst) <= g.tree_weight(&t) + 1e-12);
    }

    #[test]
    fn merge_schedule_covers_everyone((n, hs) in hypergraph_strategy()) {
        let Ok(h) = EntangledHypergraph::new(n, &hs) else { return Ok(()); };
        match h.merge_schedule() {
            Ok(steps) => {
                prop_assert!(h.is_connected());
                let end = steps.last().map_or(h.hyperedges()[0].members.len(), |s| s.post_size());
                prop_assert_eq!(end, n as usize);
                for w in steps.windows(2) {
                    prop_assert_eq!(w[0].post_size(), w[1].pre_size);
                }
                for s in &steps {
                    prop_assert!(s.overlap.contains(&s.junction));
                    prop_assert_eq!(Some(&s.junction), s.overlap.first());
                }
            }
            Err(_) => prop_assert!(!h.is_connected()),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn protocol_two_any_tree_any_branch(
        (n, edges) in tree_strategy(),
        seed in any::<u64>(),
        zeilinger in any::<bool>(),
        order in prop_oneof![Just(Step3Order::Ascending), Just(Step3Order::Descending), any::<u64>().prop_map(Step3Order::Shuffled)],
    ) {
        let tree = SpanningTree::from_edges(n, &edges).unwrap();
        let step2 = if zeilinger { Step2Variant::Zeilinger } else { Step2Variant::Symmetric };
        let opts = ProtocolTwoOptions { step2, order };
        let mut net = NetworkState::seeded(n, seed);
        setup_tree(&mut net, &tree).unwrap();
        let run = protocol_two(&mut net, &tree, &opts).unwrap();
        prop_assert!(run.fidelity >= 1.0 - FIDELITY_EPS);
        prop_assert_eq!(run.cbits, protocol_two_cbits(n, tree.k(), step2));
        prop_assert_eq!(run.epr_consumed, n as usize - 1);
        prop_assert!(run.marginals_maximal);
        prop_assert!(run.peak_register <= n as usize + 2);

        // every cut ends at exactly one bit, never above what the setup held
        for a in 1..=n {
            let side: BTreeSet<AgentId> = [AgentId(a)].into();
            let crossing = tree.neighbors(AgentId(a)).len() as f64;
            let s = net.audit_cut(&side).unwrap();
            prop_assert!((s - 1.0).abs() < FIDELITY_EPS && s <= crossing + FIDELITY_EPS);
        }

        // the transcript replays, and without its messages it cannot
        let transcript = net.transcript().clone();
        let again = NetworkState::replay(n, &transcript).unwrap();
        prop_assert_eq!(again.transcript(), &transcript);
        if n >= 3 {
            let silent = transcript.filtered(|e| !matches!(e, Event::Message { .. }));
            let replayed = NetworkState::replay(n, &silent);
            prop_assert!(matches!(replayed, Err(LoccError::Conditioning { .. })), "{:?}", replayed.err());
        }
    }

    #[test]
    fn protocol_three_any_connected_hypergraph((n, hs) in hypergraph_strategy(), seed in any::<u64>()) {
        let Ok(h) = EntangledHypergraph::new(n, &hs) else { return Ok(()); };
        prop_assume!(h.is_connected());
        let report = run_protocol_three(&h, BranchMode::Sample(4), seed).unwrap();
        prop_assert!(report.passes(), "{:?}", report);
        prop_assert_eq!(report.cbits, h.merge_schedule().unwrap().len());
    }

    #[test]
    fn spec_round_trip((n, hs) in hypergraph_strategy(), weights in proptest::collection::vec(0.25f64..20.0, 8)) {
        let mut text = format!("# generated\nagents {n}\n");
        for h in &hs {
            let ids: Vec<String> = h.iter().map(u32::to_string).collect();
            text.push_str(&format!("hyper  {}   # group\n", ids.join(" ")));
        }
        if let Ok(spec) = parse_spec(&text) {
            let normal = spec.to_string();
            let again = parse_spec(&normal).unwrap();
            prop_assert_eq!(&again, &spec);
            prop_assert_eq!(again.to_string(), normal);
        }
        let mut text = format!("agents {n}\n");
        for (i, (a, b)) in (1..n).map(|a| (a, a + 1)).enumerate() {
            text.push_str(&format!("edge {a} {b} {}\n", weights[i % weights.len()]));
        }
        let spec = parse_spec(&text).unwrap();
        prop_assert_eq!(parse_spec(&spec.to_string()).unwrap(), spec);
    }

    #[test]
    fn reports_are_deterministic((n, edges) in tree_strategy(), seed in any::<u64>()) {
        let mut text = format!("agents {n}\n");
        for (a, b) in &edges {
            text.push_str(&format!("edge {a} {b}\n"));
        }
        let spec = parse_spec(&text).unwrap();
        let flags = RunFlags { seed, branches: BranchMode::Sample(3), ..RunFlags::default() };
        let a = run(Subcommand::Weave, &spec, &flags);
        let b = run(Subcommand::Weave, &spec, &flags);
        prop_assert_eq!(a.report.to_json(), b.report.to_json());
        prop_assert_eq!(a.exit_code, a.report.exit_code);
        prop_assert_eq!(a.exit_code == 0, a.report.protocol.as_ref().is_some_and(|p| p.passes()));
    }
}

#[test]
fn sampled_branches_reuse_one_stream() {
    let tree = SpanningTree::from_edges(4, &[(1, 2), (2, 3), (3, 4)]).unwrap();
    let mut control = BranchControl::seeded(9);
    let mut seen = BTreeSet::new();
    for _ in 0..16 {
        let mut net = NetworkState::new(4, control);
        setup_tree(&mut net, &tree).unwrap();
        let run = protocol_two(&mut net, &tree, &ProtocolTwoOptions::default()).unwrap();
        seen.insert(run.outcomes);
        control = net.into_parts().1;
    }
    assert!(seen.len() > 1);
}
