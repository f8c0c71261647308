mod common;

use proptest::prelude::*;
use twoconn_core::graph::{figure1, generate_random_connected};
use twoconn_core::oracle::ground_truth;
use twoconn_core::protocol::Access;
use twoconn_core::simulator::{
    init_arbitrary, inject_fault, round_scale, run, step, Configuration, FaultField, FaultSpec,
    FaultTarget, FaultValue, FieldFault, Network, RunOptions, SimError, Trigger,
};
use twoconn_core::{Graph, NodeId, PathValue, Register, Scheduler};

fn arb_graph() -> impl Strategy<Value = Graph> {
    (1..=14usize, any::<u64>(), 0..6usize).prop_map(|(n, seed, extra)| {
        let extra = extra.min(n * (n - 1) / 2 + 1 - n);
        generate_random_connected(n, extra, seed).unwrap()
    })
}

fn arb_scheduler(n: usize) -> impl Strategy<Value = Scheduler> {
    (0..3u8, any::<u64>()).prop_map(move |(kind, seed)| match kind {
        0 => Scheduler::RoundRobin,
        1 => Scheduler::UniformRandom { seed },
        _ => Scheduler::weighted_from_seed(seed, n),
    })
}

fn stabilize(g: &Graph, sched: &Scheduler, seed: u64) -> Configuration {
    let net = Network::new(g.clone());
    let out = run(
        g,
        sched,
        init_arbitrary(&net, seed),
        &[],
        &RunOptions::for_graph(g),
    )
    .unwrap();
    assert!(out.report.stabilized);
    out.final_configuration
}

fn post_fault(target: FaultTarget, seed: u64) -> FaultSpec {
    FaultSpec {
        trigger: Trigger::AfterStabilization,
        target,
        seed,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn converges_certifies_and_stays_closed(
        (g, sched) in arb_graph().prop_flat_map(|g| {
            let n = g.n();
            (Just(g), arb_scheduler(n))
        }),
        seed: u64,
    ) {
        let net = Network::new(g.clone());
        let opts = RunOptions { closure_rounds: 50, ..RunOptions::for_graph(&g) };
        let out = run(&g, &sched, init_arbitrary(&net, seed), &[], &opts).unwrap();
        let rep = &out.report;
        prop_assert!(rep.stabilized);
        prop_assert!(rep.oracle_match);
        prop_assert_eq!(rep.closure_changes, 0);
        prop_assert!(rep.stabilization_round.unwrap() <= 10 * round_scale(&g));
        prop_assert_eq!(out.final_configuration.registers(), ground_truth(&g).registers());
    }

    #[test]
    fn runs_are_deterministic(g in arb_graph(), seed: u64) {
        let net = Network::new(g.clone());
        let sched = Scheduler::UniformRandom { seed };
        let faults = [post_fault(FaultTarget::RandomFields { k: 2 }, seed)];
        let opts = RunOptions { record_rounds: true, record_schedule: true, ..RunOptions::for_graph(&g) };
        let a = run(&g, &sched, init_arbitrary(&net, seed), &faults, &opts).unwrap();
        let b = run(&g, &sched, init_arbitrary(&net, seed), &faults, &opts).unwrap();
        prop_assert_eq!(a.report, b.report);
        prop_assert_eq!(a.trace, b.trace);
        prop_assert_eq!(a.final_configuration, b.final_configuration);
    }

    #[test]
    fn steps_touch_only_the_active_processor(g in arb_graph(), seed: u64, picks in prop::collection::vec(any::<prop::sample::Index>(), 1..60)) {
        let net = Network::new(g.clone());
        let mut c = init_arbitrary(&net, seed);
        for pick in picks {
            let pid = NodeId::from_index(pick.index(g.n()));
            let before = c.clone();
            let rec = step(&net, &mut c, pid);
            for v in g.nodes().filter(|&v| v != pid) {
                prop_assert_eq!(&before.states[v.index()], &c.states[v.index()]);
            }
            if !matches!(rec.access, Access::Write(_)) {
                prop_assert_eq!(&before.states[pid.index()].register, &c.states[pid.index()].register);
            }
        }
    }

    #[test]
    fn single_field_faults_are_repaired_exactly(g in arb_graph(), seed: u64) {
        let net = Network::new(g.clone());
        let faults: Vec<FaultSpec> = (0..5)
            .map(|i| post_fault(FaultTarget::RandomFields { k: 1 }, seed.wrapping_add(i)))
            .collect();
        let out = run(&g, &Scheduler::UniformRandom { seed }, init_arbitrary(&net, seed), &faults, &RunOptions::for_graph(&g)).unwrap();
        prop_assert!(out.report.stabilized);
        prop_assert_eq!(out.report.fault_events.len(), 5);
        for e in &out.report.fault_events {
            prop_assert!(e.recovered && e.restored_identical);
        }
    }
}

#[test]
fn init_arbitrary_is_deterministic_and_rarely_legitimate() {
    let g = figure1();
    let net = Network::new(g.clone());
    assert_eq!(init_arbitrary(&net, 9), init_arbitrary(&net, 9));
    assert_ne!(init_arbitrary(&net, 9), init_arbitrary(&net, 10));
    let legit = ground_truth(&g).registers();
    let hits = (0..100)
        .filter(|&s| init_arbitrary(&net, s).registers() == legit)
        .count();
    assert_eq!(hits, 0);

    let tri = Graph::from_edges(3, &[(1, 2), (2, 3), (3, 1)]).unwrap();
    let net = Network::new(tri.clone());
    let legit = ground_truth(&tri).registers();
    let hits = (0..100)
        .filter(|&s| init_arbitrary(&net, s).registers() == legit)
        .count();
    assert!(hits <= 1, "{hits} legitimate initial configurations");
}

#[test]
fn lone_root_converges_in_three_steps() {
    let g = Graph::from_edges(1, &[]).unwrap();
    let net = Network::new(g.clone());
    for seed in 0..20 {
        let mut c = init_arbitrary(&net, seed);
        for _ in 0..3 {
            step(&net, &mut c, NodeId::ROOT);
        }
        assert_eq!(c.registers(), vec![Register::root()]);
    }
}

#[test]
fn single_edge_final_registers() {
    let g = Graph::from_edges(2, &[(1, 2)]).unwrap();
    let c = stabilize(&g, &Scheduler::RoundRobin, 3);
    let leaf = PathValue::from_ports(&[1]);
    assert_eq!(
        c.registers(),
        vec![
            Register::root(),
            Register {
                path: leaf.clone(),
                count: 0,
                bcc: leaf
            }
        ]
    );
}

#[test]
fn stabilized_processors_are_at_a_fixpoint() {
    for inst in common::corpus(20) {
        let g = &inst.graph;
        let net = Network::new(g.clone());
        let mut c = stabilize(g, &Scheduler::UniformRandom { seed: inst.seed }, inst.seed);
        let regs = c.registers();
        for v in g.nodes() {
            for _ in 0..2 * net.contexts[v.index()].program_len() {
                step(&net, &mut c, v);
            }
            assert_eq!(c.registers(), regs, "{} node {v}", inst.label);
        }
    }
}

#[test]
fn corrupted_root_count_is_restored() {
    let g = figure1();
    let net = Network::new(g.clone());
    let mut c = stabilize(&g, &Scheduler::RoundRobin, 5);
    let spec = FaultSpec {
        trigger: Trigger::AtStep(0),
        target: FaultTarget::Fields(vec![FieldFault {
            node: NodeId::ROOT,
            field: FaultField::Count,
            value: Some(FaultValue::Count(7)),
        }]),
        seed: 0,
    };
    inject_fault(&net, &mut c, &spec).unwrap();
    assert_eq!(c.register(NodeId::ROOT).count, 7);
    for _ in 0..3 {
        step(&net, &mut c, NodeId::ROOT);
    }
    assert_eq!(c.register(NodeId::ROOT).count, 0);
}

#[test]
fn empty_fault_is_identity_and_bad_targets_are_rejected() {
    let g = figure1();
    let net = Network::new(g.clone());
    let c0 = init_arbitrary(&net, 1);
    let mut c = c0.clone();
    assert_eq!(
        inject_fault(&net, &mut c, &FaultSpec::none()).unwrap(),
        vec![]
    );
    assert_eq!(c, c0);

    let bad_node = FaultSpec {
        target: FaultTarget::Fields(vec![FieldFault {
            node: NodeId(17),
            field: FaultField::Count,
            value: None,
        }]),
        ..FaultSpec::none()
    };
    assert_eq!(
        inject_fault(&net, &mut c, &bad_node),
        Err(SimError::NodeOutOfRange { node: NodeId(17) })
    );
    let too_long = FaultSpec {
        target: FaultTarget::Fields(vec![FieldFault {
            node: NodeId(2),
            field: FaultField::Path,
            value: Some(FaultValue::Path(PathValue::from_ports(&[1; 16]))),
        }]),
        ..FaultSpec::none()
    };
    assert!(matches!(
        inject_fault(&net, &mut c, &too_long),
        Err(SimError::BadFaultValue { .. })
    ));
    assert_eq!(c, c0);
}

#[test]
fn figure1_counts_for_many_seeds() {
    let g = figure1();
    for seed in 0..30 {
        let c = stabilize(&g, &Scheduler::weighted_from_seed(seed, g.n()), seed);
        for v in [4, 6, 11, 14] {
            assert_eq!(c.register(NodeId(v)).count, 0);
        }
    }
}

#[test]
fn timed_faults_fire_before_their_step() {
    let g = figure1();
    let net = Network::new(g.clone());
    let spec = FaultSpec {
        trigger: Trigger::AtStep(200),
        target: FaultTarget::AllState,
        seed: 4,
    };
    let out = run(
        &g,
        &Scheduler::RoundRobin,
        init_arbitrary(&net, 4),
        &[spec],
        &RunOptions::for_graph(&g),
    )
    .unwrap();
    assert!(out.report.stabilized);
    let e = &out.report.fault_events[0];
    assert_eq!(e.step, 200);
    assert!(e.recovered);
}
