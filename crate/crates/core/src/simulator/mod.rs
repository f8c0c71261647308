//! The daemon-driven execution of the protocol.
//!
//! A run serializes atomic steps chosen by a [`Scheduler`], counts rounds,
//! fires faults, and declares stabilization through an omniscient observer
//! that compares registers with [`crate::oracle::ground_truth`]. The
//! processors themselves never detect termination.
//!
//! Stabilization is declared once the registers have matched the ground
//! truth continuously for `window_rounds` complete rounds *and* every
//! processor has begun a fresh program cycle since the match. The second
//! condition means every local variable has been refreshed from correct
//! registers, so no later write can disturb the configuration.

mod fault;
mod rounds;
mod scheduler;

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

pub use fault::{
    init_arbitrary, inject_fault, random_path, random_register, random_state, FaultField,
    FaultSpec, FaultTarget, FaultValue, FieldFault, Trigger,
};
pub use rounds::{round_boundaries, RoundCounter};
pub use scheduler::Scheduler;

use crate::analysis::{certify, extract, Certification, DetectionResult};
use crate::graph::{Graph, NodeId};
use crate::oracle::{ground_truth, GroundTruth};
use crate::path::PathValue;
use crate::protocol::{
    execute_step, Access, NeighborRegisters, NodeContext, ProcessorState, Register, StepRecord,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("weighted scheduler needs one positive weight per node")]
    UnfairWeights,
    #[error("fault targets node {node}, which does not exist")]
    NodeOutOfRange { node: NodeId },
    #[error("fault value for {field:?} has the wrong type or is out of bounds")]
    BadFaultValue { field: FaultField },
    #[error("initial configuration has {got} processors, graph has {want}")]
    ConfigurationSize { got: usize, want: usize },
}

/// A graph together with the per-node contexts the protocol needs.
#[derive(Debug, Clone)]
pub struct Network {
    pub graph: Graph,
    pub contexts: Vec<NodeContext>,
}

impl Network {
    pub fn new(graph: Graph) -> Network {
        let contexts = NodeContext::all(&graph);
        Network { graph, contexts }
    }
}

/// One state per processor, indexed by node slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub states: Vec<ProcessorState>,
}

impl Configuration {
    /// Zeroed registers and locals, program counters at 0.
    pub fn blank(net: &Network) -> Configuration {
        Configuration {
            states: net.contexts.iter().map(ProcessorState::new).collect(),
        }
    }

    pub fn registers(&self) -> Vec<Register> {
        self.states.iter().map(|s| s.register.clone()).collect()
    }

    pub fn register(&self, v: NodeId) -> &Register {
        &self.states[v.index()].register
    }
}

struct View<'a> {
    states: &'a [ProcessorState],
    neighbors: &'a [NodeId],
}

impl View<'_> {
    fn reg(&self, port: u32) -> &Register {
        &self.states[self.neighbors[port as usize - 1].index()].register
    }
}

impl NeighborRegisters for View<'_> {
    fn read_path(&self, port: u32) -> PathValue {
        self.reg(port).path.clone()
    }
    fn read_count(&self, port: u32) -> i64 {
        self.reg(port).count
    }
    fn read_bcc(&self, port: u32) -> PathValue {
        self.reg(port).bcc.clone()
    }
}

/// Activates `pid` for one atomic step. Only `pid`'s state changes.
pub fn step(net: &Network, c: &mut Configuration, pid: NodeId) -> StepRecord {
    let mut state = core::mem::take(&mut c.states[pid.index()]);
    let view = View {
        states: &c.states,
        neighbors: net.graph.neighbors(pid),
    };
    let rec = execute_step(&mut state, &net.contexts[pid.index()], &view);
    c.states[pid.index()] = state;
    rec
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    /// Budget of complete rounds for each convergence phase (the initial
    /// one and each recovery after a post-stabilization fault).
    pub max_rounds: u64,
    /// Complete rounds the registers must stay legitimate before
    /// stabilization is declared.
    pub window_rounds: u64,
    /// Rounds run after the final stabilization to check closure.
    pub closure_rounds: u64,
    /// Keep a register snapshot at every round boundary.
    pub record_rounds: bool,
    /// Keep the full activation schedule.
    pub record_schedule: bool,
}

impl RunOptions {
    /// `max_rounds = 10·d·n·Δ` (each factor at least 1), window of 2.
    pub fn for_graph(g: &Graph) -> RunOptions {
        RunOptions {
            max_rounds: default_round_budget(g),
            window_rounds: 2,
            closure_rounds: 0,
            record_rounds: false,
            record_schedule: false,
        }
    }
}

/// `d·n·Δ` with each factor at least 1.
pub fn round_scale(g: &Graph) -> u64 {
    (g.diameter().max(1) * g.n() * g.max_degree().max(1)) as u64
}

pub fn default_round_budget(g: &Graph) -> u64 {
    10 * round_scale(g)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultEvent {
    pub step: u64,
    pub round: u64,
    pub trigger: Trigger,
    pub applied: Vec<FieldFault>,
    /// Fault fired while the configuration was declared stable.
    pub after_stabilization: bool,
    pub recovered: bool,
    /// Rounds from the fault until legitimacy was regained.
    pub recovery_rounds: Option<u64>,
    /// Registers after recovery equal the registers right before the fault.
    pub restored_identical: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpaceStats {
    pub max_register_bits: usize,
    pub register_bit_budget: usize,
    pub max_path_len: usize,
    /// Register images that did not fit the encoding (should stay 0).
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub scheduler: Scheduler,
    pub stabilized: bool,
    /// Round in which the registers first became (and stayed) legitimate
    /// in the initial convergence phase.
    pub stabilization_round: Option<u64>,
    pub stabilization_step: Option<u64>,
    pub total_steps: u64,
    pub rounds: u64,
    pub fault_events: Vec<FaultEvent>,
    pub closure_rounds: u64,
    /// Register writes that changed a value during the closure window.
    pub closure_changes: u64,
    pub space: SpaceStats,
    pub detection: Option<DetectionResult>,
    pub certification: Option<Certification>,
    pub oracle_match: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trace {
    pub round_snapshots: Vec<Vec<Register>>,
    pub schedule: Option<Vec<NodeId>>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub trace: Trace,
    pub final_configuration: Configuration,
    pub ground_truth: GroundTruth,
}

/// Incremental comparison of registers against the ground truth.
struct Legitimacy<'a> {
    target: &'a [Register],
    wrong: Vec<bool>,
    wrong_count: usize,
}

impl<'a> Legitimacy<'a> {
    fn new(target: &'a [Register], c: &Configuration) -> Legitimacy<'a> {
        let mut l = Legitimacy {
            target,
            wrong: vec![false; target.len()],
            wrong_count: 0,
        };
        l.reset(c);
        l
    }

    fn reset(&mut self, c: &Configuration) {
        for (i, s) in c.states.iter().enumerate() {
            self.wrong[i] = s.register != self.target[i];
        }
        self.wrong_count = self.wrong.iter().filter(|&&w| w).count();
    }

    fn update(&mut self, v: NodeId, reg: &Register) {
        let now = *reg != self.target[v.index()];
        let was = core::mem::replace(&mut self.wrong[v.index()], now);
        match (was, now) {
            (false, true) => self.wrong_count += 1,
            (true, false) => self.wrong_count -= 1,
            _ => {}
        }
    }

    fn holds(&self) -> bool {
        self.wrong_count == 0
    }
}

/// Confirmation window opened when the registers become legitimate.
struct Window {
    start_step: u64,
    start_round: u64,
    rounds_closed: u64,
    fresh: Vec<bool>,
    stale: usize,
}

impl Window {
    fn open(net: &Network, start_step: u64, start_round: u64) -> Window {
        // The root writes constants, so it never holds stale locals.
        let fresh: Vec<bool> = net.contexts.iter().map(|c| c.is_root).collect();
        let stale = fresh.iter().filter(|&&f| !f).count();
        Window {
            start_step,
            start_round,
            rounds_closed: 0,
            fresh,
            stale,
        }
    }

    fn observe(&mut self, v: NodeId, rec: &StepRecord, round_closed: bool) {
        if rec.slot == 0 && !self.fresh[v.index()] {
            self.fresh[v.index()] = true;
            self.stale -= 1;
        }
        if round_closed {
            self.rounds_closed += 1;
        }
    }

    fn confirmed(&self, window_rounds: u64) -> bool {
        self.stale == 0 && self.rounds_closed >= window_rounds
    }
}

fn track_space(stats: &mut SpaceStats, net: &Network, reg: &Register) {
    let bounds = &net.contexts[0].bounds;
    stats.max_path_len = stats.max_path_len.max(reg.path.len()).max(reg.bcc.len());
    match reg.encode(bounds) {
        Ok(e) => stats.max_register_bits = stats.max_register_bits.max(e.bits),
        Err(_) => stats.violations += 1,
    }
}

/// Executes the protocol on `g` from `init` until stabilization (plus the
/// closure window) or until a convergence phase exhausts `max_rounds`.
pub fn run(
    g: &Graph,
    sched: &Scheduler,
    init: Configuration,
    faults: &[FaultSpec],
    opts: &RunOptions,
) -> Result<RunOutcome, SimError> {
    let net = Network::new(g.clone());
    let n = g.n();
    if init.states.len() != n {
        return Err(SimError::ConfigurationSize {
            got: init.states.len(),
            want: n,
        });
    }
    let truth = ground_truth(g);
    let target = truth.registers();
    let mut daemon = sched.start(n)?;

    let mut cfg = init;
    let mut legit = Legitimacy::new(&target, &cfg);
    let mut rounds = RoundCounter::new(n);
    let mut steps: u64 = 0;
    let mut space = SpaceStats {
        register_bit_budget: net.contexts[0].bounds.register_bit_budget(),
        ..SpaceStats::default()
    };
    for s in &cfg.states {
        track_space(&mut space, &net, &s.register);
    }

    let mut timed: Vec<FaultSpec> = faults
        .iter()
        .filter(|f| matches!(f.trigger, Trigger::AtStep(_)))
        .cloned()
        .collect();
    timed.sort_by_key(|f| match f.trigger {
        Trigger::AtStep(s) => s,
        Trigger::AfterStabilization => u64::MAX,
    });
    let mut timed: VecDeque<FaultSpec> = timed.into();
    let mut post: VecDeque<FaultSpec> = faults
        .iter()
        .filter(|f| f.trigger == Trigger::AfterStabilization)
        .cloned()
        .collect();

    let mut trace = Trace {
        round_snapshots: Vec::new(),
        schedule: opts.record_schedule.then(Vec::new),
    };
    let mut events: Vec<FaultEvent> = Vec::new();
    // Faults still waiting for recovery: index into `events` and the
    // registers observed right before each fired.
    let mut awaiting: Vec<(usize, Vec<Register>)> = Vec::new();
    let mut window = legit.holds().then(|| Window::open(&net, 0, 0));
    let mut declared = false;
    let mut stabilization: Option<(u64, u64)> = None;
    let mut phase_start = 0u64;
    let mut budget_exhausted = false;

    loop {
        while let Some(f) = timed.front() {
            let Trigger::AtStep(at) = f.trigger else {
                break;
            };
            if at > steps {
                break;
            }
            let f = timed.pop_front().expect("front exists");
            let before = cfg.registers();
            let applied = inject_fault(&net, &mut cfg, &f)?;
            for a in &applied {
                track_space(&mut space, &net, &cfg.states[a.node.index()].register);
            }
            events.push(FaultEvent {
                step: steps,
                round: rounds.elapsed(),
                trigger: f.trigger,
                applied,
                after_stabilization: declared,
                recovered: false,
                recovery_rounds: None,
                restored_identical: false,
            });
            awaiting.push((events.len() - 1, before));
            legit.reset(&cfg);
            window = legit
                .holds()
                .then(|| Window::open(&net, steps, rounds.elapsed()));
            declared = false;
            phase_start = rounds.completed();
        }

        if declared {
            break;
        }
        if rounds.completed() - phase_start >= opts.max_rounds {
            budget_exhausted = true;
            break;
        }

        let p = daemon.pick();
        let rec = step(&net, &mut cfg, p);
        steps += 1;
        if let Some(s) = trace.schedule.as_mut() {
            s.push(p);
        }
        if let Access::Write(_) = rec.access {
            let reg = &cfg.states[p.index()].register;
            legit.update(p, reg);
            track_space(&mut space, &net, reg);
        }
        let closed = rounds.observe(p);
        if closed && opts.record_rounds {
            trace.round_snapshots.push(cfg.registers());
        }

        if legit.holds() {
            let w = window.get_or_insert_with(|| Window::open(&net, steps, rounds.elapsed()));
            w.observe(p, &rec, closed);
        } else {
            window = None;
        }

        let Some(w) = window.as_ref() else { continue };
        if !w.confirmed(opts.window_rounds) {
            continue;
        }

        // Declared stable.
        if stabilization.is_none() {
            stabilization = Some((w.start_round, w.start_step));
        }
        for (idx, before) in awaiting.drain(..) {
            let e = &mut events[idx];
            e.recovered = true;
            e.recovery_rounds = Some(w.start_round.saturating_sub(e.round));
            e.restored_identical = cfg.registers() == before;
        }
        if !timed.is_empty() {
            // Keep executing until the remaining timed faults fire.
            continue;
        }
        if let Some(f) = post.pop_front() {
            let before = cfg.registers();
            let applied = inject_fault(&net, &mut cfg, &f)?;
            for a in &applied {
                track_space(&mut space, &net, &cfg.states[a.node.index()].register);
            }
            events.push(FaultEvent {
                step: steps,
                round: rounds.elapsed(),
                trigger: f.trigger,
                applied,
                after_stabilization: true,
                recovered: false,
                recovery_rounds: None,
                restored_identical: false,
            });
            awaiting.push((events.len() - 1, before));
            legit.reset(&cfg);
            window = legit
                .holds()
                .then(|| Window::open(&net, steps, rounds.elapsed()));
            phase_start = rounds.completed();
            continue;
        }
        declared = true;
    }

    // Closure window.
    let mut closure_changes = 0u64;
    let mut closure_done = 0u64;
    if declared && opts.closure_rounds > 0 {
        let target_round = rounds.completed() + opts.closure_rounds;
        while rounds.completed() < target_round {
            let p = daemon.pick();
            let before = cfg.states[p.index()].register.clone();
            let rec = step(&net, &mut cfg, p);
            steps += 1;
            if let Some(s) = trace.schedule.as_mut() {
                s.push(p);
            }
            if let Access::Write(_) = rec.access {
                let reg = &cfg.states[p.index()].register;
                if *reg != before {
                    closure_changes += 1;
                }
                legit.update(p, reg);
                track_space(&mut space, &net, reg);
            }
            if rounds.observe(p) {
                closure_done += 1;
                if opts.record_rounds {
                    trace.round_snapshots.push(cfg.registers());
                }
            }
        }
    }

    let all_recovered = events.iter().all(|e| e.recovered);
    let stabilized = declared && !budget_exhausted && closure_changes == 0 && all_recovered;
    let (detection, certification) = if stabilized {
        match extract(&cfg.registers(), g) {
            Ok(d) => {
                let c = certify(&d, g);
                (Some(d), Some(c))
            }
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    let oracle_match = certification.as_ref().is_some_and(|c| c.matched);

    let report = RunReport {
        scheduler: sched.clone(),
        stabilized,
        stabilization_round: stabilization.map(|s| s.0),
        stabilization_step: stabilization.map(|s| s.1),
        total_steps: steps,
        rounds: rounds.completed(),
        fault_events: events,
        closure_rounds: closure_done,
        closure_changes,
        space,
        detection,
        certification,
        oracle_match,
    };
    Ok(RunOutcome {
        report,
        trace,
        final_configuration: cfg,
        ground_truth: truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::figure1;

    fn single_edge() -> Graph {
        Graph::from_edges(2, &[(1, 2)]).unwrap()
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let net = Network::new(figure1());
        assert_eq!(init_arbitrary(&net, 5), init_arbitrary(&net, 5));
        assert_ne!(init_arbitrary(&net, 5), init_arbitrary(&net, 6));
    }

    #[test]
    fn single_node_converges_within_three_steps() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let net = Network::new(g.clone());
        for seed in 0..20 {
            let mut c = init_arbitrary(&net, seed);
            for _ in 0..3 {
                step(&net, &mut c, NodeId::ROOT);
            }
            assert_eq!(c.states[0].register, Register::root());
        }
        let out = run(
            &g,
            &Scheduler::RoundRobin,
            init_arbitrary(&net, 1),
            &[],
            &RunOptions::for_graph(&g),
        )
        .unwrap();
        assert!(out.report.stabilized);
    }

    #[test]
    fn step_touches_only_the_activated_processor() {
        let net = Network::new(figure1());
        let mut c = init_arbitrary(&net, 3);
        for i in 0..500u32 {
            let p = NodeId(i % 16 + 1);
            let before = c.clone();
            let rec = step(&net, &mut c, p);
            for v in net.graph.nodes().filter(|&v| v != p) {
                assert_eq!(c.states[v.index()], before.states[v.index()]);
            }
            if !matches!(rec.access, Access::Write(_)) {
                assert_eq!(
                    c.states[p.index()].register,
                    before.states[p.index()].register
                );
            }
        }
    }

    #[test]
    fn root_step_writes_per_pc() {
        let net = Network::new(figure1());
        let mut c = init_arbitrary(&net, 8);
        c.states[0].pc = 1;
        let rec = step(&net, &mut c, NodeId::ROOT);
        assert_eq!(rec.access, Access::Write(crate::protocol::Field::Count));
        assert_eq!(c.states[0].register.count, 0);
    }

    #[test]
    fn single_edge_final_registers() {
        let g = single_edge();
        let net = Network::new(g.clone());
        for seed in 0..10 {
            let out = run(
                &g,
                &Scheduler::RoundRobin,
                init_arbitrary(&net, seed),
                &[],
                &RunOptions::for_graph(&g),
            )
            .unwrap();
            assert!(out.report.stabilized);
            let regs = out.final_configuration.registers();
            assert_eq!(regs[0], Register::root());
            let leaf = PathValue::from_ports(&[1]);
            assert_eq!(
                regs[1],
                Register {
                    path: leaf.clone(),
                    count: 0,
                    bcc: leaf
                }
            );
        }
    }

    #[test]
    fn empty_fault_is_identity() {
        let net = Network::new(figure1());
        let mut c = init_arbitrary(&net, 2);
        let before = c.clone();
        let applied = inject_fault(&net, &mut c, &FaultSpec::none()).unwrap();
        assert!(applied.is_empty());
        assert_eq!(c, before);
    }

    #[test]
    fn explicit_fault_touches_only_its_field() {
        let net = Network::new(figure1());
        let mut c = init_arbitrary(&net, 2);
        let before = c.clone();
        let spec = FaultSpec {
            trigger: Trigger::AtStep(0),
            target: FaultTarget::Fields(vec![FieldFault {
                node: NodeId(1),
                field: FaultField::Count,
                value: Some(FaultValue::Count(7)),
            }]),
            seed: 0,
        };
        inject_fault(&net, &mut c, &spec).unwrap();
        assert_eq!(c.states[0].register.count, 7);
        let mut undo = c.clone();
        undo.states[0].register.count = before.states[0].register.count;
        assert_eq!(undo, before);

        // The root restores its count within one program cycle.
        for _ in 0..3 {
            step(&net, &mut c, NodeId::ROOT);
        }
        assert_eq!(c.states[0].register.count, 0);
    }

    #[test]
    fn fault_errors() {
        let net = Network::new(figure1());
        let mut c = init_arbitrary(&net, 2);
        let bad_node = FaultSpec {
            trigger: Trigger::AtStep(0),
            target: FaultTarget::Fields(vec![FieldFault {
                node: NodeId(17),
                field: FaultField::Path,
                value: None,
            }]),
            seed: 0,
        };
        assert_eq!(
            inject_fault(&net, &mut c, &bad_node),
            Err(SimError::NodeOutOfRange { node: NodeId(17) })
        );
        let bad_value = FaultSpec {
            trigger: Trigger::AtStep(0),
            target: FaultTarget::Fields(vec![FieldFault {
                node: NodeId(2),
                field: FaultField::Count,
                value: Some(FaultValue::Count(10_000)),
            }]),
            seed: 0,
        };
        assert!(inject_fault(&net, &mut c, &bad_value).is_err());
    }

    #[test]
    fn random_fields_picks_k_distinct_fields() {
        let net = Network::new(figure1());
        let mut c = init_arbitrary(&net, 2);
        let spec = FaultSpec {
            trigger: Trigger::AfterStabilization,
            target: FaultTarget::RandomFields { k: 5 },
            seed: 9,
        };
        let applied = inject_fault(&net, &mut c, &spec).unwrap();
        assert_eq!(applied.len(), 5);
    }

    #[test]
    fn figure1_runs_are_deterministic() {
        let g = figure1();
        let net = Network::new(g.clone());
        let go = || {
            run(
                &g,
                &Scheduler::UniformRandom { seed: 3 },
                init_arbitrary(&net, 4),
                &[],
                &RunOptions {
                    record_schedule: true,
                    ..RunOptions::for_graph(&g)
                },
            )
            .unwrap()
        };
        let (a, b) = (go(), go());
        assert_eq!(a.report, b.report);
        assert_eq!(a.trace, b.trace);
        assert!(a.report.stabilized);
    }
}
