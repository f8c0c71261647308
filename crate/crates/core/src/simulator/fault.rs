//! Transient faults and arbitrary initial states.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Configuration, Network, SimError};
use crate::graph::NodeId;
use crate::path::{PathValue, BOTTOM, OVERFLOW};
use crate::protocol::{Bounds, Locals, NodeContext, ProcessorState, Register};

/// When a fault fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trigger {
    /// Before the step with this 0-based index.
    AtStep(u64),
    /// As soon as the run has (re-)stabilized.
    AfterStabilization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FaultField {
    Path,
    Count,
    Bcc,
    /// Local variables and program counter.
    Locals,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FaultValue {
    Path(PathValue),
    Count(i64),
}

/// One field overwrite. `value: None` draws a random in-bounds value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldFault {
    pub node: NodeId,
    pub field: FaultField,
    pub value: Option<FaultValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FaultTarget {
    Fields(Vec<FieldFault>),
    /// `k` distinct register fields chosen at random.
    RandomFields {
        k: usize,
    },
    /// Every register field of every processor.
    AllRegisters,
    /// Registers, locals and program counters of every processor.
    AllState,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FaultSpec {
    pub trigger: Trigger,
    pub target: FaultTarget,
    /// Drives random target and value choices.
    pub seed: u64,
}

impl FaultSpec {
    pub fn none() -> FaultSpec {
        FaultSpec {
            trigger: Trigger::AtStep(0),
            target: FaultTarget::Fields(Vec::new()),
            seed: 0,
        }
    }
}

pub fn random_path(rng: &mut impl Rng, bounds: &Bounds) -> PathValue {
    let max_port = bounds.max_degree.max(1);
    let len = rng.gen_range(0..=bounds.path_len);
    let symbols = (0..len)
        .map(|i| {
            let roll = rng.gen_range(0..100);
            match (i, roll) {
                (0, 0..=79) => BOTTOM,
                (_, 0..=2) => BOTTOM,
                (_, 3..=4) => OVERFLOW,
                _ => rng.gen_range(1..=max_port),
            }
        })
        .collect();
    PathValue::from_symbols(symbols)
}

pub fn random_count(rng: &mut impl Rng, bounds: &Bounds) -> i64 {
    if rng.gen_bool(0.5) {
        rng.gen_range(-3i64..=3).clamp(-bounds.count, bounds.count)
    } else {
        rng.gen_range(-bounds.count..=bounds.count)
    }
}

pub fn random_register(rng: &mut impl Rng, bounds: &Bounds) -> Register {
    Register {
        path: random_path(rng, bounds),
        count: random_count(rng, bounds),
        bcc: random_path(rng, bounds),
    }
}

pub fn random_locals(rng: &mut impl Rng, ctx: &NodeContext) -> (Locals, usize) {
    let b = &ctx.bounds;
    let d = ctx.degree();
    let locals = Locals {
        path: random_path(rng, b),
        count: random_count(rng, b),
        incoming: rng.gen_range(0..=d as i64),
        outgoing: rng.gen_range(0..=d as i64),
        read_path: (0..d).map(|_| random_path(rng, b)).collect(),
        read_count: (0..d).map(|_| random_count(rng, b)).collect(),
        read_bcc: (0..d).map(|_| random_path(rng, b)).collect(),
        parent_port: if rng.gen_bool(0.5) {
            Some(rng.gen_range(0..=d as u32 + 1))
        } else {
            None
        },
    };
    // Deliberately wider than the program so the modulo reduction is used.
    let pc = rng.gen_range(0..4 * ctx.program_len());
    (locals, pc)
}

pub fn random_state(rng: &mut impl Rng, ctx: &NodeContext) -> ProcessorState {
    let register = random_register(rng, &ctx.bounds);
    let (locals, pc) = random_locals(rng, ctx);
    ProcessorState {
        register,
        locals,
        pc,
    }
}

/// Every register field, local variable and program counter drawn
/// independently within type bounds. Deterministic per seed.
pub fn init_arbitrary(net: &Network, seed: u64) -> Configuration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Configuration {
        states: net
            .contexts
            .iter()
            .map(|ctx| random_state(&mut rng, ctx))
            .collect(),
    }
}

fn check_value(field: FaultField, value: &FaultValue, bounds: &Bounds) -> Result<(), SimError> {
    match (field, value) {
        (FaultField::Path | FaultField::Bcc, FaultValue::Path(p)) if p.len() <= bounds.path_len => {
            Ok(())
        }
        (FaultField::Count, FaultValue::Count(c)) if c.abs() <= bounds.count => Ok(()),
        _ => Err(SimError::BadFaultValue { field }),
    }
}

/// Overwrites the targeted fields; everything else is left untouched.
/// Returns the field faults actually applied, with their values.
pub fn inject_fault(
    net: &Network,
    c: &mut Configuration,
    fault: &FaultSpec,
) -> Result<Vec<FieldFault>, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(fault.seed);
    let n = net.graph.n();
    let fields: Vec<FieldFault> = match &fault.target {
        FaultTarget::Fields(list) => list.clone(),
        FaultTarget::RandomFields { k } => {
            let mut all: Vec<(NodeId, FaultField)> = net
                .graph
                .nodes()
                .flat_map(|v| {
                    [FaultField::Path, FaultField::Count, FaultField::Bcc].map(|f| (v, f))
                })
                .collect();
            let k = (*k).min(all.len());
            let (picked, _) = all.partial_shuffle(&mut rng, k);
            let picked: BTreeSet<(NodeId, FaultField)> = picked.iter().copied().collect();
            picked
                .into_iter()
                .map(|(node, field)| FieldFault {
                    node,
                    field,
                    value: None,
                })
                .collect()
        }
        FaultTarget::AllRegisters | FaultTarget::AllState => {
            let mut fields = [FaultField::Path, FaultField::Count, FaultField::Bcc].to_vec();
            if fault.target == FaultTarget::AllState {
                fields.push(FaultField::Locals);
            }
            net.graph
                .nodes()
                .flat_map(|v| {
                    fields.clone().into_iter().map(move |field| FieldFault {
                        node: v,
                        field,
                        value: None,
                    })
                })
                .collect()
        }
    };

    for f in &fields {
        if f.node.0 == 0 || f.node.index() >= n {
            return Err(SimError::NodeOutOfRange { node: f.node });
        }
        if let Some(v) = &f.value {
            check_value(f.field, v, &net.contexts[f.node.index()].bounds)?;
        }
    }

    let mut applied = Vec::with_capacity(fields.len());
    for f in fields {
        let ctx = &net.contexts[f.node.index()];
        let state = &mut c.states[f.node.index()];
        let value = match f.field {
            FaultField::Path | FaultField::Bcc => {
                let p = match f.value {
                    Some(FaultValue::Path(p)) => p,
                    _ => random_path(&mut rng, &ctx.bounds),
                };
                if f.field == FaultField::Path {
                    state.register.path = p.clone();
                } else {
                    state.register.bcc = p.clone();
                }
                Some(FaultValue::Path(p))
            }
            FaultField::Count => {
                let v = match f.value {
                    Some(FaultValue::Count(v)) => v,
                    _ => random_count(&mut rng, &ctx.bounds),
                };
                state.register.count = v;
                Some(FaultValue::Count(v))
            }
            FaultField::Locals => {
                let (locals, pc) = random_locals(&mut rng, ctx);
                state.locals = locals;
                state.pc = pc;
                None
            }
        };
        applied.push(FieldFault {
            node: f.node,
            field: f.field,
            value,
        });
    }
    Ok(applied)
}
