//! Fair daemons.

use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SimError;
use crate::graph::NodeId;

/// Which processor gets the next atomic step.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scheduler {
    RoundRobin,
    UniformRandom {
        seed: u64,
    },
    /// Activation probability proportional to a positive per-node weight.
    WeightedRandom {
        seed: u64,
        weights: Vec<u32>,
    },
}

impl Scheduler {
    /// Weighted daemon with weights in `1..=8` drawn from `seed`.
    pub fn weighted_from_seed(seed: u64, n: usize) -> Scheduler {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0005_eed0_f3e1);
        let weights = (0..n).map(|_| rng.gen_range(1..=8)).collect();
        Scheduler::WeightedRandom { seed, weights }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Scheduler::RoundRobin => "round-robin",
            Scheduler::UniformRandom { .. } => "random",
            Scheduler::WeightedRandom { .. } => "weighted",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            Scheduler::RoundRobin => None,
            Scheduler::UniformRandom { seed } | Scheduler::WeightedRandom { seed, .. } => {
                Some(*seed)
            }
        }
    }

    pub(crate) fn start(&self, n: usize) -> Result<Daemon, SimError> {
        let kind = match self {
            Scheduler::RoundRobin => Kind::RoundRobin { next: 0 },
            Scheduler::UniformRandom { seed } => Kind::Uniform {
                rng: ChaCha8Rng::seed_from_u64(*seed),
            },
            Scheduler::WeightedRandom { seed, weights } => {
                if weights.len() != n || weights.contains(&0) {
                    return Err(SimError::UnfairWeights);
                }
                Kind::Weighted {
                    rng: ChaCha8Rng::seed_from_u64(*seed),
                    dist: WeightedIndex::new(weights).map_err(|_| SimError::UnfairWeights)?,
                }
            }
        };
        Ok(Daemon { n, kind })
    }
}

pub(crate) struct Daemon {
    n: usize,
    kind: Kind,
}

enum Kind {
    RoundRobin {
        next: usize,
    },
    Uniform {
        rng: ChaCha8Rng,
    },
    Weighted {
        rng: ChaCha8Rng,
        dist: WeightedIndex<u32>,
    },
}

impl Daemon {
    pub(crate) fn pick(&mut self) -> NodeId {
        let i = match &mut self.kind {
            Kind::RoundRobin { next } => {
                let i = *next;
                *next = (i + 1) % self.n;
                i
            }
            Kind::Uniform { rng } => rng.gen_range(0..self.n),
            Kind::Weighted { rng, dist } => dist.sample(rng),
        };
        NodeId::from_index(i)
    }
}
