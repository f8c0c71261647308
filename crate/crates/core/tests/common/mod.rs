#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twoconn_core::graph::{generate_clustered, generate_random_connected};
use twoconn_core::Graph;
use twoconn_core::Scheduler;

#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub graph: Graph,
    pub seed: u64,
}

pub fn random_instance(i: u64, max_n: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0ffee ^ i);
    let n = rng.gen_range(3..=max_n);
    let max_extra = n * (n - 1) / 2 - (n - 1);
    let extra = rng.gen_range(0..=n.min(max_extra));
    let seed = rng.gen();
    Instance {
        label: format!("random:{n},{},{seed}", n - 1 + extra),
        graph: generate_random_connected(n, extra, seed).unwrap(),
        seed,
    }
}

pub fn clustered_instance(i: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc1a5 ^ i);
    let k = rng.gen_range(1..=8);
    let s = rng.gen_range(3..=5);
    let seed = rng.gen();
    Instance {
        label: format!("clustered:{k}x{s},{seed}"),
        graph: generate_clustered(k, s, seed).unwrap(),
        seed,
    }
}

/// Half random graphs with n in [3, 40], half clustered up to 8x5.
pub fn corpus(count: usize) -> Vec<Instance> {
    (0..count as u64)
        .map(|i| {
            if i % 2 == 0 {
                random_instance(i, 40)
            } else {
                clustered_instance(i)
            }
        })
        .collect()
}

pub fn schedulers(seed: u64, n: usize) -> [Scheduler; 3] {
    [
        Scheduler::RoundRobin,
        Scheduler::UniformRandom { seed },
        Scheduler::weighted_from_seed(seed, n),
    ]
}
