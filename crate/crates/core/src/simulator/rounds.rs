//! Round accounting: a round is the shortest stretch of steps in which
//! every processor has been activated at least once.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::NodeId;

#[derive(Debug, Clone)]
pub struct RoundCounter {
    seen: Vec<bool>,
    missing: usize,
    completed: u64,
}

impl RoundCounter {
    pub fn new(n: usize) -> RoundCounter {
        RoundCounter {
            seen: vec![false; n],
            missing: n,
            completed: 0,
        }
    }

    /// Records an activation; returns true if it closed a round.
    pub fn observe(&mut self, v: NodeId) -> bool {
        let slot = &mut self.seen[v.index()];
        if !*slot {
            *slot = true;
            self.missing -= 1;
        }
        if self.missing == 0 {
            self.seen.iter_mut().for_each(|s| *s = false);
            self.missing = self.seen.len();
            self.completed += 1;
            true
        } else {
            false
        }
    }

    pub fn completed(&self) -> u64 {
        self.completed
    }

    /// Rounds that have at least started.
    pub fn elapsed(&self) -> u64 {
        self.completed + u64::from(self.missing < self.seen.len())
    }
}

/// Step counts (1-based, inclusive) at which each complete round of
/// `schedule` ends. A trailing partial round is not reported.
pub fn round_boundaries(schedule: &[NodeId], n: usize) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let mut counter = RoundCounter::new(n);
    schedule
        .iter()
        .enumerate()
        .filter_map(|(i, &v)| counter.observe(v).then_some(i + 1))
        .collect()
}
