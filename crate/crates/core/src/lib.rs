//! Self-stabilizing detection of bridges, articulation points and
//! bridge-connected components over a shared-register network.
//!
//! The crate is `no_std` (with `alloc`) and is organised bottom-up:
//!
//! * [`graph`]: topology with per-node port orderings, generators and the
//!   sixteen-node worked example.
//! * [`path`]: lexicographic DFS path values.
//! * [`protocol`]: the per-processor program as a micro-step machine under
//!   read/write atomicity.
//! * [`oracle`]: centralized ground truth (brute force and first DFS tree).
//! * [`simulator`]: the daemon, round accounting, fault injection and
//!   stabilization detection.
//! * [`analysis`]: extraction of the detection result from a stabilized
//!   configuration and certification against the oracles.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod graph;
pub mod oracle;
pub mod path;
pub mod protocol;
pub mod simulator;

pub use analysis::{certify, extract, Certification, DetectionResult, Mismatch};
pub use graph::{Edge, Graph, GraphError, NodeId};
pub use oracle::{ground_truth, GroundTruth};
pub use path::PathValue;
pub use protocol::{LinkClass, ProcessorState, Register};
pub use simulator::{Configuration, FaultSpec, RunOptions, RunReport, Scheduler};

#[cfg(test)]
extern crate std;
