//! Reading the answer out of a stabilized configuration.
//!
//! [`extract`] uses only what each node can see locally: its own register,
//! its neighbors' registers, and its port numbers. The incoming non-tree
//! links of a node are split per child subtree by a prefix test on the far
//! endpoint's path.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::graph::{Edge, Graph, NodeId};
use crate::oracle::{
    brute_articulation_points, brute_bcc_partition, brute_bridges, first_dfs_paths,
    partition_by_label, Partition,
};
use crate::path::PathValue;
use crate::protocol::{classify_link, Bounds, LinkClass, Register};
use crate::simulator::{init_arbitrary, run, Network, RunOptions, Scheduler};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionResult {
    pub bridges: BTreeSet<Edge>,
    pub articulation_points: BTreeSet<NodeId>,
    /// Component label (the bcc register) per node slot.
    pub component_of: Vec<PathValue>,
}

impl DetectionResult {
    pub fn partition(&self) -> Partition {
        partition_by_label(&self.component_of)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("register count does not match the graph")]
    WrongSize,
    #[error("node {node} is not at a local fixpoint ({what})")]
    NotStabilized { node: NodeId, what: &'static str },
    #[error("bridge endpoint {node} has degree >= 2 but is not an articulation point")]
    BridgeEndpointDisagreement { node: NodeId },
}

fn classify(g: &Graph, regs: &[Register], v: NodeId, port: u32) -> LinkClass {
    let u = g.neighbor(v, port);
    classify_link(
        &regs[v.index()].path,
        &regs[u.index()].path,
        port,
        g.back_port(v, port),
    )
}

/// Checks that every register is a fixpoint of its processor's rules,
/// judged from the registers alone.
pub fn check_local_fixpoint(regs: &[Register], g: &Graph) -> Result<(), AnalysisError> {
    if regs.len() != g.n() {
        return Err(AnalysisError::WrongSize);
    }
    let bounds = Bounds::for_graph(g);
    for v in g.nodes() {
        let r = &regs[v.index()];
        let bad = |what| Err(AnalysisError::NotStabilized { node: v, what });
        if v.is_root() {
            if *r != Register::root() {
                return bad("root register");
            }
            continue;
        }
        let ports = 1..=g.degree(v) as u32;
        let best = ports
            .clone()
            .map(|p| {
                regs[g.neighbor(v, p).index()]
                    .path
                    .successor(g.back_port(v, p), bounds.path_len)
            })
            .min();
        if best.as_ref() != Some(&r.path) || !r.path.is_well_formed() {
            return bad("path");
        }
        let mut count = 0i64;
        let mut parent = None;
        for p in ports {
            match classify(g, regs, v, p) {
                LinkClass::Child => count += regs[g.neighbor(v, p).index()].count,
                LinkClass::IncomingNonTree => count -= 1,
                LinkClass::OutgoingNonTree => count += 1,
                LinkClass::Parent => parent = parent.or(Some(g.neighbor(v, p))),
                LinkClass::Unclassified => return bad("unclassified link"),
            }
        }
        if r.count != count.clamp(-bounds.count, bounds.count) {
            return bad("count");
        }
        let Some(parent) = parent else {
            return bad("no parent");
        };
        let want_bcc = if r.count == 0 {
            &r.path
        } else {
            &regs[parent.index()].bcc
        };
        if r.bcc != *want_bcc {
            return bad("bcc");
        }
    }
    Ok(())
}

/// Bridges, articulation points and component labels of a stabilized
/// configuration. Refuses configurations that are not at a fixpoint.
pub fn extract(regs: &[Register], g: &Graph) -> Result<DetectionResult, AnalysisError> {
    check_local_fixpoint(regs, g)?;

    let ports_of = |v: NodeId, class: LinkClass| {
        (1..=g.degree(v) as u32).filter(move |&p| classify(g, regs, v, p) == class)
    };

    let mut bridges = BTreeSet::new();
    for v in g.nodes().filter(|v| !v.is_root()) {
        if regs[v.index()].count == 0 {
            for p in ports_of(v, LinkClass::Parent) {
                bridges.insert(Edge::new(v, g.neighbor(v, p)));
            }
        }
    }

    let mut articulation_points = BTreeSet::new();
    for u in g.nodes() {
        let children: Vec<u32> = ports_of(u, LinkClass::Child).collect();
        let is_ap = if u.is_root() {
            children.len() >= 2
        } else {
            let incoming: Vec<NodeId> = ports_of(u, LinkClass::IncomingNonTree)
                .map(|q| g.neighbor(u, q))
                .collect();
            children.iter().any(|&p| {
                let child = g.neighbor(u, p);
                let subtree_root = regs[u.index()].path.append(p);
                let split = incoming
                    .iter()
                    .filter(|l| subtree_root.is_prefix_of(&regs[l.index()].path))
                    .count() as i64;
                regs[child.index()].count == split
            })
        };
        if is_ap {
            articulation_points.insert(u);
        }
    }

    for e in &bridges {
        for v in [e.0, e.1] {
            if g.degree(v) >= 2 && !articulation_points.contains(&v) {
                return Err(AnalysisError::BridgeEndpointDisagreement { node: v });
            }
        }
    }

    Ok(DetectionResult {
        bridges,
        articulation_points,
        component_of: regs.iter().map(|r| r.bcc.clone()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mismatch {
    MissingBridge(Edge),
    SpuriousBridge(Edge),
    MissingArticulationPoint(NodeId),
    SpuriousArticulationPoint(NodeId),
    /// Two nodes of one component carry different labels.
    SplitComponent {
        a: NodeId,
        b: NodeId,
    },
    /// Nodes of different components share a label.
    MergedComponents {
        a: NodeId,
        b: NodeId,
    },
    /// The label is not the smallest path inside the node's component.
    WrongLabel {
        node: NodeId,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certification {
    pub matched: bool,
    pub mismatches: Vec<Mismatch>,
}

/// Compares a detection result with the brute-force oracles.
pub fn certify(r: &DetectionResult, g: &Graph) -> Certification {
    let mut mismatches = Vec::new();
    let bridges = brute_bridges(g);
    mismatches.extend(
        bridges
            .difference(&r.bridges)
            .map(|&e| Mismatch::MissingBridge(e)),
    );
    mismatches.extend(
        r.bridges
            .difference(&bridges)
            .map(|&e| Mismatch::SpuriousBridge(e)),
    );
    let aps = brute_articulation_points(g);
    mismatches.extend(
        aps.difference(&r.articulation_points)
            .map(|&v| Mismatch::MissingArticulationPoint(v)),
    );
    mismatches.extend(
        r.articulation_points
            .difference(&aps)
            .map(|&v| Mismatch::SpuriousArticulationPoint(v)),
    );

    let paths = first_dfs_paths(g);
    let components = brute_bcc_partition(g);
    let label = |v: NodeId| &r.component_of[v.index()];
    let mut owner: alloc::collections::BTreeMap<&PathValue, NodeId> = Default::default();
    for comp in &components {
        let first = *comp.iter().next().expect("components are non-empty");
        for &v in comp {
            if label(v) != label(first) {
                mismatches.push(Mismatch::SplitComponent { a: first, b: v });
            }
        }
        let smallest = comp.iter().map(|v| &paths[v.index()]).min();
        for &v in comp {
            if Some(label(v)) != smallest {
                mismatches.push(Mismatch::WrongLabel { node: v });
            }
        }
        let mut seen_here = BTreeSet::new();
        for &v in comp {
            if !seen_here.insert(label(v)) {
                continue;
            }
            if let Some(&other) = owner.get(label(v)) {
                mismatches.push(Mismatch::MergedComponents { a: other, b: v });
            } else {
                owner.insert(label(v), v);
            }
        }
    }

    Certification {
        matched: mismatches.is_empty(),
        mismatches,
    }
}

/// Runs the full pipeline under `k` random port orderings of `g` and checks
/// that bridges, articulation points and the component partition agree.
/// Labels themselves may differ between orderings.
pub fn alpha_independence(g: &Graph, k: usize, seed: u64) -> bool {
    let mut reference: Option<(BTreeSet<Edge>, BTreeSet<NodeId>, Partition)> = None;
    for i in 0..k as u64 {
        let h = g.with_shuffled_ports(seed.wrapping_add(i));
        let net = Network::new(h.clone());
        let init = init_arbitrary(&net, seed.wrapping_mul(31).wrapping_add(i));
        let Ok(out) = run(
            &h,
            &Scheduler::RoundRobin,
            init,
            &[],
            &RunOptions::for_graph(&h),
        ) else {
            return false;
        };
        let Some(d) = out.report.detection else {
            return false;
        };
        let key = (
            d.bridges.clone(),
            d.articulation_points.clone(),
            d.partition(),
        );
        match &reference {
            None => reference = Some(key),
            Some(r) if *r != key => return false,
            Some(_) => {}
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::figure1;
    use crate::oracle::ground_truth;

    fn triangle() -> Graph {
        Graph::from_edges(3, &[(1, 2), (2, 3), (3, 1)]).unwrap()
    }

    #[test]
    fn figure1_from_ground_truth_registers() {
        let g = figure1();
        let regs = ground_truth(&g).registers();
        let d = extract(&regs, &g).unwrap();
        let e = |a, b| Edge::new(NodeId(a), NodeId(b));
        assert_eq!(
            d.bridges,
            BTreeSet::from([e(1, 4), e(5, 6), e(10, 11), e(11, 14)])
        );
        let aps: BTreeSet<NodeId> = [1, 4, 5, 6, 10, 11, 14].map(NodeId).into();
        assert_eq!(d.articulation_points, aps);
        assert!(!d.articulation_points.contains(&NodeId(2)));
        assert_eq!(d.partition().len(), 5);
        assert!(certify(&d, &g).matched);
    }

    #[test]
    fn triangle_has_one_component() {
        let g = triangle();
        let d = extract(&ground_truth(&g).registers(), &g).unwrap();
        assert!(d.bridges.is_empty());
        assert!(d.articulation_points.is_empty());
        assert_eq!(d.partition().len(), 1);
        assert!(certify(&d, &g).matched);
    }

    #[test]
    fn refuses_unstabilized_registers() {
        let g = figure1();
        let mut regs = ground_truth(&g).registers();
        regs[6].count += 1;
        assert!(matches!(
            extract(&regs, &g),
            Err(AnalysisError::NotStabilized { .. })
        ));
        let mut regs = ground_truth(&g).registers();
        regs[2].bcc = PathValue::root().append(9);
        assert!(extract(&regs, &g).is_err());
        assert_eq!(extract(&regs[..3], &g), Err(AnalysisError::WrongSize));
    }

    #[test]
    fn certify_reports_discrepancies() {
        let g = figure1();
        let mut d = extract(&ground_truth(&g).registers(), &g).unwrap();
        d.bridges.remove(&Edge::new(NodeId(1), NodeId(4)));
        d.articulation_points.insert(NodeId(2));
        d.component_of[15] = PathValue::root();
        let c = certify(&d, &g);
        assert!(!c.matched);
        assert!(c
            .mismatches
            .contains(&Mismatch::MissingBridge(Edge::new(NodeId(1), NodeId(4)))));
        assert!(c
            .mismatches
            .contains(&Mismatch::SpuriousArticulationPoint(NodeId(2))));
        assert!(c
            .mismatches
            .contains(&Mismatch::WrongLabel { node: NodeId(16) }));
        assert!(c
            .mismatches
            .iter()
            .any(|m| matches!(m, Mismatch::MergedComponents { .. })));
    }

    #[test]
    fn alpha_independence_small_cases() {
        assert!(alpha_independence(&triangle(), 3, 1));
        let tree = Graph::from_edges(5, &[(1, 2), (2, 3), (2, 4), (4, 5)]).unwrap();
        assert!(alpha_independence(&tree, 3, 2));
    }
}
