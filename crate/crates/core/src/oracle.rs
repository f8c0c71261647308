//! Centralized ground truth.
//!
//! Two independent families live here: brute-force removal tests that
//! follow the textbook definitions, and the first DFS tree with its bypass
//! counts. Nothing in this module calls into [`crate::protocol`].

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{Edge, Graph, NodeId};
use crate::path::PathValue;
use crate::protocol::Register;

/// A node partition in canonical form.
pub type Partition = BTreeSet<BTreeSet<NodeId>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("the root has no parent link")]
    RootHasNoParent,
    #[error("node {child} is not a tree child of node {parent}")]
    NotAChild { parent: NodeId, child: NodeId },
    #[error("path values do not describe a spanning tree")]
    NotATree,
}

/// True iff the nodes that survive the removals form one component.
pub fn is_connected(
    g: &Graph,
    removed_nodes: &BTreeSet<NodeId>,
    removed_edges: &BTreeSet<Edge>,
) -> bool {
    let Some(start) = g.nodes().find(|v| !removed_nodes.contains(v)) else {
        return true;
    };
    let mut seen = vec![false; g.n()];
    let mut queue = VecDeque::from([start]);
    seen[start.index()] = true;
    let mut reached = 1;
    while let Some(v) = queue.pop_front() {
        for &u in g.neighbors(v) {
            if seen[u.index()]
                || removed_nodes.contains(&u)
                || removed_edges.contains(&Edge::new(u, v))
            {
                continue;
            }
            seen[u.index()] = true;
            reached += 1;
            queue.push_back(u);
        }
    }
    reached == g.n() - removed_nodes.len()
}

pub fn brute_bridges(g: &Graph) -> BTreeSet<Edge> {
    let none = BTreeSet::new();
    g.edges()
        .into_iter()
        .filter(|&e| !is_connected(g, &none, &BTreeSet::from([e])))
        .collect()
}

pub fn brute_articulation_points(g: &Graph) -> BTreeSet<NodeId> {
    let none = BTreeSet::new();
    g.nodes()
        .filter(|&v| !is_connected(g, &BTreeSet::from([v]), &none))
        .collect()
}

/// Components left after deleting every bridge.
pub fn brute_bcc_partition(g: &Graph) -> Partition {
    let bridges = brute_bridges(g);
    let mut label = vec![usize::MAX; g.n()];
    let mut parts = Partition::new();
    for start in g.nodes() {
        if label[start.index()] != usize::MAX {
            continue;
        }
        let mut part = BTreeSet::new();
        let mut queue = VecDeque::from([start]);
        label[start.index()] = start.index();
        while let Some(v) = queue.pop_front() {
            part.insert(v);
            for &u in g.neighbors(v) {
                if label[u.index()] == usize::MAX && !bridges.contains(&Edge::new(u, v)) {
                    label[u.index()] = start.index();
                    queue.push_back(u);
                }
            }
        }
        parts.insert(part);
    }
    parts
}

/// Paths of the first DFS tree: a depth-first traversal from the root that
/// always leaves through the smallest unused port. Indexed by node slot.
pub fn first_dfs_paths(g: &Graph) -> Vec<PathValue> {
    let mut paths: Vec<Option<PathValue>> = vec![None; g.n()];
    paths[NodeId::ROOT.index()] = Some(PathValue::root());
    // (node, next port to try)
    let mut stack = vec![(NodeId::ROOT, 1u32)];
    while let Some(top) = stack.last_mut() {
        let (v, port) = *top;
        if port as usize > g.degree(v) {
            stack.pop();
            continue;
        }
        top.1 += 1;
        let u = g.neighbor(v, port);
        if paths[u.index()].is_none() {
            let p = paths[v.index()].as_ref().expect("on stack").append(port);
            paths[u.index()] = Some(p);
            stack.push((u, 1));
        }
    }
    paths
        .into_iter()
        .map(|p| p.expect("graph is connected"))
        .collect()
}

/// Spanning tree recovered from path values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    pub parent: Vec<Option<NodeId>>,
    pub children: Vec<Vec<NodeId>>,
}

impl Tree {
    /// The parent of `v` is the neighbor `u` with `path_v = path_u ⊕ α_u(v)`.
    pub fn from_paths(g: &Graph, paths: &[PathValue]) -> Result<Tree, OracleError> {
        if paths.len() != g.n() {
            return Err(OracleError::NotATree);
        }
        let mut parent = vec![None; g.n()];
        let mut children = vec![Vec::new(); g.n()];
        for v in g.nodes().filter(|v| !v.is_root()) {
            let found: Vec<NodeId> = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&u| {
                    let port = g.port_to(u, v).expect("adjacent");
                    paths[u.index()].append(port) == paths[v.index()]
                })
                .collect();
            match found.as_slice() {
                [u] => {
                    parent[v.index()] = Some(*u);
                    children[u.index()].push(v);
                }
                _ => return Err(OracleError::NotATree),
            }
        }
        let tree = Tree { parent, children };
        // Every node must reach the root without cycling.
        for v in g.nodes() {
            let mut cur = v;
            let mut hops = 0;
            while let Some(p) = tree.parent[cur.index()] {
                cur = p;
                hops += 1;
                if hops > g.n() {
                    return Err(OracleError::NotATree);
                }
            }
            if !cur.is_root() {
                return Err(OracleError::NotATree);
            }
        }
        Ok(tree)
    }

    /// Reflexive ancestor test.
    pub fn is_ancestor(&self, a: NodeId, mut b: NodeId) -> bool {
        loop {
            if a == b {
                return true;
            }
            match self.parent[b.index()] {
                Some(p) => b = p,
                None => return false,
            }
        }
    }

    pub fn is_tree_edge(&self, e: Edge) -> bool {
        self.parent[e.0.index()] == Some(e.1) || self.parent[e.1.index()] == Some(e.0)
    }
}

fn non_tree_edges<'a>(g: &'a Graph, tree: &'a Tree) -> impl Iterator<Item = Edge> + 'a {
    g.edges().into_iter().filter(|&e| !tree.is_tree_edge(e))
}

/// Number of non-tree edges with one end in the subtree of `v` and the
/// other at or above the parent of `v`.
pub fn bypass_count(g: &Graph, paths: &[PathValue], v: NodeId) -> Result<i64, OracleError> {
    let tree = Tree::from_paths(g, paths)?;
    bypass_count_in(g, &tree, v)
}

fn bypass_count_in(g: &Graph, tree: &Tree, v: NodeId) -> Result<i64, OracleError> {
    let parent = tree.parent[v.index()].ok_or(OracleError::RootHasNoParent)?;
    let crosses = |a: NodeId, b: NodeId| tree.is_ancestor(v, a) && tree.is_ancestor(b, parent);
    Ok(non_tree_edges(g, tree)
        .filter(|e| crosses(e.0, e.1) || crosses(e.1, e.0))
        .count() as i64)
}

/// Number of non-tree edges `(l, parent)` with `l` in the subtree of `child`.
pub fn incoming_split(
    g: &Graph,
    paths: &[PathValue],
    parent: NodeId,
    child: NodeId,
) -> Result<i64, OracleError> {
    let tree = Tree::from_paths(g, paths)?;
    incoming_split_in(g, &tree, parent, child)
}

fn incoming_split_in(
    g: &Graph,
    tree: &Tree,
    parent: NodeId,
    child: NodeId,
) -> Result<i64, OracleError> {
    if tree.parent[child.index()] != Some(parent) {
        return Err(OracleError::NotAChild { parent, child });
    }
    Ok(non_tree_edges(g, tree)
        .filter(|e| e.contains(parent))
        .filter(|e| {
            let other = if e.0 == parent { e.1 } else { e.0 };
            tree.is_ancestor(child, other)
        })
        .count() as i64)
}

/// Everything a legitimate configuration must agree with.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruth {
    pub paths: Vec<PathValue>,
    pub tree: Tree,
    /// Bypass count per node; 0 at the root.
    pub counts: Vec<i64>,
    pub bcc_labels: Vec<PathValue>,
    pub bridges: BTreeSet<Edge>,
    pub articulation_points: BTreeSet<NodeId>,
}

impl GroundTruth {
    pub fn register(&self, v: NodeId) -> Register {
        Register {
            path: self.paths[v.index()].clone(),
            count: self.counts[v.index()],
            bcc: self.bcc_labels[v.index()].clone(),
        }
    }

    pub fn registers(&self) -> Vec<Register> {
        (0..self.paths.len())
            .map(|i| self.register(NodeId::from_index(i)))
            .collect()
    }

    /// Root plus every node whose count is 0.
    pub fn representatives(&self) -> BTreeSet<NodeId> {
        (0..self.paths.len())
            .map(NodeId::from_index)
            .filter(|v| v.is_root() || self.counts[v.index()] == 0)
            .collect()
    }

    /// Components as implied by the labels.
    pub fn partition(&self) -> Partition {
        partition_by_label(&self.bcc_labels)
    }
}

/// Groups node slots by equal label.
pub fn partition_by_label<L: Ord + Clone>(labels: &[L]) -> Partition {
    let mut groups: alloc::collections::BTreeMap<L, BTreeSet<NodeId>> = Default::default();
    for (i, l) in labels.iter().enumerate() {
        groups
            .entry(l.clone())
            .or_default()
            .insert(NodeId::from_index(i));
    }
    groups.into_values().collect()
}

pub fn ground_truth(g: &Graph) -> GroundTruth {
    let paths = first_dfs_paths(g);
    let tree = Tree::from_paths(g, &paths).expect("first DFS paths form a tree");
    let counts: Vec<i64> = g
        .nodes()
        .map(|v| bypass_count_in(g, &tree, v).unwrap_or(0))
        .collect();
    let is_rep = |v: NodeId| v.is_root() || counts[v.index()] == 0;

    let bcc_labels = g
        .nodes()
        .map(|v| {
            let mut r = v;
            while !is_rep(r) {
                r = tree.parent[r.index()].expect("non-root has a parent");
            }
            paths[r.index()].clone()
        })
        .collect();

    let bridges = g
        .nodes()
        .filter(|v| !v.is_root() && counts[v.index()] == 0)
        .map(|v| Edge::new(tree.parent[v.index()].expect("non-root"), v))
        .collect();

    let articulation_points = g
        .nodes()
        .filter(|&u| {
            let kids = &tree.children[u.index()];
            if u.is_root() {
                kids.len() >= 2
            } else {
                kids.iter().any(|&c| {
                    counts[c.index()] == incoming_split_in(g, &tree, u, c).expect("tree child")
                })
            }
        })
        .collect();

    GroundTruth {
        paths,
        tree,
        counts,
        bcc_labels,
        bridges,
        articulation_points,
    }
}
