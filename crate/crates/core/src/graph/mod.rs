//! Network topology with per-node port orderings.
//!
//! Every node `i` numbers its incident links `1..=degree(i)`; port `p` of
//! node `i` leads to `neighbor(i, p)`. Each node also knows, for each of its
//! ports, the index under which the neighbor sees the same link
//! ([`Graph::back_port`]).

mod generate;

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

pub use generate::{generate_clustered, generate_random_connected};

/// A processor identifier in `1..=n`. Node 1 is the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const ROOT: NodeId = NodeId(1);

    /// Zero-based slot for indexing per-node vectors.
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    #[inline]
    pub fn from_index(index: usize) -> NodeId {
        NodeId(index as u32 + 1)
    }

    #[inline]
    pub fn is_root(self) -> bool {
        self.0 == 1
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An undirected link stored as `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(pub NodeId, pub NodeId);

impl Edge {
    pub fn new(a: NodeId, b: NodeId) -> Edge {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.0 == v || self.1 == v
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.0, self.1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: u32, n: usize },
    #[error("self-loop at node {node}")]
    SelfLoop { node: u32 },
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: u32, v: u32 },
    #[error("port list of node {node} is not a bijection onto its incident links")]
    NonBijectivePorts { node: u32 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("cluster shape {k}x{size} needs k >= 1 and size >= 3")]
    InvalidClusterShape { k: usize, size: usize },
    #[error("requested {requested} edges but at most {max} fit on {n} nodes")]
    InfeasibleEdgeCount {
        n: usize,
        requested: usize,
        max: usize,
    },
}

/// Connected simple graph with port orderings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<NodeId>>,
    back: Vec<Vec<u32>>,
}

impl Graph {
    /// Builds a graph whose ports follow the order in which each node's
    /// edges appear in `edges`.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Graph, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adj: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            for w in [u, v] {
                if w == 0 || w as usize > n {
                    return Err(GraphError::NodeOutOfRange { node: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { node: u });
            }
            let (a, b) = (NodeId(u), NodeId(v));
            if adj[a.index()].contains(&b) {
                return Err(GraphError::DuplicateEdge { u, v });
            }
            adj[a.index()].push(b);
            adj[b.index()].push(a);
        }
        Graph::from_port_lists(adj)
    }

    /// Like [`Graph::from_edges`] but with explicit port orders for some
    /// nodes. Each override must list exactly that node's neighbors.
    pub fn with_port_orders(
        n: usize,
        edges: &[(u32, u32)],
        overrides: &[(NodeId, Vec<NodeId>)],
    ) -> Result<Graph, GraphError> {
        let base = Graph::from_edges(n, edges)?;
        let mut adj = base.adj;
        for (node, order) in overrides {
            if node.0 == 0 || node.index() >= n {
                return Err(GraphError::NodeOutOfRange { node: node.0, n });
            }
            let current = &adj[node.index()];
            let mut want = order.clone();
            let mut have = current.clone();
            want.sort();
            have.sort();
            if want != have {
                return Err(GraphError::NonBijectivePorts { node: node.0 });
            }
            adj[node.index()] = order.clone();
        }
        Graph::from_port_lists(adj)
    }

    /// Builds a graph directly from port lists: `lists[i][p]` is the
    /// neighbor of node `i + 1` at port `p + 1`.
    pub fn from_port_lists(lists: Vec<Vec<NodeId>>) -> Result<Graph, GraphError> {
        let n = lists.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        for (i, list) in lists.iter().enumerate() {
            let me = NodeId::from_index(i);
            for (p, &u) in list.iter().enumerate() {
                if u.0 == 0 || u.index() >= n {
                    return Err(GraphError::NodeOutOfRange { node: u.0, n });
                }
                if u == me {
                    return Err(GraphError::SelfLoop { node: me.0 });
                }
                if list[..p].contains(&u) {
                    return Err(GraphError::DuplicateEdge { u: me.0, v: u.0 });
                }
                if !lists[u.index()].contains(&me) {
                    return Err(GraphError::NonBijectivePorts { node: u.0 });
                }
            }
        }
        let back = lists
            .iter()
            .enumerate()
            .map(|(i, list)| {
                let me = NodeId::from_index(i);
                list.iter()
                    .map(|u| {
                        let p = lists[u.index()].iter().position(|&w| w == me);
                        p.map(|p| p as u32 + 1).unwrap_or(0)
                    })
                    .collect()
            })
            .collect();
        let g = Graph { adj: lists, back };
        if !g.is_connected() {
            return Err(GraphError::Disconnected);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n()).map(NodeId::from_index)
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v.index()].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Neighbors of `v` in port order.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adj[v.index()]
    }

    /// Neighbor at the 1-based `port` of `v`.
    pub fn neighbor(&self, v: NodeId, port: u32) -> NodeId {
        self.adj[v.index()][port as usize - 1]
    }

    /// The port index `v` uses for the link to `u`, if adjacent.
    pub fn port_to(&self, v: NodeId, u: NodeId) -> Option<u32> {
        self.adj[v.index()]
            .iter()
            .position(|&w| w == u)
            .map(|p| p as u32 + 1)
    }

    /// Port index that the neighbor at `port` of `v` assigns to the link
    /// back to `v`.
    pub fn back_port(&self, v: NodeId, port: u32) -> u32 {
        self.back[v.index()][port as usize - 1]
    }

    /// All back ports of `v`, indexed by `port - 1`.
    pub fn back_ports(&self, v: NodeId) -> &[u32] {
        &self.back[v.index()]
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        self.adj[a.index()].contains(&b)
    }

    /// Edges sorted by `(min, max)`.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .nodes()
            .flat_map(|v| {
                self.neighbors(v)
                    .iter()
                    .filter(move |&&u| v < u)
                    .map(move |&u| Edge(v, u))
            })
            .collect();
        out.sort();
        out
    }

    /// Hop distances from `src`; unreachable nodes get `usize::MAX`.
    pub fn bfs_distances(&self, src: NodeId) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::new();
        dist[src.index()] = 0;
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            for &u in self.neighbors(v) {
                if dist[u.index()] == usize::MAX {
                    dist[u.index()] = dist[v.index()] + 1;
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    pub fn diameter(&self) -> usize {
        self.nodes()
            .map(|v| self.bfs_distances(v).into_iter().max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    fn is_connected(&self) -> bool {
        self.bfs_distances(NodeId::ROOT)
            .iter()
            .all(|&d| d != usize::MAX)
    }

    /// Same topology with every node's port order permuted by `seed`.
    pub fn with_shuffled_ports(&self, seed: u64) -> Graph {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut lists = self.adj.clone();
        for list in lists.iter_mut() {
            list.shuffle(&mut rng);
        }
        Graph::from_port_lists(lists).expect("permuting ports preserves validity")
    }
}

/// The sixteen-node worked example: five cycles joined by four bridges.
///
/// Only the spanning tree is drawn in the original figure, so the cycle
/// chords are a reconstruction that yields the printed bridges,
/// articulation points and components. Ports follow the listed edge order.
pub fn figure1() -> Graph {
    const EDGES: [(u32, u32); 20] = [
        (1, 2),
        (2, 3),
        (3, 1),
        (4, 5),
        (5, 10),
        (10, 4),
        (6, 7),
        (7, 8),
        (8, 9),
        (9, 6),
        (11, 12),
        (12, 13),
        (13, 11),
        (14, 15),
        (15, 16),
        (16, 14),
        (1, 4),
        (5, 6),
        (10, 11),
        (11, 14),
    ];
    Graph::from_edges(16, &EDGES).expect("figure1 fixture is valid")
}
