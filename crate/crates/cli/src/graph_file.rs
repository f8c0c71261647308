//! Plain-text graph files.
//!
//! ```text
//! # comment
//! 3 3
//! 1 2
//! 2 3
//! 3 1
//! ports 2: 3 1
//! ```
//!
//! The header gives `n m`, then come `m` edge lines. A `ports i: ...` line
//! lists the neighbors of `i` in port order; nodes without one take their
//! edges in order of appearance.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use twoconn_core::{Graph, GraphError, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("missing `n m` header")]
    MissingHeader,
    #[error("expected {expected}, found `{found}`")]
    Malformed {
        expected: &'static str,
        found: String,
    },
    #[error("header declares {declared} edges but {found} were listed")]
    EdgeCount { declared: usize, found: usize },
    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: u32, n: usize },
    #[error("self-loop at node {node}")]
    SelfLoop { node: u32 },
    #[error("duplicate edge ({u}, {v})")]
    DuplicateEdge { u: u32, v: u32 },
    #[error("ports of node {node} are not a bijection onto its neighbors")]
    NonBijectivePorts { node: u32 },
    #[error("second ports line for node {node}")]
    RepeatedPorts { node: u32 },
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph must have at least one node")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number; whole-file problems point at the header.
    pub line: usize,
    pub kind: ParseErrorKind,
}

fn number(tok: &str, line: usize) -> Result<u32, ParseError> {
    tok.parse().map_err(|_| ParseError {
        line,
        kind: ParseErrorKind::Malformed {
            expected: "a non-negative integer",
            found: tok.to_string(),
        },
    })
}

fn pair(rest: &str, line: usize, expected: &'static str) -> Result<(u32, u32), ParseError> {
    let toks: Vec<&str> = rest.split_whitespace().collect();
    match toks[..] {
        [a, b] => Ok((number(a, line)?, number(b, line)?)),
        _ => Err(ParseError {
            line,
            kind: ParseErrorKind::Malformed {
                expected,
                found: rest.to_string(),
            },
        }),
    }
}

pub fn parse_graph(text: &str) -> Result<Graph, ParseError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut ports: BTreeMap<u32, (usize, Vec<NodeId>)> = BTreeMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |kind| Err(ParseError { line, kind });
        let Some((n, _, _)) = header else {
            let (n, m) = pair(content, line, "header `n m`")?;
            if n == 0 {
                return err(ParseErrorKind::Empty);
            }
            header = Some((n as usize, m as usize, line));
            continue;
        };
        let in_range = |v: u32| {
            if v == 0 || v as usize > n {
                Err(ParseError {
                    line,
                    kind: ParseErrorKind::NodeOutOfRange { node: v, n },
                })
            } else {
                Ok(v)
            }
        };
        if let Some(rest) = content.strip_prefix("ports") {
            let Some((node, list)) = rest.split_once(':') else {
                return err(ParseErrorKind::Malformed {
                    expected: "`ports i: j1 j2 ...`",
                    found: content.to_string(),
                });
            };
            let node = in_range(number(node.trim(), line)?)?;
            let list = list
                .split_whitespace()
                .map(|t| number(t, line).and_then(in_range).map(NodeId))
                .collect::<Result<Vec<_>, _>>()?;
            if ports.insert(node, (line, list)).is_some() {
                return err(ParseErrorKind::RepeatedPorts { node });
            }
            continue;
        }
        let (u, v) = pair(content, line, "edge `u v`")?;
        in_range(u)?;
        in_range(v)?;
        if u == v {
            return err(ParseErrorKind::SelfLoop { node: u });
        }
        if edges
            .iter()
            .any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u))
        {
            return err(ParseErrorKind::DuplicateEdge { u, v });
        }
        edges.push((u, v));
    }

    let Some((n, m, header_line)) = header else {
        return Err(ParseError {
            line: text.lines().count().max(1),
            kind: ParseErrorKind::MissingHeader,
        });
    };
    if edges.len() != m {
        return Err(ParseError {
            line: header_line,
            kind: ParseErrorKind::EdgeCount {
                declared: m,
                found: edges.len(),
            },
        });
    }
    let overrides: Vec<(NodeId, Vec<NodeId>)> = ports
        .iter()
        .map(|(&node, (_, list))| (NodeId(node), list.clone()))
        .collect();
    Graph::with_port_orders(n, &edges, &overrides).map_err(|e| {
        let (line, kind) = match e {
            GraphError::NonBijectivePorts { node } => (
                ports.get(&node).map_or(header_line, |(l, _)| *l),
                ParseErrorKind::NonBijectivePorts { node },
            ),
            GraphError::Disconnected => (header_line, ParseErrorKind::Disconnected),
            other => (
                header_line,
                ParseErrorKind::Malformed {
                    expected: "a simple graph",
                    found: other.to_string(),
                },
            ),
        };
        ParseError { line, kind }
    })
}

/// Canonical text: edges sorted by `(u, v)` with `u < v`, followed by a
/// ports line for every node whose order differs from that edge order.
pub fn render_graph(g: &Graph) -> String {
    let edges: Vec<(u32, u32)> = g.edges().iter().map(|e| (e.0 .0, e.1 .0)).collect();
    let mut out = format!("{} {}\n", g.n(), g.m());
    for (u, v) in &edges {
        let _ = writeln!(out, "{u} {v}");
    }
    let default = Graph::from_edges(g.n(), &edges).expect("edges of a valid graph");
    for v in g.nodes() {
        if g.neighbors(v) != default.neighbors(v) {
            let list: Vec<String> = g.neighbors(v).iter().map(|u| u.0.to_string()).collect();
            let _ = writeln!(out, "ports {}: {}", v.0, list.join(" "));
        }
    }
    out
}
