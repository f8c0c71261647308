use std::fmt::Write as _;

use twoconn_core::analysis::{extract, AnalysisError};
use twoconn_core::protocol::{classify_link, LinkClass};
use twoconn_core::{Edge, Graph, Register};

const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5",
    "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f",
];

/// DOT text for a stabilized configuration: tree edges solid, non-tree
/// edges dashed, bridges bold red, articulation points double-circled and
/// one fill color per component.
pub fn render_dot(g: &Graph, regs: &[Register]) -> Result<String, AnalysisError> {
    let d = extract(regs, g)?;
    let mut color = vec![""; g.n()];
    for (i, comp) in d.partition().iter().enumerate() {
        for v in comp {
            color[v.index()] = PALETTE[i % PALETTE.len()];
        }
    }

    let mut out = String::from("graph twoconn {\n  node [style=filled];\n");
    for v in g.nodes() {
        let r = &regs[v.index()];
        let shape = if d.articulation_points.contains(&v) {
            "doublecircle"
        } else {
            "circle"
        };
        let _ = writeln!(
            out,
            "  {} [shape={shape}, fillcolor=\"{}\", label=\"{}\\n{}\\ncount {}\"];",
            v.0,
            color[v.index()],
            v.0,
            r.path,
            r.count
        );
    }
    for e in g.edges() {
        let (u, v) = (e.0, e.1);
        let port = g.port_to(u, v).expect("edge endpoints are adjacent");
        let class = classify_link(
            &regs[u.index()].path,
            &regs[v.index()].path,
            port,
            g.back_port(u, port),
        );
        let style = if d.bridges.contains(&Edge::new(u, v)) {
            "style=bold, color=red, penwidth=2.5"
        } else if matches!(class, LinkClass::Parent | LinkClass::Child) {
            "style=solid"
        } else {
            "style=dashed"
        };
        let _ = writeln!(out, "  {} -- {} [{style}];", u.0, v.0);
    }
    out.push_str("}\n");
    Ok(out)
}
