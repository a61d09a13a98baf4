use std::fmt::Write;

use crate::clcs::{SGraph, SRule};

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz rendering of an s-reduct graph. Sinks are drawn as boxes,
/// nodes with undecided conditions dashed.
pub fn sgraph_to_dot(g: &SGraph) -> String {
    let mut out = String::from("digraph sreducts {\n  rankdir=TB;\n  node [fontname=\"monospace\"];\n");
    let sinks = g.sinks();
    for (i, t) in g.nodes.iter().enumerate() {
        let mut attrs = format!("label=\"{}\"", escape(&t.to_string()));
        if sinks.contains(&i) {
            attrs.push_str(", shape=box");
        }
        if g.unknown_at[i] {
            attrs.push_str(", style=dashed");
        }
        writeln!(out, "  n{} [{}];", i, attrs).unwrap();
    }
    for (a, b, s) in &g.edges {
        let rule = SRule::from_id(s.rule).map(|r| format!("{:?}", r)).unwrap_or_default();
        writeln!(out, "  n{} -> n{} [label=\"{} @{}\"];", a, b, rule, s.position).unwrap();
    }
    if g.truncated {
        out.push_str("  truncated [shape=plaintext, label=\"(truncated)\"];\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clcs::SEngine;
    use crate::labelled::LTerm;
    use crate::systems::Fuel;

    #[test]
    fn dot_lists_nodes_and_edges() {
        let e = SEngine::new(Fuel::default());
        let g = e.s_reducts_all(&LTerm::parse("C2 T (K1 F1 a) F1").unwrap());
        let dot = sgraph_to_dot(&g);
        assert!(dot.starts_with("digraph"));
        assert_eq!(dot.matches("->").count(), g.edges.len());
        assert!(dot.contains("label=\"F1\", shape=box"));
    }
}
