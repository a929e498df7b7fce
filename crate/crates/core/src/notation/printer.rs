use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::parser::is_ident_char;
use crate::graph::{ConceptNode, ConceptualGraph, Referent};

pub(crate) fn write_name(out: &mut String, s: &str) {
    let bare = !s.is_empty() && s.chars().all(is_ident_char);
    if bare {
        out.push_str(s);
        return;
    }
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
}

fn write_concept(out: &mut String, n: &ConceptNode, label: Option<&str>) {
    out.push('[');
    write_name(out, &n.type_id);
    out.push_str(": ");
    match (&n.referent, label) {
        (Referent::Marker(m), None) => write_name(out, m),
        (Referent::Marker(m), Some(v)) => {
            write_name(out, m);
            out.push_str(" *");
            out.push_str(v);
        }
        (_, Some(v)) => {
            out.push('*');
            out.push_str(v);
        }
        (_, None) => out.push('*'),
    }
    out.push(']');
}

/// Renders a graph in the linear notation.
///
/// Isolated nodes come first (one per line, node-id order), then one edge per
/// line in edge-id order. Nodes appearing more than once get generated
/// labels `*v1, *v2, ...` in node-id order. Lines are joined by `\n` with no
/// trailing newline; the empty graph renders as the empty string.
pub fn serialize_graph(g: &ConceptualGraph) -> String {
    let mut labels: BTreeMap<&str, String> = BTreeMap::new();
    let mut isolated: Vec<&ConceptNode> = Vec::new();
    let mut k = 0;
    for n in g.nodes() {
        match g.degree(&n.node_id) {
            0 => isolated.push(n),
            1 => {}
            _ => {
                k += 1;
                labels.insert(&n.node_id, format!("v{k}"));
            }
        }
    }

    let mut lines: Vec<String> = Vec::with_capacity(isolated.len() + g.edge_count());
    for n in isolated {
        let mut line = String::new();
        write_concept(&mut line, n, None);
        lines.push(line);
    }
    for e in g.edges() {
        let mut line = String::new();
        let end = |id: &str| g.node(id).cloned().unwrap_or_else(|| ConceptNode::generic(id, "?"));
        write_concept(&mut line, &end(&e.source), labels.get(e.source.as_str()).map(String::as_str));
        line.push_str(" -(");
        write_name(&mut line, &e.rel_id);
        line.push_str(")-> ");
        write_concept(&mut line, &end(&e.target), labels.get(e.target.as_str()).map(String::as_str));
        lines.push(line);
    }
    lines.join("\n")
}
