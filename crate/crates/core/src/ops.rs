//! Formation rules: restriction, join and simplification.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CgError;
use crate::graph::{validate_graph, ConceptNode, ConceptualGraph, Referent, RelationEdge};
use crate::ontology::Ontology;

fn check_valid(ont: &Ontology, g: &ConceptualGraph) -> Result<(), CgError> {
    let report = validate_graph(ont, g);
    if report.is_empty() {
        Ok(())
    } else {
        Err(CgError::InvalidGraph(report))
    }
}

/// Lowers the type of `node_id` to `to_type` and/or specializes its referent
/// to the marker `to_marker`.
pub fn restrict(
    ont: &Ontology,
    g: &ConceptualGraph,
    node_id: &str,
    to_type: Option<&str>,
    to_marker: Option<&str>,
) -> Result<ConceptualGraph, CgError> {
    let node = g.node(node_id).ok_or_else(|| CgError::UnknownNode(node_id.into()))?;
    let new_type = match to_type {
        Some(t) => {
            if !ont.subsumes(&node.type_id, t)? {
                return Err(CgError::NotASubtype { from: node.type_id.clone(), to: t.into() });
            }
            String::from(t)
        }
        None => node.type_id.clone(),
    };
    let new_referent = match to_marker {
        Some(m) => {
            if let Referent::Marker(current) = &node.referent {
                if current != m {
                    return Err(CgError::AlreadyIndividual { node: node_id.into(), marker: current.clone() });
                }
            }
            if !ont.conforms(m, &new_type)? {
                return Err(CgError::NonConformingMarker { marker: m.into(), type_id: new_type });
            }
            Referent::Marker(m.into())
        }
        None => {
            // a lowered type must still admit an existing marker
            if let Referent::Marker(current) = &node.referent {
                if !ont.marker_conforms(current, &new_type) {
                    return Err(CgError::NonConformingMarker { marker: current.clone(), type_id: new_type });
                }
            }
            node.referent.clone()
        }
    };
    let mut out = g.clone();
    let n = out.node_mut(node_id).expect("node checked above");
    n.type_id = new_type;
    n.referent = new_referent;
    Ok(out)
}

/// Merged type and referent of two join-compatible nodes.
pub(crate) fn merge_nodes(ont: &Ontology, a: &ConceptNode, b: &ConceptNode) -> Result<(String, Referent), CgError> {
    let type_id = if ont.subsumes(&a.type_id, &b.type_id)? {
        b.type_id.clone()
    } else if ont.subsumes(&b.type_id, &a.type_id)? {
        a.type_id.clone()
    } else {
        return Err(CgError::IncompatibleTypes(a.type_id.clone(), b.type_id.clone()));
    };
    let referent = match (&a.referent, &b.referent) {
        (Referent::Marker(x), Referent::Marker(y)) if x != y => {
            return Err(CgError::ConflictingMarkers(x.clone(), y.clone()));
        }
        (Referent::Marker(_), _) => a.referent.clone(),
        (_, Referent::Marker(_)) => b.referent.clone(),
        // keep a variable name if either side had one
        (Referent::Variable(_), _) => a.referent.clone(),
        _ => b.referent.clone(),
    };
    if let Referent::Marker(m) = &referent {
        if !ont.conforms(m, &type_id)? {
            return Err(CgError::NonConformingMarker { marker: m.clone(), type_id });
        }
    }
    Ok((type_id, referent))
}

/// Disjoint union of `g1` and `g2` with `node1` and `node2` merged. The merged
/// node keeps `node1`'s id; ids of `g2` that clash with `g1` are renamed with a
/// numeric suffix.
pub fn join(
    ont: &Ontology,
    g1: &ConceptualGraph,
    node1: &str,
    g2: &ConceptualGraph,
    node2: &str,
) -> Result<ConceptualGraph, CgError> {
    let n1 = g1.node(node1).ok_or_else(|| CgError::UnknownNode(node1.into()))?;
    let n2 = g2.node(node2).ok_or_else(|| CgError::UnknownNode(node2.into()))?;
    let (type_id, referent) = merge_nodes(ont, n1, n2)?;

    let mut out = g1.clone();
    let mut renamed: BTreeMap<&str, String> = BTreeMap::new();
    renamed.insert(node2, node1.into());
    for n in g2.nodes() {
        if n.node_id == node2 {
            continue;
        }
        let id = out.fresh_node_id(&n.node_id);
        renamed.insert(&n.node_id, id.clone());
        let mut referent = n.referent.clone();
        // a variable of g2 must not alias one of g1
        if let Referent::Variable(v) = &referent {
            let taken: BTreeSet<&str> = out
                .nodes()
                .filter_map(|m| match &m.referent {
                    Referent::Variable(w) => Some(w.as_str()),
                    _ => None,
                })
                .collect();
            if taken.contains(v.as_str()) {
                referent = Referent::Generic;
            }
        }
        out.insert_node(ConceptNode::new(id, n.type_id.clone(), referent)).expect("fresh id");
    }
    {
        let merged = out.node_mut(node1).expect("node1 exists");
        merged.type_id = type_id;
        merged.referent = referent;
    }
    for e in g2.edges() {
        let id = out.fresh_edge_id(&e.edge_id);
        let map = |end: &str| renamed.get(end).cloned().unwrap_or_else(|| String::from(end));
        out.insert_edge(RelationEdge::new(id, e.rel_id.clone(), map(&e.source), map(&e.target))).expect("fresh id");
    }
    check_valid(ont, &out)?;
    Ok(out)
}

/// Collapses duplicate edges (same relation and endpoints), keeping the one
/// with the smallest id.
pub fn simplify(g: &ConceptualGraph) -> ConceptualGraph {
    let mut seen: BTreeSet<(&str, &str, &str)> = BTreeSet::new();
    let mut drop: Vec<String> = Vec::new();
    for e in g.edges() {
        if !seen.insert((&e.rel_id, &e.source, &e.target)) {
            drop.push(e.edge_id.clone());
        }
    }
    let mut out = g.clone();
    for id in drop {
        out.remove_edge(&id);
    }
    out
}
