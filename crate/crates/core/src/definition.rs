//! Type definitions: expansion of a concept into its defining graph and the
//! inverse condensation.
//!
//! A definition `defined_type = body(parameter)` says that a node of
//! `defined_type` stands for the generic `body` in which `parameter` plays
//! the role of the node itself. The parameter's type (the genus) must
//! subsume the defined type.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::CgError;
use crate::graph::{validate_graph, ConceptNode, ConceptualGraph, Referent, RelationEdge};
use crate::ontology::Ontology;
use crate::ops::merge_nodes;
use crate::projection::project_injective;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeDefinition {
    pub defined_type: String,
    pub body: ConceptualGraph,
    pub parameter: String,
}

impl TypeDefinition {
    /// Checks the definition against the ontology.
    pub fn validate(&self, ont: &Ontology) -> Result<(), CgError> {
        let invalid = |msg: String| CgError::InvalidDefinition(self.defined_type.clone(), msg);
        if ont.concept(&self.defined_type).is_none() {
            return Err(invalid(format!("unknown type `{}`", self.defined_type)));
        }
        let report = validate_graph(ont, &self.body);
        if !report.is_empty() {
            return Err(invalid(report.to_string()));
        }
        if !self.body.is_generic() {
            return Err(invalid("body must be generic".into()));
        }
        let param = self
            .body
            .node(&self.parameter)
            .ok_or_else(|| invalid(format!("no parameter node `{}`", self.parameter)))?;
        if !ont.is_subtype(&param.type_id, &self.defined_type) {
            return Err(invalid(format!("parameter type `{}` does not subsume the defined type", param.type_id)));
        }
        if self.body.node_count() < 2 {
            return Err(invalid("body needs at least one node besides the parameter".into()));
        }
        Ok(())
    }
}

/// Replaces `node_id` by the body of the definition of its type, joined at
/// the parameter. The node keeps its id, type and referent; body nodes and
/// edges get fresh ids.
pub fn expand_type(
    ont: &Ontology,
    g: &ConceptualGraph,
    node_id: &str,
    defs: &[TypeDefinition],
) -> Result<ConceptualGraph, CgError> {
    let node = g.node(node_id).ok_or_else(|| CgError::UnknownNode(node_id.into()))?;
    let def = defs
        .iter()
        .find(|d| d.defined_type == node.type_id)
        .ok_or_else(|| CgError::NoDefinition(node.type_id.clone()))?;
    let param = def
        .body
        .node(&def.parameter)
        .ok_or_else(|| CgError::InvalidDefinition(def.defined_type.clone(), "missing parameter".into()))?;
    let (type_id, referent) = merge_nodes(ont, node, param).map_err(|e| CgError::JoinFailure(e.to_string()))?;

    let mut out = g.clone();
    {
        let n = out.node_mut(node_id).expect("node exists");
        n.type_id = type_id;
        n.referent = referent;
    }
    let mut renamed: BTreeMap<&str, String> = BTreeMap::new();
    renamed.insert(&def.parameter, node_id.into());
    for b in def.body.nodes() {
        if b.node_id == def.parameter {
            continue;
        }
        let id = out.fresh_node_id(&b.node_id);
        renamed.insert(&b.node_id, id.clone());
        out.insert_node(ConceptNode::generic(id, b.type_id.clone())).expect("fresh id");
    }
    for e in def.body.edges() {
        let id = out.fresh_edge_id(&e.edge_id);
        out.insert_edge(RelationEdge::new(
            id,
            e.rel_id.clone(),
            renamed[e.source.as_str()].clone(),
            renamed[e.target.as_str()].clone(),
        ))
        .expect("fresh id");
    }
    let report = validate_graph(ont, &out);
    if !report.is_empty() {
        return Err(CgError::JoinFailure(report.to_string()));
    }
    Ok(out)
}

/// Condenses every occurrence of a definition body back into a single node,
/// definitions tried in the given order and sites in projection order,
/// until no site is left.
///
/// A site is an injective projection of the body such that every matched
/// node other than the parameter is generic, has exactly the body type and
/// touches no edge outside the match, and every matched edge has exactly the
/// body relation. The parameter's image keeps its type when that type is
/// already at or below the defined type and is lowered to the defined type
/// when it lies above it; otherwise the site is skipped.
pub fn contract_type(ont: &Ontology, g: &ConceptualGraph, defs: &[TypeDefinition]) -> ConceptualGraph {
    let mut out = g.clone();
    'outer: loop {
        for def in defs {
            if def.body.node(&def.parameter).is_none() || def.body.node_count() < 2 {
                continue;
            }
            for m in project_injective(ont, &def.body, &out) {
                if let Some(next) = contract_site(ont, &out, def, &m.node_map, &m.edge_map) {
                    out = next;
                    continue 'outer;
                }
            }
        }
        return out;
    }
}

fn contract_site(
    ont: &Ontology,
    g: &ConceptualGraph,
    def: &TypeDefinition,
    node_map: &BTreeMap<String, String>,
    edge_map: &BTreeMap<String, String>,
) -> Option<ConceptualGraph> {
    let matched_edges: BTreeSet<&str> = edge_map.values().map(String::as_str).collect();
    if matched_edges.len() != edge_map.len() {
        return None;
    }
    for (b, t) in node_map {
        if *b == def.parameter {
            continue;
        }
        let body_node = def.body.node(b)?;
        let image = g.node(t)?;
        if image.type_id != body_node.type_id || !matches!(image.referent, Referent::Generic) {
            return None;
        }
        if g.incident_edges(t).any(|e| !matched_edges.contains(e.edge_id.as_str())) {
            return None;
        }
    }
    for (b, t) in edge_map {
        if def.body.edge(b)?.rel_id != g.edge(t)?.rel_id {
            return None;
        }
    }
    let centre = &node_map[&def.parameter];
    let centre_type = &g.node(centre)?.type_id;
    let new_type = if ont.is_subtype(&def.defined_type, centre_type) {
        centre_type.clone()
    } else if ont.is_subtype(centre_type, &def.defined_type) {
        def.defined_type.clone()
    } else {
        return None;
    };
    if let Referent::Marker(m) = &g.node(centre)?.referent {
        if !ont.marker_conforms(m, &new_type) {
            return None;
        }
    }

    let mut out = g.clone();
    for e in matched_edges {
        out.remove_edge(e);
    }
    for (b, t) in node_map {
        if *b != def.parameter {
            out.remove_node(t);
        }
    }
    out.node_mut(centre)?.type_id = new_type;
    Some(out)
}

/// Definitions in declaration order that fail [`TypeDefinition::validate`],
/// with their errors.
pub fn invalid_definitions<'a>(ont: &Ontology, defs: &'a [TypeDefinition]) -> Vec<(&'a TypeDefinition, CgError)> {
    defs.iter().filter_map(|d| d.validate(ont).err().map(|e| (d, e))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::notation::canonical_form;
    use crate::ontology::{ConceptType, OntologyDocument, RelationType, Signature};
    use alloc::vec;

    fn ont() -> Ontology {
        let ct = |id: &str, p: &[&str]| ConceptType {
            id: id.into(),
            label: id.into(),
            parent_ids: p.iter().map(|s| String::from(*s)).collect(),
        };
        let rt = |id: &str, s: &str, t: &str| RelationType {
            id: id.into(),
            label: id.into(),
            parent_ids: BTreeSet::new(),
            signature: Signature { source: s.into(), target: t.into() },
        };
        Ontology::load(OntologyDocument {
            concept_types: vec![
                ct("top", &[]),
                ct("Lieu", &["top"]),
                ct("Mine", &["Lieu"]),
                ct("Gisement", &["top"]),
                ct("Nom", &["top"]),
            ],
            relation_types: vec![rt("gisement", "Lieu", "Gisement"), rt("nom", "top", "Nom")],
            individuals: vec![],
            root_id: "top".into(),
        })
        .unwrap()
    }

    fn def() -> TypeDefinition {
        TypeDefinition {
            defined_type: "Mine".into(),
            body: ConceptualGraph::from_parts(
                [
                    ConceptNode::generic("x", "Lieu"),
                    ConceptNode::generic("g", "Gisement"),
                    ConceptNode::generic("n", "Nom"),
                ],
                [RelationEdge::new("d1", "gisement", "x", "g"), RelationEdge::new("d2", "nom", "x", "n")],
            )
            .unwrap(),
            parameter: "x".into(),
        }
    }

    #[test]
    fn expand_then_contract_is_identity() {
        let ont = ont();
        def().validate(&ont).unwrap();
        let g = ConceptualGraph::from_parts(
            [ConceptNode::generic("m", "Mine"), ConceptNode::generic("k", "Nom")],
            [RelationEdge::new("e", "nom", "m", "k")],
        )
        .unwrap();
        let x = expand_type(&ont, &g, "m", &[def()]).unwrap();
        assert_eq!(x.node_count(), 4);
        assert_eq!(x.incident_edges("m").count(), 3);
        // the original `nom` edge may be the one absorbed; only the shape is fixed
        let back = contract_type(&ont, &x, &[def()]);
        assert_eq!(canonical_form(&back), canonical_form(&g));
    }

    #[test]
    fn no_definition() {
        let ont = ont();
        let g = ConceptualGraph::from_parts([ConceptNode::generic("n", "Nom")], []).unwrap();
        assert_eq!(expand_type(&ont, &g, "n", &[def()]), Err(CgError::NoDefinition("Nom".into())));
    }

    #[test]
    fn genus_site_is_specialized() {
        let ont = ont();
        let g = def().body;
        let c = contract_type(&ont, &g, &[def()]);
        assert_eq!(c.node_count(), 1);
        assert_eq!(c.node("x").unwrap().type_id, "Mine");
    }

    #[test]
    fn attached_site_is_skipped() {
        let ont = ont();
        let mut g = def().body;
        g.insert_node(ConceptNode::generic("other", "Lieu")).unwrap();
        g.insert_edge(RelationEdge::new("ext", "nom", "other", "n")).unwrap();
        assert_eq!(contract_type(&ont, &g, &[def()]), g);
    }
}
