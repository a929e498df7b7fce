//! Conceptual graphs: concept nodes `[type: referent]` linked by binary,
//! directed relation edges.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::Ontology;
use crate::report::{IssueCode, Report};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Referent {
    /// The anonymous `*`.
    Generic,
    /// A named coreference variable `*x`. Behaves like `Generic` everywhere
    /// in the engine; only node identity matters.
    Variable(String),
    /// An individual of the thesaurus.
    Marker(String),
}

impl Referent {
    pub fn marker(&self) -> Option<&str> {
        match self {
            Referent::Marker(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_generic(&self) -> bool {
        !matches!(self, Referent::Marker(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConceptNode {
    pub node_id: String,
    pub type_id: String,
    pub referent: Referent,
}

impl ConceptNode {
    pub fn new(node_id: impl Into<String>, type_id: impl Into<String>, referent: Referent) -> Self {
        ConceptNode { node_id: node_id.into(), type_id: type_id.into(), referent }
    }

    pub fn generic(node_id: impl Into<String>, type_id: impl Into<String>) -> Self {
        Self::new(node_id, type_id, Referent::Generic)
    }

    pub fn marker(node_id: impl Into<String>, type_id: impl Into<String>, marker: impl Into<String>) -> Self {
        Self::new(node_id, type_id, Referent::Marker(marker.into()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationEdge {
    pub edge_id: String,
    pub rel_id: String,
    pub source: String,
    pub target: String,
}

impl RelationEdge {
    pub fn new(
        edge_id: impl Into<String>,
        rel_id: impl Into<String>,
        source: impl Into<String>,
        target: impl Into<String>,
    ) -> Self {
        RelationEdge { edge_id: edge_id.into(), rel_id: rel_id.into(), source: source.into(), target: target.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphKind {
    Generic,
    Individual,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge id `{0}`")]
    DuplicateEdge(String),
}

/// Structured document shape: arrays sorted by id on output.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    #[serde(default)]
    pub nodes: Vec<ConceptNode>,
    #[serde(default)]
    pub edges: Vec<RelationEdge>,
}

/// Node and edge ids are unique. Edges may dangle; that is reported by
/// [`validate_graph`] rather than rejected at construction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphDocument", into = "GraphDocument")]
pub struct ConceptualGraph {
    nodes: BTreeMap<String, ConceptNode>,
    edges: BTreeMap<String, RelationEdge>,
}

impl TryFrom<GraphDocument> for ConceptualGraph {
    type Error = GraphError;

    fn try_from(doc: GraphDocument) -> Result<Self, GraphError> {
        ConceptualGraph::from_parts(doc.nodes, doc.edges)
    }
}

impl From<ConceptualGraph> for GraphDocument {
    fn from(g: ConceptualGraph) -> Self {
        GraphDocument { nodes: g.nodes.into_values().collect(), edges: g.edges.into_values().collect() }
    }
}

impl ConceptualGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(
        nodes: impl IntoIterator<Item = ConceptNode>,
        edges: impl IntoIterator<Item = RelationEdge>,
    ) -> Result<Self, GraphError> {
        let mut g = ConceptualGraph::new();
        for n in nodes {
            g.insert_node(n)?;
        }
        for e in edges {
            g.insert_edge(e)?;
        }
        Ok(g)
    }

    pub fn insert_node(&mut self, node: ConceptNode) -> Result<(), GraphError> {
        if self.nodes.contains_key(&node.node_id) {
            return Err(GraphError::DuplicateNode(node.node_id));
        }
        self.nodes.insert(node.node_id.clone(), node);
        Ok(())
    }

    pub fn insert_edge(&mut self, edge: RelationEdge) -> Result<(), GraphError> {
        if self.edges.contains_key(&edge.edge_id) {
            return Err(GraphError::DuplicateEdge(edge.edge_id));
        }
        self.edges.insert(edge.edge_id.clone(), edge);
        Ok(())
    }

    pub fn node(&self, id: &str) -> Option<&ConceptNode> {
        self.nodes.get(id)
    }

    pub(crate) fn node_mut(&mut self, id: &str) -> Option<&mut ConceptNode> {
        self.nodes.get_mut(id)
    }

    pub fn edge(&self, id: &str) -> Option<&RelationEdge> {
        self.edges.get(id)
    }

    /// Nodes in id order.
    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &ConceptNode> + Clone {
        self.nodes.values()
    }

    /// Edges in id order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = &RelationEdge> + Clone {
        self.edges.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty() && self.edges.is_empty()
    }

    pub(crate) fn remove_node(&mut self, id: &str) -> Option<ConceptNode> {
        self.nodes.remove(id)
    }

    pub(crate) fn remove_edge(&mut self, id: &str) -> Option<RelationEdge> {
        self.edges.remove(id)
    }

    pub fn kind(&self) -> GraphKind {
        if self.is_generic() {
            GraphKind::Generic
        } else {
            GraphKind::Individual
        }
    }

    pub fn is_generic(&self) -> bool {
        self.nodes.values().all(|n| n.referent.is_generic())
    }

    /// Edges touching `node` (as source or target), in edge-id order.
    pub fn incident_edges<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a RelationEdge> + 'a {
        self.edges.values().filter(move |e| e.source == node || e.target == node)
    }

    pub fn degree(&self, node: &str) -> usize {
        self.edges.values().map(|e| usize::from(e.source == node) + usize::from(e.target == node)).sum()
    }

    /// The same graph with every marker lifted to `*`.
    pub fn generic_skeleton(&self) -> ConceptualGraph {
        let mut g = self.clone();
        for n in g.nodes.values_mut() {
            n.referent = Referent::Generic;
        }
        g
    }

    /// Markers used by the graph, sorted and de-duplicated.
    pub fn markers(&self) -> BTreeSet<&str> {
        self.nodes.values().filter_map(|n| n.referent.marker()).collect()
    }

    pub(crate) fn fresh_node_id(&self, base: &str) -> String {
        fresh_id(base, |c| self.nodes.contains_key(c))
    }

    pub(crate) fn fresh_edge_id(&self, base: &str) -> String {
        fresh_id(base, |c| self.edges.contains_key(c))
    }
}

pub(crate) fn fresh_id(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.into();
    }
    let mut k = 2usize;
    loop {
        let candidate = format!("{base}_{k}");
        if !taken(&candidate) {
            return candidate;
        }
        k += 1;
    }
}

/// Checks every node and edge against the ontology. An empty report means
/// the graph is well-typed.
pub fn validate_graph(ont: &Ontology, g: &ConceptualGraph) -> Report {
    let mut report = Report::new();
    let mut variables: BTreeMap<&str, &str> = BTreeMap::new();
    for n in g.nodes() {
        let known_type = ont.concept(&n.type_id).is_some();
        if !known_type {
            report.add(IssueCode::UnknownType, &n.node_id, format!("unknown concept type `{}`", n.type_id));
        }
        match &n.referent {
            Referent::Marker(m) => {
                if ont.individual(m).is_none() {
                    report.add(IssueCode::UnknownMarker, &n.node_id, format!("marker `{m}` is not in the thesaurus"));
                } else if known_type && !ont.marker_conforms(m, &n.type_id) {
                    report.add(
                        IssueCode::NonConformingMarker,
                        &n.node_id,
                        format!("marker `{m}` does not conform to `{}`", n.type_id),
                    );
                }
            }
            Referent::Variable(name) => {
                if name.is_empty() {
                    report.add(IssueCode::DuplicateVariable, &n.node_id, "empty variable name");
                } else if let Some(other) = variables.insert(name, &n.node_id) {
                    report.add(
                        IssueCode::DuplicateVariable,
                        &n.node_id,
                        format!("variable `*{name}` already binds node `{other}`"),
                    );
                }
            }
            Referent::Generic => {}
        }
    }
    for e in g.edges() {
        let src = g.node(&e.source);
        let tgt = g.node(&e.target);
        for (end, node) in [(&e.source, src), (&e.target, tgt)] {
            if node.is_none() {
                report.add(IssueCode::DanglingEndpoint, &e.edge_id, format!("endpoint `{end}` does not exist"));
            }
        }
        let Some(rel) = ont.relation(&e.rel_id) else {
            report.add(IssueCode::UnknownRelation, &e.edge_id, format!("unknown relation `{}`", e.rel_id));
            continue;
        };
        if let (Some(s), Some(t)) = (src, tgt) {
            if ont.concept(&s.type_id).is_some()
                && ont.concept(&t.type_id).is_some()
                && !(ont.is_subtype(&rel.signature.source, &s.type_id)
                    && ont.is_subtype(&rel.signature.target, &t.type_id))
            {
                report.add(
                    IssueCode::SignatureViolation,
                    &e.edge_id,
                    format!(
                        "`{}` expects ({}, {}) but links ({}, {})",
                        e.rel_id, rel.signature.source, rel.signature.target, s.type_id, t.type_id
                    ),
                );
            }
        }
    }
    report
}
