//! Domain ontology: concept-type hierarchy, relation hierarchy with
//! signatures, and the thesaurus of individuals with their alignments to
//! external vocabularies.
//!
//! Both hierarchies are rooted DAGs (multiple parents allowed). Subsumption is
//! the reflexive-transitive closure of the parent relation and is computed
//! once at load time.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptType {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub parent_ids: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationType {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub parent_ids: BTreeSet<String>,
    pub signature: Signature,
}

/// A reference from an individual to an entry of an external vocabulary
/// (Ethnologue, GOLD, RAMEAU, ...). Ordered by `(scheme, external_ref)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Alignment {
    pub scheme: String,
    pub external_ref: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Individual {
    pub marker: String,
    pub label: String,
    pub concept_ids: BTreeSet<String>,
    #[serde(default)]
    pub alignments: Vec<Alignment>,
}

/// The serialized shape of an ontology file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OntologyDocument {
    pub concept_types: Vec<ConceptType>,
    pub relation_types: Vec<RelationType>,
    pub individuals: Vec<Individual>,
    pub root_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("dangling reference to `{0}`")]
    DanglingReference(String),
    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("root type `{0}` is not declared")]
    MissingRoot(String),
    #[error("root type `{0}` must not have parents")]
    RootHasParents(String),
    #[error("type `{0}` has no parent and is not the root")]
    Unrooted(String),
    #[error("individual `{0}` declares no concept type")]
    EmptyConceptSet(String),
    #[error("individual `{0}` has an alignment with an empty scheme or reference")]
    EmptyAlignment(String),
    #[error("signature of relation `{relation}` is not subsumed by the signature of its parent `{parent}`")]
    SignatureNotCovariant { relation: String, parent: String },
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("unknown marker `{0}`")]
    UnknownMarker(String),
}

impl OntologyError {
    pub fn code(&self) -> &'static str {
        match self {
            OntologyError::DuplicateId(_) => "DuplicateId",
            OntologyError::DanglingReference(_) => "DanglingReference",
            OntologyError::CycleDetected(_) => "CycleDetected",
            OntologyError::MissingRoot(_) => "MissingRoot",
            OntologyError::RootHasParents(_) => "RootHasParents",
            OntologyError::Unrooted(_) => "Unrooted",
            OntologyError::EmptyConceptSet(_) => "EmptyConceptSet",
            OntologyError::EmptyAlignment(_) => "EmptyAlignment",
            OntologyError::SignatureNotCovariant { .. } => "SignatureNotCovariant",
            OntologyError::UnknownId(_) => "UnknownId",
            OntologyError::UnknownMarker(_) => "UnknownMarker",
        }
    }
}

/// A validated, immutable ontology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    concepts: BTreeMap<String, ConceptType>,
    relations: BTreeMap<String, RelationType>,
    individuals: BTreeMap<String, Individual>,
    root_id: String,
    // reflexive-transitive closures, keyed by descendant
    concept_ancestors: BTreeMap<String, BTreeSet<String>>,
    relation_ancestors: BTreeMap<String, BTreeSet<String>>,
}

impl Ontology {
    /// Validates a document and builds the subsumption closures.
    pub fn load(doc: OntologyDocument) -> Result<Self, OntologyError> {
        let mut concepts = BTreeMap::new();
        for ct in doc.concept_types {
            if concepts.contains_key(&ct.id) {
                return Err(OntologyError::DuplicateId(ct.id));
            }
            concepts.insert(ct.id.clone(), ct);
        }
        let mut relations = BTreeMap::new();
        for rt in doc.relation_types {
            if relations.contains_key(&rt.id) {
                return Err(OntologyError::DuplicateId(rt.id));
            }
            relations.insert(rt.id.clone(), rt);
        }
        let mut individuals = BTreeMap::new();
        for ind in doc.individuals {
            if individuals.contains_key(&ind.marker) {
                return Err(OntologyError::DuplicateId(ind.marker));
            }
            individuals.insert(ind.marker.clone(), ind);
        }

        let root_id = doc.root_id;
        let root = concepts.get(&root_id).ok_or_else(|| OntologyError::MissingRoot(root_id.clone()))?;
        if !root.parent_ids.is_empty() {
            return Err(OntologyError::RootHasParents(root_id));
        }

        for ct in concepts.values() {
            for p in &ct.parent_ids {
                if !concepts.contains_key(p) {
                    return Err(OntologyError::DanglingReference(p.clone()));
                }
            }
        }
        let concept_parents: BTreeMap<&str, &BTreeSet<String>> =
            concepts.values().map(|c| (c.id.as_str(), &c.parent_ids)).collect();
        let concept_ancestors = closure(&concept_parents)?;
        for ct in concepts.values() {
            if ct.id != root_id && ct.parent_ids.is_empty() {
                return Err(OntologyError::Unrooted(ct.id.clone()));
            }
        }

        for rt in relations.values() {
            for p in &rt.parent_ids {
                if !relations.contains_key(p) {
                    return Err(OntologyError::DanglingReference(p.clone()));
                }
            }
            for t in [&rt.signature.source, &rt.signature.target] {
                if !concepts.contains_key(t) {
                    return Err(OntologyError::DanglingReference(t.clone()));
                }
            }
        }
        let relation_parents: BTreeMap<&str, &BTreeSet<String>> =
            relations.values().map(|r| (r.id.as_str(), &r.parent_ids)).collect();
        let relation_ancestors = closure(&relation_parents)?;

        let sub = |a: &str, b: &str| concept_ancestors.get(b).is_some_and(|anc| anc.contains(a));
        for rt in relations.values() {
            for p in &rt.parent_ids {
                let parent = &relations[p];
                if !sub(&parent.signature.source, &rt.signature.source)
                    || !sub(&parent.signature.target, &rt.signature.target)
                {
                    return Err(OntologyError::SignatureNotCovariant { relation: rt.id.clone(), parent: p.clone() });
                }
            }
        }

        for ind in individuals.values() {
            if ind.concept_ids.is_empty() {
                return Err(OntologyError::EmptyConceptSet(ind.marker.clone()));
            }
            for c in &ind.concept_ids {
                if !concepts.contains_key(c) {
                    return Err(OntologyError::DanglingReference(c.clone()));
                }
            }
            if ind.alignments.iter().any(|a| a.scheme.is_empty() || a.external_ref.is_empty()) {
                return Err(OntologyError::EmptyAlignment(ind.marker.clone()));
            }
        }

        Ok(Ontology { concepts, relations, individuals, root_id, concept_ancestors, relation_ancestors })
    }

    /// Back to the file shape; every collection sorted by id.
    pub fn to_document(&self) -> OntologyDocument {
        OntologyDocument {
            concept_types: self.concepts.values().cloned().collect(),
            relation_types: self.relations.values().cloned().collect(),
            individuals: self.individuals.values().cloned().collect(),
            root_id: self.root_id.clone(),
        }
    }

    pub fn root_id(&self) -> &str {
        &self.root_id
    }

    pub fn concept(&self, id: &str) -> Option<&ConceptType> {
        self.concepts.get(id)
    }

    pub fn relation(&self, id: &str) -> Option<&RelationType> {
        self.relations.get(id)
    }

    pub fn individual(&self, marker: &str) -> Option<&Individual> {
        self.individuals.get(marker)
    }

    pub fn concept_types(&self) -> impl Iterator<Item = &ConceptType> {
        self.concepts.values()
    }

    pub fn relation_types(&self) -> impl Iterator<Item = &RelationType> {
        self.relations.values()
    }

    pub fn individuals(&self) -> impl Iterator<Item = &Individual> {
        self.individuals.values()
    }

    /// All supertypes of `id`, including `id` itself.
    pub fn ancestors(&self, id: &str) -> Result<&BTreeSet<String>, OntologyError> {
        self.concept_ancestors.get(id).ok_or_else(|| OntologyError::UnknownId(id.into()))
    }

    /// All super-relations of `id`, including `id` itself.
    pub fn relation_ancestors(&self, id: &str) -> Result<&BTreeSet<String>, OntologyError> {
        self.relation_ancestors.get(id).ok_or_else(|| OntologyError::UnknownId(id.into()))
    }

    /// `true` iff `general` is `specific` or one of its ancestors.
    pub fn subsumes(&self, general: &str, specific: &str) -> Result<bool, OntologyError> {
        if !self.concepts.contains_key(general) {
            return Err(OntologyError::UnknownId(general.into()));
        }
        Ok(self.ancestors(specific)?.contains(general))
    }

    pub fn relation_subsumes(&self, general: &str, specific: &str) -> Result<bool, OntologyError> {
        if !self.relations.contains_key(general) {
            return Err(OntologyError::UnknownId(general.into()));
        }
        Ok(self.relation_ancestors(specific)?.contains(general))
    }

    /// Infallible variant for hot paths: unknown ids never subsume.
    pub(crate) fn is_subtype(&self, general: &str, specific: &str) -> bool {
        self.concept_ancestors.get(specific).is_some_and(|a| a.contains(general))
    }

    pub(crate) fn is_subrelation(&self, general: &str, specific: &str) -> bool {
        self.relation_ancestors.get(specific).is_some_and(|a| a.contains(general))
    }

    /// The minimal elements (under subsumption) of the common ancestors of
    /// `a` and `b`, sorted by id. Never empty: the root is always common.
    pub fn minimal_common_supertypes(&self, a: &str, b: &str) -> Result<Vec<String>, OntologyError> {
        let common: BTreeSet<&String> = self.ancestors(a)?.intersection(self.ancestors(b)?).collect();
        Ok(minimal_elements(&common, &self.concept_ancestors))
    }

    /// Same as [`Ontology::minimal_common_supertypes`] over the relation
    /// hierarchy. May be empty since relations have no single root.
    pub fn minimal_common_super_relations(&self, a: &str, b: &str) -> Result<Vec<String>, OntologyError> {
        let common: BTreeSet<&String> = self.relation_ancestors(a)?.intersection(self.relation_ancestors(b)?).collect();
        Ok(minimal_elements(&common, &self.relation_ancestors))
    }

    /// `true` iff `rel` may link a source of type `src` to a target of type
    /// `tgt` according to its signature.
    pub fn relation_applicable(&self, rel: &str, src: &str, tgt: &str) -> Result<bool, OntologyError> {
        let rt = self.relations.get(rel).ok_or_else(|| OntologyError::UnknownId(rel.into()))?;
        Ok(self.subsumes(&rt.signature.source, src)? && self.subsumes(&rt.signature.target, tgt)?)
    }

    /// `true` iff some declared type of the individual is subsumed by `ct`.
    pub fn conforms(&self, marker: &str, ct: &str) -> Result<bool, OntologyError> {
        let ind = self.individuals.get(marker).ok_or_else(|| OntologyError::UnknownMarker(marker.into()))?;
        if !self.concepts.contains_key(ct) {
            return Err(OntologyError::UnknownId(ct.into()));
        }
        Ok(ind.concept_ids.iter().any(|t| self.is_subtype(ct, t)))
    }

    pub(crate) fn marker_conforms(&self, marker: &str, ct: &str) -> bool {
        self.individuals.get(marker).is_some_and(|ind| ind.concept_ids.iter().any(|t| self.is_subtype(ct, t)))
    }

    /// Individuals conforming to `ct`, sorted by marker.
    pub fn individuals_for(&self, ct: &str) -> Result<Vec<&Individual>, OntologyError> {
        if !self.concepts.contains_key(ct) {
            return Err(OntologyError::UnknownId(ct.into()));
        }
        Ok(self.individuals.values().filter(|ind| ind.concept_ids.iter().any(|t| self.is_subtype(ct, t))).collect())
    }

    /// Number of supertypes of `id` (itself included); deeper types are more
    /// specific.
    pub fn depth(&self, id: &str) -> usize {
        self.concept_ancestors.get(id).map_or(0, BTreeSet::len)
    }
}

fn minimal_elements(common: &BTreeSet<&String>, ancestors: &BTreeMap<String, BTreeSet<String>>) -> Vec<String> {
    // c is minimal iff no other common element lies strictly below it
    common
        .iter()
        .filter(|c| !common.iter().any(|d| d != *c && ancestors[d.as_str()].contains(c.as_str())))
        .map(|c| (*c).clone())
        .collect()
}

/// Reflexive-transitive closure of a parent map, or the first cycle found.
fn closure(parents: &BTreeMap<&str, &BTreeSet<String>>) -> Result<BTreeMap<String, BTreeSet<String>>, OntologyError> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }

    fn visit<'a>(
        id: &'a str,
        parents: &BTreeMap<&'a str, &'a BTreeSet<String>>,
        marks: &mut BTreeMap<&'a str, Mark>,
        stack: &mut Vec<&'a str>,
        out: &mut BTreeMap<String, BTreeSet<String>>,
    ) -> Result<(), OntologyError> {
        match marks.get(id) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Open) => {
                let start = stack.iter().position(|s| *s == id).unwrap_or(0);
                let mut path: Vec<String> = stack[start..].iter().map(|s| String::from(*s)).collect();
                path.push(id.into());
                return Err(OntologyError::CycleDetected(path));
            }
            None => {}
        }
        marks.insert(id, Mark::Open);
        stack.push(id);
        let mut anc = BTreeSet::new();
        anc.insert(String::from(id));
        for p in parents[id].iter() {
            visit(p.as_str(), parents, marks, stack, out)?;
            anc.extend(out[p.as_str()].iter().cloned());
        }
        stack.pop();
        marks.insert(id, Mark::Done);
        out.insert(id.into(), anc);
        Ok(())
    }

    let mut marks = BTreeMap::new();
    let mut out = BTreeMap::new();
    for id in parents.keys() {
        let mut stack = Vec::new();
        visit(id, parents, &mut marks, &mut stack, &mut out)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn ct(id: &str, parents: &[&str]) -> ConceptType {
        ConceptType { id: id.into(), label: id.into(), parent_ids: parents.iter().map(|p| String::from(*p)).collect() }
    }

    fn rt(id: &str, parents: &[&str], src: &str, tgt: &str) -> RelationType {
        RelationType {
            id: id.into(),
            label: id.into(),
            parent_ids: parents.iter().map(|p| String::from(*p)).collect(),
            signature: Signature { source: src.into(), target: tgt.into() },
        }
    }

    fn ind(marker: &str, types: &[&str]) -> Individual {
        Individual {
            marker: marker.into(),
            label: marker.into(),
            concept_ids: types.iter().map(|p| String::from(*p)).collect(),
            alignments: vec![],
        }
    }

    fn diamond() -> OntologyDocument {
        OntologyDocument {
            concept_types: vec![
                ct("top", &[]),
                ct("a", &["top"]),
                ct("b", &["top"]),
                ct("c", &["a", "b"]),
                ct("d", &["a", "b"]),
                ct("e", &["c"]),
            ],
            relation_types: vec![rt("r", &[], "top", "top"), rt("r_a", &["r"], "a", "b")],
            individuals: vec![ind("x", &["e"]), ind("y", &["d"])],
            root_id: "top".into(),
        }
    }

    #[test]
    fn diamond_loads_and_subsumes() {
        let ont = Ontology::load(diamond()).unwrap();
        assert!(ont.subsumes("a", "e").unwrap());
        assert!(ont.subsumes("top", "e").unwrap());
        assert!(ont.subsumes("e", "e").unwrap());
        assert!(!ont.subsumes("e", "c").unwrap());
        assert!(!ont.subsumes("d", "c").unwrap());
        assert_eq!(ont.subsumes("nope", "c"), Err(OntologyError::UnknownId("nope".into())));
    }

    #[test]
    fn minimal_common_supertypes_is_an_antichain() {
        let ont = Ontology::load(diamond()).unwrap();
        assert_eq!(ont.minimal_common_supertypes("c", "d").unwrap(), vec!["a", "b"]);
        assert_eq!(ont.minimal_common_supertypes("e", "e").unwrap(), vec!["e"]);
        assert_eq!(ont.minimal_common_supertypes("e", "c").unwrap(), vec!["c"]);
        assert_eq!(ont.minimal_common_supertypes("a", "b").unwrap(), vec!["top"]);
    }

    #[test]
    fn conformity_and_individuals() {
        let ont = Ontology::load(diamond()).unwrap();
        assert!(ont.conforms("x", "a").unwrap());
        assert!(!ont.conforms("x", "d").unwrap());
        assert_eq!(ont.conforms("zz", "a"), Err(OntologyError::UnknownMarker("zz".into())));
        let markers: Vec<_> = ont.individuals_for("b").unwrap().iter().map(|i| i.marker.as_str()).collect();
        assert_eq!(markers, vec!["x", "y"]);
        assert!(ont.individuals_for("e").unwrap().iter().all(|i| i.marker == "x"));
    }

    #[test]
    fn relation_signatures() {
        let ont = Ontology::load(diamond()).unwrap();
        assert!(ont.relation_applicable("r_a", "c", "d").unwrap());
        assert!(!ont.relation_applicable("r_a", "b", "d").unwrap());
        assert!(ont.relation_applicable("r_a", "a", "b").unwrap());
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let mut doc = diamond();
        doc.concept_types[1].parent_ids.insert("a".into());
        assert!(matches!(Ontology::load(doc), Err(OntologyError::CycleDetected(p)) if p.contains(&"a".into())));
    }

    #[test]
    fn longer_cycle_reports_path() {
        let mut doc = diamond();
        doc.concept_types[1].parent_ids.insert("e".into());
        match Ontology::load(doc) {
            Err(OntologyError::CycleDetected(path)) => {
                assert_eq!(path.first(), path.last());
                assert!(path.len() >= 3);
            }
            other => panic!("expected a cycle, got {other:?}"),
        }
    }

    #[test]
    fn load_errors() {
        let mut doc = diamond();
        doc.individuals.push(ind("z", &["ghost"]));
        assert_eq!(Ontology::load(doc), Err(OntologyError::DanglingReference("ghost".into())));

        let mut doc = diamond();
        doc.individuals.push(ind("z", &[]));
        assert_eq!(Ontology::load(doc), Err(OntologyError::EmptyConceptSet("z".into())));

        let mut doc = diamond();
        doc.root_id = "nothing".into();
        assert_eq!(Ontology::load(doc), Err(OntologyError::MissingRoot("nothing".into())));

        let mut doc = diamond();
        doc.concept_types.push(ct("a", &["top"]));
        assert_eq!(Ontology::load(doc), Err(OntologyError::DuplicateId("a".into())));

        let mut doc = diamond();
        doc.concept_types.push(ct("floating", &[]));
        assert_eq!(Ontology::load(doc), Err(OntologyError::Unrooted("floating".into())));

        let mut doc = diamond();
        doc.relation_types.push(rt("r_bad", &["r_a"], "top", "b"));
        assert!(matches!(Ontology::load(doc), Err(OntologyError::SignatureNotCovariant { .. })));

        let mut doc = diamond();
        doc.individuals[0].alignments.push(Alignment { scheme: "gold".into(), external_ref: String::new() });
        assert_eq!(Ontology::load(doc), Err(OntologyError::EmptyAlignment("x".into())));
    }

    #[test]
    fn document_round_trip_is_sorted() {
        let ont = Ontology::load(diamond()).unwrap();
        let doc = ont.to_document();
        let ids: Vec<_> = doc.concept_types.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, vec!["a", "b", "c", "d", "e", "top"]);
        assert_eq!(Ontology::load(doc).unwrap(), ont);
    }
}
