//! Abstraction: a common generalization of two graphs.
//!
//! When the generic skeletons of both inputs are isomorphic, the result is
//! that skeleton. Otherwise nodes are paired greedily: each round adds the
//! compatible pair (least common supertype below the root) that would carry
//! the most edges given the pairs already chosen, breaking ties by the depth
//! of the common supertype and then by node ids. An edge is kept when both
//! endpoint pairs are chosen and the two relations have a common
//! super-relation applicable to the generalized endpoint types.
//!
//! The result is *a* maximal generalization under this pairing, not a unique
//! one. It always projects into both inputs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CgError;
use crate::graph::{validate_graph, ConceptNode, ConceptualGraph, RelationEdge};
use crate::notation::canonical_labeling;
use crate::ontology::Ontology;

pub fn common_generalization(
    ont: &Ontology,
    g1: &ConceptualGraph,
    g2: &ConceptualGraph,
) -> Result<ConceptualGraph, CgError> {
    for g in [g1, g2] {
        let report = validate_graph(ont, g);
        if !report.is_empty() {
            return Err(CgError::InvalidGraph(report));
        }
    }
    let s1 = g1.generic_skeleton();
    let s2 = g2.generic_skeleton();
    if s1.node_count() == s2.node_count()
        && s1.edge_count() == s2.edge_count()
        && canonical_labeling(&s1).0 == canonical_labeling(&s2).0
    {
        return Ok(s1);
    }
    Ok(greedy(ont, g1, g2))
}

struct Candidate {
    u: String,
    v: String,
    lub: String,
}

fn greedy(ont: &Ontology, g1: &ConceptualGraph, g2: &ConceptualGraph) -> ConceptualGraph {
    let root = ont.root_id();
    let mut candidates: Vec<Candidate> = Vec::new();
    for a in g1.nodes() {
        for b in g2.nodes() {
            let Ok(mcs) = ont.minimal_common_supertypes(&a.type_id, &b.type_id) else { continue };
            let Some(lub) = mcs.into_iter().next() else { continue };
            if lub != root {
                candidates.push(Candidate { u: a.node_id.clone(), v: b.node_id.clone(), lub });
            }
        }
    }

    // chosen: g1 node -> (g2 node, generalized type)
    let mut chosen: BTreeMap<String, (String, String)> = BTreeMap::new();
    let mut used2: BTreeSet<String> = BTreeSet::new();
    loop {
        let mut best: Option<(usize, usize, &Candidate)> = None;
        for c in &candidates {
            if chosen.contains_key(&c.u) || used2.contains(&c.v) {
                continue;
            }
            let support = support(ont, g1, g2, &chosen, c);
            let depth = ont.depth(&c.lub);
            let better = match &best {
                None => true,
                // candidates are already in (u, v) order, so ties keep the first
                Some((s, d, _)) => (support, depth) > (*s, *d),
            };
            if better {
                best = Some((support, depth, c));
            }
        }
        let Some((_, _, c)) = best else { break };
        chosen.insert(c.u.clone(), (c.v.clone(), c.lub.clone()));
        used2.insert(c.v.clone());
    }

    let mut out = ConceptualGraph::new();
    for (u, (_, lub)) in &chosen {
        out.insert_node(ConceptNode::generic(u.clone(), lub.clone())).expect("g1 ids are unique");
    }
    let mut kept: BTreeSet<(String, String, String)> = BTreeSet::new();
    for e1 in g1.edges() {
        let (Some((s2, st)), Some((t2, tt))) = (chosen.get(&e1.source), chosen.get(&e1.target)) else { continue };
        for e2 in g2.edges().filter(|e| &e.source == s2 && &e.target == t2) {
            if let Some(rel) = common_relation(ont, &e1.rel_id, &e2.rel_id, st, tt) {
                kept.insert((e1.source.clone(), rel, e1.target.clone()));
            }
        }
    }
    for (k, (s, rel, t)) in kept.into_iter().enumerate() {
        out.insert_edge(RelationEdge::new(format!("e{}", k + 1), rel, s, t)).expect("generated ids");
    }
    out
}

fn common_relation(ont: &Ontology, r1: &str, r2: &str, src: &str, tgt: &str) -> Option<String> {
    ont.minimal_common_super_relations(r1, r2)
        .ok()?
        .into_iter()
        .find(|r| ont.relation_applicable(r, src, tgt).unwrap_or(false))
}

/// Number of edge pairs that `c` would allow to keep, given `chosen`.
fn support(
    ont: &Ontology,
    g1: &ConceptualGraph,
    g2: &ConceptualGraph,
    chosen: &BTreeMap<String, (String, String)>,
    c: &Candidate,
) -> usize {
    let image = |x: &str| -> Option<(&str, &str)> {
        if x == c.u {
            Some((c.v.as_str(), c.lub.as_str()))
        } else {
            chosen.get(x).map(|(v, t)| (v.as_str(), t.as_str()))
        }
    };
    let mut n = 0;
    for e1 in g1.incident_edges(&c.u) {
        let (Some((s2, st)), Some((t2, tt))) = (image(&e1.source), image(&e1.target)) else { continue };
        n += g2
            .edges()
            .filter(|e2| e2.source == s2 && e2.target == t2)
            .filter(|e2| common_relation(ont, &e1.rel_id, &e2.rel_id, st, tt).is_some())
            .count();
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{ConceptType, Individual, OntologyDocument, RelationType, Signature};
    use crate::projection::project;
    use crate::Referent;
    use alloc::vec;

    fn ont() -> Ontology {
        let ct = |id: &str, p: &[&str]| ConceptType {
            id: id.into(),
            label: id.into(),
            parent_ids: p.iter().map(|s| String::from(*s)).collect(),
        };
        let ind = |m: &str, t: &str| Individual {
            marker: m.into(),
            label: m.into(),
            concept_ids: [String::from(t)].into(),
            alignments: vec![],
        };
        Ontology::load(OntologyDocument {
            concept_types: vec![ct("top", &[]), ct("Langue", &["top"]), ct("Famille", &["top"]), ct("Mine", &["top"])],
            relation_types: vec![RelationType {
                id: "partie_de".into(),
                label: "partie de".into(),
                parent_ids: BTreeSet::new(),
                signature: Signature { source: "Langue".into(), target: "Famille".into() },
            }],
            individuals: vec![
                ind("guarani", "Langue"),
                ind("basque", "Langue"),
                ind("tupi", "Famille"),
                ind("isolat", "Famille"),
            ],
            root_id: "top".into(),
        })
        .unwrap()
    }

    fn pair(l: &str, f: &str) -> ConceptualGraph {
        ConceptualGraph::from_parts(
            [ConceptNode::marker("l", "Langue", l), ConceptNode::marker("f", "Famille", f)],
            [RelationEdge::new("e", "partie_de", "l", "f")],
        )
        .unwrap()
    }

    #[test]
    fn two_languages_generalize_to_skeleton() {
        let ont = ont();
        let (a, b) = (pair("guarani", "tupi"), pair("basque", "isolat"));
        let g = common_generalization(&ont, &a, &b).unwrap();
        assert!(g.is_generic());
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert!(!project(&ont, &g, &a).unwrap().is_empty());
        assert!(!project(&ont, &g, &b).unwrap().is_empty());
    }

    #[test]
    fn greedy_path_keeps_shared_part() {
        let ont = ont();
        let a = pair("guarani", "tupi");
        let mut b = pair("basque", "isolat");
        b.insert_node(ConceptNode::generic("m", "Mine")).unwrap();
        let g = common_generalization(&ont, &a, &b).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));
        assert!(g.nodes().all(|n| n.referent == Referent::Generic));
        assert!(!project(&ont, &g, &a).unwrap().is_empty());
        assert!(!project(&ont, &g, &b).unwrap().is_empty());
    }

    #[test]
    fn disjoint_vocabularies_give_empty_graph() {
        let ont = ont();
        let a = ConceptualGraph::from_parts([ConceptNode::generic("x", "Langue")], []).unwrap();
        let b = ConceptualGraph::from_parts([ConceptNode::generic("y", "Mine")], []).unwrap();
        assert!(common_generalization(&ont, &a, &b).unwrap().is_empty());
    }
}
