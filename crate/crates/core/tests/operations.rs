use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use scs_core::definition::invalid_definitions;
use scs_core::{
    common_generalization, contract_type, expand_type, join, projects, restrict, simplify, validate_graph,
    ConceptualGraph, Ontology, Referent,
};
use scs_testkit::{
    definition_pair, derived_pattern, descendants, isomorphic, random_graph, rng, sample_definitions, sample_ontology,
    GraphParams, SAMPLES,
};

fn params() -> GraphParams {
    GraphParams { max_nodes: 7, max_edges: 7, marker_prob: 0.3 }
}

/// A restriction of a random node: a random subtype still admitting the
/// node's edges and marker, and sometimes a conforming marker.
fn random_restriction(
    r: &mut impl Rng,
    ont: &Ontology,
    g: &ConceptualGraph,
) -> Option<(String, String, Option<String>)> {
    let n = g.nodes().collect::<Vec<_>>().choose(r)?.to_owned().clone();
    let options: Vec<String> = descendants(ont, &n.type_id)
        .into_iter()
        .filter(|t| n.referent.marker().is_none_or(|m| ont.conforms(m, t).unwrap()))
        .collect();
    let ty = options.choose(r)?.clone();
    let marker = match n.referent {
        Referent::Marker(_) => None,
        _ => {
            let ms: Vec<String> = ont.individuals_for(&ty).unwrap().iter().map(|i| i.marker.clone()).collect();
            if r.gen_bool(0.5) {
                ms.choose(r).cloned()
            } else {
                None
            }
        }
    };
    Some((n.node_id, ty, marker))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(80))]

    #[test]
    fn restriction_specializes(seed in any::<u64>(), which in 0usize..3) {
        let ont = sample_ontology(SAMPLES[which]);
        let mut r = rng(seed);
        let g = random_graph(&mut r, &ont, &params());
        if let Some((id, ty, marker)) = random_restriction(&mut r, &ont, &g) {
            match restrict(&ont, &g, &id, Some(&ty), marker.as_deref()) {
                // the original generalizes the restriction
                Ok(h) => prop_assert!(projects(&ont, &g, &h).unwrap()),
                // a lowered type may break a signature; never any other failure
                Err(scs_core::CgError::InvalidGraph(_)) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }

    #[test]
    fn join_contains_both(seed in any::<u64>()) {
        let ont = sample_ontology("memomines");
        let mut r = rng(seed);
        let a = random_graph(&mut r, &ont, &params());
        let b = derived_pattern(&mut r, &ont, &a);
        let Some(n2) = b.nodes().next().map(|n| n.node_id.clone()) else { return Ok(()) };
        // a node of b and its origin in a are always joinable
        if let Ok(j) = join(&ont, &a, &n2, &b, &n2) {
            prop_assert!(validate_graph(&ont, &j).is_empty());
            prop_assert!(projects(&ont, &a, &j).unwrap());
            prop_assert!(projects(&ont, &b, &j).unwrap());
            prop_assert_eq!(j.node_count(), a.node_count() + b.node_count() - 1);
        }
    }

    #[test]
    fn generalization_projects_into_both(seed in any::<u64>(), which in 0usize..3) {
        let ont = sample_ontology(SAMPLES[which]);
        let mut r = rng(seed);
        let a = random_graph(&mut r, &ont, &params());
        let b = random_graph(&mut r, &ont, &params());
        let g = common_generalization(&ont, &a, &b).unwrap();
        prop_assert!(g.is_generic());
        prop_assert!(validate_graph(&ont, &g).is_empty());
        prop_assert!(projects(&ont, &g, &a).unwrap());
        prop_assert!(projects(&ont, &g, &b).unwrap());
    }

    #[test]
    fn generalization_of_isomorphic_inputs_is_the_skeleton(seed in any::<u64>()) {
        let ont = sample_ontology("memomines");
        let mut r = rng(seed);
        let a = random_graph(&mut r, &ont, &params());
        let b = scs_testkit::shuffled_copy(&mut r, &a);
        let g = common_generalization(&ont, &a, &b).unwrap();
        prop_assert!(isomorphic(&g, &a.generic_skeleton()));
    }

    #[test]
    fn simplify_is_idempotent_and_equivalent(seed in any::<u64>()) {
        let ont = sample_ontology("memomines");
        let mut r = rng(seed);
        let mut g = random_graph(&mut r, &ont, &params());
        let dups: Vec<_> = g.edges().filter(|_| r.gen_bool(0.5)).cloned().collect();
        for (k, e) in dups.into_iter().enumerate() {
            g.insert_edge(scs_core::RelationEdge::new(format!("dup{k}"), e.rel_id, e.source, e.target)).unwrap();
        }
        let s = simplify(&g);
        prop_assert_eq!(simplify(&s), s.clone());
        prop_assert!(projects(&ont, &g, &s).unwrap() && projects(&ont, &s, &g).unwrap());
    }
}

#[test]
fn expand_then_contract_round_trips() {
    let mut done = 0;
    let mut seed = 0;
    while done < 100 {
        let which = SAMPLES[(seed % 3) as usize];
        let ont = sample_ontology(which);
        seed += 1;
        let Some((def, g, id)) = definition_pair(&mut rng(seed), &ont, &params()) else { continue };
        let x = expand_type(&ont, &g, &id, std::slice::from_ref(&def)).unwrap();
        assert_eq!(x.node_count(), g.node_count() + def.body.node_count() - 1);
        let back = contract_type(&ont, &x, std::slice::from_ref(&def));
        assert!(isomorphic(&back, &g), "seed {seed}");
        done += 1;
    }
}

#[test]
fn mine_definition_round_trip() {
    let ont = sample_ontology("memomines");
    let defs = sample_definitions("memomines");
    assert!(invalid_definitions(&ont, &defs).is_empty());
    let g = scs_core::parse_graph("[Mine_lieu: fosse_1_courrieres]").unwrap();
    let x = expand_type(&ont, &g, "n1", &defs).unwrap();
    assert_eq!((x.node_count(), x.edge_count()), (6, 5));
    assert!(isomorphic(&contract_type(&ont, &x, &defs), &g));
}
