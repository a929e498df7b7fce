use proptest::prelude::*;
use scs_core::{project, projects, validate_graph, ConceptualGraph, IssueCode, Ontology};
use scs_testkit::{brute_force_morphisms, derived_pattern, random_graph, rng, sample_ontology, GraphParams, SAMPLES};

fn small() -> GraphParams {
    GraphParams { max_nodes: 6, max_edges: 6, marker_prob: 0.4 }
}

fn pair(seed: u64, ont: &Ontology) -> (ConceptualGraph, ConceptualGraph) {
    let mut r = rng(seed);
    let target = random_graph(&mut r, ont, &small());
    let pattern = if seed.is_multiple_of(2) {
        derived_pattern(&mut r, ont, &target)
    } else {
        random_graph(&mut r, ont, &small())
    };
    (pattern, target)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn generated_graphs_are_valid(seed in any::<u64>(), which in 0usize..3) {
        let ont = sample_ontology(SAMPLES[which]);
        let (p, t) = pair(seed, &ont);
        prop_assert!(validate_graph(&ont, &t).is_empty());
        prop_assert!(validate_graph(&ont, &p).is_empty());
    }

    #[test]
    fn matches_brute_force(seed in any::<u64>(), which in 0usize..3) {
        let ont = sample_ontology(SAMPLES[which]);
        let (p, t) = pair(seed, &ont);
        let got = project(&ont, &p, &t).unwrap();
        prop_assert_eq!(&got, &brute_force_morphisms(&ont, &p, &t));
        prop_assert_eq!(projects(&ont, &p, &t).unwrap(), !got.is_empty());
    }

    #[test]
    fn every_graph_projects_into_itself(seed in any::<u64>(), which in 0usize..3) {
        let ont = sample_ontology(SAMPLES[which]);
        let g = random_graph(&mut rng(seed), &ont, &small());
        let ms = project(&ont, &g, &g).unwrap();
        prop_assert!(ms.iter().any(|m| m.node_map.iter().all(|(a, b)| a == b) && m.edge_map.iter().all(|(a, b)| a == b)));
    }

    #[test]
    fn derived_patterns_project(seed in any::<u64>(), which in 0usize..3) {
        let ont = sample_ontology(SAMPLES[which]);
        let mut r = rng(seed);
        let t = random_graph(&mut r, &ont, &small());
        let p = derived_pattern(&mut r, &ont, &t);
        prop_assert!(projects(&ont, &p, &t).unwrap());
    }

    #[test]
    fn projection_composes(seed in any::<u64>()) {
        let ont = sample_ontology("memomines");
        let mut r = rng(seed);
        let c = random_graph(&mut r, &ont, &small());
        let b = derived_pattern(&mut r, &ont, &c);
        let a = derived_pattern(&mut r, &ont, &b);
        prop_assert!(projects(&ont, &a, &b).unwrap());
        prop_assert!(projects(&ont, &a, &c).unwrap());
    }
}

#[test]
fn morphisms_respect_definition() {
    let ont = sample_ontology("memomines");
    for seed in 0..60 {
        let (p, t) = pair(seed, &ont);
        for m in project(&ont, &p, &t).unwrap() {
            for n in p.nodes() {
                let img = t.node(&m.node_map[&n.node_id]).unwrap();
                assert!(ont.subsumes(&n.type_id, &img.type_id).unwrap());
                if let Some(mk) = n.referent.marker() {
                    assert_eq!(img.referent.marker(), Some(mk));
                }
            }
            for e in p.edges() {
                let f = t.edge(&m.edge_map[&e.edge_id]).unwrap();
                assert!(ont.relation_subsumes(&e.rel_id, &f.rel_id).unwrap());
                assert_eq!(f.source, m.node_map[&e.source]);
                assert_eq!(f.target, m.node_map[&e.target]);
            }
        }
    }
}

#[test]
fn invalid_pattern_is_rejected() {
    let ont = sample_ontology("langues");
    let bad = scs_core::parse_graph("[Langue: *] -(partie_de)-> [Langue: *]").unwrap();
    let good = scs_core::parse_graph("[Langue: guarani]").unwrap();
    match project(&ont, &bad, &good) {
        Err(scs_core::CgError::InvalidGraph(r)) => assert!(r.has(IssueCode::SignatureViolation)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn victor_hugo_has_exactly_one_morphism() {
    let ont = sample_ontology("auteur");
    let model = &scs_testkit::sample_models("auteur")[0];
    let text = std::fs::read_to_string(scs_testkit::samples_dir().join("auteur/victor_hugo.cg")).unwrap();
    let vh = scs_core::parse_graph(&text).unwrap();
    assert!(validate_graph(&ont, &vh).is_empty());
    let got = project(&ont, &model.graph, &vh).unwrap();
    assert_eq!(got.len(), 1);
    assert_eq!(got, brute_force_morphisms(&ont, &model.graph, &vh));
}
