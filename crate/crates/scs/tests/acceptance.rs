//! The acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{sample_copy, scs};
use scs_core::{
    canonical_form, compile_publication, contract_type, derive_form_schema, enumerate_paths, expand_type, parse_graph,
    project, serialize_graph, validate_graph, validate_scenario, ConceptualGraph, IssueCode, PublicationMode,
    RelationEdge, StoryError, ValueDomain,
};
use scs_testkit::{
    brute_force_morphisms, brute_force_paths, definition_pair, derived_pattern, isomorphic, random_graph,
    random_scenario, rng, sample_corpus, sample_graphs, sample_models, sample_ontology, sample_scenario, samples_dir,
    GraphParams, SAMPLES,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn projection_oracle() -> Outcome {
    let started = Instant::now();
    let p = GraphParams { max_nodes: 8, max_edges: 8, marker_prob: 0.3 };
    let (mut nonempty, mut mismatches) = (0, 0);
    for seed in 0..500u64 {
        let ont = sample_ontology(SAMPLES[(seed % 3) as usize]);
        let mut r = rng(seed);
        let target = random_graph(&mut r, &ont, &p);
        let pattern = if seed.is_multiple_of(2) {
            derived_pattern(&mut r, &ont, &target)
        } else {
            random_graph(&mut r, &ont, &p)
        };
        ensure(pattern.node_count() <= 8 && target.node_count() <= 8, "graph over 8 nodes")?;
        let got = project(&ont, &pattern, &target).map_err(|e| e.to_string())?;
        if got != brute_force_morphisms(&ont, &pattern, &target) {
            mismatches += 1;
        }
        if !got.is_empty() {
            nonempty += 1;
        }
    }
    let took = started.elapsed();
    ensure(mismatches == 0, format!("{mismatches} mismatches"))?;
    ensure(took < Duration::from_secs(60), format!("took {took:?}"))?;
    Ok(format!("500 pairs, 0 mismatches, {nonempty} with morphisms, {:.1}s", took.as_secs_f64()))
}

fn mine_form() -> Outcome {
    let ont = sample_ontology("memomines");
    let corpus = sample_corpus("memomines");
    let model = corpus.model("mine_nord").ok_or("model missing")?;
    ensure(model.label == "La mine dans le Nord de la France", "model label")?;
    let form = derive_form_schema(&ont, model).map_err(|e| e.to_string())?;
    let labels: Vec<&str> = form.fields.iter().map(|f| f.relation_label.as_str()).collect();
    let want = [
        "Identifier le nom",
        "Préciser l'époque",
        "Préciser gisement",
        "Préciser la construction",
        "Préciser la compagnie exploitante",
    ];
    ensure(labels == want, format!("labels {labels:?}"))?;
    let gisement = form.fields.iter().find(|f| f.relation_id == "preciser_gisement").ok_or("no gisement field")?;
    let has_charbon = matches!(&gisement.value_domain, ValueDomain::Markers(ms) if ms.iter().any(|m| m == "charbon"));
    ensure(has_charbon, "charbon missing from the gisement domain")?;
    Ok("5 fields, charbon in the gisement domain".into())
}

fn mine_ontology() -> Outcome {
    let ont = sample_ontology("memomines");
    let label = |id: &str| ont.concept(id).map(|c| c.label.clone()).unwrap_or_default();
    ensure(label("Mine_lieu") == "Objet « Mine (lieu) »", "Mine (lieu) label")?;
    ensure(label("Lieu_activite_industrielle") == "Objet \"Lieu d'activité industrielle (Type de-)\"", "Lieu label")?;
    ensure(ont.subsumes("Lieu_activite_industrielle", "Mine_lieu").map_err(|e| e.to_string())?, "subsumption")?;
    let metiers: Vec<String> = ont
        .individuals_for("Objet_Metier_de_la_mine")
        .map_err(|e| e.to_string())?
        .iter()
        .map(|i| i.marker.clone())
        .collect();
    ensure(["haveur", "hersheur"].iter().all(|m| metiers.iter().any(|x| x == m)), "haveur/hersheur")?;
    Ok(format!("{} concept types, métiers {metiers:?}", ont.concept_types().count()))
}

fn victor_hugo() -> Outcome {
    let ont = sample_ontology("auteur");
    let model = &sample_models("auteur")[0];
    let text = fs::read_to_string(samples_dir().join("auteur/victor_hugo.cg")).map_err(|e| e.to_string())?;
    let vh = parse_graph(&text).map_err(|e| e.to_string())?;
    let got = project(&ont, &model.graph, &vh).map_err(|e| e.to_string())?;
    let oracle = brute_force_morphisms(&ont, &model.graph, &vh);
    ensure(got.len() == 1 && got == oracle, format!("{} morphisms, oracle {}", got.len(), oracle.len()))?;
    Ok("exactly 1 morphism, confirmed by enumeration".into())
}

fn signature_reversal() -> Outcome {
    let mut checked = 0;
    for s in SAMPLES {
        let ont = sample_ontology(s);
        let signed = |rel: &str| {
            ["partie_de", "loc_tmp"].iter().any(|r| ont.relation(r).is_some() && ont.relation_subsumes(r, rel).unwrap())
        };
        for g in sample_graphs(s) {
            for e in g.edges().filter(|e| signed(&e.rel_id)) {
                let edges = g.edges().map(|f| {
                    if f.edge_id == e.edge_id {
                        RelationEdge::new(f.edge_id.clone(), f.rel_id.clone(), f.target.clone(), f.source.clone())
                    } else {
                        f.clone()
                    }
                });
                let m = ConceptualGraph::from_parts(g.nodes().cloned(), edges).map_err(|e| e.to_string())?;
                ensure(
                    validate_graph(&ont, &m).has(IssueCode::SignatureViolation),
                    format!("{s}: {} accepted", e.edge_id),
                )?;
                checked += 1;
            }
        }
    }
    ensure(checked > 0, "no signed edges in the samples")?;
    Ok(format!("{checked} reversed edges, all rejected"))
}

fn notation_round_trip() -> Outcome {
    let p = GraphParams { max_nodes: 30, max_edges: 40, marker_prob: 0.3 };
    let mut largest = 0;
    for seed in 0..1000u64 {
        let ont = sample_ontology(SAMPLES[(seed % 3) as usize]);
        let g = random_graph(&mut rng(seed), &ont, &p);
        largest = largest.max(g.node_count());
        let back = parse_graph(&serialize_graph(&g)).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(isomorphic(&g, &back), format!("seed {seed}: not isomorphic"))?;
        let canon = canonical_form(&g);
        ensure(canonical_form(&back) == canon, format!("seed {seed}: canonical form differs"))?;
    }
    Ok(format!("1000 graphs, up to {largest} nodes"))
}

fn expand_contract() -> Outcome {
    let p = GraphParams { max_nodes: 7, max_edges: 7, marker_prob: 0.3 };
    let (mut done, mut seed) = (0, 0u64);
    while done < 100 {
        seed += 1;
        ensure(seed < 10_000, "could not generate 100 pairs")?;
        let ont = sample_ontology(SAMPLES[(seed % 3) as usize]);
        let Some((def, g, id)) = definition_pair(&mut rng(seed), &ont, &p) else { continue };
        let x = expand_type(&ont, &g, &id, std::slice::from_ref(&def)).map_err(|e| e.to_string())?;
        let back = contract_type(&ont, &x, std::slice::from_ref(&def));
        ensure(isomorphic(&back, &g), format!("seed {seed}"))?;
        done += 1;
    }
    Ok("100 pairs restored".into())
}

fn fixed_publish_bytes() -> Outcome {
    let ws = sample_copy("memomines");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let out = scs(ws.path(), &["publish", "visite_mine"]);
        ensure(out.status.success(), String::from_utf8_lossy(&out.stderr))?;
        runs.push(fs::read(ws.path().join("publications/visite_mine.json")).map_err(|e| e.to_string())?);
    }
    ensure(runs[0] == runs[1], "publications differ")?;
    Ok(format!("{} identical bytes", runs[0].len()))
}

fn path_oracle() -> Outcome {
    let (mut valid, mut invalid, mut conditional, mut seed) = (0, 0, 0, 0u64);
    while valid < 200 {
        seed += 1;
        let s = random_scenario(&mut rng(seed), 8);
        let max_len = (seed % 8 + 1) as usize;
        match enumerate_paths(&s, max_len) {
            Ok(paths) => {
                ensure(paths == brute_force_paths(&s, max_len), format!("seed {seed}: paths differ"))?;
                valid += 1;
                if s.transitions.iter().any(|t| !t.condition.is_empty()) {
                    conditional += 1;
                }
            }
            Err(StoryError::InvalidScenario(r)) => {
                ensure(r == validate_scenario(&s), format!("seed {seed}: report differs"))?;
                invalid += 1;
            }
            Err(e) => return Err(format!("seed {seed}: {e}")),
        }
    }
    ensure(conditional > 0, "no conditional transitions exercised")?;
    Ok(format!("200 scenarios ({conditional} conditional), {invalid} invalid ones rejected"))
}

fn haveur_publication() -> Outcome {
    let ont = sample_ontology("memomines");
    let corpus = sample_corpus("memomines");
    let s = sample_scenario("memomines", "visite_mine");
    ensure(s.steps.len() == 6, "six sujets")?;
    let p = compile_publication(&ont, &s, &corpus, PublicationMode::Fixed).map_err(|e| e.to_string())?;
    let step = s.steps.iter().find(|st| st.label == "Le travail dans la mine").ok_or("no travail step")?;
    let binding = p.manifest.steps.iter().find(|b| b.step_id == step.id).ok_or("travail step unbound")?;
    let segs: Vec<&str> = binding.segments.iter().map(|r| r.segment_id.as_str()).collect();
    ensure(segs.contains(&"s02"), format!("travail matched {segs:?}"))?;
    let haveur = corpus.segment("s02").ok_or("no s02")?;
    ensure(haveur.annotation.nodes().any(|n| n.referent.marker() == Some("haveur")), "s02 lacks haveur")?;
    Ok(format!("travail matches {segs:?}"))
}

fn crash_safety() -> Outcome {
    for stage in ["mid_write", "before_rename"] {
        common::crash::kill_during_write(stage)?;
    }
    Ok("killed mid_write and before_rename, check passes both times".into())
}

fn no_secondary() -> Outcome {
    let root = samples_dir().parent().ok_or("no workspace root")?.to_path_buf();
    let manifests = ["Cargo.toml", "crates/core/Cargo.toml", "crates/scs/Cargo.toml", "crates/testkit/Cargo.toml"];
    for m in manifests {
        let text = fs::read_to_string(root.join(m)).map_err(|e| format!("{m}: {e}"))?;
        ensure(!text.contains("build ="), format!("{m} declares a build script"))?;
    }
    for c in ["core", "scs", "testkit"] {
        ensure(!root.join("crates").join(c).join("build.rs").exists(), format!("{c} has build.rs"))?;
    }
    Ok("no build scripts, no UI artifacts consulted".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("projection equals brute force on 500 pairs", projection_oracle),
        ("mine form has the five relation fields", mine_form),
        ("mine ontology loads with its subsumptions and métiers", mine_ontology),
        ("auteur model projects once onto Victor Hugo", victor_hugo),
        ("reversed signed edges are rejected", signature_reversal),
        ("notation round trip on 1000 graphs", notation_round_trip),
        ("expand then contract on 100 pairs", expand_contract),
        ("fixed publication is byte-identical", fixed_publish_bytes),
        ("paths equal bounded DFS on 200 scenarios", path_oracle),
        ("six-sujet scenario binds the haveur segment", haveur_publication),
        ("killed writes leave a valid workspace", crash_safety),
        ("suite needs no secondary component", no_secondary),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or("panic".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
