//! Shared test support: sample loading, seeded random generators that only
//! produce well-typed values, and brute-force oracles written directly from
//! the definitions (no pruning beyond what the definition itself states).

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;
use scs_core::story::Scenario;
use scs_core::{
    parse_graph, ConceptNode, ConceptualGraph, Corpus, MediaResource, ModelTemplate, Morphism, Ontology,
    OntologyDocument, Referent, RelationEdge, Segment, SegmentFilter, Step, Stratum, StratumKind, Transition,
    TypeDefinition,
};
use serde_json::Value;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

// ------------------------------------------------------------------ samples

pub fn samples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../samples")
}

pub const SAMPLES: [&str; 3] = ["memomines", "langues", "auteur"];

fn read_json(rel: &str) -> Value {
    let path = samples_dir().join(rel);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn sample_ontology(name: &str) -> Ontology {
    let doc: OntologyDocument = serde_json::from_value(read_json(&format!("{name}/ontology.json"))).unwrap();
    Ontology::load(doc).unwrap()
}

fn graph_of(v: &Value, structured: &str, text: &str) -> ConceptualGraph {
    match (v.get(structured), v.get(text)) {
        (Some(g), _) => serde_json::from_value(g.clone()).unwrap(),
        (None, Some(Value::String(t))) => parse_graph(t).unwrap(),
        _ => panic!("no graph in {v}"),
    }
}

pub fn sample_models(name: &str) -> Vec<ModelTemplate> {
    let dir = samples_dir().join(name).join("models");
    let mut files: Vec<PathBuf> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let v: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
            ModelTemplate {
                id: v["id"].as_str().unwrap().into(),
                label: v["label"].as_str().unwrap().into(),
                head_node: v["head_node"].as_str().unwrap().into(),
                graph: graph_of(&v, "graph", "graph_text"),
            }
        })
        .collect()
}

pub fn sample_corpus(name: &str) -> Corpus {
    let v = read_json(&format!("{name}/corpus.json"));
    let media: Vec<MediaResource> = serde_json::from_value(v["media"].clone()).unwrap();
    let strata: Vec<Stratum> = serde_json::from_value(v["strata"].clone()).unwrap();
    let segments: Vec<Segment> = v["segments"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| Segment {
            id: s["id"].as_str().unwrap().into(),
            stratum_id: s["stratum_id"].as_str().unwrap().into(),
            start_ms: s["start_ms"].as_u64().unwrap(),
            end_ms: s["end_ms"].as_u64().unwrap(),
            model_id: s["model_id"].as_str().unwrap().into(),
            annotation: graph_of(s, "annotation", "annotation_text"),
            version: s["version"].as_u64().unwrap_or(0),
        })
        .collect();
    Corpus::from_parts(media, strata, segments, sample_models(name)).unwrap()
}

pub fn sample_scenario(name: &str, id: &str) -> Scenario {
    let v = read_json(&format!("{name}/scenarios/{id}.json"));
    let steps = v["steps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| Step {
            id: s["id"].as_str().unwrap().into(),
            label: s["label"].as_str().unwrap().into(),
            requirement: graph_of(s, "requirement", "requirement_text"),
            kind: s.get("kind").and_then(Value::as_str).map(String::from),
        })
        .collect();
    Scenario {
        id: v["id"].as_str().unwrap().into(),
        steps,
        transitions: serde_json::from_value(v["transitions"].clone()).unwrap(),
        start_id: v["start_id"].as_str().unwrap().into(),
        final_ids: serde_json::from_value(v["final_ids"].clone()).unwrap(),
    }
}

pub fn sample_definitions(name: &str) -> Vec<TypeDefinition> {
    serde_json::from_value(read_json(&format!("{name}/definitions.json"))).unwrap()
}

/// Every graph shipped with a sample: model graphs and segment annotations.
pub fn sample_graphs(name: &str) -> Vec<ConceptualGraph> {
    let corpus = sample_corpus(name);
    let mut out: Vec<ConceptualGraph> = corpus.models().map(|m| m.graph.clone()).collect();
    out.extend(corpus.segments().map(|s| s.annotation.clone()));
    out
}

// ------------------------------------------------------------------ ontology helpers

/// Reflexive descendants of a concept type, recomputed from parent links.
pub fn descendants(ont: &Ontology, ct: &str) -> Vec<String> {
    let mut out: Vec<String> = ont
        .concept_types()
        .filter(|c| c.id == ct || ont.ancestors(&c.id).unwrap().contains(ct))
        .map(|c| c.id.clone())
        .collect();
    out.sort();
    out
}

/// Reflexive ancestors of a concept type.
pub fn ancestors_incl(ont: &Ontology, ct: &str) -> Vec<String> {
    let mut out: BTreeSet<String> = ont.ancestors(ct).unwrap().clone();
    out.insert(ct.into());
    out.into_iter().collect()
}

fn leq(ont: &Ontology, specific: &str, general: &str) -> bool {
    specific == general || ont.ancestors(specific).unwrap().contains(general)
}

fn rel_leq(ont: &Ontology, specific: &str, general: &str) -> bool {
    specific == general || ont.relation_ancestors(specific).unwrap().contains(general)
}

fn markers_of(ont: &Ontology, ct: &str) -> Vec<String> {
    ont.individuals().filter(|i| i.concept_ids.iter().any(|t| leq(ont, t, ct))).map(|i| i.marker.clone()).collect()
}

// ------------------------------------------------------------------ graph generators

pub struct GraphParams {
    pub max_nodes: usize,
    pub max_edges: usize,
    pub marker_prob: f64,
}

/// A random well-typed graph: edges are drawn from relation signatures, so
/// every edge is applicable, and markers conform to their node types.
pub fn random_graph(rng: &mut StdRng, ont: &Ontology, p: &GraphParams) -> ConceptualGraph {
    let rels: Vec<_> = ont.relation_types().cloned().collect();
    let concepts: Vec<String> = ont.concept_types().map(|c| c.id.clone()).collect();
    let mut g = ConceptualGraph::new();
    let mut next = 0usize;
    let mut new_node = |g: &mut ConceptualGraph, rng: &mut StdRng, ty: String| -> String {
        let id = format!("n{next}");
        next += 1;
        let ms = markers_of(ont, &ty);
        let referent = if !ms.is_empty() && rng.gen_bool(p.marker_prob) {
            Referent::Marker(ms.choose(rng).unwrap().clone())
        } else {
            Referent::Generic
        };
        g.insert_node(ConceptNode::new(id.clone(), ty, referent)).unwrap();
        id
    };
    let n_edges = rng.gen_range(0..=p.max_edges);
    let mut e = 0;
    for _ in 0..n_edges * 3 {
        if e >= n_edges {
            break;
        }
        let r = rels.choose(rng).unwrap();
        let mut end = |g: &mut ConceptualGraph, rng: &mut StdRng, sig: &str| -> Option<String> {
            let existing: Vec<String> =
                g.nodes().filter(|n| leq(ont, &n.type_id, sig)).map(|n| n.node_id.clone()).collect();
            if !existing.is_empty() && (g.node_count() >= p.max_nodes || rng.gen_bool(0.5)) {
                return Some(existing.choose(rng).unwrap().clone());
            }
            if g.node_count() >= p.max_nodes {
                return None;
            }
            let ty = descendants(ont, sig).choose(rng).unwrap().clone();
            Some(new_node(g, rng, ty))
        };
        let Some(s) = end(&mut g, rng, &r.signature.source) else { continue };
        let Some(t) = end(&mut g, rng, &r.signature.target) else { continue };
        g.insert_edge(RelationEdge::new(format!("e{e}"), r.id.clone(), s, t)).unwrap();
        e += 1;
    }
    if g.node_count() == 0 || (g.node_count() < p.max_nodes && rng.gen_bool(0.3)) {
        let ty = concepts.choose(rng).unwrap().clone();
        new_node(&mut g, rng, ty);
    }
    g
}

/// A pattern likely to project into `target`: a random induced subgraph
/// whose types and relations are lifted to random ancestors (keeping every
/// edge applicable) and whose markers are sometimes dropped.
pub fn derived_pattern(rng: &mut StdRng, ont: &Ontology, target: &ConceptualGraph) -> ConceptualGraph {
    let nodes: Vec<&ConceptNode> = target.nodes().filter(|_| rng.gen_bool(0.7)).collect();
    let keep: BTreeSet<&str> = nodes.iter().map(|n| n.node_id.as_str()).collect();
    let mut g = ConceptualGraph::new();
    for n in &nodes {
        let referent = if rng.gen_bool(0.5) { Referent::Generic } else { n.referent.clone() };
        g.insert_node(ConceptNode::new(n.node_id.clone(), n.type_id.clone(), referent)).unwrap();
    }
    for e in target.edges() {
        if keep.contains(e.source.as_str()) && keep.contains(e.target.as_str()) && rng.gen_bool(0.8) {
            let up: Vec<String> = {
                let mut v: Vec<String> = ont.relation_ancestors(&e.rel_id).unwrap().iter().cloned().collect();
                v.push(e.rel_id.clone());
                v
            };
            let r = up.choose(rng).unwrap().clone();
            g.insert_edge(RelationEdge::new(e.edge_id.clone(), r, e.source.clone(), e.target.clone())).unwrap();
        }
    }
    // lift node types while every incident edge stays applicable
    let ids: Vec<String> = g.nodes().map(|n| n.node_id.clone()).collect();
    for id in ids {
        let node = g.node(&id).unwrap().clone();
        let mut options: Vec<String> = ancestors_incl(ont, &node.type_id)
            .into_iter()
            .filter(|t| t != ont.root_id())
            .filter(|t| node.referent.marker().is_none_or(|m| ont.conforms(m, t).unwrap()))
            .filter(|t| {
                g.incident_edges(&id).all(|e| {
                    let r = ont.relation(&e.rel_id).unwrap();
                    (e.source != id || leq(ont, t, &r.signature.source))
                        && (e.target != id || leq(ont, t, &r.signature.target))
                })
            })
            .collect();
        if options.is_empty() {
            options.push(node.type_id.clone());
        }
        let t = options.choose(rng).unwrap().clone();
        let mut nodes: Vec<ConceptNode> = g.nodes().cloned().collect();
        for n in &mut nodes {
            if n.node_id == id {
                n.type_id = t.clone();
            }
        }
        g = ConceptualGraph::from_parts(nodes, g.edges().cloned().collect::<Vec<_>>()).unwrap();
    }
    g
}

/// The same graph with node and edge ids replaced by fresh random names and
/// declared in shuffled order.
pub fn shuffled_copy(rng: &mut StdRng, g: &ConceptualGraph) -> ConceptualGraph {
    let mut nodes: Vec<&ConceptNode> = g.nodes().collect();
    nodes.shuffle(rng);
    let rename: BTreeMap<&str, String> =
        nodes.iter().enumerate().map(|(i, n)| (n.node_id.as_str(), format!("x{}_{}", i, rng.gen::<u16>()))).collect();
    let mut edges: Vec<&RelationEdge> = g.edges().collect();
    edges.shuffle(rng);
    ConceptualGraph::from_parts(
        nodes
            .iter()
            .map(|n| ConceptNode::new(rename[n.node_id.as_str()].clone(), n.type_id.clone(), n.referent.clone())),
        edges.iter().enumerate().map(|(i, e)| {
            RelationEdge::new(
                format!("r{i}"),
                e.rel_id.clone(),
                rename[e.source.as_str()].clone(),
                rename[e.target.as_str()].clone(),
            )
        }),
    )
    .unwrap()
}

// ------------------------------------------------------------------ oracles

fn node_ok(ont: &Ontology, p: &ConceptNode, t: &ConceptNode) -> bool {
    leq(ont, &t.type_id, &p.type_id)
        && match &p.referent {
            Referent::Marker(m) => t.referent.marker() == Some(m.as_str()),
            _ => true,
        }
}

/// Every morphism by exhaustive enumeration: all maps sending each pattern
/// node to a label-compatible target node, then every choice of target edge
/// for every pattern edge.
pub fn brute_force_morphisms(ont: &Ontology, pattern: &ConceptualGraph, target: &ConceptualGraph) -> Vec<Morphism> {
    let pn: Vec<&ConceptNode> = pattern.nodes().collect();
    let pe: Vec<&RelationEdge> = pattern.edges().collect();
    let cands: Vec<Vec<&ConceptNode>> =
        pn.iter().map(|p| target.nodes().filter(|t| node_ok(ont, p, t)).collect()).collect();
    let mut out = BTreeSet::new();
    if cands.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut idx = vec![0usize; pn.len()];
    loop {
        let node_map: BTreeMap<String, String> = pn
            .iter()
            .zip(&idx)
            .enumerate()
            .map(|(k, (p, &i))| (p.node_id.clone(), cands[k][i].node_id.clone()))
            .collect();
        let choices: Vec<Vec<&RelationEdge>> = pe
            .iter()
            .map(|e| {
                target
                    .edges()
                    .filter(|f| {
                        f.source == node_map[&e.source]
                            && f.target == node_map[&e.target]
                            && rel_leq(ont, &f.rel_id, &e.rel_id)
                    })
                    .collect()
            })
            .collect();
        if choices.iter().all(|c| !c.is_empty()) {
            let mut ci = vec![0usize; pe.len()];
            loop {
                let edge_map = pe
                    .iter()
                    .zip(&ci)
                    .enumerate()
                    .map(|(k, (e, &j))| (e.edge_id.clone(), choices[k][j].edge_id.clone()))
                    .collect();
                out.insert(Morphism { node_map: node_map.clone(), edge_map });
                if !odometer(&mut ci, |k| choices[k].len()) {
                    break;
                }
            }
        }
        if !odometer(&mut idx, |k| cands[k].len()) {
            break;
        }
    }
    out.into_iter().collect()
}

/// Advances a mixed-radix counter; false once it wraps around.
fn odometer(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < radix(k) {
            return true;
        }
        digits[k] = 0;
    }
    false
}

/// Label-preserving graph isomorphism by backtracking over node bijections.
/// Labels are `(type, referent)` on nodes and relation ids on edges; edge
/// multiplicities must agree.
pub fn isomorphic(a: &ConceptualGraph, b: &ConceptualGraph) -> bool {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let label = |n: &ConceptNode| (n.type_id.clone(), n.referent.marker().map(String::from));
    let edge_count = |g: &ConceptualGraph, s: &str, t: &str| -> BTreeMap<String, usize> {
        let mut m = BTreeMap::new();
        for e in g.edges().filter(|e| e.source == s && e.target == t) {
            *m.entry(e.rel_id.clone()).or_default() += 1;
        }
        m
    };
    let an: Vec<&ConceptNode> = a.nodes().collect();
    let bn: Vec<&ConceptNode> = b.nodes().collect();
    let mut la: Vec<_> = an.iter().map(|n| (label(n), a.degree(&n.node_id))).collect();
    let mut lb: Vec<_> = bn.iter().map(|n| (label(n), b.degree(&n.node_id))).collect();
    la.sort();
    lb.sort();
    if la != lb {
        return false;
    }
    fn go(
        k: usize,
        an: &[&ConceptNode],
        bn: &[&ConceptNode],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ok: &dyn Fn(&[usize], usize, usize) -> bool,
    ) -> bool {
        if k == an.len() {
            return true;
        }
        for j in 0..bn.len() {
            if used[j] || !ok(map, k, j) {
                continue;
            }
            used[j] = true;
            map.push(j);
            if go(k + 1, an, bn, map, used, ok) {
                return true;
            }
            map.pop();
            used[j] = false;
        }
        false
    }
    let ok = |map: &[usize], k: usize, j: usize| -> bool {
        if label(an[k]) != label(bn[j]) || a.degree(&an[k].node_id) != b.degree(&bn[j].node_id) {
            return false;
        }
        // edges between k and every already-mapped node (and k itself)
        (0..=map.len()).all(|i| {
            let (ai, bi) = if i == map.len() { (k, j) } else { (i, map[i]) };
            edge_count(a, &an[k].node_id, &an[ai].node_id) == edge_count(b, &bn[j].node_id, &bn[bi].node_id)
                && edge_count(a, &an[ai].node_id, &an[k].node_id) == edge_count(b, &bn[bi].node_id, &bn[j].node_id)
        })
    };
    go(0, &an, &bn, &mut Vec::new(), &mut vec![false; bn.len()], &ok)
}

// ------------------------------------------------------------------ scenarios

/// A random scenario over up to `max_steps` steps with random transitions,
/// some guarded by conditions. It may be invalid.
pub fn random_scenario(rng: &mut StdRng, max_steps: usize) -> Scenario {
    let n = rng.gen_range(1..=max_steps);
    let ids: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
    let steps = ids
        .iter()
        .map(|id| Step { id: id.clone(), label: id.clone(), requirement: ConceptualGraph::new(), kind: None })
        .collect();
    // a random spanning tree from the start keeps most steps reachable
    let mut transitions = Vec::new();
    for i in 1..n {
        if rng.gen_bool(0.9) {
            let from = ids[rng.gen_range(0..i)].clone();
            transitions.push(Transition { from, to: ids[i].clone(), condition: BTreeSet::new() });
        }
    }
    for _ in 0..rng.gen_range(0..=n * 2) {
        let mut condition = BTreeSet::new();
        if rng.gen_bool(0.3) {
            condition.insert(ids.choose(rng).unwrap().clone());
        }
        transitions.push(Transition {
            from: ids.choose(rng).unwrap().clone(),
            to: ids.choose(rng).unwrap().clone(),
            condition,
        });
    }
    let mut final_ids: BTreeSet<String> = ids.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
    if rng.gen_bool(0.9) {
        final_ids.insert(ids[n - 1].clone());
    }
    Scenario { id: "random".into(), steps, transitions, start_id: ids[0].clone(), final_ids }
}

/// Every walk from the start of at most `max_len` steps, kept when each move
/// is allowed by some transition whose condition was visited before the
/// move, and when it ends on a final step.
pub fn brute_force_paths(s: &Scenario, max_len: usize) -> Vec<Vec<String>> {
    let succ =
        |x: &str| -> BTreeSet<String> { s.transitions.iter().filter(|t| t.from == x).map(|t| t.to.clone()).collect() };
    let mut walks: Vec<Vec<String>> = vec![vec![s.start_id.clone()]];
    let mut frontier = walks.clone();
    for _ in 1..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for t in succ(w.last().unwrap()) {
                let mut v = w.clone();
                v.push(t);
                next.push(v);
            }
        }
        walks.extend(next.iter().cloned());
        frontier = next;
    }
    let allowed = |w: &[String]| {
        (0..w.len() - 1).all(|i| {
            let seen: BTreeSet<&String> = w[..=i].iter().collect();
            s.transitions
                .iter()
                .any(|t| t.from == w[i] && t.to == w[i + 1] && t.condition.iter().all(|c| seen.contains(c)))
        })
    };
    let out: BTreeSet<Vec<String>> =
        walks.into_iter().filter(|w| s.final_ids.contains(w.last().unwrap()) && allowed(w)).collect();
    out.into_iter().collect()
}

// ------------------------------------------------------------------ corpus

/// Segments matching a filter by a plain scan, in `(media, start, id)`
/// order.
pub fn scan_query<'a>(ont: &Ontology, corpus: &'a Corpus, f: &SegmentFilter) -> Vec<&'a Segment> {
    let mut out: Vec<&Segment> = corpus
        .segments()
        .filter(|s| f.concept.as_ref().is_none_or(|c| s.annotation.nodes().any(|n| leq(ont, &n.type_id, c))))
        .filter(|s| f.marker.as_ref().is_none_or(|m| s.annotation.nodes().any(|n| n.referent.marker() == Some(m))))
        .filter(|s| f.relation.as_ref().is_none_or(|r| s.annotation.edges().any(|e| rel_leq(ont, &e.rel_id, r))))
        .filter(|s| f.stratum_kind.is_none_or(|k| corpus.stratum(&s.stratum_id).map(|st| st.kind) == Some(k)))
        .filter(|s| f.model.as_ref().is_none_or(|m| &s.model_id == m))
        .filter(|s| {
            f.time_window.is_none_or(|(from, to)| {
                if from == to {
                    (s.start_ms..s.end_ms).contains(&from)
                } else {
                    (from..to).any(|t| (s.start_ms..s.end_ms).contains(&t))
                }
            })
        })
        .collect();
    out.sort_by_key(|s| (corpus.media_of(s).map(|m| m.id.clone()), s.start_ms, s.id.clone()));
    out
}

/// A random filter using concepts, markers and relations of `ont` and the
/// strata kinds, with small time windows.
pub fn random_filter(rng: &mut StdRng, ont: &Ontology, corpus: &Corpus) -> SegmentFilter {
    let concepts: Vec<String> = ont.concept_types().map(|c| c.id.clone()).collect();
    let rels: Vec<String> = ont.relation_types().map(|r| r.id.clone()).collect();
    let markers: Vec<String> = ont.individuals().map(|i| i.marker.clone()).collect();
    let models: Vec<String> = corpus.models().map(|m| m.id.clone()).collect();
    let kinds = [StratumKind::Thematic, StratumKind::Rhetoric, StratumKind::Visual, StratumKind::Acoustic];
    let pick =
        |rng: &mut StdRng, v: &[String]| (!v.is_empty() && rng.gen_bool(0.3)).then(|| v.choose(rng).unwrap().clone());
    let time_window = rng.gen_bool(0.4).then(|| {
        let a = rng.gen_range(0..400u64) * 1000;
        let len = if rng.gen_bool(0.2) { 0 } else { rng.gen_range(1..60u64) * 1000 };
        (a, a + len)
    });
    SegmentFilter {
        concept: pick(rng, &concepts),
        marker: pick(rng, &markers),
        relation: pick(rng, &rels),
        stratum_kind: rng.gen_bool(0.3).then(|| *kinds.choose(rng).unwrap()),
        time_window,
        model: pick(rng, &models),
    }
}

/// Segments covering `t` on `media_id`, by a plain scan grouped by kind.
pub fn scan_instant<'a>(corpus: &'a Corpus, media_id: &str, t: u64) -> BTreeMap<StratumKind, Vec<&'a Segment>> {
    let mut out: BTreeMap<StratumKind, Vec<&Segment>> = BTreeMap::new();
    for st in corpus.strata().filter(|s| s.media_id == media_id) {
        let entry = out.entry(st.kind).or_default();
        for s in corpus.segments().filter(|s| s.stratum_id == st.id && s.start_ms <= t && t < s.end_ms) {
            entry.push(s);
        }
    }
    for v in out.values_mut() {
        v.sort_by_key(|s| (s.start_ms, s.id.clone()));
    }
    out
}

// ------------------------------------------------------------------ definitions

/// A random definition over `ont`: a concept type with a non-root parent
/// (the genus) and a star-shaped generic body of one to three edges around
/// the parameter, with relations applicable to the genus.
pub fn random_definition(rng: &mut StdRng, ont: &Ontology) -> Option<TypeDefinition> {
    let root = ont.root_id();
    let defined: Vec<(String, String)> = ont
        .concept_types()
        .flat_map(|c| c.parent_ids.iter().filter(|p| p.as_str() != root).map(move |p| (c.id.clone(), p.clone())))
        .collect();
    let (defined_type, genus) = defined.choose(rng)?.clone();
    let out_rels: Vec<_> = ont.relation_types().filter(|r| leq(ont, &genus, &r.signature.source)).cloned().collect();
    let in_rels: Vec<_> = ont.relation_types().filter(|r| leq(ont, &genus, &r.signature.target)).cloned().collect();
    if out_rels.is_empty() && in_rels.is_empty() {
        return None;
    }
    let mut body = ConceptualGraph::new();
    body.insert_node(ConceptNode::generic("x", genus.clone())).unwrap();
    for k in 0..rng.gen_range(1..=3) {
        let outgoing = in_rels.is_empty() || (!out_rels.is_empty() && rng.gen_bool(0.5));
        let r = if outgoing { out_rels.choose(rng)? } else { in_rels.choose(rng)? };
        let sig = if outgoing { &r.signature.target } else { &r.signature.source };
        let ty = descendants(ont, sig).choose(rng)?.clone();
        let id = format!("b{k}");
        body.insert_node(ConceptNode::generic(id.clone(), ty)).unwrap();
        let (s, t) = if outgoing { ("x".to_string(), id) } else { (id, "x".to_string()) };
        body.insert_edge(RelationEdge::new(format!("d{k}"), r.id.clone(), s, t)).unwrap();
    }
    Some(TypeDefinition { defined_type, body, parameter: "x".into() })
}

/// A generated definition/graph pair for expansion round trips: the graph
/// holds a node `defined` of the defined type and no contraction site of
/// its own.
pub fn definition_pair(
    rng: &mut StdRng,
    ont: &Ontology,
    p: &GraphParams,
) -> Option<(TypeDefinition, ConceptualGraph, String)> {
    let def = random_definition(rng, ont)?;
    def.validate(ont).ok()?;
    let mut g = random_graph(rng, ont, p);
    let id = "defined".to_string();
    let marker = ont.individuals_for(&def.defined_type).unwrap().choose(rng).map(|i| i.marker.clone());
    let referent = match marker {
        Some(m) if rng.gen_bool(0.5) => Referent::Marker(m),
        _ => Referent::Generic,
    };
    g.insert_node(ConceptNode::new(id.clone(), def.defined_type.clone(), referent)).unwrap();
    if scs_core::contract_type(ont, &g, std::slice::from_ref(&def)) != g {
        return None;
    }
    Some((def, g, id))
}
