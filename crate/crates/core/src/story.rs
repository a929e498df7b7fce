//! Narrative scenarios and their compilation into publications.
//!
//! A scenario is a graph of steps. A transition may require a set of steps to
//! have been visited already (the current step counts as visited). Each step
//! carries a requirement graph; segments whose annotation receives a
//! projection of that requirement are bound to the step.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{Corpus, Segment};
use crate::error::CgError;
use crate::graph::{validate_graph, ConceptualGraph};
use crate::notation::canonical_form;
use crate::ontology::{Alignment, Ontology};
use crate::projection::project_unchecked;
use crate::report::{IssueCode, Report};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub id: String,
    pub label: String,
    pub requirement: ConceptualGraph,
    /// Free-form narrative kind (expository, testimony, ...); no engine
    /// semantics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    pub to: String,
    #[serde(default)]
    pub condition: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub steps: Vec<Step>,
    pub transitions: Vec<Transition>,
    pub start_id: String,
    pub final_ids: BTreeSet<String>,
}

impl Scenario {
    pub fn step(&self, id: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PublicationMode {
    /// Frozen bindings stamped with a content digest.
    Fixed,
    /// Bindings are a snapshot of a query that may be re-run as the corpus
    /// grows; no digest.
    Open,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRef {
    pub segment_id: String,
    pub media_id: String,
    pub start_ms: u64,
    pub end_ms: u64,
    pub match_score: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepBinding {
    pub step_id: String,
    pub label: String,
    /// The requirement in canonical notation.
    pub query: String,
    pub segments: Vec<SegmentRef>,
    pub links: Vec<Alignment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicationManifest {
    pub scenario_id: String,
    pub mode: PublicationMode,
    pub steps: Vec<StepBinding>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub digest: Option<String>,
}

impl PublicationManifest {
    /// Hex SHA-256 of the compact, key-sorted JSON of the manifest with its
    /// digest field removed.
    pub fn compute_digest(&self) -> String {
        let mut body = self.clone();
        body.digest = None;
        let value = serde_json::to_value(&body).expect("manifest serializes");
        let bytes = serde_json::to_vec(&value).expect("value serializes");
        let hash = Sha256::digest(&bytes);
        let mut out = String::with_capacity(64);
        for b in hash.iter() {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "code")]
pub enum PublicationWarning {
    EmptyStep { step_id: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Publication {
    pub manifest: PublicationManifest,
    pub warnings: Vec<PublicationWarning>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoryError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(Report),
    #[error("invalid requirement for step `{step}`: {report}")]
    InvalidRequirement { step: String, report: Report },
    #[error("max_len must be at least 1")]
    InvalidMaxLen,
}

impl StoryError {
    pub fn code(&self) -> &'static str {
        match self {
            StoryError::InvalidScenario(_) => "InvalidScenario",
            StoryError::InvalidRequirement { .. } => "InvalidRequirement",
            StoryError::InvalidMaxLen => "InvalidMaxLen",
        }
    }
}

/// Structural checks only (no ontology): ids, reachability, satisfiability.
pub fn validate_scenario(s: &Scenario) -> Report {
    let mut report = Report::new();
    let mut ids: BTreeSet<&str> = BTreeSet::new();
    for step in &s.steps {
        if !ids.insert(&step.id) {
            report.add(IssueCode::DuplicateStep, &step.id, format!("step `{}` is declared twice", step.id));
        }
    }
    if !ids.contains(s.start_id.as_str()) {
        report.add(IssueCode::UnknownStep, &s.start_id, format!("start step `{}` does not exist", s.start_id));
    }
    if s.final_ids.is_empty() {
        report.add(IssueCode::NoFinalStep, &s.id, "the scenario declares no final step");
    }
    for f in &s.final_ids {
        if !ids.contains(f.as_str()) {
            report.add(IssueCode::UnknownStep, f, format!("final step `{f}` does not exist"));
        }
    }
    for (k, t) in s.transitions.iter().enumerate() {
        let subject = format!("transitions[{k}]");
        for end in [&t.from, &t.to] {
            if !ids.contains(end.as_str()) {
                report.add(IssueCode::UnknownStep, &subject, format!("step `{end}` does not exist"));
            }
        }
        for c in &t.condition {
            if !ids.contains(c.as_str()) {
                report.add(IssueCode::DanglingCondition, &subject, format!("condition names unknown step `{c}`"));
            }
        }
    }
    if !report.is_empty() {
        return report;
    }

    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue = VecDeque::from([s.start_id.as_str()]);
    seen.insert(&s.start_id);
    while let Some(v) = queue.pop_front() {
        for t in s.transitions.iter().filter(|t| t.from == v) {
            if seen.insert(&t.to) {
                queue.push_back(&t.to);
            }
        }
    }
    for step in &s.steps {
        if !seen.contains(step.id.as_str()) {
            report.add(IssueCode::UnreachableStep, &step.id, format!("`{}` cannot be reached from the start", step.id));
        }
    }
    if !has_satisfiable_path(s) {
        report.add(
            IssueCode::NoSatisfiablePath,
            &s.id,
            "no path from the start reaches a final step while respecting transition conditions",
        );
    }
    report
}

/// Structural checks plus requirement checks against the ontology.
pub fn validate_scenario_with(ont: &Ontology, s: &Scenario) -> Report {
    let mut report = validate_scenario(s);
    for step in &s.steps {
        let issues = requirement_issues(ont, step);
        if !issues.is_empty() {
            report.add(IssueCode::InvalidRequirement, &step.id, format!("{issues}"));
        }
    }
    report
}

// Markers are allowed: a step may ask for one specific individual.
fn requirement_issues(ont: &Ontology, step: &Step) -> Report {
    validate_graph(ont, &step.requirement)
}

/// Breadth-first search over (step, visited condition steps) states.
fn has_satisfiable_path(s: &Scenario) -> bool {
    let relevant: BTreeSet<&str> = s.transitions.iter().flat_map(|t| t.condition.iter().map(String::as_str)).collect();
    let keep = |v: &str, set: &mut BTreeSet<String>| {
        if relevant.contains(v) {
            set.insert(v.into());
        }
    };
    let mut start_set = BTreeSet::new();
    keep(&s.start_id, &mut start_set);
    let start = (s.start_id.clone(), start_set);
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some((v, visited)) = queue.pop_front() {
        if s.final_ids.contains(&v) {
            return true;
        }
        for t in s.transitions.iter().filter(|t| t.from == v && t.condition.is_subset(&visited)) {
            let mut next = visited.clone();
            keep(&t.to, &mut next);
            let state = (t.to.clone(), next);
            if seen.insert(state.clone()) {
                queue.push_back(state);
            }
        }
    }
    false
}

/// Every condition-respecting step sequence from the start to a final step
/// with at most `max_len` steps, in lexicographic order. Paths may pass
/// through final steps and revisit steps.
pub fn enumerate_paths(s: &Scenario, max_len: usize) -> Result<Vec<Vec<String>>, StoryError> {
    if max_len == 0 {
        return Err(StoryError::InvalidMaxLen);
    }
    let report = validate_scenario(s);
    if !report.is_empty() {
        return Err(StoryError::InvalidScenario(report));
    }
    let mut out: BTreeSet<Vec<String>> = BTreeSet::new();
    let mut path = vec![s.start_id.clone()];
    let mut visits: BTreeMap<String, usize> = BTreeMap::from([(s.start_id.clone(), 1)]);
    walk(s, max_len, &mut path, &mut visits, &mut out);
    Ok(out.into_iter().collect())
}

fn walk(
    s: &Scenario,
    max_len: usize,
    path: &mut Vec<String>,
    visits: &mut BTreeMap<String, usize>,
    out: &mut BTreeSet<Vec<String>>,
) {
    let current = path.last().expect("path starts non-empty").clone();
    if s.final_ids.contains(&current) {
        out.insert(path.clone());
    }
    if path.len() == max_len {
        return;
    }
    for t in s.transitions.iter().filter(|t| t.from == current) {
        if !t.condition.iter().all(|c| visits.contains_key(c)) {
            continue;
        }
        path.push(t.to.clone());
        *visits.entry(t.to.clone()).or_default() += 1;
        walk(s, max_len, path, visits, out);
        let n = visits.get_mut(&t.to).expect("just inserted");
        *n -= 1;
        if *n == 0 {
            visits.remove(&t.to);
        }
        path.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepMatch<'a> {
    pub segment: &'a Segment,
    pub score: usize,
}

/// Segments whose annotation receives at least one projection of the step
/// requirement, scored by the number of distinct projections. Sorted by
/// score (descending), then `(media_id, start_ms, id)`.
pub fn match_step<'a>(ont: &Ontology, step: &Step, corpus: &'a Corpus) -> Result<Vec<StepMatch<'a>>, StoryError> {
    let report = requirement_issues(ont, step);
    if !report.is_empty() {
        return Err(StoryError::InvalidRequirement { step: step.id.clone(), report });
    }
    let mut out: Vec<StepMatch<'a>> = corpus
        .segments()
        .filter_map(|seg| {
            let score = project_unchecked(ont, &step.requirement, &seg.annotation).len();
            (score > 0).then_some(StepMatch { segment: seg, score })
        })
        .collect();
    out.sort_by(|a, b| {
        let ma = corpus.media_of(a.segment).map(|m| m.id.as_str());
        let mb = corpus.media_of(b.segment).map(|m| m.id.as_str());
        b.score
            .cmp(&a.score)
            .then_with(|| (ma, a.segment.start_ms, &a.segment.id).cmp(&(mb, b.segment.start_ms, &b.segment.id)))
    });
    Ok(out)
}

/// Alignments of every individual named in the annotation, de-duplicated and
/// sorted by `(scheme, external_ref)`.
pub fn intertextual_links(ont: &Ontology, annotation: &ConceptualGraph) -> Result<Vec<Alignment>, CgError> {
    let report = validate_graph(ont, annotation);
    if !report.is_empty() {
        return Err(CgError::InvalidGraph(report));
    }
    let mut links: BTreeSet<Alignment> = BTreeSet::new();
    for m in annotation.markers() {
        if let Some(ind) = ont.individual(m) {
            links.extend(ind.alignments.iter().cloned());
        }
    }
    Ok(links.into_iter().collect())
}

/// Binds matching segments and intertextual links to every step, in step
/// declaration order. Steps without footage produce a warning, not an error.
pub fn compile_publication(
    ont: &Ontology,
    scenario: &Scenario,
    corpus: &Corpus,
    mode: PublicationMode,
) -> Result<Publication, StoryError> {
    let report = validate_scenario_with(ont, scenario);
    if !report.is_empty() {
        return Err(StoryError::InvalidScenario(report));
    }
    let mut steps = Vec::with_capacity(scenario.steps.len());
    let mut warnings = Vec::new();
    for step in &scenario.steps {
        let matches = match_step(ont, step, corpus)?;
        let mut links: BTreeSet<Alignment> = BTreeSet::new();
        let mut segments = Vec::with_capacity(matches.len());
        for m in matches {
            // annotations failing validation contribute no links
            if let Ok(l) = intertextual_links(ont, &m.segment.annotation) {
                links.extend(l);
            }
            segments.push(SegmentRef {
                segment_id: m.segment.id.clone(),
                media_id: corpus.media_of(m.segment).map(|x| x.id.clone()).unwrap_or_default(),
                start_ms: m.segment.start_ms,
                end_ms: m.segment.end_ms,
                match_score: m.score,
            });
        }
        if segments.is_empty() {
            warnings.push(PublicationWarning::EmptyStep { step_id: step.id.clone() });
        }
        steps.push(StepBinding {
            step_id: step.id.clone(),
            label: step.label.clone(),
            query: canonical_form(&step.requirement),
            segments,
            links: links.into_iter().collect(),
        });
    }
    let mut manifest = PublicationManifest { scenario_id: scenario.id.clone(), mode, steps, digest: None };
    if mode == PublicationMode::Fixed {
        manifest.digest = Some(manifest.compute_digest());
    }
    Ok(Publication { manifest, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(id: &str) -> Step {
        Step { id: id.into(), label: id.into(), requirement: ConceptualGraph::new(), kind: None }
    }

    fn tr(from: &str, to: &str, cond: &[&str]) -> Transition {
        Transition { from: from.into(), to: to.into(), condition: cond.iter().map(|c| String::from(*c)).collect() }
    }

    fn scenario(steps: &[&str], transitions: Vec<Transition>, finals: &[&str]) -> Scenario {
        Scenario {
            id: "s".into(),
            steps: steps.iter().map(|s| step(s)).collect(),
            transitions,
            start_id: steps[0].into(),
            final_ids: finals.iter().map(|f| String::from(*f)).collect(),
        }
    }

    fn strs(paths: &[&[&str]]) -> Vec<Vec<String>> {
        paths.iter().map(|p| p.iter().map(|s| String::from(*s)).collect()).collect()
    }

    #[test]
    fn linear_chain() {
        let s = scenario(&["A", "B", "C"], vec![tr("A", "B", &[]), tr("B", "C", &[])], &["C"]);
        assert!(validate_scenario(&s).is_empty());
        assert_eq!(enumerate_paths(&s, 10).unwrap(), strs(&[&["A", "B", "C"]]));
        assert!(enumerate_paths(&s, 2).unwrap().is_empty());
        assert_eq!(enumerate_paths(&s, 0), Err(StoryError::InvalidMaxLen));
    }

    #[test]
    fn diamond_and_conditions() {
        let s = scenario(
            &["A", "B", "C", "D"],
            vec![tr("A", "B", &[]), tr("A", "C", &[]), tr("B", "D", &[]), tr("C", "D", &[])],
            &["D"],
        );
        assert_eq!(enumerate_paths(&s, 10).unwrap(), strs(&[&["A", "B", "D"], &["A", "C", "D"]]));
        let s = scenario(
            &["A", "B", "C", "D"],
            vec![tr("A", "B", &[]), tr("A", "C", &["B"]), tr("B", "D", &[]), tr("C", "D", &[])],
            &["D"],
        );
        assert_eq!(enumerate_paths(&s, 10).unwrap(), strs(&[&["A", "B", "D"]]));
    }

    #[test]
    fn structural_errors() {
        let s = scenario(&["A", "B"], vec![tr("A", "B", &["Z"])], &["B"]);
        assert!(validate_scenario(&s).has(IssueCode::DanglingCondition));
        let s = scenario(&["A", "B", "C"], vec![tr("A", "B", &["C"]), tr("C", "B", &[])], &["B"]);
        let r = validate_scenario(&s);
        assert!(r.has(IssueCode::UnreachableStep));
        assert!(r.has(IssueCode::NoSatisfiablePath));
        let s = scenario(&["A", "B"], vec![tr("A", "B", &["B"]), tr("B", "A", &["A"])], &["B"]);
        assert_eq!(validate_scenario(&s).codes(), vec![IssueCode::NoSatisfiablePath]);
        let s = scenario(&["A", "A"], vec![], &[]);
        let r = validate_scenario(&s);
        assert!(r.has(IssueCode::DuplicateStep) && r.has(IssueCode::NoFinalStep));
    }

    #[test]
    fn cycles_are_bounded() {
        let s = scenario(&["A", "B"], vec![tr("A", "B", &[]), tr("B", "A", &[])], &["B"]);
        assert_eq!(enumerate_paths(&s, 4).unwrap(), strs(&[&["A", "B"], &["A", "B", "A", "B"]]));
    }

    #[test]
    fn empty_corpus_publication_warns() {
        let ont = Ontology::load(crate::ontology::OntologyDocument {
            concept_types: vec![crate::ontology::ConceptType {
                id: "top".into(),
                label: "top".into(),
                parent_ids: BTreeSet::new(),
            }],
            relation_types: vec![],
            individuals: vec![],
            root_id: "top".into(),
        })
        .unwrap();
        let s = scenario(&["A", "B"], vec![tr("A", "B", &[])], &["B"]);
        let p = compile_publication(&ont, &s, &Corpus::default(), PublicationMode::Fixed).unwrap();
        assert_eq!(p.warnings.len(), 2);
        let digest = p.manifest.digest.clone().unwrap();
        assert_eq!(digest.len(), 64);
        assert_eq!(p.manifest.compute_digest(), digest);
        let open = compile_publication(&ont, &s, &Corpus::default(), PublicationMode::Open).unwrap();
        assert_eq!(open.manifest.digest, None);
    }
}
