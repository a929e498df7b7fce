//! The file-backed workspace: a directory holding `ontology.json`,
//! `models/*.json`, `corpus.json`, `scenarios/*.json`, `publications/*.json`
//! and an optional `definitions.json`.
//!
//! Loading happens in two phases. [`load_files`] reads and parses every file
//! (failures there are [`LoadError`]s); [`RawWorkspace::validate`] then
//! cross-checks the parsed values and reports every violation as a
//! [`Finding`].

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use scs_core::story::Publication;
use scs_core::{
    compile_publication, parse_graph, validate_model, validate_scenario_with, ConceptualGraph, Corpus, MediaResource,
    ModelTemplate, Ontology, OntologyDocument, ParseError, PublicationManifest, PublicationMode, Scenario, Segment,
    Step, StoryError, Stratum, Transition, TypeDefinition,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fsio;

pub const MAIN_CORPUS: &str = "main";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub id: String,
    pub label: String,
    pub head_node: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<ConceptualGraph>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph_text: Option<String>,
}

/// A segment as stored on disk and accepted over HTTP: the annotation is
/// given either structurally or in the text notation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentFile {
    pub id: String,
    pub stratum_id: String,
    pub start_ms: u64,
    pub end_ms: u64,
    pub model_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation: Option<ConceptualGraph>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annotation_text: Option<String>,
    #[serde(default)]
    pub version: u64,
}

impl From<&Segment> for SegmentFile {
    fn from(s: &Segment) -> Self {
        SegmentFile {
            id: s.id.clone(),
            stratum_id: s.stratum_id.clone(),
            start_ms: s.start_ms,
            end_ms: s.end_ms,
            model_id: s.model_id.clone(),
            annotation: Some(s.annotation.clone()),
            annotation_text: None,
            version: s.version,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusFile {
    pub media: Vec<MediaResource>,
    pub strata: Vec<Stratum>,
    pub segments: Vec<SegmentFile>,
    /// Ids of the models this corpus is annotated against.
    #[serde(default)]
    pub models: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFile {
    pub id: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requirement: Option<ConceptualGraph>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requirement_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub id: String,
    pub steps: Vec<StepFile>,
    pub transitions: Vec<Transition>,
    pub start_id: String,
    pub final_ids: BTreeSet<String>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {field}: {}:{}: {}", path.display(), error.span.line, error.span.column, error.message)]
    Notation { path: PathBuf, field: String, error: ParseError },
    #[error("{}: {field}: {message}", path.display())]
    Shape { path: PathBuf, field: String, message: String },
}

/// One violated invariant, located by workspace-relative file and a path
/// inside that file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub file: String,
    pub location: String,
    pub code: String,
    pub message: String,
}

impl std::fmt::Display for Finding {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}: {}: {}", self.file, self.location, self.code, self.message)
    }
}

fn finding(file: &str, location: impl Into<String>, code: impl Into<String>, message: impl Into<String>) -> Finding {
    Finding { file: file.into(), location: location.into(), code: code.into(), message: message.into() }
}

#[derive(Debug, Error)]
pub enum OpenError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("workspace has {} violation(s)", .0.len())]
    Invalid(Vec<Finding>),
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.into(), source })
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, LoadError> {
    serde_json::from_str(&read(path)?).map_err(|source| LoadError::Json { path: path.into(), source })
}

/// `*.json` files of a directory in name order, skipping hidden files (the
/// temp files of interrupted writes among them). A missing directory is
/// empty.
fn json_files(dir: &Path) -> Result<Vec<PathBuf>, LoadError> {
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(LoadError::Io { path: dir.into(), source }),
    };
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|source| LoadError::Io { path: dir.into(), source })?.path();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if !name.starts_with('.') && name.ends_with(".json") && path.is_file() {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Resolves a structured-or-text graph pair into a graph.
pub fn graph_field(
    path: &Path,
    field: &str,
    graph: Option<ConceptualGraph>,
    text: Option<&str>,
) -> Result<ConceptualGraph, LoadError> {
    match (graph, text) {
        (Some(g), None) => Ok(g),
        (None, Some(t)) => {
            parse_graph(t).map_err(|error| LoadError::Notation { path: path.into(), field: field.into(), error })
        }
        (Some(_), Some(_)) => Err(LoadError::Shape {
            path: path.into(),
            field: field.into(),
            message: "give either the graph or its text, not both".into(),
        }),
        (None, None) => {
            Err(LoadError::Shape { path: path.into(), field: field.into(), message: "missing graph".into() })
        }
    }
}

pub fn segment_from_file(path: &Path, s: SegmentFile) -> Result<Segment, LoadError> {
    let field = format!("segments/{}", s.id);
    let annotation = graph_field(path, &field, s.annotation, s.annotation_text.as_deref())?;
    Ok(Segment {
        id: s.id,
        stratum_id: s.stratum_id,
        start_ms: s.start_ms,
        end_ms: s.end_ms,
        model_id: s.model_id,
        annotation,
        version: s.version,
    })
}

/// Parsed but unchecked workspace content.
#[derive(Debug, Clone)]
pub struct RawWorkspace {
    pub root: PathBuf,
    pub ontology: OntologyDocument,
    /// `(workspace-relative file, model)`
    pub models: Vec<(String, ModelTemplate)>,
    pub media: Vec<MediaResource>,
    pub strata: Vec<Stratum>,
    pub segments: Vec<Segment>,
    pub corpus_models: Vec<String>,
    pub scenarios: Vec<(String, Scenario)>,
    pub definitions: Vec<TypeDefinition>,
}

fn rel(root: &Path, path: &Path) -> String {
    path.strip_prefix(root).unwrap_or(path).to_string_lossy().replace('\\', "/")
}

pub fn load_files(root: &Path) -> Result<RawWorkspace, LoadError> {
    let ontology: OntologyDocument = read_json(&root.join("ontology.json"))?;

    let mut models = Vec::new();
    for path in json_files(&root.join("models"))? {
        let m: ModelFile = read_json(&path)?;
        let graph = graph_field(&path, "graph", m.graph, m.graph_text.as_deref())?;
        models.push((rel(root, &path), ModelTemplate { id: m.id, label: m.label, head_node: m.head_node, graph }));
    }

    let corpus_path = root.join("corpus.json");
    let corpus: CorpusFile = read_json(&corpus_path)?;
    let segments =
        corpus.segments.into_iter().map(|s| segment_from_file(&corpus_path, s)).collect::<Result<Vec<_>, _>>()?;

    let mut scenarios = Vec::new();
    for path in json_files(&root.join("scenarios"))? {
        let s: ScenarioFile = read_json(&path)?;
        let mut steps = Vec::with_capacity(s.steps.len());
        for st in s.steps {
            let field = format!("steps/{}", st.id);
            let requirement = graph_field(&path, &field, st.requirement, st.requirement_text.as_deref())?;
            steps.push(Step { id: st.id, label: st.label, requirement, kind: st.kind });
        }
        let scenario =
            Scenario { id: s.id, steps, transitions: s.transitions, start_id: s.start_id, final_ids: s.final_ids };
        scenarios.push((rel(root, &path), scenario));
    }

    let def_path = root.join("definitions.json");
    let definitions = if def_path.exists() { read_json(&def_path)? } else { Vec::new() };

    for path in json_files(&root.join("publications"))? {
        read_json::<PublicationManifest>(&path)?;
    }

    Ok(RawWorkspace {
        root: root.into(),
        ontology,
        models,
        media: corpus.media,
        strata: corpus.strata,
        segments,
        corpus_models: corpus.models,
        scenarios,
        definitions,
    })
}

impl RawWorkspace {
    /// Cross-validates everything. Returns the workspace only when there is
    /// no finding.
    pub fn validate(self) -> (Option<Workspace>, Vec<Finding>) {
        let mut findings = Vec::new();
        let ontology = match Ontology::load(self.ontology) {
            Ok(o) => o,
            Err(e) => {
                findings.push(finding("ontology.json", "", e.code(), e.to_string()));
                return (None, findings);
            }
        };

        let mut model_files: BTreeMap<String, String> = BTreeMap::new();
        for (file, m) in &self.models {
            if let Some(first) = model_files.insert(m.id.clone(), file.clone()) {
                findings.push(finding(
                    file,
                    &m.id,
                    "DuplicateId",
                    format!("model `{}` is also defined in {first}", m.id),
                ));
            }
            for issue in validate_model(&ontology, m) {
                findings.push(finding(file, issue.subject, issue.code.as_str(), issue.message));
            }
        }
        for id in &self.corpus_models {
            if !model_files.contains_key(id) {
                findings.push(finding(
                    "corpus.json",
                    format!("models/{id}"),
                    "UnknownModel",
                    format!("no model file defines `{id}`"),
                ));
            }
        }

        let models: Vec<ModelTemplate> = self.models.iter().map(|(_, m)| m.clone()).collect();
        let corpus = Corpus::from_parts(self.media.clone(), self.strata.clone(), self.segments.clone(), models)
            .or_else(|e| {
                findings.push(finding("corpus.json", "", e.code(), e.to_string()));
                // keep auditing what can be audited
                Corpus::from_parts(
                    dedup(self.media, |m| &m.id),
                    dedup(self.strata, |s| &s.id),
                    dedup(self.segments, |s| &s.id),
                    dedup(self.models.into_iter().map(|(_, m)| m).collect(), |m| &m.id),
                )
            });
        let corpus = match corpus {
            Ok(c) => c,
            Err(_) => return (None, findings),
        };
        let segment_ids: BTreeSet<&str> = corpus.segments().map(|s| s.id.as_str()).collect();
        for issue in corpus.audit(&ontology) {
            let head = issue.subject.split('/').next().unwrap_or_default();
            // model issues were reported per model file above
            if model_files.contains_key(head) && !segment_ids.contains(head) {
                continue;
            }
            findings.push(finding("corpus.json", issue.subject, issue.code.as_str(), issue.message));
        }

        let mut scenarios = BTreeMap::new();
        for (file, s) in self.scenarios {
            for issue in validate_scenario_with(&ontology, &s) {
                findings.push(finding(&file, issue.subject, issue.code.as_str(), issue.message));
            }
            if scenarios.contains_key(&s.id) {
                findings.push(finding(&file, &s.id, "DuplicateId", format!("scenario `{}` is defined twice", s.id)));
            }
            scenarios.insert(s.id.clone(), s);
        }

        for d in &self.definitions {
            if let Err(e) = d.validate(&ontology) {
                findings.push(finding("definitions.json", &d.defined_type, e.code(), e.to_string()));
            }
        }

        if !findings.is_empty() {
            return (None, findings);
        }
        let ws = Workspace {
            root: self.root,
            ontology,
            corpus,
            corpus_models: self.corpus_models,
            scenarios,
            definitions: self.definitions,
        };
        (Some(ws), findings)
    }
}

fn dedup<T>(items: Vec<T>, id: impl Fn(&T) -> &String) -> Vec<T> {
    let mut seen = BTreeSet::new();
    items.into_iter().filter(|x| seen.insert(id(x).clone())).collect()
}

/// Loads and cross-validates `root`. The error separates unreadable files
/// from invariant violations.
pub fn check(root: &Path) -> Result<Vec<Finding>, LoadError> {
    Ok(load_files(root)?.validate().1)
}

/// A loaded, valid workspace.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub root: PathBuf,
    pub ontology: Ontology,
    pub corpus: Corpus,
    pub corpus_models: Vec<String>,
    pub scenarios: BTreeMap<String, Scenario>,
    pub definitions: Vec<TypeDefinition>,
}

impl Workspace {
    pub fn open(root: &Path) -> Result<Workspace, OpenError> {
        match load_files(root)?.validate() {
            (Some(ws), _) => Ok(ws),
            (None, findings) => Err(OpenError::Invalid(findings)),
        }
    }

    pub fn corpus_file(&self) -> CorpusFile {
        CorpusFile {
            media: self.corpus.media().cloned().collect(),
            strata: self.corpus.strata().cloned().collect(),
            segments: self.corpus.segments().map(SegmentFile::from).collect(),
            models: self.corpus_models.clone(),
        }
    }

    /// Persists `corpus` as `corpus.json` and returns the workspace that
    /// holds it. Annotations are written in structured form.
    pub fn save_corpus(&self, corpus: Corpus) -> io::Result<Workspace> {
        let next = Workspace { corpus, ..self.clone() };
        fsio::write_json(&self.root.join("corpus.json"), &next.corpus_file())?;
        Ok(next)
    }

    pub fn publication_path(&self, scenario_id: &str) -> PathBuf {
        self.root.join("publications").join(format!("{scenario_id}.json"))
    }

    pub fn compile(&self, scenario: &Scenario, mode: PublicationMode) -> Result<Publication, StoryError> {
        compile_publication(&self.ontology, scenario, &self.corpus, mode)
    }
}
