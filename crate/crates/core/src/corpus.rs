//! Stratified corpora: media resources split into strata (thematic, visual,
//! ...) made of time-coded segments, each annotated by an individual graph
//! that instantiates a model template ("sujet").
//!
//! Time intervals are half-open: a segment covers `start_ms <= t < end_ms`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{validate_graph, ConceptualGraph, Referent};
use crate::ontology::{Ontology, OntologyError};
use crate::projection::project_unchecked;
use crate::report::{IssueCode, Report};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaResource {
    pub id: String,
    pub title: String,
    pub uri: String,
    pub duration_ms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StratumKind {
    Thematic,
    Rhetoric,
    Visual,
    Acoustic,
    Other,
}

impl StratumKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StratumKind::Thematic => "thematic",
            StratumKind::Rhetoric => "rhetoric",
            StratumKind::Visual => "visual",
            StratumKind::Acoustic => "acoustic",
            StratumKind::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "thematic" => StratumKind::Thematic,
            "rhetoric" => StratumKind::Rhetoric,
            "visual" => StratumKind::Visual,
            "acoustic" => StratumKind::Acoustic,
            "other" => StratumKind::Other,
            _ => return None,
        })
    }
}

impl fmt::Display for StratumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stratum {
    pub id: String,
    pub media_id: String,
    pub kind: StratumKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub id: String,
    pub stratum_id: String,
    pub start_ms: u64,
    pub end_ms: u64,
    pub model_id: String,
    pub annotation: ConceptualGraph,
    /// Optimistic-concurrency counter, bumped on every accepted write.
    #[serde(default)]
    pub version: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelTemplate {
    pub id: String,
    pub label: String,
    pub head_node: String,
    pub graph: ConceptualGraph,
}

/// The allowed values of a form field: a controlled list of markers, or free
/// input. Serialized as the string `"free"` or as a list of markers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueDomain {
    Free,
    Markers(Vec<String>),
}

impl Serialize for ValueDomain {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ValueDomain::Free => s.serialize_str("free"),
            ValueDomain::Markers(m) => m.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for ValueDomain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = ValueDomain;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("\"free\" or a list of markers")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ValueDomain, E> {
                if v == "free" {
                    Ok(ValueDomain::Free)
                } else {
                    Err(E::invalid_value(de::Unexpected::Str(v), &self))
                }
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<ValueDomain, A::Error> {
                let mut out = Vec::new();
                while let Some(m) = seq.next_element::<String>()? {
                    out.push(m);
                }
                Ok(ValueDomain::Markers(out))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormField {
    pub relation_id: String,
    pub relation_label: String,
    pub target_type_id: String,
    pub value_domain: ValueDomain,
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormSchema {
    pub model_id: String,
    pub fields: Vec<FormField>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown media `{0}`")]
    UnknownMedia(String),
    #[error("unknown stratum `{0}`")]
    UnknownStratum(String),
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("time code out of range: {0}")]
    TimecodeOutOfRange(String),
    #[error("annotation is invalid: {0}")]
    AnnotationInvalid(Report),
    #[error("model is invalid: {0}")]
    InvalidModel(Report),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::DuplicateId(_) => "DuplicateId",
            CorpusError::UnknownMedia(_) => "UnknownMedia",
            CorpusError::UnknownStratum(_) => "UnknownStratum",
            CorpusError::UnknownModel(_) => "UnknownModel",
            CorpusError::TimecodeOutOfRange(_) => "TimecodeOutOfRange",
            CorpusError::AnnotationInvalid(_) => "AnnotationInvalid",
            CorpusError::InvalidModel(_) => "InvalidModel",
            CorpusError::Ontology(e) => e.code(),
        }
    }
}

/// Checks a model template: well-typed, generic, head node present.
pub fn validate_model(ont: &Ontology, model: &ModelTemplate) -> Report {
    let mut report = validate_graph(ont, &model.graph);
    if !model.graph.is_generic() {
        report.add(IssueCode::NotGeneric, &model.id, "a model graph must not contain markers");
    }
    if model.graph.node(&model.head_node).is_none() {
        report.add(
            IssueCode::UnknownHeadNode,
            &model.id,
            format!("head node `{}` is not in the graph", model.head_node),
        );
    }
    report
}

/// One field per edge touching the head node, in edge-id order. The field's
/// target is the endpoint other than the head.
pub fn derive_form_schema(ont: &Ontology, model: &ModelTemplate) -> Result<FormSchema, CorpusError> {
    let report = validate_model(ont, model);
    if !report.is_empty() {
        return Err(CorpusError::InvalidModel(report));
    }
    let mut fields = Vec::new();
    for e in model.graph.incident_edges(&model.head_node) {
        let other = if e.source == model.head_node { &e.target } else { &e.source };
        let target = model.graph.node(other).expect("validated");
        let rel = ont.relation(&e.rel_id).expect("validated");
        let markers: Vec<String> =
            ont.individuals_for(&target.type_id)?.into_iter().map(|i| i.marker.clone()).collect();
        fields.push(FormField {
            relation_id: e.rel_id.clone(),
            relation_label: rel.label.clone(),
            target_type_id: target.type_id.clone(),
            value_domain: if markers.is_empty() { ValueDomain::Free } else { ValueDomain::Markers(markers) },
            required: matches!(target.referent, Referent::Marker(_)),
        });
    }
    Ok(FormSchema { model_id: model.id.clone(), fields })
}

/// Empty iff the annotation is well-typed and instantiates the model.
pub fn validate_annotation(ont: &Ontology, model: &ModelTemplate, annotation: &ConceptualGraph) -> Report {
    let report = validate_graph(ont, annotation);
    if !report.is_empty() {
        return report;
    }
    let mut report = report;
    if project_unchecked(ont, &model.graph, annotation).is_empty() {
        report.add(
            IssueCode::NoProjection,
            &model.id,
            format!("the annotation does not instantiate model `{}`", model.id),
        );
    }
    report
}

/// Conjunctive segment filter; `None` fields do not constrain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentFilter {
    #[serde(default)]
    pub concept: Option<String>,
    #[serde(default)]
    pub marker: Option<String>,
    #[serde(default)]
    pub relation: Option<String>,
    #[serde(default)]
    pub stratum_kind: Option<StratumKind>,
    /// `[from, to)`; when `from == to` the window is the single instant.
    #[serde(default)]
    pub time_window: Option<(u64, u64)>,
    #[serde(default)]
    pub model: Option<String>,
}

/// A corpus value. Constructors only check id uniqueness; [`Corpus::audit`]
/// checks everything else, and [`Corpus::upsert_segment`] keeps a clean
/// corpus clean.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    media: BTreeMap<String, MediaResource>,
    strata: BTreeMap<String, Stratum>,
    segments: BTreeMap<String, Segment>,
    models: BTreeMap<String, ModelTemplate>,
}

fn index<T>(
    items: impl IntoIterator<Item = T>,
    id: impl Fn(&T) -> &String,
) -> Result<BTreeMap<String, T>, CorpusError> {
    let mut out = BTreeMap::new();
    for it in items {
        let key = id(&it).clone();
        if out.contains_key(&key) {
            return Err(CorpusError::DuplicateId(key));
        }
        out.insert(key, it);
    }
    Ok(out)
}

impl Corpus {
    pub fn from_parts(
        media: impl IntoIterator<Item = MediaResource>,
        strata: impl IntoIterator<Item = Stratum>,
        segments: impl IntoIterator<Item = Segment>,
        models: impl IntoIterator<Item = ModelTemplate>,
    ) -> Result<Self, CorpusError> {
        Ok(Corpus {
            media: index(media, |m| &m.id)?,
            strata: index(strata, |s| &s.id)?,
            segments: index(segments, |s| &s.id)?,
            models: index(models, |m| &m.id)?,
        })
    }

    pub fn media(&self) -> impl Iterator<Item = &MediaResource> {
        self.media.values()
    }

    pub fn strata(&self) -> impl Iterator<Item = &Stratum> {
        self.strata.values()
    }

    /// Segments in id order.
    pub fn segments(&self) -> impl Iterator<Item = &Segment> {
        self.segments.values()
    }

    pub fn models(&self) -> impl Iterator<Item = &ModelTemplate> {
        self.models.values()
    }

    pub fn media_resource(&self, id: &str) -> Option<&MediaResource> {
        self.media.get(id)
    }

    pub fn stratum(&self, id: &str) -> Option<&Stratum> {
        self.strata.get(id)
    }

    pub fn segment(&self, id: &str) -> Option<&Segment> {
        self.segments.get(id)
    }

    pub fn model(&self, id: &str) -> Option<&ModelTemplate> {
        self.models.get(id)
    }

    /// The media a segment belongs to, through its stratum.
    pub fn media_of(&self, segment: &Segment) -> Option<&MediaResource> {
        self.strata.get(&segment.stratum_id).and_then(|s| self.media.get(&s.media_id))
    }

    fn segment_issues(&self, ont: &Ontology, seg: &Segment, report: &mut Report) {
        match self.strata.get(&seg.stratum_id) {
            None => report.add(IssueCode::UnknownStratum, &seg.id, format!("unknown stratum `{}`", seg.stratum_id)),
            Some(st) => {
                if let Some(m) = self.media.get(&st.media_id) {
                    if seg.start_ms >= seg.end_ms || seg.end_ms > m.duration_ms {
                        report.add(
                            IssueCode::TimecodeOutOfRange,
                            &seg.id,
                            format!(
                                "[{}, {}) is not a non-empty interval within [0, {}]",
                                seg.start_ms, seg.end_ms, m.duration_ms
                            ),
                        );
                    }
                }
            }
        }
        match self.models.get(&seg.model_id) {
            None => report.add(IssueCode::UnknownModel, &seg.id, format!("unknown model `{}`", seg.model_id)),
            Some(model) => {
                for mut issue in validate_annotation(ont, model, &seg.annotation) {
                    issue.subject = format!("{}/{}", seg.id, issue.subject);
                    report.push(issue);
                }
            }
        }
    }

    /// Every violated corpus invariant. Empty iff the corpus is consistent
    /// with the ontology.
    pub fn audit(&self, ont: &Ontology) -> Report {
        let mut report = Report::new();
        for m in self.media.values() {
            if m.duration_ms == 0 {
                report.add(IssueCode::NonPositiveDuration, &m.id, "duration_ms must be positive");
            }
        }
        for s in self.strata.values() {
            if !self.media.contains_key(&s.media_id) {
                report.add(IssueCode::UnknownMedia, &s.id, format!("unknown media `{}`", s.media_id));
            }
        }
        for model in self.models.values() {
            for mut issue in validate_model(ont, model) {
                if issue.subject != model.id {
                    issue.subject = format!("{}/{}", model.id, issue.subject);
                }
                report.push(issue);
            }
        }
        for seg in self.segments.values() {
            self.segment_issues(ont, seg, &mut report);
        }
        report
    }

    /// Inserts or replaces a segment by id after checking it.
    pub fn upsert_segment(&self, ont: &Ontology, segment: Segment) -> Result<Corpus, CorpusError> {
        let stratum = self
            .strata
            .get(&segment.stratum_id)
            .ok_or_else(|| CorpusError::UnknownStratum(segment.stratum_id.clone()))?;
        let media =
            self.media.get(&stratum.media_id).ok_or_else(|| CorpusError::UnknownMedia(stratum.media_id.clone()))?;
        if segment.start_ms >= segment.end_ms || segment.end_ms > media.duration_ms {
            return Err(CorpusError::TimecodeOutOfRange(format!(
                "[{}, {}) on media `{}` of {} ms",
                segment.start_ms, segment.end_ms, media.id, media.duration_ms
            )));
        }
        let model =
            self.models.get(&segment.model_id).ok_or_else(|| CorpusError::UnknownModel(segment.model_id.clone()))?;
        let report = validate_annotation(ont, model, &segment.annotation);
        if !report.is_empty() {
            return Err(CorpusError::AnnotationInvalid(report));
        }
        let mut out = self.clone();
        out.segments.insert(segment.id.clone(), segment);
        Ok(out)
    }

    /// Segments matching every criterion of `filter`, sorted by
    /// `(media_id, start_ms, id)`.
    pub fn query_segments(&self, ont: &Ontology, filter: &SegmentFilter) -> Result<Vec<&Segment>, CorpusError> {
        if let Some(c) = &filter.concept {
            ont.ancestors(c)?;
        }
        if let Some(r) = &filter.relation {
            ont.relation_ancestors(r)?;
        }
        if let Some(m) = &filter.marker {
            if ont.individual(m).is_none() {
                return Err(OntologyError::UnknownMarker(m.clone()).into());
            }
        }
        if let Some(m) = &filter.model {
            if !self.models.contains_key(m) {
                return Err(CorpusError::UnknownModel(m.clone()));
            }
        }
        let mut out: Vec<&Segment> = self.segments.values().filter(|s| self.matches(ont, s, filter)).collect();
        self.sort_segments(&mut out);
        Ok(out)
    }

    fn sort_segments(&self, segs: &mut [&Segment]) {
        segs.sort_by(|a, b| {
            let ma = self.media_of(a).map(|m| m.id.as_str());
            let mb = self.media_of(b).map(|m| m.id.as_str());
            (ma, a.start_ms, &a.id).cmp(&(mb, b.start_ms, &b.id))
        });
    }

    fn matches(&self, ont: &Ontology, s: &Segment, f: &SegmentFilter) -> bool {
        if let Some(c) = &f.concept {
            if !s.annotation.nodes().any(|n| ont.is_subtype(c, &n.type_id)) {
                return false;
            }
        }
        if let Some(m) = &f.marker {
            if !s.annotation.nodes().any(|n| n.referent.marker() == Some(m.as_str())) {
                return false;
            }
        }
        if let Some(r) = &f.relation {
            if !s.annotation.edges().any(|e| ont.is_subrelation(r, &e.rel_id)) {
                return false;
            }
        }
        if let Some(k) = f.stratum_kind {
            if self.strata.get(&s.stratum_id).map(|st| st.kind) != Some(k) {
                return false;
            }
        }
        if let Some((from, to)) = f.time_window {
            let hit =
                if from == to { s.start_ms <= from && from < s.end_ms } else { s.start_ms < to && from < s.end_ms };
            if !hit {
                return false;
            }
        }
        if let Some(m) = &f.model {
            if &s.model_id != m {
                return false;
            }
        }
        true
    }

    /// Segments of `media_id` covering instant `t_ms`, grouped by stratum
    /// kind. Every kind present among the media's strata has an entry, even
    /// when empty. Groups are sorted by `(start_ms, id)`.
    pub fn segments_at_instant(
        &self,
        media_id: &str,
        t_ms: u64,
    ) -> Result<BTreeMap<StratumKind, Vec<&Segment>>, CorpusError> {
        let media = self.media.get(media_id).ok_or_else(|| CorpusError::UnknownMedia(media_id.into()))?;
        if t_ms > media.duration_ms {
            return Err(CorpusError::TimecodeOutOfRange(format!(
                "{t_ms} ms is beyond the {} ms of media `{media_id}`",
                media.duration_ms
            )));
        }
        let mut out: BTreeMap<StratumKind, Vec<&Segment>> = BTreeMap::new();
        for st in self.strata.values().filter(|s| s.media_id == media_id) {
            out.entry(st.kind).or_default();
        }
        for seg in self.segments.values() {
            let Some(st) = self.strata.get(&seg.stratum_id) else { continue };
            if st.media_id == media_id && seg.start_ms <= t_ms && t_ms < seg.end_ms {
                out.entry(st.kind).or_default().push(seg);
            }
        }
        for group in out.values_mut() {
            group.sort_by(|a, b| (a.start_ms, &a.id).cmp(&(b.start_ms, &b.id)));
        }
        Ok(out)
    }
}
