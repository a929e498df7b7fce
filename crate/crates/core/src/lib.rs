//! Typed conceptual graphs over a domain ontology, stratified corpus
//! annotation, and compilation of annotated segments into branching
//! narrative publications.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function over immutable values; file formats, persistence, the CLI and the
//! HTTP service live in the `scs` crate.
//!
//! Layout:
//!
//! - [`ontology`]: concept and relation hierarchies, signatures, the
//!   thesaurus of individuals and their external alignments.
//! - [`graph`], [`ops`], [`projection`], [`generalize`], [`definition`]: the
//!   conceptual-graph engine.
//! - [`notation`]: the linear text notation and canonical forms.
//! - [`corpus`]: media, strata, time-coded segments, model templates and
//!   form schemas.
//! - [`story`]: scenarios, step matching, path enumeration and publication
//!   manifests.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod corpus;
pub mod definition;
pub mod error;
pub mod generalize;
pub mod graph;
pub mod notation;
pub mod ontology;
pub mod ops;
pub mod projection;
pub mod report;
pub mod story;

pub use corpus::{
    derive_form_schema, validate_annotation, validate_model, Corpus, CorpusError, FormField, FormSchema, MediaResource,
    ModelTemplate, Segment, SegmentFilter, Stratum, StratumKind, ValueDomain,
};
pub use definition::{contract_type, expand_type, TypeDefinition};
pub use error::CgError;
pub use generalize::common_generalization;
pub use graph::{validate_graph, ConceptNode, ConceptualGraph, GraphKind, Referent, RelationEdge};
pub use notation::{canonical_form, parse_graph, serialize_graph, ParseError, SourceSpan, TokenKind};
pub use ontology::{
    Alignment, ConceptType, Individual, Ontology, OntologyDocument, OntologyError, RelationType, Signature,
};
pub use ops::{join, restrict, simplify};
pub use projection::{project, projects, Morphism};
pub use report::{Issue, IssueCode, Report};
pub use story::{
    compile_publication, enumerate_paths, intertextual_links, match_step, validate_scenario, validate_scenario_with,
    PublicationManifest, PublicationMode, Scenario, Step, StoryError, Transition,
};
