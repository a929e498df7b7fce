use alloc::string::String;

use thiserror::Error;

use crate::ontology::OntologyError;
use crate::report::Report;

/// Errors of the graph operations (restrict, join, projection, ...).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CgError {
    #[error("graph failed validation: {0}")]
    InvalidGraph(Report),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error(transparent)]
    Ontology(#[from] OntologyError),
    #[error("`{to}` is not a subtype of `{from}`")]
    NotASubtype { from: String, to: String },
    #[error("marker `{marker}` does not conform to `{type_id}`")]
    NonConformingMarker { marker: String, type_id: String },
    #[error("node `{node}` already denotes `{marker}`")]
    AlreadyIndividual { node: String, marker: String },
    #[error("types `{0}` and `{1}` are not comparable")]
    IncompatibleTypes(String, String),
    #[error("markers `{0}` and `{1}` conflict")]
    ConflictingMarkers(String, String),
    #[error("no definition for type `{0}`")]
    NoDefinition(String),
    #[error("joining the definition body failed: {0}")]
    JoinFailure(String),
    #[error("invalid type definition for `{0}`: {1}")]
    InvalidDefinition(String, String),
}

impl CgError {
    pub fn code(&self) -> &'static str {
        match self {
            CgError::InvalidGraph(_) => "InvalidGraph",
            CgError::UnknownNode(_) => "UnknownNode",
            CgError::Ontology(e) => e.code(),
            CgError::NotASubtype { .. } => "NotASubtype",
            CgError::NonConformingMarker { .. } => "NonConformingMarker",
            CgError::AlreadyIndividual { .. } => "AlreadyIndividual",
            CgError::IncompatibleTypes(..) => "IncompatibleTypes",
            CgError::ConflictingMarkers(..) => "ConflictingMarkers",
            CgError::NoDefinition(_) => "NoDefinition",
            CgError::JoinFailure(_) => "JoinFailure",
            CgError::InvalidDefinition(..) => "InvalidDefinition",
        }
    }
}
