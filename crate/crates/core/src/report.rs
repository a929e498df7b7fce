//! Validation reports shared by every module.
//!
//! A report is a flat list of issues. An empty report means "valid"; the
//! issue codes double as the machine-readable error vocabulary of the HTTP
//! service.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IssueCode {
    // graph level
    UnknownType,
    UnknownRelation,
    UnknownMarker,
    NonConformingMarker,
    SignatureViolation,
    DanglingEndpoint,
    DuplicateVariable,
    // model / annotation level
    NoProjection,
    NotGeneric,
    UnknownHeadNode,
    // corpus level
    DuplicateId,
    UnknownMedia,
    UnknownStratum,
    UnknownModel,
    TimecodeOutOfRange,
    NonPositiveDuration,
    // scenario level
    UnknownStep,
    DuplicateStep,
    UnreachableStep,
    NoSatisfiablePath,
    DanglingCondition,
    NoFinalStep,
    InvalidRequirement,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::UnknownType => "UnknownType",
            IssueCode::UnknownRelation => "UnknownRelation",
            IssueCode::UnknownMarker => "UnknownMarker",
            IssueCode::NonConformingMarker => "NonConformingMarker",
            IssueCode::SignatureViolation => "SignatureViolation",
            IssueCode::DanglingEndpoint => "DanglingEndpoint",
            IssueCode::DuplicateVariable => "DuplicateVariable",
            IssueCode::NoProjection => "NoProjection",
            IssueCode::NotGeneric => "NotGeneric",
            IssueCode::UnknownHeadNode => "UnknownHeadNode",
            IssueCode::DuplicateId => "DuplicateId",
            IssueCode::UnknownMedia => "UnknownMedia",
            IssueCode::UnknownStratum => "UnknownStratum",
            IssueCode::UnknownModel => "UnknownModel",
            IssueCode::TimecodeOutOfRange => "TimecodeOutOfRange",
            IssueCode::NonPositiveDuration => "NonPositiveDuration",
            IssueCode::UnknownStep => "UnknownStep",
            IssueCode::DuplicateStep => "DuplicateStep",
            IssueCode::UnreachableStep => "UnreachableStep",
            IssueCode::NoSatisfiablePath => "NoSatisfiablePath",
            IssueCode::DanglingCondition => "DanglingCondition",
            IssueCode::NoFinalStep => "NoFinalStep",
            IssueCode::InvalidRequirement => "InvalidRequirement",
        }
    }
}

impl fmt::Display for IssueCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One validation finding. `subject` is the id of the offending element
/// (node, edge, segment, step...).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Issue {
    pub code: IssueCode,
    pub subject: String,
    pub message: String,
}

impl Issue {
    pub fn new(code: IssueCode, subject: impl Into<String>, message: impl Into<String>) -> Self {
        Issue { code, subject: subject.into(), message: message.into() }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.code, self.subject, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Report {
    issues: Vec<Issue>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn len(&self) -> usize {
        self.issues.len()
    }

    pub fn push(&mut self, issue: Issue) {
        self.issues.push(issue);
    }

    pub fn add(&mut self, code: IssueCode, subject: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue::new(code, subject, message));
    }

    pub fn extend(&mut self, other: Report) {
        self.issues.extend(other.issues);
    }

    pub fn issues(&self) -> &[Issue] {
        &self.issues
    }

    pub fn into_issues(self) -> Vec<Issue> {
        self.issues
    }

    pub fn has(&self, code: IssueCode) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }

    pub fn codes(&self) -> Vec<IssueCode> {
        self.issues.iter().map(|i| i.code).collect()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.issues.is_empty() {
            return f.write_str("no issues");
        }
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl From<Vec<Issue>> for Report {
    fn from(issues: Vec<Issue>) -> Self {
        Report { issues }
    }
}

impl IntoIterator for Report {
    type Item = Issue;
    type IntoIter = alloc::vec::IntoIter<Issue>;

    fn into_iter(self) -> Self::IntoIter {
        self.issues.into_iter()
    }
}
