//! Linear text notation for conceptual graphs.
//!
//! ```text
//! # comment
//! [Langue: guarani] -(partie_de)-> [Famille_de_langues: *]
//! [Mine_lieu: *m]; [Mine_lieu: *m] -(preciser_gisement)-> [Gisement: charbon]
//! ```
//!
//! The full grammar lives in `docs/notation.md`. The parser does not look at
//! the ontology: unknown type or relation ids surface later through
//! [`crate::validate_graph`].

mod canonical;
mod parser;
mod printer;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canonical::canonical_form;
pub(crate) use canonical::canonical_labeling;
pub use parser::parse_graph;
pub use printer::serialize_graph;

/// A position in the source text. Lines and columns are 1-based and counted
/// in characters, not bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    LBracket,
    RBracket,
    Colon,
    Star,
    Variable,
    Identifier,
    QuotedString,
    ArrowStart,
    ArrowEnd,
    Semicolon,
    Newline,
    EndOfInput,
}

impl TokenKind {
    pub fn describe(self) -> &'static str {
        match self {
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::Colon => "`:`",
            TokenKind::Star => "`*`",
            TokenKind::Variable => "variable `*name`",
            TokenKind::Identifier => "identifier",
            TokenKind::QuotedString => "quoted string",
            TokenKind::ArrowStart => "`-(`",
            TokenKind::ArrowEnd => "`)->`",
            TokenKind::Semicolon => "`;`",
            TokenKind::Newline => "newline",
            TokenKind::EndOfInput => "end of input",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{}:{}: {message}", span.line, span.column)]
pub struct ParseError {
    pub span: SourceSpan,
    pub message: String,
    pub expected: Vec<TokenKind>,
}
