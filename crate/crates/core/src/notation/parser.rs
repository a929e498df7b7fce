use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{ParseError, SourceSpan, TokenKind};
use crate::graph::{ConceptNode, ConceptualGraph, Referent, RelationEdge};

pub(crate) fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-' || ('\u{C0}'..='\u{FF}').contains(&c)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LBracket,
    RBracket,
    Colon,
    Star,
    Variable(String),
    Ident(String),
    Quoted(String),
    ArrowStart,
    ArrowEnd,
    Semicolon,
    Newline,
    Eof,
}

impl Tok {
    fn kind(&self) -> TokenKind {
        match self {
            Tok::LBracket => TokenKind::LBracket,
            Tok::RBracket => TokenKind::RBracket,
            Tok::Colon => TokenKind::Colon,
            Tok::Star => TokenKind::Star,
            Tok::Variable(_) => TokenKind::Variable,
            Tok::Ident(_) => TokenKind::Identifier,
            Tok::Quoted(_) => TokenKind::QuotedString,
            Tok::ArrowStart => TokenKind::ArrowStart,
            Tok::ArrowEnd => TokenKind::ArrowEnd,
            Tok::Semicolon => TokenKind::Semicolon,
            Tok::Newline => TokenKind::Newline,
            Tok::Eof => TokenKind::EndOfInput,
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn error(span: SourceSpan, message: impl Into<String>, expected: &[TokenKind]) -> ParseError {
    ParseError { span, message: message.into(), expected: expected.to_vec() }
}

struct Lexer<'a> {
    chars: core::iter::Peekable<core::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer { chars: text.chars().peekable(), line: 1, column: 1 }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next()
    }

    fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        loop {
            let (line, column) = (self.line, self.column);
            let span = |len: usize| SourceSpan { line, column, length: len };
            let Some(c) = self.peek() else {
                out.push(Token { tok: Tok::Eof, span: span(0) });
                return Ok(out);
            };
            let tok = match c {
                ' ' | '\t' | '\r' => {
                    self.bump();
                    continue;
                }
                '#' => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                    continue;
                }
                '\n' => {
                    self.bump();
                    Token { tok: Tok::Newline, span: span(1) }
                }
                '[' => {
                    self.bump();
                    Token { tok: Tok::LBracket, span: span(1) }
                }
                ']' => {
                    self.bump();
                    Token { tok: Tok::RBracket, span: span(1) }
                }
                ':' => {
                    self.bump();
                    Token { tok: Tok::Colon, span: span(1) }
                }
                ';' => {
                    self.bump();
                    Token { tok: Tok::Semicolon, span: span(1) }
                }
                '-' if self.peek2() == Some('(') => {
                    self.bump();
                    self.bump();
                    Token { tok: Tok::ArrowStart, span: span(2) }
                }
                ')' => {
                    self.bump();
                    if self.peek() == Some('-') && self.peek2() == Some('>') {
                        self.bump();
                        self.bump();
                        Token { tok: Tok::ArrowEnd, span: span(3) }
                    } else {
                        return Err(error(span(1), "expected `)->` to close the relation", &[TokenKind::ArrowEnd]));
                    }
                }
                '*' => {
                    self.bump();
                    match self.peek() {
                        Some('"') => {
                            let (name, len) = self.quoted(line, column + 1)?;
                            Token { tok: Tok::Variable(name), span: span(len + 1) }
                        }
                        Some(c) if is_ident_char(c) => {
                            let name = self.ident();
                            let len = name.chars().count() + 1;
                            Token { tok: Tok::Variable(name), span: span(len) }
                        }
                        _ => Token { tok: Tok::Star, span: span(1) },
                    }
                }
                '"' => {
                    let (s, len) = self.quoted(line, column)?;
                    Token { tok: Tok::Quoted(s), span: span(len) }
                }
                c if is_ident_char(c) => {
                    let name = self.ident();
                    let len = name.chars().count();
                    Token { tok: Tok::Ident(name), span: span(len) }
                }
                other => {
                    return Err(error(span(1), format!("unexpected character `{other}`"), &[]));
                }
            };
            out.push(tok);
        }
    }

    fn ident(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            // `-(` always opens a relation, even right after an identifier
            if !is_ident_char(c) || (c == '-' && self.peek2() == Some('(')) {
                break;
            }
            s.push(c);
            self.bump();
        }
        s
    }

    /// Reads a double-quoted string; returns its content and source length.
    fn quoted(&mut self, line: usize, column: usize) -> Result<(String, usize), ParseError> {
        self.bump();
        let mut s = String::new();
        let mut len = 1;
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err(error(
                        SourceSpan { line, column, length: len },
                        "unterminated quoted string",
                        &[TokenKind::QuotedString],
                    ));
                }
                Some('"') => return Ok((s, len + 1)),
                Some('\\') => {
                    len += 1;
                    match self.bump() {
                        Some(c @ ('"' | '\\')) => {
                            s.push(c);
                            len += 1;
                        }
                        _ => {
                            return Err(error(
                                SourceSpan { line: self.line, column: self.column.saturating_sub(1).max(1), length: 1 },
                                "only `\\\"` and `\\\\` escapes are allowed",
                                &[],
                            ));
                        }
                    }
                }
                Some(c) => {
                    s.push(c);
                    len += 1;
                }
            }
        }
    }
}

struct VariableBinding {
    node_id: String,
    type_id: String,
    referent: Referent,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    graph: ConceptualGraph,
    variables: BTreeMap<String, VariableBinding>,
    next_node: usize,
    next_edge: usize,
}

/// Parses the linear notation into a graph with node ids `n1, n2, ...` and
/// edge ids `e1, e2, ...` in order of appearance.
///
/// `*` creates a fresh generic node on every occurrence; `*name` denotes the
/// same node everywhere in the text; `marker *name` labels an individual node
/// so it can be referenced more than once.
pub fn parse_graph(text: &str) -> Result<ConceptualGraph, ParseError> {
    let tokens = Lexer::new(text).tokenize()?;
    let mut p = Parser {
        tokens,
        pos: 0,
        graph: ConceptualGraph::new(),
        variables: BTreeMap::new(),
        next_node: 0,
        next_edge: 0,
    };
    p.document()?;
    Ok(p.graph)
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[TokenKind]) -> ParseError {
        let t = self.peek();
        let wanted: Vec<&str> = expected.iter().map(|k| k.describe()).collect();
        error(t.span, format!("expected {}, found {}", wanted.join(" or "), t.tok.kind().describe()), expected)
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek().tok, Tok::Newline | Tok::Semicolon) {
            self.advance();
        }
    }

    fn skip_newlines(&mut self) {
        while self.peek().tok == Tok::Newline {
            self.advance();
        }
    }

    fn document(&mut self) -> Result<(), ParseError> {
        loop {
            self.skip_separators();
            match self.peek().tok {
                Tok::Eof => return Ok(()),
                Tok::LBracket => self.statement()?,
                _ => return Err(self.unexpected(&[TokenKind::LBracket, TokenKind::EndOfInput])),
            }
            match self.peek().tok {
                Tok::Newline | Tok::Semicolon | Tok::Eof => {}
                _ => {
                    return Err(self.unexpected(&[
                        TokenKind::ArrowStart,
                        TokenKind::Semicolon,
                        TokenKind::Newline,
                        TokenKind::EndOfInput,
                    ]))
                }
            }
        }
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let mut current = self.concept()?;
        loop {
            // an arrow may continue the chain on the next line
            let save = self.pos;
            self.skip_newlines();
            if self.peek().tok != Tok::ArrowStart {
                self.pos = save;
                return Ok(());
            }
            self.advance();
            let rel = self.name(&[TokenKind::Identifier, TokenKind::QuotedString], "relation id")?;
            if self.peek().tok != Tok::ArrowEnd {
                return Err(self.unexpected(&[TokenKind::ArrowEnd]));
            }
            self.advance();
            self.skip_newlines();
            let next = self.concept()?;
            self.next_edge += 1;
            let edge_id = format!("e{}", self.next_edge);
            self.graph
                .insert_edge(RelationEdge::new(edge_id, rel, current, next.clone()))
                .expect("edge ids are generated");
            current = next;
        }
    }

    fn name(&mut self, expected: &[TokenKind], what: &str) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) | Tok::Quoted(s) => {
                if s.is_empty() {
                    return Err(error(self.peek().span, format!("empty {what}"), expected));
                }
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(expected)),
        }
    }

    /// Parses `[type: referent]` and returns the id of the node it denotes.
    fn concept(&mut self) -> Result<String, ParseError> {
        if self.peek().tok != Tok::LBracket {
            return Err(self.unexpected(&[TokenKind::LBracket]));
        }
        let open = self.advance().span;
        let type_id = self.name(&[TokenKind::Identifier, TokenKind::QuotedString], "type id")?;
        if self.peek().tok != Tok::Colon {
            return Err(self.unexpected(&[TokenKind::Colon]));
        }
        self.advance();
        let referent_kinds = [TokenKind::Star, TokenKind::Variable, TokenKind::Identifier, TokenKind::QuotedString];
        let (referent, label) = match self.peek().tok.clone() {
            Tok::Star => {
                self.advance();
                (Referent::Generic, None)
            }
            Tok::Variable(v) => {
                self.advance();
                (Referent::Generic, Some(v))
            }
            Tok::Ident(m) | Tok::Quoted(m) => {
                let span = self.advance().span;
                if m.is_empty() {
                    return Err(error(span, "empty marker", &referent_kinds));
                }
                let label = match self.peek().tok.clone() {
                    Tok::Variable(v) => {
                        self.advance();
                        Some(v)
                    }
                    _ => None,
                };
                (Referent::Marker(m), label)
            }
            _ => return Err(self.unexpected(&referent_kinds)),
        };
        if self.peek().tok != Tok::RBracket {
            let mut expected = vec![TokenKind::RBracket];
            if label.is_none() && matches!(referent, Referent::Marker(_)) {
                expected.push(TokenKind::Variable);
            }
            return Err(self.unexpected(&expected));
        }
        let close = self.advance().span;
        let span = SourceSpan {
            line: open.line,
            column: open.column,
            length: if close.line == open.line { close.column + 1 - open.column } else { 1 },
        };

        match label {
            Some(name) => {
                if let Some(b) = self.variables.get(&name) {
                    if b.type_id != type_id || b.referent != referent {
                        return Err(error(
                            span,
                            format!("variable `*{name}` is already bound to a different concept"),
                            &[],
                        ));
                    }
                    return Ok(b.node_id.clone());
                }
                let id = self.new_node(type_id.clone(), referent.clone());
                self.variables.insert(name, VariableBinding { node_id: id.clone(), type_id, referent });
                Ok(id)
            }
            None => Ok(self.new_node(type_id, referent)),
        }
    }

    fn new_node(&mut self, type_id: String, referent: Referent) -> String {
        self.next_node += 1;
        let id = format!("n{}", self.next_node);
        self.graph.insert_node(ConceptNode::new(id.clone(), type_id, referent)).expect("node ids are generated");
        id
    }
}
