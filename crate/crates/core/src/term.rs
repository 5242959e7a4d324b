use std::fmt;

use serde::{Deserialize, Serialize};

/// The three kinds of RDF term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TermKind {
    Iri,
    Literal,
    Blank,
}

/// Language tag or datatype attached to a literal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Annotation {
    Lang(String),
    Datatype(String),
}

/// An RDF term. Two terms are equal when kind, lexical form and literal
/// annotation all agree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Term {
    pub kind: TermKind,
    pub lexical: String,
    pub annotation: Option<Annotation>,
}

impl Term {
    pub fn iri(s: impl Into<String>) -> Self {
        Term { kind: TermKind::Iri, lexical: s.into(), annotation: None }
    }

    pub fn literal(s: impl Into<String>) -> Self {
        Term { kind: TermKind::Literal, lexical: s.into(), annotation: None }
    }

    pub fn lang_literal(s: impl Into<String>, lang: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Literal,
            lexical: s.into(),
            annotation: Some(Annotation::Lang(lang.into())),
        }
    }

    pub fn typed_literal(s: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term {
            kind: TermKind::Literal,
            lexical: s.into(),
            annotation: Some(Annotation::Datatype(datatype.into())),
        }
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term { kind: TermKind::Blank, lexical: label.into(), annotation: None }
    }

    pub fn is_iri(&self) -> bool {
        self.kind == TermKind::Iri
    }

    /// The term written in N-Triples syntax.
    pub fn to_ntriples(&self) -> String {
        self.to_string()
    }
}

pub(crate) fn escape_literal(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TermKind::Iri => write!(f, "<{}>", self.lexical),
            TermKind::Blank => write!(f, "_:{}", self.lexical),
            TermKind::Literal => {
                let mut s = String::with_capacity(self.lexical.len() + 2);
                s.push('"');
                escape_literal(&self.lexical, &mut s);
                s.push('"');
                match &self.annotation {
                    Some(Annotation::Lang(l)) => {
                        s.push('@');
                        s.push_str(l);
                    }
                    Some(Annotation::Datatype(d)) => {
                        s.push_str("^^<");
                        s.push_str(d);
                        s.push('>');
                    }
                    None => {}
                }
                f.write_str(&s)
            }
        }
    }
}

/// A subject, predicate, object statement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
