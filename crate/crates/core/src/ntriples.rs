//! Reader and writer for the line-oriented N-Triples subset.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::graph::RdfGraph;
use crate::term::{Term, Triple};

pub(crate) struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(s: &'a str) -> Self {
        Cursor { s, pos: 0 }
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.s[self.pos..]
    }

    pub(crate) fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    pub(crate) fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    pub(crate) fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    pub(crate) fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.s.len()
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if f(c)) {
            self.bump();
        }
        &self.s[start..self.pos]
    }

    /// Reads `<...>` and returns the text between the brackets.
    pub(crate) fn iri(&mut self) -> Result<String, String> {
        if !self.eat('<') {
            return Err("expected '<'".into());
        }
        let body = self.take_while(|c| c != '>' && !c.is_whitespace());
        if !self.eat('>') {
            return Err("unterminated IRI".into());
        }
        if body.is_empty() {
            return Err("empty IRI".into());
        }
        Ok(body.to_string())
    }

    fn blank(&mut self) -> Result<Term, String> {
        if !self.rest().starts_with("_:") {
            return Err("expected blank node".into());
        }
        self.pos += 2;
        let start = self.pos;
        self.take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'));
        while self.s[start..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        let label = &self.s[start..self.pos];
        if label.is_empty() {
            return Err("empty blank node label".into());
        }
        Ok(Term::blank(label))
    }

    fn quoted(&mut self) -> Result<String, String> {
        if !self.eat('"') {
            return Err("expected '\"'".into());
        }
        let mut out = String::new();
        loop {
            match self.bump() {
                None => return Err("unterminated literal".into()),
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('\'') => out.push('\''),
                    Some('n') => out.push('\n'),
                    Some('r') => out.push('\r'),
                    Some('t') => out.push('\t'),
                    Some('b') => out.push('\u{8}'),
                    Some('f') => out.push('\u{c}'),
                    Some(u @ ('u' | 'U')) => {
                        let n = if u == 'u' { 4 } else { 8 };
                        let hex = self.rest().get(..n).ok_or("truncated escape")?;
                        let cp = u32::from_str_radix(hex, 16).map_err(|_| "bad escape")?;
                        out.push(char::from_u32(cp).ok_or("invalid code point")?);
                        self.pos += n;
                    }
                    _ => return Err("bad escape".into()),
                },
                Some(c) => out.push(c),
            }
        }
    }

    /// Reads a literal with optional `@lang` or `^^<datatype>` suffix.
    pub(crate) fn literal(&mut self) -> Result<Term, String> {
        let lex = self.quoted()?;
        if self.eat('@') {
            let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
            if tag.is_empty() {
                return Err("empty language tag".into());
            }
            Ok(Term::lang_literal(lex, tag))
        } else if self.rest().starts_with("^^") {
            self.pos += 2;
            Ok(Term::typed_literal(lex, self.iri()?))
        } else {
            Ok(Term::literal(lex))
        }
    }

    pub(crate) fn term(&mut self) -> Result<Term, String> {
        match self.peek() {
            Some('<') => Ok(Term::iri(self.iri()?)),
            Some('"') => self.literal(),
            Some('_') => self.blank(),
            Some(c) => Err(format!("unexpected character '{c}'")),
            None => Err("unexpected end of line".into()),
        }
    }
}

/// Parses one N-Triples term such as `<http://x>` or `"v"@en`.
pub fn parse_term(s: &str) -> Result<Term, String> {
    let mut c = Cursor::new(s.trim());
    let t = c.term()?;
    c.skip_ws();
    if !c.at_end() {
        return Err(format!("trailing input after term: {}", c.rest()));
    }
    Ok(t)
}

fn parse_line(line: &str) -> Result<Option<Triple>, String> {
    let mut c = Cursor::new(line);
    c.skip_ws();
    if c.at_end() || c.peek() == Some('#') {
        return Ok(None);
    }
    let subject = c.term()?;
    if subject.kind == crate::term::TermKind::Literal {
        return Err("subject cannot be a literal".into());
    }
    c.skip_ws();
    if c.peek() != Some('<') {
        return Err("predicate must be an IRI".into());
    }
    let predicate = Term::iri(c.iri()?);
    c.skip_ws();
    let object = c.term()?;
    c.skip_ws();
    if !c.eat('.') {
        return Err("missing '.' terminator".into());
    }
    c.skip_ws();
    if !(c.at_end() || c.peek() == Some('#')) {
        return Err(format!("trailing input: {}", c.rest()));
    }
    Ok(Some(Triple { subject, predicate, object }))
}

/// Parses N-Triples text into triples, reporting the 1-based line of the
/// first malformed line.
pub fn parse_triples(text: &str) -> Result<Vec<Triple>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        match parse_line(line) {
            Ok(Some(t)) => out.push(t),
            Ok(None) => {}
            Err(message) => return Err(Error::Parse { line: i + 1, message }),
        }
    }
    Ok(out)
}

pub fn parse_ntriples_str(text: &str) -> Result<RdfGraph> {
    Ok(RdfGraph::from_triples(&parse_triples(text)?))
}

/// Reads a whole N-Triples stream. Invalid UTF-8 is a parse error.
pub fn parse_ntriples<R: BufRead>(mut input: R) -> Result<RdfGraph> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|e| {
        let upto = &e.as_bytes()[..e.utf8_error().valid_up_to()];
        let line = upto.iter().filter(|&&b| b == b'\n').count() + 1;
        Error::Parse { line, message: "invalid UTF-8".into() }
    })?;
    parse_ntriples_str(&text)
}

/// Writes the graph as sorted N-Triples lines.
pub fn write_ntriples<W: Write>(g: &RdfGraph, mut out: W) -> std::io::Result<()> {
    for line in g.canonical_lines() {
        writeln!(out, "{line}")?;
    }
    Ok(())
}
