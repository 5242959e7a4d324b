use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{LabelId, VertexId, Vocab};
use crate::ntriples::Cursor;
use crate::term::Term;

const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";

/// A query vertex or edge label: either a named variable or a fixed term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum QueryTerm {
    Var(String),
    Const(Term),
}

impl QueryTerm {
    pub fn is_var(&self) -> bool {
        matches!(self, QueryTerm::Var(_))
    }

    pub fn var_name(&self) -> Option<&str> {
        match self {
            QueryTerm::Var(n) => Some(n),
            QueryTerm::Const(_) => None,
        }
    }
}

impl fmt::Display for QueryTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryTerm::Var(n) => write!(f, "?{n}"),
            QueryTerm::Const(t) => write!(f, "{t}"),
        }
    }
}

/// One triple pattern, with endpoints given as vertex positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryEdge {
    pub src: usize,
    pub label: QueryTerm,
    pub dst: usize,
}

/// A connected basic graph pattern. Vertex order is the order of first
/// appearance and fixes the positions used by signatures and serialization
/// vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryGraph {
    vertices: Vec<QueryTerm>,
    edges: Vec<QueryEdge>,
    projection: Vec<String>,
    incident: Vec<Vec<usize>>,
}

impl QueryGraph {
    pub fn new(vertices: Vec<QueryTerm>, edges: Vec<QueryEdge>) -> Result<Self> {
        Self::with_projection(vertices, edges, Vec::new())
    }

    pub fn with_projection(
        vertices: Vec<QueryTerm>,
        edges: Vec<QueryEdge>,
        projection: Vec<String>,
    ) -> Result<Self> {
        if edges.is_empty() {
            return Err(Error::EmptyQuery);
        }
        if vertices.len() > 64 {
            return Err(Error::QueryTooLarge(vertices.len()));
        }
        let mut incident = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.src >= vertices.len() || e.dst >= vertices.len() {
                return Err(Error::QuerySyntax(format!("edge {i} references a missing vertex")));
            }
            if let QueryTerm::Const(t) = &e.label {
                if !t.is_iri() {
                    return Err(Error::QuerySyntax(format!("predicate {t} is not an IRI")));
                }
            }
            incident[e.src].push(i);
            if e.dst != e.src {
                incident[e.dst].push(i);
            }
        }
        let q = QueryGraph { vertices, edges, projection, incident };
        if !q.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(q)
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[QueryTerm] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &QueryTerm {
        &self.vertices[i]
    }

    pub fn edges(&self) -> &[QueryEdge] {
        &self.edges
    }

    pub fn edge(&self, i: usize) -> &QueryEdge {
        &self.edges[i]
    }

    /// Indices of edges touching vertex `v`; a self-loop appears once.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// Distinct undirected neighbours of `v`, excluding `v` itself.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self.incident[v]
            .iter()
            .map(|&i| {
                let e = &self.edges[i];
                if e.src == v { e.dst } else { e.src }
            })
            .filter(|&w| w != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn projection(&self) -> &[String] {
        &self.projection
    }

    pub fn is_variable(&self, v: usize) -> bool {
        self.vertices[v].is_var()
    }

    /// Positions of the variable vertices.
    pub fn variable_vertices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.is_variable(v)).collect()
    }

    pub fn variable_position(&self, name: &str) -> Result<usize> {
        let name = name.trim_start_matches(['?', '$']);
        self.vertices
            .iter()
            .position(|t| t.var_name() == Some(name))
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    /// Vertices touched by every edge. Non-empty exactly for star-shaped
    /// queries.
    pub fn star_centers(&self) -> Vec<usize> {
        (0..self.vertices.len())
            .filter(|&c| self.edges.iter().all(|e| e.src == c || e.dst == c))
            .collect()
    }

    /// Query edges grouped by ordered endpoint pair.
    pub fn pair_groups(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut m: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, e) in self.edges.iter().enumerate() {
            m.entry((e.src, e.dst)).or_default().push(i);
        }
        m
    }
}

impl fmt::Display for QueryGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT")?;
        if self.projection.is_empty() {
            f.write_str(" *")?;
        }
        for p in &self.projection {
            write!(f, " ?{p}")?;
        }
        f.write_str(" WHERE {")?;
        for e in &self.edges {
            write!(f, " {} {} {} .", self.vertices[e.src], e.label, self.vertices[e.dst])?;
        }
        f.write_str(" }")
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Iri(String),
    PName(String, String),
    Var(String),
    Lit(Term),
    Blank(String),
    Word(String),
    Punct(char),
}

fn describe(tok: Option<&Tok>) -> String {
    match tok {
        None => "end of input".into(),
        Some(Tok::Iri(i)) => format!("<{i}>"),
        Some(Tok::PName(p, l)) => format!("{p}:{l}"),
        Some(Tok::Var(v)) => format!("?{v}"),
        Some(Tok::Lit(t)) => t.to_string(),
        Some(Tok::Blank(b)) => format!("_:{b}"),
        Some(Tok::Word(w)) => format!("'{w}'"),
        Some(Tok::Punct(c)) => format!("'{c}'"),
    }
}

const UNSUPPORTED: &[&str] = &[
    "OPTIONAL", "FILTER", "UNION", "MINUS", "GRAPH", "BIND", "VALUES", "SERVICE", "ORDER", "GROUP",
    "LIMIT", "OFFSET", "HAVING", "CONSTRUCT", "ASK", "DESCRIBE",
];

fn tokenize(text: &str) -> Result<Vec<Tok>> {
    let mut c = Cursor::new(text);
    let mut out = Vec::new();
    let syntax = |m: String| Error::QuerySyntax(m);
    loop {
        c.skip_ws();
        let Some(ch) = c.peek() else { break };
        match ch {
            '#' => {
                while !matches!(c.bump(), None | Some('\n')) {}
            }
            '<' => out.push(Tok::Iri(c.iri().map_err(syntax)?)),
            '"' => out.push(Tok::Lit(c.literal().map_err(syntax)?)),
            '?' | '$' => {
                c.bump();
                let name = word(&mut c);
                if name.is_empty() {
                    return Err(Error::QuerySyntax("empty variable name".into()));
                }
                out.push(Tok::Var(name));
            }
            '{' | '}' | '.' | ';' | ',' | '(' | ')' | '*' => {
                c.bump();
                out.push(Tok::Punct(ch));
            }
            '_' if c.rest().starts_with("_:") => {
                c.bump();
                c.bump();
                out.push(Tok::Blank(word(&mut c)));
            }
            ch if ch.is_alphanumeric() || ch == '_' || ch == ':' => {
                let w = word(&mut c);
                if c.eat(':') {
                    let local = word(&mut c);
                    out.push(Tok::PName(w, local));
                } else if let Some(prefix) = w.strip_suffix(':') {
                    out.push(Tok::PName(prefix.to_string(), String::new()));
                } else {
                    out.push(Tok::Word(w));
                }
            }
            other => return Err(Error::QuerySyntax(format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

fn word(c: &mut Cursor<'_>) -> String {
    let mut s = String::new();
    while let Some(ch) = c.peek() {
        if ch.is_alphanumeric() || matches!(ch, '_' | '-') {
            s.push(ch);
            c.bump();
        } else if ch == '.' {
            // A dot is part of a name only when more name characters follow.
            let rest = &c.rest()[1..];
            if rest.chars().next().is_some_and(|n| n.is_alphanumeric() || n == '_') {
                s.push(ch);
                c.bump();
            } else {
                break;
            }
        } else {
            break;
        }
    }
    s
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    prefixes: HashMap<String, String>,
    vertices: Vec<QueryTerm>,
    index: HashMap<QueryTerm, usize>,
    edges: Vec<QueryEdge>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn is_word(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn is_punct(&self, p: char) -> bool {
        self.peek() == Some(&Tok::Punct(p))
    }

    fn expect_punct(&mut self, p: char) -> Result<()> {
        if self.is_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::QuerySyntax(format!("expected '{p}', found {}", describe(self.peek()))))
        }
    }

    fn check_unsupported(&self) -> Result<()> {
        if let Some(Tok::Word(w)) = self.peek() {
            let up = w.to_ascii_uppercase();
            if UNSUPPORTED.contains(&up.as_str()) {
                return Err(Error::Unsupported(up));
            }
        }
        Ok(())
    }

    fn resolve(&self, prefix: &str, local: &str) -> Result<Term> {
        let base = self
            .prefixes
            .get(prefix)
            .ok_or_else(|| Error::QuerySyntax(format!("undeclared prefix '{prefix}:'")))?;
        Ok(Term::iri(format!("{base}{local}")))
    }

    fn node(&mut self) -> Result<QueryTerm> {
        self.check_unsupported()?;
        let t = match self.next() {
            Some(Tok::Var(v)) => QueryTerm::Var(v),
            Some(Tok::Iri(i)) => QueryTerm::Const(Term::iri(i)),
            Some(Tok::PName(p, l)) => QueryTerm::Const(self.resolve(&p, &l)?),
            Some(Tok::Lit(l)) => QueryTerm::Const(l),
            Some(Tok::Blank(b)) => QueryTerm::Const(Term::blank(b)),
            Some(Tok::Word(w)) if w.chars().all(|c| c.is_ascii_digit()) => {
                QueryTerm::Const(Term::typed_literal(w, XSD_INTEGER))
            }
            Some(Tok::Word(w)) => QueryTerm::Const(Term::iri(w)),
            Some(Tok::Punct('{')) => return Err(Error::Unsupported("nested group pattern".into())),
            other => return Err(Error::QuerySyntax(format!("expected a term, found {}", describe(other.as_ref())))),
        };
        Ok(t)
    }

    fn predicate(&mut self) -> Result<QueryTerm> {
        if self.is_word("a") {
            self.pos += 1;
            return Ok(QueryTerm::Const(Term::iri(RDF_TYPE)));
        }
        match self.node()? {
            QueryTerm::Const(t) if !t.is_iri() => {
                Err(Error::QuerySyntax(format!("predicate {t} is not an IRI")))
            }
            p => Ok(p),
        }
    }

    fn vertex(&mut self, t: QueryTerm) -> usize {
        if let Some(&i) = self.index.get(&t) {
            return i;
        }
        self.vertices.push(t.clone());
        self.index.insert(t, self.vertices.len() - 1);
        self.vertices.len() - 1
    }

    fn triples_block(&mut self, closing: Option<char>) -> Result<()> {
        loop {
            match self.peek() {
                None if closing.is_none() => return Ok(()),
                None => return Err(Error::QuerySyntax("unterminated group".into())),
                Some(Tok::Punct(c)) if Some(*c) == closing => return Ok(()),
                Some(Tok::Punct('.')) => {
                    self.pos += 1;
                    continue;
                }
                _ => {}
            }
            let s = self.node()?;
            let s = self.vertex(s);
            loop {
                let p = self.predicate()?;
                loop {
                    let o = self.node()?;
                    let o = self.vertex(o);
                    self.edges.push(QueryEdge { src: s, label: p.clone(), dst: o });
                    if self.is_punct(',') {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                if self.is_punct(';') {
                    self.pos += 1;
                    while self.is_punct(';') {
                        self.pos += 1;
                    }
                    if self.is_punct('.') || closing.is_some_and(|c| self.is_punct(c)) {
                        break;
                    }
                } else {
                    break;
                }
            }
            match self.peek() {
                Some(Tok::Punct('.')) => self.pos += 1,
                Some(Tok::Punct(c)) if Some(*c) == closing => {}
                None if closing.is_none() => {}
                _ => {
                    self.check_unsupported()?;
                    return Err(Error::QuerySyntax(format!(
                        "expected '.' after triple pattern, found {}",
                        describe(self.peek())
                    )));
                }
            }
        }
    }
}

/// Parses a SELECT query whose WHERE clause is a conjunction of triple
/// patterns. A bare list of triple patterns is also accepted.
pub fn parse_bgp(text: &str) -> Result<QueryGraph> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        prefixes: HashMap::new(),
        vertices: Vec::new(),
        index: HashMap::new(),
        edges: Vec::new(),
    };
    while p.is_word("PREFIX") {
        p.pos += 1;
        let prefix = match p.next() {
            Some(Tok::PName(pfx, local)) if local.is_empty() => pfx,
            other => return Err(Error::QuerySyntax(format!("bad PREFIX name {other:?}"))),
        };
        let Some(Tok::Iri(iri)) = p.next() else {
            return Err(Error::QuerySyntax("PREFIX needs an IRI".into()));
        };
        p.prefixes.insert(prefix, iri);
    }
    let mut projection = Vec::new();
    if p.is_word("SELECT") {
        p.pos += 1;
        if p.is_word("DISTINCT") || p.is_word("REDUCED") {
            p.pos += 1;
        }
        loop {
            match p.peek() {
                Some(Tok::Var(v)) => {
                    projection.push(v.clone());
                    p.pos += 1;
                }
                Some(Tok::Punct(',')) | Some(Tok::Punct('*')) => p.pos += 1,
                _ => break,
            }
        }
        if p.is_word("WHERE") {
            p.pos += 1;
        }
        p.expect_punct('{')?;
        p.triples_block(Some('}'))?;
        p.expect_punct('}')?;
        while p.is_punct('.') {
            p.pos += 1;
        }
        p.check_unsupported()?;
        if let Some(t) = p.peek() {
            return Err(Error::QuerySyntax(format!("unexpected trailing token {t:?}")));
        }
    } else {
        p.check_unsupported()?;
        p.triples_block(None)?;
    }
    for v in &projection {
        if !p.vertices.iter().any(|t| t.var_name() == Some(v))
            && !p.edges.iter().any(|e| e.label.var_name() == Some(v))
        {
            return Err(Error::UnknownVariable(v.clone()));
        }
    }
    QueryGraph::with_projection(p.vertices, p.edges, projection)
}

/// Constraint on what a query vertex may be bound to in a given vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexSlot {
    Any,
    Fixed(VertexId),
    /// A constant that does not occur in the data.
    Absent,
}

/// Constraint on the label of a query edge in a given vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelSlot {
    Any,
    Fixed(LabelId),
    Absent,
}

/// A query bound to the dictionaries of one data graph.
#[derive(Debug, Clone)]
pub struct ResolvedQuery {
    pub query: QueryGraph,
    pub vertex_slots: Vec<VertexSlot>,
    pub label_slots: Vec<LabelSlot>,
    /// Query edges grouped by ordered endpoint pair; used for the per-pair
    /// injective label mapping.
    pub pairs: BTreeMap<(usize, usize), Vec<usize>>,
}

impl ResolvedQuery {
    pub fn new(query: &QueryGraph, vocab: &Vocab) -> Self {
        let vertex_slots = query
            .vertices()
            .iter()
            .map(|t| match t {
                QueryTerm::Var(_) => VertexSlot::Any,
                QueryTerm::Const(c) => vocab.vertex_id(c).map_or(VertexSlot::Absent, VertexSlot::Fixed),
            })
            .collect();
        let label_slots = query
            .edges()
            .iter()
            .map(|e| match &e.label {
                QueryTerm::Var(_) => LabelSlot::Any,
                QueryTerm::Const(c) => vocab.label_id(c).map_or(LabelSlot::Absent, LabelSlot::Fixed),
            })
            .collect();
        ResolvedQuery { query: query.clone(), vertex_slots, label_slots, pairs: query.pair_groups() }
    }

    pub fn vertex_ok(&self, v: usize, x: VertexId) -> bool {
        match self.vertex_slots[v] {
            VertexSlot::Any => true,
            VertexSlot::Fixed(y) => x == y,
            VertexSlot::Absent => false,
        }
    }

    pub fn label_ok(&self, e: usize, l: LabelId) -> bool {
        match self.label_slots[e] {
            LabelSlot::Any => true,
            LabelSlot::Fixed(m) => l == m,
            LabelSlot::Absent => false,
        }
    }

    pub fn n(&self) -> usize {
        self.query.vertex_count()
    }
}
