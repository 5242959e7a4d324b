use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::term::{Term, Triple};

/// Dense identifier of a vertex term within one [`Vocab`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

/// Dense identifier of an edge label within one [`Vocab`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LabelId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl LabelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A directed labelled data edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub src: VertexId,
    pub label: LabelId,
    pub dst: VertexId,
}

impl Edge {
    pub fn new(src: VertexId, label: LabelId, dst: VertexId) -> Self {
        Edge { src, label, dst }
    }
}

/// Bidirectional map between terms and dense ids.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    terms: Vec<Term>,
    ids: HashMap<Term, u32>,
}

impl Dictionary {
    pub fn intern(&mut self, t: &Term) -> u32 {
        if let Some(&id) = self.ids.get(t) {
            return id;
        }
        let id = u32::try_from(self.terms.len()).expect("dictionary exceeds u32 ids");
        self.terms.push(t.clone());
        self.ids.insert(t.clone(), id);
        id
    }

    pub fn get(&self, t: &Term) -> Option<u32> {
        self.ids.get(t).copied()
    }

    pub fn term(&self, id: u32) -> &Term {
        &self.terms[id as usize]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Term)> {
        self.terms.iter().enumerate().map(|(i, t)| (i as u32, t))
    }
}

/// Vertex and label dictionaries shared by a graph, its fragments and every
/// structure derived from them.
#[derive(Debug, Clone, Default)]
pub struct Vocab {
    pub vertices: Dictionary,
    pub labels: Dictionary,
}

impl Vocab {
    pub fn vertex(&self, v: VertexId) -> &Term {
        self.vertices.term(v.0)
    }

    pub fn label(&self, l: LabelId) -> &Term {
        self.labels.term(l.0)
    }

    pub fn vertex_id(&self, t: &Term) -> Option<VertexId> {
        self.vertices.get(t).map(VertexId)
    }

    pub fn label_id(&self, t: &Term) -> Option<LabelId> {
        self.labels.get(t).map(LabelId)
    }

    /// Renders an edge in N-Triples form without the trailing dot.
    pub fn edge_string(&self, e: &Edge) -> String {
        format!("{} {} {}", self.vertex(e.src), self.label(e.label), self.vertex(e.dst))
    }
}

/// Adjacency lookups over an edge set. Neighbour lists are sorted.
#[derive(Debug, Clone, Default)]
pub struct AdjIndex {
    out: HashMap<VertexId, Vec<(LabelId, VertexId)>>,
    inc: HashMap<VertexId, Vec<(LabelId, VertexId)>>,
    pairs: HashMap<(VertexId, VertexId), Vec<LabelId>>,
}

impl AdjIndex {
    pub fn build<'a>(edges: impl IntoIterator<Item = &'a Edge>) -> Self {
        let mut idx = AdjIndex::default();
        for e in edges {
            idx.out.entry(e.src).or_default().push((e.label, e.dst));
            idx.inc.entry(e.dst).or_default().push((e.label, e.src));
            idx.pairs.entry((e.src, e.dst)).or_default().push(e.label);
        }
        for v in idx.out.values_mut().chain(idx.inc.values_mut()) {
            v.sort_unstable();
            v.dedup();
        }
        for v in idx.pairs.values_mut() {
            v.sort_unstable();
            v.dedup();
        }
        idx
    }

    pub fn out(&self, v: VertexId) -> &[(LabelId, VertexId)] {
        self.out.get(&v).map_or(&[], Vec::as_slice)
    }

    pub fn inc(&self, v: VertexId) -> &[(LabelId, VertexId)] {
        self.inc.get(&v).map_or(&[], Vec::as_slice)
    }

    /// Labels of all edges from `a` to `b`.
    pub fn labels_between(&self, a: VertexId, b: VertexId) -> &[LabelId] {
        self.pairs.get(&(a, b)).map_or(&[], Vec::as_slice)
    }

    pub fn has_edge(&self, a: VertexId, l: LabelId, b: VertexId) -> bool {
        self.labels_between(a, b).binary_search(&l).is_ok()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.out(v).len() + self.inc(v).len()
    }
}

/// An RDF graph with deduplicated edges and interned terms.
#[derive(Debug, Clone)]
pub struct RdfGraph {
    vocab: Arc<Vocab>,
    edges: BTreeSet<Edge>,
    adj: AdjIndex,
}

impl RdfGraph {
    pub fn from_triples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> Self {
        let mut vocab = Vocab::default();
        let mut edges = BTreeSet::new();
        for t in triples {
            let s = VertexId(vocab.vertices.intern(&t.subject));
            let p = LabelId(vocab.labels.intern(&t.predicate));
            let o = VertexId(vocab.vertices.intern(&t.object));
            edges.insert(Edge::new(s, p, o));
        }
        Self::from_parts(Arc::new(vocab), edges)
    }

    pub fn from_parts(vocab: Arc<Vocab>, edges: BTreeSet<Edge>) -> Self {
        let adj = AdjIndex::build(&edges);
        RdfGraph { vocab, edges, adj }
    }

    pub fn vocab(&self) -> &Arc<Vocab> {
        &self.vocab
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn adj(&self) -> &AdjIndex {
        &self.adj
    }

    pub fn vertex_count(&self) -> usize {
        self.vocab.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vocab.vertices.len() as u32).map(VertexId)
    }

    pub fn term(&self, v: VertexId) -> &Term {
        self.vocab.vertex(v)
    }

    pub fn triples(&self) -> impl Iterator<Item = Triple> + '_ {
        self.edges.iter().map(|e| Triple {
            subject: self.vocab.vertex(e.src).clone(),
            predicate: self.vocab.label(e.label).clone(),
            object: self.vocab.vertex(e.dst).clone(),
        })
    }

    /// Edge set as sorted N-Triples lines, independent of interning order.
    pub fn canonical_lines(&self) -> Vec<String> {
        let mut v: Vec<String> = self.triples().map(|t| t.to_string()).collect();
        v.sort();
        v
    }
}

impl fmt::Display for RdfGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in self.canonical_lines() {
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}
