//! Fragment construction from a vertex assignment and the edge-cut cost
//! model used to compare partitionings.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use num_rational::Ratio;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{AdjIndex, Edge, LabelId, RdfGraph, VertexId, Vocab};
use crate::hash::fnv1a64;
use crate::ntriples::parse_term;
use crate::query::QueryGraph;
use crate::term::Term;

/// Total map from the graph's vertices to fragment ids in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexAssignment {
    k: u32,
    home: Vec<u32>,
}

impl VertexAssignment {
    /// Builds an assignment from a per-term map. Every vertex of `g` must be
    /// listed, and no term outside `g` may be.
    pub fn from_terms(g: &RdfGraph, map: &BTreeMap<Term, u32>) -> Result<Self> {
        let mut home = Vec::with_capacity(g.vertex_count());
        for v in g.vertices() {
            let t = g.term(v);
            home.push(*map.get(t).ok_or_else(|| Error::UnassignedVertex(t.to_string()))?);
        }
        if let Some(t) = map.keys().find(|t| g.vocab().vertex_id(t).is_none()) {
            return Err(Error::Partition(format!("{t} does not occur in the data")));
        }
        let k = home.iter().copied().max().map_or(1, |m| m + 1);
        Ok(VertexAssignment { k, home })
    }

    /// Raw constructor indexed by vertex id.
    pub fn from_vec(k: u32, home: Vec<u32>) -> Result<Self> {
        if k == 0 {
            return Err(Error::ZeroFragments);
        }
        if let Some(bad) = home.iter().find(|&&h| h >= k) {
            return Err(Error::Partition(format!("fragment id {bad} out of range for k={k}")));
        }
        Ok(VertexAssignment { k, home })
    }

    pub fn fragment_count(&self) -> u32 {
        self.k
    }

    pub fn fragment_of(&self, v: VertexId) -> u32 {
        self.home[v.index()]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.home
    }

    /// Partition-file text: one `<term>\t<id>` line per vertex, sorted by
    /// term.
    pub fn to_file_string(&self, g: &RdfGraph) -> String {
        let mut lines: Vec<String> = g
            .vertices()
            .map(|v| format!("{}\t{}", g.term(v), self.fragment_of(v)))
            .collect();
        lines.sort();
        let mut s = String::new();
        for l in lines {
            s.push_str(&l);
            s.push('\n');
        }
        s
    }
}

/// Parses partition-file text against the vertices of `g`. The term column
/// is either an N-Triples term or a bare lexical form that names exactly
/// one vertex.
pub fn parse_partition_file(g: &RdfGraph, text: &str) -> Result<VertexAssignment> {
    let mut by_lexical: BTreeMap<&str, Vec<&Term>> = BTreeMap::new();
    for v in g.vertices() {
        let t = g.term(v);
        by_lexical.entry(t.lexical.as_str()).or_default().push(t);
    }
    let resolve = |text: &str| -> std::result::Result<Term, String> {
        if let Ok(t) = parse_term(text) {
            return Ok(t);
        }
        match by_lexical.get(text).map(Vec::as_slice) {
            Some([t]) => Ok((*t).clone()),
            Some(_) => Err(format!("'{text}' names several vertices; write it as an N-Triples term")),
            None => Err(format!("'{text}' does not occur in the data")),
        }
    };
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::PartitionFile { line: i + 1, message };
        let (term, id) = line
            .rsplit_once(['\t', ' '])
            .ok_or_else(|| bad("expected '<term>\\t<fragment-id>'".into()))?;
        let term = resolve(term.trim()).map_err(bad)?;
        let id: u32 = id.trim().parse().map_err(|_| bad(format!("bad fragment id '{id}'")))?;
        if let Some(prev) = map.insert(term.clone(), id) {
            if prev != id {
                return Err(bad(format!("{term} assigned to both {prev} and {id}")));
            }
        }
    }
    VertexAssignment::from_terms(g, &map)
}

/// Assigns each vertex to `fnv1a64(lexical form) mod k`.
pub fn hash_partition(g: &RdfGraph, k: u32) -> Result<VertexAssignment> {
    if k == 0 {
        return Err(Error::ZeroFragments);
    }
    let home = g
        .vertices()
        .map(|v| (fnv1a64(g.term(v).lexical.as_bytes()) % u64::from(k)) as u32)
        .collect();
    Ok(VertexAssignment { k, home })
}

/// The subgraph hosted by one site.
#[derive(Debug, Clone)]
pub struct Fragment {
    pub id: u32,
    vocab: Arc<Vocab>,
    internal: BTreeSet<VertexId>,
    extended: BTreeSet<VertexId>,
    internal_edges: BTreeSet<Edge>,
    crossing_edges: BTreeSet<Edge>,
    labels: BTreeSet<LabelId>,
    adj: AdjIndex,
}

impl Fragment {
    pub fn vocab(&self) -> &Arc<Vocab> {
        &self.vocab
    }

    pub fn internal_vertices(&self) -> &BTreeSet<VertexId> {
        &self.internal
    }

    pub fn extended_vertices(&self) -> &BTreeSet<VertexId> {
        &self.extended
    }

    pub fn internal_edges(&self) -> &BTreeSet<Edge> {
        &self.internal_edges
    }

    pub fn crossing_edges(&self) -> &BTreeSet<Edge> {
        &self.crossing_edges
    }

    pub fn labels(&self) -> &BTreeSet<LabelId> {
        &self.labels
    }

    /// Adjacency over internal and crossing edges together.
    pub fn adj(&self) -> &AdjIndex {
        &self.adj
    }

    pub fn is_internal(&self, v: VertexId) -> bool {
        self.internal.contains(&v)
    }

    pub fn is_extended(&self, v: VertexId) -> bool {
        self.extended.contains(&v)
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.is_internal(v) || self.is_extended(v)
    }

    pub fn vertex_count(&self) -> usize {
        self.internal.len() + self.extended.len()
    }

    pub fn edge_count(&self) -> usize {
        self.internal_edges.len() + self.crossing_edges.len()
    }

    pub fn is_crossing(&self, e: &Edge) -> bool {
        self.crossing_edges.contains(e)
    }

    pub fn term(&self, v: VertexId) -> &Term {
        self.vocab.vertex(v)
    }
}

/// A graph split into fragments with crossing edges replicated on both
/// sides.
#[derive(Debug, Clone)]
pub struct DistributedGraph {
    vocab: Arc<Vocab>,
    fragments: Vec<Fragment>,
    home: Vec<u32>,
}

impl DistributedGraph {
    pub fn vocab(&self) -> &Arc<Vocab> {
        &self.vocab
    }

    pub fn fragments(&self) -> &[Fragment] {
        &self.fragments
    }

    pub fn fragment(&self, id: u32) -> &Fragment {
        &self.fragments[id as usize]
    }

    pub fn home_of(&self, v: VertexId) -> u32 {
        self.home[v.index()]
    }

    pub fn vertex_home(&self, t: &Term) -> Option<u32> {
        self.vocab.vertex_id(t).map(|v| self.home_of(v))
    }

    /// Every crossing edge once.
    pub fn crossing_edges(&self) -> BTreeSet<Edge> {
        self.fragments.iter().flat_map(|f| f.crossing_edges.iter().copied()).collect()
    }

    /// Internal edges of every fragment plus each crossing edge once: the
    /// source graph's edge set.
    pub fn flatten(&self) -> BTreeSet<Edge> {
        let mut all: BTreeSet<Edge> =
            self.fragments.iter().flat_map(|f| f.internal_edges.iter().copied()).collect();
        all.extend(self.crossing_edges());
        all
    }

    /// The whole graph reassembled, sharing this graph's vocabulary.
    pub fn to_graph(&self) -> RdfGraph {
        RdfGraph::from_parts(self.vocab.clone(), self.flatten())
    }
}

/// Splits `g` according to `a`.
pub fn build_distributed(g: &RdfGraph, a: &VertexAssignment) -> Result<DistributedGraph> {
    if a.home.len() != g.vertex_count() {
        return Err(Error::Partition(format!(
            "assignment covers {} vertices, graph has {}",
            a.home.len(),
            g.vertex_count()
        )));
    }
    let k = a.k as usize;
    type Parts = (BTreeSet<VertexId>, BTreeSet<VertexId>, BTreeSet<Edge>, BTreeSet<Edge>);
    let mut parts: Vec<Parts> = vec![Default::default(); k];
    for v in g.vertices() {
        parts[a.fragment_of(v) as usize].0.insert(v);
    }
    for e in g.edges() {
        let fs = a.fragment_of(e.src) as usize;
        let fd = a.fragment_of(e.dst) as usize;
        if fs == fd {
            parts[fs].2.insert(*e);
        } else {
            parts[fs].3.insert(*e);
            parts[fs].1.insert(e.dst);
            parts[fd].3.insert(*e);
            parts[fd].1.insert(e.src);
        }
    }
    let fragments = parts
        .into_iter()
        .enumerate()
        .map(|(i, (internal, extended, internal_edges, crossing_edges))| {
            let adj = AdjIndex::build(internal_edges.iter().chain(&crossing_edges));
            let labels = internal_edges.iter().chain(&crossing_edges).map(|e| e.label).collect();
            Fragment {
                id: i as u32,
                vocab: g.vocab().clone(),
                internal,
                extended,
                internal_edges,
                crossing_edges,
                labels,
                adj,
            }
        })
        .collect();
    Ok(DistributedGraph { vocab: g.vocab().clone(), fragments, home: a.home.clone() })
}

pub type Rational = Ratio<u128>;

/// Cost-model figures for one vertex with at least one crossing edge.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexCost {
    pub term: Term,
    pub crossing_degree: u64,
    pub probability: Rational,
    pub expectation: Rational,
}

/// Edge-cut cost of a partitioning, in exact rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionCostReport {
    /// Vertices with nonzero crossing degree, sorted by N-Triples form.
    pub per_vertex: Vec<VertexCost>,
    pub crossing_edges: u64,
    pub e_total: Rational,
    pub fragment_edges: Vec<u64>,
    pub max_fragment_edges: u64,
    pub cost: Rational,
}

fn decimal(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn exact(r: &Rational) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl PartitionCostReport {
    /// Sum of the per-vertex probabilities; one whenever any edge crosses.
    pub fn probability_sum(&self) -> Rational {
        self.per_vertex.iter().fold(Rational::from_integer(0), |acc, v| acc + v.probability)
    }

    pub fn to_json(&self) -> Value {
        let per_vertex: Vec<Value> = self
            .per_vertex
            .iter()
            .map(|v| {
                json!({
                    "vertex": v.term.to_string(),
                    "crossing_degree": v.crossing_degree,
                    "p": decimal(&v.probability),
                    "p_exact": exact(&v.probability),
                    "expectation": decimal(&v.expectation),
                    "expectation_exact": exact(&v.expectation),
                })
            })
            .collect();
        json!({
            "per_vertex": per_vertex,
            "crossing_edges": self.crossing_edges,
            "e_total": decimal(&self.e_total),
            "e_total_exact": exact(&self.e_total),
            "fragment_edges": self.fragment_edges,
            "max_fragment_edges": self.max_fragment_edges,
            "cost": decimal(&self.cost),
            "cost_exact": exact(&self.cost),
        })
    }

    pub fn cost_decimal(&self) -> f64 {
        decimal(&self.cost)
    }

    pub fn cost_exact(&self) -> String {
        exact(&self.cost)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "crossing edges {}, expectation {}, max fragment edges {}, cost {}",
            self.crossing_edges,
            exact(&self.e_total),
            self.max_fragment_edges,
            exact(&self.cost)
        );
        s
    }
}

/// Evaluates the partitioning cost: each crossing edge contributes to the
/// crossing degree of both endpoints, a vertex's probability is its crossing
/// degree over twice the crossing-edge count, its expectation is degree
/// times probability, and the cost is the summed expectation times the edge
/// count of the largest fragment.
pub fn partition_cost(d: &DistributedGraph) -> PartitionCostReport {
    let crossing = d.crossing_edges();
    let mut degree: BTreeMap<VertexId, u64> = BTreeMap::new();
    for e in &crossing {
        *degree.entry(e.src).or_default() += 1;
        *degree.entry(e.dst).or_default() += 1;
    }
    let ec = crossing.len() as u128;
    let mut per_vertex: Vec<VertexCost> = degree
        .iter()
        .map(|(&v, &deg)| {
            let p = Rational::new(u128::from(deg), 2 * ec);
            VertexCost {
                term: d.vocab().vertex(v).clone(),
                crossing_degree: deg,
                probability: p,
                expectation: p * u128::from(deg),
            }
        })
        .collect();
    per_vertex.sort_by_cached_key(|v| v.term.to_string());
    let e_total = per_vertex.iter().fold(Rational::from_integer(0), |acc, v| acc + v.expectation);
    let fragment_edges: Vec<u64> = d.fragments().iter().map(|f| f.edge_count() as u64).collect();
    let max_fragment_edges = fragment_edges.iter().copied().max().unwrap_or(0);
    PartitionCostReport {
        per_vertex,
        crossing_edges: ec as u64,
        e_total,
        fragment_edges,
        max_fragment_edges,
        cost: e_total * u128::from(max_fragment_edges),
    }
}

/// Worst-case number of LEC features per fragment, `|crossing edges| ^
/// |query edges|`, saturating.
pub fn estimate_lec_count(d: &DistributedGraph, q: &QueryGraph) -> Vec<u64> {
    let exp = u32::try_from(q.edge_count()).unwrap_or(u32::MAX);
    d.fragments()
        .iter()
        .map(|f| (f.crossing_edges().len() as u64).saturating_pow(exp))
        .collect()
}

/// Saturating sum of [`estimate_lec_count`].
pub fn estimate_lec_total(d: &DistributedGraph, q: &QueryGraph) -> u64 {
    estimate_lec_count(d, q).into_iter().fold(0u64, u64::saturating_add)
}
