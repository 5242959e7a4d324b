//! Seeded generator for small random instances: a graph, a vertex
//! assignment over 2 to 4 fragments, and a connected query sampled from a
//! walk through the data so that many instances have answers.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::RdfGraph;
use crate::partition::{build_distributed, DistributedGraph, VertexAssignment};
use crate::query::{QueryEdge, QueryGraph, QueryTerm};
use crate::term::{Term, Triple};

pub const SYNTH_BASE: &str = "http://synth.example/";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub max_vertices: usize,
    pub min_fragments: u32,
    pub max_fragments: u32,
    pub max_query_edges: usize,
    pub max_variables: usize,
    pub labels: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            max_vertices: 12,
            min_fragments: 2,
            max_fragments: 4,
            max_query_edges: 5,
            max_variables: 3,
            labels: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub seed: u64,
    pub graph: RdfGraph,
    pub assignment: VertexAssignment,
    pub distributed: DistributedGraph,
    pub query: QueryGraph,
}

fn iri(local: impl std::fmt::Display) -> Term {
    Term::iri(format!("{SYNTH_BASE}{local}"))
}

fn label(i: usize) -> Term {
    iri(["p", "q", "r", "s", "t"].get(i).copied().unwrap_or("u"))
}

/// Builds one instance from `seed` under the default configuration.
pub fn random_instance(seed: u64) -> Instance {
    random_instance_with(seed, &SynthConfig::default())
}

pub fn random_instance_with(seed: u64, cfg: &SynthConfig) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=cfg.max_vertices.max(3));
    let terms: Vec<Term> = (0..n)
        .map(|i| if i >= 2 && rng.gen_bool(0.15) { Term::literal(format!("l{i}")) } else { iri(format!("v{i}")) })
        .collect();
    let subjects: Vec<usize> = (0..n).filter(|&i| terms[i].is_iri()).collect();

    let m = rng.gen_range(n..=2 * n);
    let mut triples = BTreeSet::new();
    // Chain through every vertex first so that no vertex is isolated.
    for (i, term) in terms.iter().enumerate().take(n).skip(1) {
        let (a, b) = if term.is_iri() && rng.gen_bool(0.5) {
            (i, rng.gen_range(0..i))
        } else {
            let others: Vec<usize> = subjects.iter().copied().filter(|&s| s != i).collect();
            (others.choose(&mut rng).copied().unwrap_or(0), i)
        };
        triples.insert((a, rng.gen_range(0..cfg.labels), b));
    }
    while triples.len() < m {
        let s = *subjects.choose(&mut rng).expect("vertex 0 is an IRI");
        let o = rng.gen_range(0..n);
        if s == o && !rng.gen_bool(0.1) {
            continue;
        }
        triples.insert((s, rng.gen_range(0..cfg.labels), o));
    }
    let triples: Vec<(usize, usize, usize)> = triples.into_iter().collect();
    let graph = RdfGraph::from_triples(
        &triples
            .iter()
            .map(|&(s, p, o)| Triple { subject: terms[s].clone(), predicate: label(p), object: terms[o].clone() })
            .collect::<Vec<_>>(),
    );

    let k = rng.gen_range(cfg.min_fragments..=cfg.max_fragments);
    let homes: BTreeMap<Term, u32> = terms.iter().map(|t| (t.clone(), rng.gen_range(0..k))).collect();
    let home_vec: Vec<u32> = graph.vertices().map(|v| homes[graph.term(v)]).collect();
    let assignment = VertexAssignment::from_vec(k, home_vec).expect("ids below k");
    let distributed = build_distributed(&graph, &assignment).expect("assignment covers graph");

    let query = walk_query(&mut rng, &terms, &triples, cfg);
    Instance { seed, graph, assignment, distributed, query }
}

fn walk_query(
    rng: &mut ChaCha8Rng,
    terms: &[Term],
    triples: &[(usize, usize, usize)],
    cfg: &SynthConfig,
) -> QueryGraph {
    let want = rng.gen_range(1..=cfg.max_query_edges);
    let mut picked: Vec<(usize, usize, usize)> = vec![*triples.choose(rng).expect("graph has edges")];
    let mut touched: BTreeSet<usize> = [picked[0].0, picked[0].2].into_iter().collect();
    for _ in 0..want * 4 {
        if picked.len() >= want {
            break;
        }
        let frontier: Vec<&(usize, usize, usize)> = triples
            .iter()
            .filter(|t| !picked.contains(t) && (touched.contains(&t.0) || touched.contains(&t.2)))
            .collect();
        let Some(&&t) = frontier.choose(rng) else { break };
        picked.push(t);
        touched.insert(t.0);
        touched.insert(t.2);
    }

    let mut data_vertices: Vec<usize> = Vec::new();
    for &(s, _, o) in &picked {
        for v in [s, o] {
            if !data_vertices.contains(&v) {
                data_vertices.push(v);
            }
        }
    }
    debug_assert_eq!(data_vertices.len(), touched.len());
    let pos: BTreeMap<usize, usize> = data_vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut var_budget = rng.gen_range(1..=cfg.max_variables);
    let mut order: Vec<usize> = (0..data_vertices.len()).collect();
    order.shuffle(rng);
    let var_vertices: BTreeSet<usize> = order.into_iter().take(var_budget).collect();
    var_budget -= var_vertices.len();

    let vertices: Vec<QueryTerm> = data_vertices
        .iter()
        .enumerate()
        .map(|(i, &dv)| {
            if var_vertices.contains(&i) {
                QueryTerm::Var(format!("x{i}"))
            } else if rng.gen_bool(0.1) {
                // Occasionally a constant that is not where the walk went,
                // as long as it does not duplicate another query vertex.
                let other = rng.gen_range(0..terms.len());
                let pick = if data_vertices.contains(&other) { dv } else { other };
                QueryTerm::Const(terms[pick].clone())
            } else {
                QueryTerm::Const(terms[dv].clone())
            }
        })
        .collect();
    let edges: Vec<QueryEdge> = picked
        .iter()
        .enumerate()
        .map(|(i, &(s, p, o))| {
            let label = if var_budget > 0 && rng.gen_bool(0.2) {
                var_budget -= 1;
                QueryTerm::Var(format!("e{i}"))
            } else if rng.gen_bool(0.1) {
                QueryTerm::Const(label(rng.gen_range(0..cfg.labels)))
            } else {
                QueryTerm::Const(label(p))
            };
            QueryEdge { src: pos[&s], label, dst: pos[&o] }
        })
        .collect();
    QueryGraph::new(vertices, edges).expect("walk is connected")
}

/// `count` instances with seeds `base..base + count`.
pub fn corpus(base: u64, count: usize) -> Vec<Instance> {
    (0..count as u64).map(|i| random_instance(base + i)).collect()
}

/// Adds `extra` fresh vertices to every fragment, each wired only to
/// vertices already homed in the same fragment, so the crossing edges stay
/// exactly as they were. Returns the grown graph and distribution.
pub fn grow_internal(inst: &Instance, extra: usize, seed: u64) -> (RdfGraph, DistributedGraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = &inst.graph;
    let mut triples: Vec<Triple> = g.triples().collect();
    let mut homes: BTreeMap<Term, u32> = g.vertices().map(|v| (g.term(v).clone(), inst.assignment.fragment_of(v))).collect();
    for f in 0..inst.assignment.fragment_count() {
        let mut members: Vec<Term> = homes.iter().filter(|(t, &h)| h == f && t.is_iri()).map(|(t, _)| t.clone()).collect();
        for j in 0..extra {
            let fresh = iri(format!("grow/{f}/{j}"));
            if let Some(anchor) = members.choose(&mut rng) {
                let (s, o) = if rng.gen_bool(0.5) { (anchor.clone(), fresh.clone()) } else { (fresh.clone(), anchor.clone()) };
                triples.push(Triple { subject: s, predicate: label(rng.gen_range(0..3)), object: o });
            } else {
                triples.push(Triple { subject: fresh.clone(), predicate: label(0), object: fresh.clone() });
            }
            homes.insert(fresh.clone(), f);
            members.push(fresh);
        }
    }
    let grown = RdfGraph::from_triples(&triples);
    let home_vec: Vec<u32> = grown.vertices().map(|v| homes[grown.term(v)]).collect();
    let a = VertexAssignment::from_vec(inst.assignment.fragment_count(), home_vec).expect("ids below k");
    let d = build_distributed(&grown, &a).expect("assignment covers graph");
    (grown, d)
}
