//! Homomorphism semantics for basic graph patterns and a backtracking
//! matcher over a whole graph.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::graph::{AdjIndex, Edge, RdfGraph, VertexId, Vocab};
use crate::query::{LabelSlot, QueryGraph, ResolvedQuery, VertexSlot};

/// A complete match: every query vertex bound, every query edge mapped to a
/// data edge. Identity is the vertex assignment alone.
#[derive(Debug, Clone)]
pub struct Match {
    pub assignment: Vec<VertexId>,
    pub edge_map: Vec<Edge>,
}

impl PartialEq for Match {
    fn eq(&self, other: &Self) -> bool {
        self.assignment == other.assignment
    }
}

impl Eq for Match {}

impl Hash for Match {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.assignment.hash(state);
    }
}

impl PartialOrd for Match {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Match {
    fn cmp(&self, other: &Self) -> Ordering {
        self.assignment.cmp(&other.assignment)
    }
}

impl Match {
    /// Variable name to N-Triples term, for every variable vertex.
    pub fn bindings(&self, q: &QueryGraph, vocab: &Vocab) -> BTreeMap<String, String> {
        q.vertices()
            .iter()
            .zip(&self.assignment)
            .filter_map(|(t, &v)| t.var_name().map(|n| (n.to_string(), vocab.vertex(v).to_string())))
            .collect()
    }

    /// Data vertices the match touches.
    pub fn vertex_set(&self) -> BTreeSet<VertexId> {
        self.assignment.iter().copied().collect()
    }
}

/// Maps the query edges running from one query vertex to another onto the
/// data edges from `a` to `b`, injectively. Constant labels take their own
/// data edge; variable labels take the smallest unused remaining edges. The
/// result depends only on the inputs, so every site holding the pair derives
/// the same edges.
pub fn map_pair(
    rq: &ResolvedQuery,
    adj: &AdjIndex,
    query_edges: &[usize],
    a: VertexId,
    b: VertexId,
) -> Option<Vec<(usize, Edge)>> {
    let labels = adj.labels_between(a, b);
    if labels.len() < query_edges.len() {
        return None;
    }
    let mut used = vec![false; labels.len()];
    let mut out = Vec::with_capacity(query_edges.len());
    for &e in query_edges {
        match rq.label_slots[e] {
            LabelSlot::Fixed(l) => {
                let i = labels.binary_search(&l).ok()?;
                if used[i] {
                    return None;
                }
                used[i] = true;
                out.push((e, Edge::new(a, l, b)));
            }
            LabelSlot::Absent => return None,
            LabelSlot::Any => {}
        }
    }
    let mut next = 0;
    for &e in query_edges {
        if rq.label_slots[e] == LabelSlot::Any {
            while next < used.len() && used[next] {
                next += 1;
            }
            if next == used.len() {
                return None;
            }
            used[next] = true;
            out.push((e, Edge::new(a, labels[next], b)));
        }
    }
    out.sort_unstable_by_key(|&(e, _)| e);
    Some(out)
}

/// Checks a total assignment against the match conditions and, when it
/// passes, returns the match with its canonical edge map.
pub fn complete_match(rq: &ResolvedQuery, adj: &AdjIndex, assignment: &[VertexId]) -> Option<Match> {
    if assignment.len() != rq.n() {
        return None;
    }
    if !assignment.iter().enumerate().all(|(v, &x)| rq.vertex_ok(v, x)) {
        return None;
    }
    let mut edge_map = vec![Edge::new(VertexId(0), crate::graph::LabelId(0), VertexId(0)); rq.query.edge_count()];
    for (&(s, d), edges) in &rq.pairs {
        for (e, de) in map_pair(rq, adj, edges, assignment[s], assignment[d])? {
            edge_map[e] = de;
        }
    }
    Some(Match { assignment: assignment.to_vec(), edge_map })
}

/// Independently re-verifies a match, including its recorded edge map.
pub fn verify_match(rq: &ResolvedQuery, adj: &AdjIndex, m: &Match) -> bool {
    let q = &rq.query;
    if m.assignment.len() != q.vertex_count() || m.edge_map.len() != q.edge_count() {
        return false;
    }
    if !m.assignment.iter().enumerate().all(|(v, &x)| rq.vertex_ok(v, x)) {
        return false;
    }
    for (i, qe) in q.edges().iter().enumerate() {
        let de = m.edge_map[i];
        if de.src != m.assignment[qe.src] || de.dst != m.assignment[qe.dst] {
            return false;
        }
        if !rq.label_ok(i, de.label) || !adj.has_edge(de.src, de.label, de.dst) {
            return false;
        }
    }
    rq.pairs.values().all(|edges| {
        let images: BTreeSet<Edge> = edges.iter().map(|&e| m.edge_map[e]).collect();
        images.len() == edges.len()
    })
}

/// Connectivity-preserving vertex order that starts from a constant vertex
/// when one exists.
pub(crate) fn search_order(rq: &ResolvedQuery, first: Option<usize>) -> Vec<usize> {
    let q = &rq.query;
    let n = q.vertex_count();
    let start = first.unwrap_or_else(|| {
        (0..n)
            .find(|&v| matches!(rq.vertex_slots[v], VertexSlot::Fixed(_) | VertexSlot::Absent))
            .unwrap_or(0)
    });
    let mut order = vec![start];
    let mut placed = vec![false; n];
    placed[start] = true;
    while order.len() < n {
        let frontier: Vec<usize> = (0..n)
            .filter(|&v| !placed[v] && q.neighbors(v).iter().any(|&w| placed[w]))
            .collect();
        let pick = frontier
            .iter()
            .copied()
            .find(|&v| !matches!(rq.vertex_slots[v], VertexSlot::Any))
            .unwrap_or(frontier[0]);
        placed[pick] = true;
        order.push(pick);
    }
    order
}

/// Backtracking homomorphism search. `roots` seeds the first vertex in
/// `order`; `allowed` restricts every binding.
pub(crate) fn backtrack(
    rq: &ResolvedQuery,
    adj: &AdjIndex,
    order: &[usize],
    roots: &[VertexId],
    allowed: &dyn Fn(usize, VertexId) -> bool,
) -> BTreeSet<Match> {
    let q = &rq.query;
    let n = q.vertex_count();
    let mut rank = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        rank[v] = i;
    }
    // Pair groups that become checkable once the vertex at each step is bound.
    let mut checks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &(s, d) in rq.pairs.keys() {
        checks[rank[s].max(rank[d])].push((s, d));
    }
    let mut out = BTreeSet::new();
    let mut asg: Vec<Option<VertexId>> = vec![None; n];
    let mut ctx = Ctx { rq, adj, order, checks: &checks, allowed, out: &mut out };
    ctx.step(0, roots, &mut asg);
    out
}

struct Ctx<'a> {
    rq: &'a ResolvedQuery,
    adj: &'a AdjIndex,
    order: &'a [usize],
    checks: &'a [Vec<(usize, usize)>],
    allowed: &'a dyn Fn(usize, VertexId) -> bool,
    out: &'a mut BTreeSet<Match>,
}

impl Ctx<'_> {
    fn candidates(&self, v: usize, asg: &[Option<VertexId>], roots: &[VertexId]) -> Vec<VertexId> {
        match self.rq.vertex_slots[v] {
            VertexSlot::Absent => return Vec::new(),
            VertexSlot::Fixed(x) => return vec![x],
            VertexSlot::Any => {}
        }
        let q = &self.rq.query;
        for &e in q.incident(v) {
            let qe = q.edge(e);
            if qe.src == v && qe.dst != v {
                if let Some(b) = asg[qe.dst] {
                    let mut c: Vec<VertexId> = self.adj.inc(b).iter().map(|&(_, x)| x).collect();
                    c.dedup();
                    return c;
                }
            } else if qe.dst == v && qe.src != v {
                if let Some(a) = asg[qe.src] {
                    let mut c: Vec<VertexId> = self.adj.out(a).iter().map(|&(_, x)| x).collect();
                    c.sort_unstable();
                    c.dedup();
                    return c;
                }
            }
        }
        roots.to_vec()
    }

    fn step(&mut self, depth: usize, roots: &[VertexId], asg: &mut Vec<Option<VertexId>>) {
        if depth == self.order.len() {
            let full: Vec<VertexId> = asg.iter().map(|x| x.expect("bound")).collect();
            if let Some(m) = complete_match(self.rq, self.adj, &full) {
                self.out.insert(m);
            }
            return;
        }
        let v = self.order[depth];
        let mut cands = self.candidates(v, asg, roots);
        cands.sort_unstable();
        cands.dedup();
        for x in cands {
            if !(self.allowed)(v, x) || !self.rq.vertex_ok(v, x) {
                continue;
            }
            asg[v] = Some(x);
            let ok = self.checks[depth].iter().all(|&(s, d)| {
                let edges = &self.rq.pairs[&(s, d)];
                map_pair(self.rq, self.adj, edges, asg[s].unwrap(), asg[d].unwrap()).is_some()
            });
            if ok {
                self.step(depth + 1, roots, asg);
            }
            asg[v] = None;
        }
    }
}

/// All matches of `q` over the whole graph `g`.
pub fn find_matches_centralized(g: &RdfGraph, q: &QueryGraph) -> BTreeSet<Match> {
    let rq = ResolvedQuery::new(q, g.vocab());
    let order = search_order(&rq, None);
    let roots: Vec<VertexId> = g.vertices().collect();
    backtrack(&rq, g.adj(), &order, &roots, &|_, _| true)
}

/// Exhaustive enumeration of every total assignment, for small inputs only.
pub fn oracle_matches(g: &RdfGraph, q: &QueryGraph) -> Result<BTreeSet<Match>> {
    let nv = g.vertex_count();
    let nq = q.vertex_count();
    if nv > 8 || nq > 6 {
        return Err(Error::OracleTooLarge(format!("{nv} data vertices, {nq} query vertices")));
    }
    let rq = ResolvedQuery::new(q, g.vocab());
    let mut out = BTreeSet::new();
    if nv == 0 {
        return Ok(out);
    }
    let mut asg = vec![VertexId(0); nq];
    loop {
        if let Some(m) = complete_match(&rq, g.adj(), &asg) {
            out.insert(m);
        }
        let mut i = 0;
        loop {
            if i == nq {
                return Ok(out);
            }
            asg[i].0 += 1;
            if (asg[i].0 as usize) < nv {
                break;
            }
            asg[i] = VertexId(0);
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ntriples::parse_ntriples_str;
    use crate::query::parse_bgp;

    #[test]
    fn single_edge_variable_predicate() {
        let g = parse_ntriples_str("<a> <p> <b> .").unwrap();
        let q = parse_bgp("?x ?p ?y").unwrap();
        assert_eq!(find_matches_centralized(&g, &q).len(), 1);
    }

    #[test]
    fn injective_labels_per_pair() {
        let g = parse_ntriples_str("<a> <p> <b> .").unwrap();
        let q = parse_bgp("?x ?p ?y . ?x ?r ?y").unwrap();
        assert!(find_matches_centralized(&g, &q).is_empty());
        let g2 = parse_ntriples_str("<a> <p> <b> .\n<a> <q> <b> .").unwrap();
        let ms = find_matches_centralized(&g2, &q);
        assert_eq!(ms.len(), 1);
        let m = ms.iter().next().unwrap();
        assert_ne!(m.edge_map[0], m.edge_map[1]);
        let rq = ResolvedQuery::new(&q, g2.vocab());
        assert!(verify_match(&rq, g2.adj(), m));
    }

    #[test]
    fn constant_and_variable_on_same_pair() {
        let g = parse_ntriples_str("<a> <p> <b> .\n<a> <q> <b> .").unwrap();
        let q = parse_bgp("?x <q> ?y . ?x ?any ?y").unwrap();
        let ms = find_matches_centralized(&g, &q);
        let m = ms.iter().next().unwrap();
        let rq = ResolvedQuery::new(&q, g.vocab());
        assert_eq!(rq.query.edges().len(), 2);
        assert_eq!(g.vocab().label(m.edge_map[0].label).lexical, "q");
        assert_eq!(g.vocab().label(m.edge_map[1].label).lexical, "p");
    }

    #[test]
    fn homomorphism_allows_shared_images() {
        let g = parse_ntriples_str("<a> <p> <a> .").unwrap();
        let q = parse_bgp("?x <p> ?y . ?y <p> ?z").unwrap();
        assert_eq!(find_matches_centralized(&g, &q).len(), 1);
    }

    #[test]
    fn absent_constant_gives_no_match() {
        let g = parse_ntriples_str("<a> <p> <b> .").unwrap();
        let q = parse_bgp("?x <p> <zzz>").unwrap();
        assert!(find_matches_centralized(&g, &q).is_empty());
        let q = parse_bgp("?x <nope> ?y").unwrap();
        assert!(find_matches_centralized(&g, &q).is_empty());
    }

    #[test]
    fn agrees_with_oracle_on_small_graph() {
        let g = parse_ntriples_str(
            "<a> <p> <b> .\n<b> <p> <c> .\n<c> <q> <a> .\n<b> <q> <b> .\n<a> <q> <b> .",
        )
        .unwrap();
        for text in ["?x <p> ?y . ?y ?l ?z", "?x ?l ?x", "?x <q> ?y . ?x <p> ?y", "<a> ?l ?y . ?y <p> ?z"] {
            let q = parse_bgp(text).unwrap();
            assert_eq!(find_matches_centralized(&g, &q), oracle_matches(&g, &q).unwrap(), "{text}");
        }
    }
}
