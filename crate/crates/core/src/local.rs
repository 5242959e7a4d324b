//! Per-fragment evaluation: local partial matches and matches that lie
//! entirely inside one fragment.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::hash::{Hash, Hasher};

use crate::candidates::CandidateFilter;
use crate::error::{Error, Result};
use crate::graph::{Edge, VertexId};
use crate::matching::{backtrack, map_pair, search_order, Match};
use crate::partition::Fragment;
use crate::query::{QueryGraph, ResolvedQuery};

/// A partial assignment of query vertices inside one fragment. Identity is
/// the fragment together with the serialization vector.
#[derive(Debug, Clone)]
pub struct LocalPartialMatch {
    pub fragment: u32,
    pub assignment: Vec<Option<VertexId>>,
    /// Data edge for each query edge with at least one internally bound
    /// endpoint; `None` otherwise.
    pub edge_map: Vec<Option<Edge>>,
    /// Bit `i` is set when query vertex `i` is bound to an internal vertex.
    pub internal_mask: u64,
}

impl PartialEq for LocalPartialMatch {
    fn eq(&self, other: &Self) -> bool {
        self.fragment == other.fragment && self.assignment == other.assignment
    }
}

impl Eq for LocalPartialMatch {}

impl Hash for LocalPartialMatch {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.fragment.hash(state);
        self.assignment.hash(state);
    }
}

impl PartialOrd for LocalPartialMatch {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LocalPartialMatch {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.fragment, &self.assignment).cmp(&(other.fragment, &other.assignment))
    }
}

impl LocalPartialMatch {
    pub fn serialization(&self) -> &[Option<VertexId>] {
        &self.assignment
    }

    pub fn is_internal(&self, v: usize) -> bool {
        self.internal_mask >> v & 1 == 1
    }

    /// Crossing edges of the match keyed by the query edge they realise.
    pub fn crossing_map(&self, q: &QueryGraph) -> BTreeMap<usize, Edge> {
        self.edge_map
            .iter()
            .enumerate()
            .filter_map(|(i, e)| {
                let e = (*e)?;
                let qe = q.edge(i);
                (!(self.is_internal(qe.src) && self.is_internal(qe.dst))).then_some((i, e))
            })
            .collect()
    }

    /// Query vertices bound to something other than NULL.
    pub fn bound_vertices(&self) -> BTreeSet<usize> {
        (0..self.assignment.len()).filter(|&v| self.assignment[v].is_some()).collect()
    }

    /// The matched query subgraph: bound vertices and the query edges whose
    /// data edge is recorded.
    pub fn query_subgraph(&self) -> (BTreeSet<usize>, BTreeSet<usize>) {
        let edges = (0..self.edge_map.len()).filter(|&e| self.edge_map[e].is_some()).collect();
        (self.bound_vertices(), edges)
    }

    /// One dump line: `F<i>: [t1, t2*, NULL]`, extended vertices starred.
    pub fn dump_line(&self, frag: &Fragment) -> String {
        let slots: Vec<String> = self
            .assignment
            .iter()
            .enumerate()
            .map(|(i, a)| match a {
                None => "NULL".to_string(),
                Some(v) if self.is_internal(i) => frag.term(*v).to_string(),
                Some(v) => format!("{}*", frag.term(*v)),
            })
            .collect();
        format!("F{}: [{}]", self.fragment, slots.join(", "))
    }
}

fn internal_mask(frag: &Fragment, asg: &[Option<VertexId>]) -> u64 {
    asg.iter()
        .enumerate()
        .filter(|(_, a)| a.is_some_and(|v| frag.is_internal(v)))
        .fold(0u64, |m, (i, _)| m | 1 << i)
}

/// Checks every local-partial-match condition on a candidate assignment and
/// returns the match with its edge map when all hold.
pub fn validate_lpm(
    frag: &Fragment,
    rq: &ResolvedQuery,
    asg: &[Option<VertexId>],
) -> Option<LocalPartialMatch> {
    let q = &rq.query;
    let n = q.vertex_count();
    if asg.len() != n {
        return None;
    }
    // Term compatibility: constants bind to themselves, anything binds to a
    // vertex of this fragment, NULL is always allowed.
    for (v, a) in asg.iter().enumerate() {
        if let Some(x) = a {
            if !frag.contains(*x) || !rq.vertex_ok(v, *x) {
                return None;
            }
        }
    }
    let mask = internal_mask(frag, asg);
    if mask == 0 {
        return None;
    }
    let internal = |v: usize| mask >> v & 1 == 1;
    // Closure: every neighbour of an internal vertex is bound.
    for v in (0..n).filter(|&v| internal(v)) {
        if q.neighbors(v).iter().any(|&w| asg[w].is_none()) {
            return None;
        }
    }
    // Per-edge rule and injective label mapping for every pair with an
    // internal endpoint; pairs of two extended vertices carry no edge.
    let mut edge_map = vec![None; q.edge_count()];
    let mut has_crossing = false;
    for (&(s, d), edges) in &rq.pairs {
        let (Some(a), Some(b)) = (asg[s], asg[d]) else { continue };
        if !internal(s) && !internal(d) {
            continue;
        }
        for (e, de) in map_pair(rq, frag.adj(), edges, a, b)? {
            edge_map[e] = Some(de);
        }
        if internal(s) != internal(d) {
            has_crossing = true;
        }
    }
    if !has_crossing {
        return None;
    }
    // Internal vertices are weakly connected through internal vertices.
    let start = mask.trailing_zeros() as usize;
    let mut seen = 1u64 << start;
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for w in q.neighbors(v) {
            if internal(w) && seen >> w & 1 == 0 {
                seen |= 1 << w;
                stack.push(w);
            }
        }
    }
    if seen != mask {
        return None;
    }
    // The matched subgraph is connected: each extended binding hangs off an
    // internal one.
    for (v, slot) in asg.iter().enumerate().take(n) {
        if slot.is_some() && !internal(v) && !q.neighbors(v).iter().any(|&w| internal(w)) {
            return None;
        }
    }
    Some(LocalPartialMatch {
        fragment: frag.id,
        assignment: asg.to_vec(),
        edge_map,
        internal_mask: mask,
    })
}

struct LpmSearch<'a> {
    frag: &'a Fragment,
    rq: &'a ResolvedQuery,
    filter: Option<&'a CandidateFilter>,
    out: BTreeSet<LocalPartialMatch>,
}

impl LpmSearch<'_> {
    fn bindable(&self, v: usize, x: VertexId) -> bool {
        if !self.frag.contains(x) || !self.rq.vertex_ok(v, x) {
            return false;
        }
        if self.frag.is_extended(x) {
            if let Some(f) = self.filter {
                return f.admits(v, self.frag.term(x));
            }
        }
        true
    }

    /// Checks the pair groups between `v` and every bound vertex, including
    /// `v` itself, that have an internal endpoint.
    fn pairs_ok(&self, asg: &[Option<VertexId>], v: usize) -> bool {
        let frag = self.frag;
        let is_int = |w: usize| asg[w].is_some_and(|x| frag.is_internal(x));
        for &e in self.rq.query.incident(v) {
            let qe = self.rq.query.edge(e);
            let (Some(a), Some(b)) = (asg[qe.src], asg[qe.dst]) else { continue };
            if !is_int(qe.src) && !is_int(qe.dst) {
                continue;
            }
            let group = &self.rq.pairs[&(qe.src, qe.dst)];
            if group[0] == e && map_pair(self.rq, frag.adj(), group, a, b).is_none() {
                return false;
            }
        }
        true
    }

    fn extend(&mut self, asg: &mut Vec<Option<VertexId>>) {
        let q = &self.rq.query;
        let frag = self.frag;
        let next = (0..q.vertex_count()).find_map(|w| {
            if asg[w].is_some() {
                return None;
            }
            q.incident(w).iter().find_map(|&e| {
                let qe = q.edge(e);
                let other = if qe.src == w { qe.dst } else { qe.src };
                asg[other].filter(|&x| frag.is_internal(x)).map(|_| (w, e))
            })
        });
        let Some((w, e)) = next else {
            if let Some(lpm) = validate_lpm(frag, self.rq, asg) {
                self.out.insert(lpm);
            }
            return;
        };
        let qe = q.edge(e);
        let mut cands: Vec<VertexId> = if qe.src == w {
            frag.adj().inc(asg[qe.dst].unwrap()).iter().filter(|(l, _)| self.rq.label_ok(e, *l)).map(|&(_, x)| x).collect()
        } else {
            frag.adj().out(asg[qe.src].unwrap()).iter().filter(|(l, _)| self.rq.label_ok(e, *l)).map(|&(_, x)| x).collect()
        };
        cands.sort_unstable();
        cands.dedup();
        for x in cands {
            if !self.bindable(w, x) {
                continue;
            }
            asg[w] = Some(x);
            if self.pairs_ok(asg, w) {
                self.extend(asg);
            }
            asg[w] = None;
        }
    }
}

/// Enumerates the local partial matches of `q` in `frag`. With a filter,
/// extended vertices whose hash bit is absent are never bound.
pub fn find_local_partial_matches(
    frag: &Fragment,
    q: &QueryGraph,
    filter: Option<&CandidateFilter>,
) -> BTreeSet<LocalPartialMatch> {
    let rq = ResolvedQuery::new(q, frag.vocab());
    find_local_partial_matches_resolved(frag, &rq, filter)
}

pub(crate) fn find_local_partial_matches_resolved(
    frag: &Fragment,
    rq: &ResolvedQuery,
    filter: Option<&CandidateFilter>,
) -> BTreeSet<LocalPartialMatch> {
    let q = &rq.query;
    let mut search = LpmSearch { frag, rq, filter, out: BTreeSet::new() };
    let mut asg = vec![None; q.vertex_count()];
    for ce in frag.crossing_edges() {
        for (i, qe) in q.edges().iter().enumerate() {
            if qe.src == qe.dst || !rq.label_ok(i, ce.label) {
                continue;
            }
            if !search.bindable(qe.src, ce.src) || !search.bindable(qe.dst, ce.dst) {
                continue;
            }
            asg[qe.src] = Some(ce.src);
            asg[qe.dst] = Some(ce.dst);
            if search.pairs_ok(&asg, qe.src) && search.pairs_ok(&asg, qe.dst) {
                search.extend(&mut asg);
            }
            asg[qe.src] = None;
            asg[qe.dst] = None;
        }
    }
    search.out
}

/// Brute-force enumeration of every assignment (NULL included) filtered by
/// [`validate_lpm`]. Refuses fragments above 12 vertices or queries above 5
/// vertices.
pub fn oracle_local_partial_matches(
    frag: &Fragment,
    q: &QueryGraph,
) -> Result<BTreeSet<LocalPartialMatch>> {
    let nv = frag.vertex_count();
    let nq = q.vertex_count();
    if nv > 12 || nq > 5 {
        return Err(Error::OracleTooLarge(format!(
            "fragment with {nv} vertices, query with {nq} vertices"
        )));
    }
    let rq = ResolvedQuery::new(q, frag.vocab());
    let universe: Vec<Option<VertexId>> = std::iter::once(None)
        .chain(frag.internal_vertices().iter().chain(frag.extended_vertices()).map(|&v| Some(v)))
        .collect();
    let mut idx = vec![0usize; nq];
    let mut out = BTreeSet::new();
    loop {
        let asg: Vec<Option<VertexId>> = idx.iter().map(|&i| universe[i]).collect();
        if let Some(lpm) = validate_lpm(frag, &rq, &asg) {
            out.insert(lpm);
        }
        let mut i = 0;
        loop {
            if i == nq {
                return Ok(out);
            }
            idx[i] += 1;
            if idx[i] < universe.len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
    }
}

/// Complete matches visible inside one fragment. All vertices are internal,
/// except for star-shaped queries where a centre bound internally lets the
/// other vertices sit across crossing edges.
pub fn find_intra_fragment_matches(frag: &Fragment, q: &QueryGraph) -> BTreeSet<Match> {
    let rq = ResolvedQuery::new(q, frag.vocab());
    find_intra_fragment_matches_resolved(frag, &rq)
}

pub(crate) fn find_intra_fragment_matches_resolved(frag: &Fragment, rq: &ResolvedQuery) -> BTreeSet<Match> {
    let q = &rq.query;
    let roots: Vec<VertexId> = frag.internal_vertices().iter().copied().collect();
    let centers = q.star_centers();
    if centers.is_empty() {
        let order = search_order(rq, None);
        return backtrack(rq, frag.adj(), &order, &roots, &|_, x| frag.is_internal(x));
    }
    let mut out = BTreeSet::new();
    for c in centers {
        let order = search_order(rq, Some(c));
        let allowed = |v: usize, x: VertexId| if v == c { frag.is_internal(x) } else { frag.contains(x) };
        out.extend(backtrack(rq, frag.adj(), &order, &roots, &allowed));
    }
    out
}

/// The debug dump of a set of local partial matches, one line each.
pub fn dump_lpms(frag: &Fragment, lpms: &BTreeSet<LocalPartialMatch>) -> String {
    let mut s = String::new();
    for l in lpms {
        s.push_str(&l.dump_line(frag));
        s.push('\n');
    }
    s
}
