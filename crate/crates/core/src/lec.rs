//! Compression of local partial matches into LEC features, sign-based
//! grouping, the feature join graph and feature-level pruning.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Edge;
use crate::local::LocalPartialMatch;
use crate::query::QueryGraph;

/// Bitstring over query vertices; position `i` is query vertex `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LecSign {
    bits: u64,
    len: u8,
}

impl LecSign {
    pub fn new(bits: u64, len: usize) -> Self {
        assert!(len <= 64, "signatures hold at most 64 positions");
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        LecSign { bits: bits & mask, len: len as u8 }
    }

    pub fn empty(len: usize) -> Self {
        Self::new(0, len)
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits >> i & 1 == 1
    }

    pub fn is_full(&self) -> bool {
        self.bits.count_ones() as usize == self.len()
    }

    pub fn count_ones(&self) -> u32 {
        self.bits.count_ones()
    }

    pub fn or(self, other: LecSign) -> LecSign {
        LecSign { bits: self.bits | other.bits, len: self.len }
    }

    pub fn and(self, other: LecSign) -> LecSign {
        LecSign { bits: self.bits & other.bits, len: self.len }
    }

    pub fn is_disjoint(&self, other: &LecSign) -> bool {
        self.bits & other.bits == 0
    }

    /// Bytes taken by the signature on the wire.
    pub fn wire_len(&self) -> usize {
        self.len().div_ceil(8)
    }

    fn lex_key(&self) -> u64 {
        self.bits.reverse_bits()
    }
}

impl Ord for LecSign {
    /// Orders as the bitstrings compare lexicographically.
    fn cmp(&self, other: &Self) -> Ordering {
        self.len.cmp(&other.len).then(self.lex_key().cmp(&other.lex_key()))
    }
}

impl PartialOrd for LecSign {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LecSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for LecSign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.len() > 64 {
            return Err("signature longer than 64".into());
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => bits |= 1 << i,
                '0' => {}
                _ => return Err(format!("bad signature character '{c}'")),
            }
        }
        Ok(LecSign::new(bits, s.len()))
    }
}

/// Compact summary of an equivalence class of local partial matches: the
/// fragment, the crossing edges keyed by the query edge they realise, and
/// the signature of internally bound query vertices. Joined features carry
/// negative fragment ids.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LecFeature {
    pub fragment: i32,
    pub crossing: BTreeMap<usize, Edge>,
    pub sign: LecSign,
}

/// Fixed bytes of an encoded feature: fragment id and entry count.
pub const FEATURE_HEADER_BYTES: usize = 6;
/// Bytes per crossing-map entry: data edge endpoints and query edge
/// endpoints, four u32 values.
pub const FEATURE_ENTRY_BYTES: usize = 16;

impl LecFeature {
    pub fn wire_len(&self) -> usize {
        FEATURE_HEADER_BYTES + FEATURE_ENTRY_BYTES * self.crossing.len() + self.sign.wire_len()
    }

    /// Little-endian wire form. Query edges are written as their endpoint
    /// positions, so `q` is needed.
    pub fn encode(&self, q: &QueryGraph) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.wire_len());
        out.extend_from_slice(&self.fragment.to_le_bytes());
        out.extend_from_slice(&(self.crossing.len() as u16).to_le_bytes());
        for (&qe, e) in &self.crossing {
            let qe = q.edge(qe);
            for x in [e.src.0, e.dst.0, qe.src as u32, qe.dst as u32] {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        out.extend_from_slice(&self.sign.bits.to_le_bytes()[..self.sign.wire_len()]);
        out
    }

    /// Renders `{F, {src->dst => vi->vj, ...}, sign}` using `name` for data
    /// vertices; query vertices are numbered from one.
    pub fn describe(&self, q: &QueryGraph, name: impl Fn(crate::graph::VertexId) -> String) -> String {
        let mut entries: Vec<String> = self
            .crossing
            .iter()
            .map(|(&i, e)| {
                let qe = q.edge(i);
                format!("{}->{} => v{}v{}", name(e.src), name(e.dst), qe.src + 1, qe.dst + 1)
            })
            .collect();
        entries.sort();
        format!("{{F{}, {{{}}}, [{}]}}", self.fragment, entries.join(", "), self.sign)
    }
}

/// The feature of one local partial match.
pub fn feature_of(lpm: &LocalPartialMatch, q: &QueryGraph) -> LecFeature {
    LecFeature {
        fragment: lpm.fragment as i32,
        crossing: lpm.crossing_map(q),
        sign: LecSign::new(lpm.internal_mask, q.vertex_count()),
    }
}

/// Distinct features of local partial matches from one fragment.
pub fn compute_lec_features<'a>(
    lpms: impl IntoIterator<Item = &'a LocalPartialMatch>,
    q: &QueryGraph,
) -> Result<BTreeSet<LecFeature>> {
    let mut out = BTreeSet::new();
    let mut fragment = None;
    for l in lpms {
        match fragment {
            None => fragment = Some(l.fragment),
            Some(f) if f != l.fragment => return Err(Error::MixedFragments(f as i32, l.fragment as i32)),
            _ => {}
        }
        out.insert(feature_of(l, q));
    }
    Ok(out)
}

/// Groups local partial matches into equivalence classes: same fragment,
/// same crossing edges, same query edges for them.
pub fn equivalence_classes(
    lpms: &BTreeSet<LocalPartialMatch>,
    q: &QueryGraph,
) -> Vec<BTreeSet<LocalPartialMatch>> {
    let mut classes: BTreeMap<(u32, BTreeMap<usize, Edge>), BTreeSet<LocalPartialMatch>> = BTreeMap::new();
    for l in lpms {
        classes.entry((l.fragment, l.crossing_map(q))).or_default().insert(l.clone());
    }
    classes.into_values().collect()
}

/// The four-condition join test: different fragments, a shared crossing
/// edge realising the same query edge, no query edge realised by two
/// different data edges, and disjoint signatures.
pub fn joinable(a: &LecFeature, b: &LecFeature) -> bool {
    if a.fragment == b.fragment || !a.sign.is_disjoint(&b.sign) {
        return false;
    }
    let mut shared = false;
    for (qe, ea) in &a.crossing {
        if let Some(eb) = b.crossing.get(qe) {
            if ea != eb {
                return false;
            }
            shared = true;
        }
    }
    shared
}

/// Source of fresh negative fragment ids for joined features.
#[derive(Debug, Clone)]
pub struct SyntheticIds {
    next: i32,
}

impl Default for SyntheticIds {
    fn default() -> Self {
        SyntheticIds { next: -1 }
    }
}

impl SyntheticIds {
    pub fn fresh(&mut self) -> i32 {
        let id = self.next;
        self.next = self.next.checked_sub(1).unwrap_or(-1);
        id
    }
}

/// Joins two joinable features: union of crossing maps, OR of signatures,
/// and a fresh synthetic fragment id.
pub fn feature_join(a: &LecFeature, b: &LecFeature, ids: &mut SyntheticIds) -> Result<LecFeature> {
    if !joinable(a, b) {
        return Err(Error::NotJoinable);
    }
    Ok(join_unchecked(a, b, ids.fresh()))
}

pub(crate) fn join_unchecked(a: &LecFeature, b: &LecFeature, fragment: i32) -> LecFeature {
    let mut crossing = a.crossing.clone();
    crossing.extend(b.crossing.iter().map(|(k, v)| (*k, *v)));
    LecFeature { fragment, crossing, sign: a.sign.or(b.sign) }
}

/// Features sharing one signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureGroup {
    pub sign: LecSign,
    pub members: Vec<LecFeature>,
}

/// Groups features by signature, ordered by signature.
pub fn group_features<'a>(features: impl IntoIterator<Item = &'a LecFeature>) -> Vec<FeatureGroup> {
    let mut m: BTreeMap<LecSign, BTreeSet<LecFeature>> = BTreeMap::new();
    for f in features {
        m.entry(f.sign).or_default().insert(f.clone());
    }
    m.into_iter()
        .map(|(sign, members)| FeatureGroup { sign, members: members.into_iter().collect() })
        .collect()
}

/// Groups as vertices, joined when some member pair is joinable.
#[derive(Debug, Clone)]
pub struct FeatureJoinGraph {
    pub groups: Vec<FeatureGroup>,
    adj: Vec<BTreeSet<usize>>,
}

impl FeatureJoinGraph {
    pub fn neighbors(&self, g: usize) -> &BTreeSet<usize> {
        &self.adj[g]
    }

    /// Undirected edges as `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, n) in self.adj.iter().enumerate() {
            out.extend(n.iter().filter(|&&j| i < j).map(|&j| (i, j)));
        }
        out
    }
}

pub fn build_feature_join_graph(groups: Vec<FeatureGroup>) -> FeatureJoinGraph {
    let n = groups.len();
    let mut adj = vec![BTreeSet::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let linked = groups[i]
                .members
                .iter()
                .any(|a| groups[j].members.iter().any(|b| joinable(a, b)));
            if linked {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    FeatureJoinGraph { groups, adj }
}

/// A joined feature together with the real features it was built from.
#[derive(Debug, Clone)]
struct Partial {
    feature: LecFeature,
    parts: BTreeSet<LecFeature>,
}

/// Picks the next live vertex: smallest group, ties to the least signature.
pub(crate) fn pick_smallest(sizes: &[usize], signs: &[LecSign], alive: &[bool]) -> Option<usize> {
    (0..sizes.len()).filter(|&i| alive[i]).min_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(signs[a].cmp(&signs[b])))
}

/// Marks live vertices with no live neighbour as dead.
pub(crate) fn drop_outliers(adj: &[BTreeSet<usize>], alive: &mut [bool]) {
    for i in 0..alive.len() {
        if alive[i] && !adj[i].iter().any(|&j| alive[j]) {
            alive[i] = false;
        }
    }
}

/// Live vertices outside `chosen` adjacent to it, in ascending
/// (signature, size) order.
pub(crate) fn frontier(
    adj: &[BTreeSet<usize>],
    alive: &[bool],
    chosen: &[bool],
    key: impl Fn(usize) -> (LecSign, usize),
) -> Vec<usize> {
    let mut out: Vec<usize> = (0..alive.len())
        .filter(|&v| alive[v] && !chosen[v])
        .filter(|&v| adj[v].iter().any(|&u| chosen[u]))
        .collect();
    out.sort_by_key(|&v| (key(v), v));
    out
}

struct Pruner<'a> {
    graph: &'a FeatureJoinGraph,
    alive: Vec<bool>,
    ids: SyntheticIds,
    survivors: BTreeSet<LecFeature>,
}

impl Pruner<'_> {
    fn expand(&mut self, chosen: &mut Vec<bool>, partials: Vec<Partial>) {
        let g = self.graph;
        let next_groups = frontier(&g.adj, &self.alive, chosen, |v| (g.groups[v].sign, g.groups[v].members.len()));
        for v in next_groups {
            // Partials equal in crossing map and signature behave identically
            // in every later join, so they are merged.
            let mut merged: BTreeMap<(BTreeMap<usize, Edge>, LecSign), BTreeSet<LecFeature>> = BTreeMap::new();
            for p in &partials {
                for f in &g.groups[v].members {
                    if !joinable(&p.feature, f) {
                        continue;
                    }
                    let k = join_unchecked(&p.feature, f, 0);
                    if k.sign.is_full() {
                        self.survivors.extend(p.parts.iter().cloned());
                        self.survivors.insert(f.clone());
                    } else {
                        let e = merged.entry((k.crossing, k.sign)).or_default();
                        e.extend(p.parts.iter().cloned());
                        e.insert(f.clone());
                    }
                }
            }
            if merged.is_empty() {
                continue;
            }
            let next: Vec<Partial> = merged
                .into_iter()
                .map(|((crossing, sign), parts)| Partial {
                    feature: LecFeature { fragment: self.ids.fresh(), crossing, sign },
                    parts,
                })
                .collect();
            chosen[v] = true;
            self.expand(chosen, next);
            chosen[v] = false;
        }
    }
}

/// Keeps the features that take part in some chain of pairwise-joinable
/// features whose signatures are disjoint and together cover every query
/// vertex. Repeatedly expands from the smallest live group, then retires it
/// and any group left without live neighbours.
pub fn prune_features(graph: &FeatureJoinGraph) -> BTreeSet<LecFeature> {
    let n = graph.groups.len();
    let sizes: Vec<usize> = graph.groups.iter().map(|g| g.members.len()).collect();
    let signs: Vec<LecSign> = graph.groups.iter().map(|g| g.sign).collect();
    let mut pr = Pruner { graph, alive: vec![true; n], ids: SyntheticIds::default(), survivors: BTreeSet::new() };
    drop_outliers(&graph.adj, &mut pr.alive);
    while let Some(vmin) = pick_smallest(&sizes, &signs, &pr.alive) {
        let mut chosen = vec![false; n];
        chosen[vmin] = true;
        let start: Vec<Partial> = graph.groups[vmin]
            .members
            .iter()
            .map(|f| Partial { feature: f.clone(), parts: BTreeSet::from([f.clone()]) })
            .collect();
        pr.expand(&mut chosen, start);
        pr.alive[vmin] = false;
        drop_outliers(&graph.adj, &mut pr.alive);
    }
    pr.survivors
}
