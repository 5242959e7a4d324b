//! Joining local partial matches from different fragments into complete
//! crossing matches.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::graph::{Edge, VertexId};
use crate::lec::{drop_outliers, feature_of, frontier, join_unchecked, joinable, pick_smallest, LecFeature, LecSign, SyntheticIds};
use crate::local::LocalPartialMatch;
use crate::matching::Match;
use crate::query::QueryGraph;

/// A local partial match or a join of several, carrying the joined feature
/// that governs further joins.
#[derive(Debug, Clone)]
pub struct PartialMatch {
    pub assignment: Vec<Option<VertexId>>,
    pub edge_map: Vec<Option<Edge>>,
    pub feature: LecFeature,
    /// Real fragments that contributed.
    pub fragments: BTreeSet<u32>,
    /// Constituent local partial matches in join order.
    pub parts: Vec<LocalPartialMatch>,
}

impl PartialMatch {
    pub fn from_lpm(lpm: &LocalPartialMatch, q: &QueryGraph) -> Self {
        PartialMatch {
            assignment: lpm.assignment.clone(),
            edge_map: lpm.edge_map.clone(),
            feature: feature_of(lpm, q),
            fragments: BTreeSet::from([lpm.fragment]),
            parts: vec![lpm.clone()],
        }
    }

    pub fn sign(&self) -> LecSign {
        self.feature.sign
    }

    pub fn is_complete(&self) -> bool {
        self.feature.sign.is_full()
    }

    /// The complete match, once every query vertex is internal somewhere.
    pub fn to_match(&self) -> Option<Match> {
        if !self.is_complete() {
            return None;
        }
        Some(Match {
            assignment: self.assignment.iter().map(|a| a.expect("complete")).collect(),
            edge_map: self.edge_map.iter().map(|e| e.expect("complete")).collect(),
        })
    }
}

/// Joins two partial matches when their features are joinable and no query
/// vertex is bound to two different data vertices.
pub fn join_partials(a: &PartialMatch, b: &PartialMatch, ids: &mut SyntheticIds) -> Option<PartialMatch> {
    if !joinable(&a.feature, &b.feature) {
        return None;
    }
    let mut assignment = a.assignment.clone();
    for (slot, other) in assignment.iter_mut().zip(&b.assignment) {
        match (*slot, *other) {
            (Some(x), Some(y)) if x != y => return None,
            (None, y) => *slot = y,
            _ => {}
        }
    }
    let edge_map = a.edge_map.iter().zip(&b.edge_map).map(|(x, y)| x.or(*y)).collect();
    let mut parts = a.parts.clone();
    parts.extend(b.parts.iter().cloned());
    Some(PartialMatch {
        assignment,
        edge_map,
        feature: join_unchecked(&a.feature, &b.feature, ids.fresh()),
        fragments: a.fragments.union(&b.fragments).copied().collect(),
        parts,
    })
}

/// Joins two local partial matches.
pub fn lpm_join(q: &QueryGraph, a: &LocalPartialMatch, b: &LocalPartialMatch) -> Option<PartialMatch> {
    join_partials(&PartialMatch::from_lpm(a, q), &PartialMatch::from_lpm(b, q), &mut SyntheticIds::default())
}

/// Local partial matches sharing one signature.
#[derive(Debug, Clone)]
pub struct LpmGroup {
    pub sign: LecSign,
    pub members: Vec<PartialMatch>,
}

/// Groups local partial matches by the signature of their feature.
pub fn group_lpms<'a>(lpms: impl IntoIterator<Item = &'a LocalPartialMatch>, q: &QueryGraph) -> Vec<LpmGroup> {
    let mut m: BTreeMap<LecSign, BTreeSet<&LocalPartialMatch>> = BTreeMap::new();
    for l in lpms {
        m.entry(LecSign::new(l.internal_mask, q.vertex_count())).or_default().insert(l);
    }
    m.into_iter()
        .map(|(sign, ms)| LpmGroup { sign, members: ms.into_iter().map(|l| PartialMatch::from_lpm(l, q)).collect() })
        .collect()
}

/// Groups as vertices, linked when some members' features are joinable.
#[derive(Debug, Clone)]
pub struct LpmJoinGraph {
    pub groups: Vec<LpmGroup>,
    adj: Vec<BTreeSet<usize>>,
}

impl LpmJoinGraph {
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, n) in self.adj.iter().enumerate() {
            out.extend(n.iter().filter(|&&j| i < j).map(|&j| (i, j)));
        }
        out
    }
}

pub fn build_lpm_join_graph(groups: Vec<LpmGroup>) -> LpmJoinGraph {
    let n = groups.len();
    let mut adj = vec![BTreeSet::new(); n];
    for i in 0..n {
        let fi: BTreeSet<&LecFeature> = groups[i].members.iter().map(|m| &m.feature).collect();
        for j in i + 1..n {
            let fj: BTreeSet<&LecFeature> = groups[j].members.iter().map(|m| &m.feature).collect();
            if fi.iter().any(|a| fj.iter().any(|b| joinable(a, b))) {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    LpmJoinGraph { groups, adj }
}

/// Which live group to expand next.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PickOrder {
    /// Smallest group first, ties to the least signature.
    #[default]
    SmallestFirst,
    /// Largest group first, ties to the greatest signature.
    LargestFirst,
}

/// One emitted match and the local partial matches it was joined from.
#[derive(Debug, Clone)]
pub struct AssemblyTrace {
    pub matched: Match,
    pub parts: Vec<LocalPartialMatch>,
}

struct Assembler<'a> {
    graph: &'a LpmJoinGraph,
    alive: Vec<bool>,
    ids: SyntheticIds,
    found: BTreeSet<Match>,
    traces: Option<Vec<AssemblyTrace>>,
}

impl Assembler<'_> {
    fn emit(&mut self, p: &PartialMatch) {
        let m = p.to_match().expect("complete partial");
        if let Some(t) = &mut self.traces {
            t.push(AssemblyTrace { matched: m.clone(), parts: p.parts.clone() });
        }
        self.found.insert(m);
    }

    fn expand(&mut self, chosen: &mut Vec<bool>, partials: Vec<PartialMatch>) {
        let g = self.graph;
        let next_groups = frontier(&g.adj, &self.alive, chosen, |v| (g.groups[v].sign, g.groups[v].members.len()));
        for v in next_groups {
            let mut next: BTreeMap<(Vec<Option<VertexId>>, LecSign), PartialMatch> = BTreeMap::new();
            for p in &partials {
                for m in &g.groups[v].members {
                    let Some(k) = join_partials(p, m, &mut self.ids) else { continue };
                    if k.is_complete() {
                        self.emit(&k);
                    } else {
                        next.entry((k.assignment.clone(), k.sign())).or_insert(k);
                    }
                }
            }
            if next.is_empty() {
                continue;
            }
            chosen[v] = true;
            self.expand(chosen, next.into_values().collect());
            chosen[v] = false;
        }
    }
}

fn run(graph: &LpmJoinGraph, order: PickOrder, trace: bool) -> (BTreeSet<Match>, Vec<AssemblyTrace>) {
    let n = graph.groups.len();
    let mut sizes: Vec<usize> = graph.groups.iter().map(|g| g.members.len()).collect();
    let mut signs: Vec<LecSign> = graph.groups.iter().map(|g| g.sign).collect();
    if order == PickOrder::LargestFirst {
        // Inverting the keys turns the smallest-first pick into largest-first.
        sizes.iter_mut().for_each(|s| *s = usize::MAX - *s);
        signs.iter_mut().for_each(|s| *s = LecSign::new(!s.bits(), s.len()));
    }
    let mut asm = Assembler {
        graph,
        alive: vec![true; n],
        ids: SyntheticIds::default(),
        found: BTreeSet::new(),
        traces: trace.then(Vec::new),
    };
    drop_outliers(&graph.adj, &mut asm.alive);
    while let Some(vmin) = pick_smallest(&sizes, &signs, &asm.alive) {
        let mut chosen = vec![false; n];
        chosen[vmin] = true;
        asm.expand(&mut chosen, graph.groups[vmin].members.clone());
        asm.alive[vmin] = false;
        drop_outliers(&graph.adj, &mut asm.alive);
    }
    (asm.found, asm.traces.unwrap_or_default())
}

/// Complete crossing matches from the group join graph.
pub fn assemble(graph: &LpmJoinGraph) -> BTreeSet<Match> {
    run(graph, PickOrder::SmallestFirst, false).0
}

pub fn assemble_with_order(graph: &LpmJoinGraph, order: PickOrder) -> BTreeSet<Match> {
    run(graph, order, false).0
}

/// Like [`assemble`], also returning every emitted join chain.
pub fn assemble_traced(graph: &LpmJoinGraph) -> (BTreeSet<Match>, Vec<AssemblyTrace>) {
    run(graph, PickOrder::SmallestFirst, true)
}

/// Baseline assembly without grouping: every partial is tried against
/// every local partial match until no new partial appears.
pub fn basic_assemble<'a>(lpms: impl IntoIterator<Item = &'a LocalPartialMatch>, q: &QueryGraph) -> BTreeSet<Match> {
    let base: Vec<PartialMatch> = lpms.into_iter().map(|l| PartialMatch::from_lpm(l, q)).collect();
    let mut ids = SyntheticIds::default();
    let mut seen: BTreeSet<(Vec<Option<VertexId>>, LecSign)> =
        base.iter().map(|p| (p.assignment.clone(), p.sign())).collect();
    let mut queue: VecDeque<PartialMatch> = base.iter().cloned().collect();
    let mut out = BTreeSet::new();
    while let Some(p) = queue.pop_front() {
        for b in &base {
            let Some(k) = join_partials(&p, b, &mut ids) else { continue };
            if let Some(m) = k.to_match() {
                out.insert(m);
            } else if seen.insert((k.assignment.clone(), k.sign())) {
                queue.push_back(k);
            }
        }
    }
    out
}
