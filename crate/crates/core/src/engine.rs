//! Coordinator and simulated sites. Sites exchange typed messages with the
//! coordinator only; every message is measured in its wire encoding and
//! appended to a shipment ledger.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::assembly::{assemble, basic_assemble, build_lpm_join_graph, group_lpms};
use crate::candidates::{aggregate, compress, local_candidates_resolved, CandidateBitVector, CandidateFilter, DEFAULT_BITS};
use crate::error::{Error, Result};
use crate::lec::{build_feature_join_graph, feature_of, group_features, prune_features, LecFeature, FEATURE_ENTRY_BYTES, FEATURE_HEADER_BYTES};
use crate::local::{find_intra_fragment_matches_resolved, find_local_partial_matches_resolved, LocalPartialMatch};
use crate::matching::Match;
use crate::partition::{DistributedGraph, Fragment};
use crate::query::{QueryGraph, ResolvedQuery};

/// Ledger phases, in pipeline order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    QueryDown,
    CandidateUp,
    CandidateDown,
    MatchUp,
    FeatureUp,
    PruneDown,
    LpmUp,
}

impl Phase {
    pub const ALL: [Phase; 7] = [
        Phase::QueryDown,
        Phase::CandidateUp,
        Phase::CandidateDown,
        Phase::MatchUp,
        Phase::FeatureUp,
        Phase::PruneDown,
        Phase::LpmUp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Phase::QueryDown => "query-down",
            Phase::CandidateUp => "candidate-up",
            Phase::CandidateDown => "candidate-down",
            Phase::MatchUp => "match-up",
            Phase::FeatureUp => "feature-up",
            Phase::PruneDown => "prune-down",
            Phase::LpmUp => "lpm-up",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Endpoint {
    Coordinator,
    Site(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub phase: Phase,
    pub from: Endpoint,
    pub to: Endpoint,
    pub bytes: u64,
    pub messages: u64,
}

/// Append-only record of coordinator/site traffic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ShipmentLedger {
    entries: Vec<LedgerEntry>,
}

impl ShipmentLedger {
    fn record(&mut self, phase: Phase, from: Endpoint, to: Endpoint, bytes: usize) {
        self.entries.push(LedgerEntry { phase, from, to, bytes: bytes as u64, messages: 1 });
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn bytes(&self, phase: Phase) -> u64 {
        self.entries.iter().filter(|e| e.phase == phase).map(|e| e.bytes).sum()
    }

    pub fn messages(&self, phase: Phase) -> u64 {
        self.entries.iter().filter(|e| e.phase == phase).map(|e| e.messages).sum()
    }

    pub fn total_bytes(&self) -> u64 {
        self.entries.iter().map(|e| e.bytes).sum()
    }

    /// Bytes per phase name, every phase present.
    pub fn by_phase(&self) -> BTreeMap<&'static str, u64> {
        Phase::ALL.iter().map(|&p| (p.name(), self.bytes(p))).collect()
    }
}

/// Wire length of a local partial match: fragment id, one u32 slot per
/// query vertex, the edge-map entry count and entries, and the signature.
pub fn lpm_wire_len(lpm: &LocalPartialMatch) -> usize {
    let n = lpm.assignment.len();
    let entries = lpm.edge_map.iter().filter(|e| e.is_some()).count();
    4 + 4 * n + 2 + FEATURE_ENTRY_BYTES * entries + n.div_ceil(8)
}

/// Wire length of a complete match: one u32 per query vertex.
pub fn match_wire_len(m: &Match) -> usize {
    4 * m.assignment.len()
}

#[derive(Debug, Clone)]
enum Message {
    Query(QueryGraph),
    Candidates(CandidateBitVector),
    Matches(Vec<Match>),
    Features(Vec<LecFeature>),
    Survivors(Vec<u32>),
    Lpms(Vec<LocalPartialMatch>),
}

impl Message {
    fn phase(&self, up: bool) -> Phase {
        match self {
            Message::Query(_) => Phase::QueryDown,
            Message::Candidates(_) if up => Phase::CandidateUp,
            Message::Candidates(_) => Phase::CandidateDown,
            Message::Matches(_) => Phase::MatchUp,
            Message::Features(_) => Phase::FeatureUp,
            Message::Survivors(_) => Phase::PruneDown,
            Message::Lpms(_) => Phase::LpmUp,
        }
    }

    fn wire_len(&self) -> usize {
        match self {
            Message::Query(q) => q.to_string().len(),
            Message::Candidates(bv) => bv.wire_len(),
            Message::Matches(ms) => ms.iter().map(match_wire_len).sum(),
            Message::Features(fs) => fs.iter().map(LecFeature::wire_len).sum(),
            Message::Survivors(ids) => 4 * ids.len(),
            Message::Lpms(ls) => ls.iter().map(lpm_wire_len).sum(),
        }
    }
}

/// What a site does when the coordinator releases the next barrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Candidates,
    Evaluate,
    Ship,
}

/// Where pruning decisions are applied.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PruneMode {
    /// Sites ship features, receive surviving feature ids, and ship only the
    /// matching local partial matches.
    #[default]
    RoundTrip,
    /// Sites ship every local partial match; the coordinator derives the
    /// features and drops the pruned matches itself.
    CoordinatorSide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineOptions {
    pub candidates: bool,
    pub prune: bool,
    pub lec_assembly: bool,
    pub bits: u32,
    pub prune_mode: PruneMode,
    /// Worker threads for site phases; 0 uses the global pool, 1 runs
    /// sequentially.
    pub threads: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            candidates: true,
            prune: true,
            lec_assembly: true,
            bits: DEFAULT_BITS,
            prune_mode: PruneMode::RoundTrip,
            threads: 1,
        }
    }
}

struct Site<'a> {
    frag: &'a Fragment,
    inbox: VecDeque<Message>,
    outbox: Vec<Message>,
    query: Option<ResolvedQuery>,
    filter: Option<CandidateFilter>,
    survivors: Option<BTreeSet<u32>>,
    lpms: Vec<LocalPartialMatch>,
    lpm_feature: Vec<u32>,
    opts: EngineOptions,
}

impl<'a> Site<'a> {
    fn new(frag: &'a Fragment, opts: EngineOptions) -> Self {
        Site {
            frag,
            inbox: VecDeque::new(),
            outbox: Vec::new(),
            query: None,
            filter: None,
            survivors: None,
            lpms: Vec::new(),
            lpm_feature: Vec::new(),
            opts,
        }
    }

    fn drain_inbox(&mut self) {
        while let Some(m) = self.inbox.pop_front() {
            match m {
                Message::Query(q) => self.query = Some(ResolvedQuery::new(&q, self.frag.vocab())),
                Message::Candidates(bv) => {
                    let n = self.query.as_ref().map_or(0, ResolvedQuery::n);
                    let f = self.filter.get_or_insert_with(|| CandidateFilter::new(n));
                    f.set(bv.variable() as usize, bv);
                }
                Message::Survivors(ids) => self.survivors = Some(ids.into_iter().collect()),
                other => unreachable!("site received an upstream message {other:?}"),
            }
        }
    }

    fn step(&mut self, step: Step) {
        self.drain_inbox();
        let rq = self.query.as_ref().expect("query delivered before any step");
        match step {
            Step::Candidates => {
                for v in rq.query.variable_vertices() {
                    let cands = local_candidates_resolved(self.frag, rq, v);
                    let bv = compress(&cands, v as u16, self.opts.bits).expect("bits validated");
                    self.outbox.push(Message::Candidates(bv));
                }
            }
            Step::Evaluate => {
                let lpms = find_local_partial_matches_resolved(self.frag, rq, self.filter.as_ref());
                let intra = find_intra_fragment_matches_resolved(self.frag, rq);
                self.outbox.push(Message::Matches(intra.into_iter().collect()));
                self.lpms = lpms.into_iter().collect();
                if self.opts.prune && self.opts.prune_mode == PruneMode::RoundTrip {
                    let mut index: BTreeMap<LecFeature, u32> = BTreeMap::new();
                    let mut features = Vec::new();
                    self.lpm_feature = self
                        .lpms
                        .iter()
                        .map(|l| {
                            let f = feature_of(l, &rq.query);
                            *index.entry(f.clone()).or_insert_with(|| {
                                features.push(f);
                                features.len() as u32 - 1
                            })
                        })
                        .collect();
                    self.outbox.push(Message::Features(features));
                } else {
                    self.outbox.push(Message::Lpms(std::mem::take(&mut self.lpms)));
                }
            }
            Step::Ship => {
                let keep = self.survivors.take().unwrap_or_default();
                let shipped = self
                    .lpms
                    .iter()
                    .zip(&self.lpm_feature)
                    .filter(|(_, f)| keep.contains(f))
                    .map(|(l, _)| l.clone())
                    .collect();
                self.outbox.push(Message::Lpms(shipped));
            }
        }
    }
}

/// Stage wall times in milliseconds.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageTimes {
    pub candidates_ms: f64,
    pub lpm_ms: f64,
    pub features_ms: f64,
    pub prune_ms: f64,
    pub assembly_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Counts {
    pub lpms: usize,
    pub lpms_shipped: usize,
    pub features: usize,
    pub survivors: usize,
    pub intra_matches: usize,
    pub crossing_matches: usize,
    pub total_matches: usize,
}

#[derive(Debug, Clone, Default)]
pub struct QueryStats {
    pub stages: StageTimes,
    pub ledger: ShipmentLedger,
    pub counts: Counts,
}

impl QueryStats {
    pub fn to_json(&self) -> Value {
        json!({
            "stages": {
                "candidates_ms": self.stages.candidates_ms,
                "lpm_ms": self.stages.lpm_ms,
                "features_ms": self.stages.features_ms,
                "prune_ms": self.stages.prune_ms,
                "assembly_ms": self.stages.assembly_ms,
            },
            "shipment": self.ledger.by_phase(),
            "shipment_total": self.ledger.total_bytes(),
            "counts": {
                "lpms": self.counts.lpms,
                "lpms_shipped": self.counts.lpms_shipped,
                "features": self.counts.features,
                "survivors": self.counts.survivors,
                "intra_matches": self.counts.intra_matches,
                "crossing_matches": self.counts.crossing_matches,
                "total_matches": self.counts.total_matches,
            },
        })
    }
}

/// Everything a query run produces.
#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub matches: BTreeSet<Match>,
    pub crossing: BTreeSet<Match>,
    pub intra: BTreeSet<Match>,
    /// Local partial matches received by the coordinator before assembly.
    pub shipped_lpms: Vec<LocalPartialMatch>,
    /// Features received by the coordinator and those kept by pruning.
    pub features: Vec<LecFeature>,
    pub survivors: BTreeSet<LecFeature>,
    pub stats: QueryStats,
}

struct Coordinator<'a> {
    sites: Vec<Site<'a>>,
    ledger: ShipmentLedger,
    pool: Option<rayon::ThreadPool>,
}

impl<'a> Coordinator<'a> {
    fn send(&mut self, site: usize, m: Message) {
        self.ledger.record(m.phase(false), Endpoint::Coordinator, Endpoint::Site(site as u32), m.wire_len());
        self.sites[site].inbox.push_back(m);
    }

    /// Runs one step on every site, then collects outboxes in site order.
    fn barrier(&mut self, step: Step) -> Vec<(usize, Message)> {
        match &self.pool {
            None => self.sites.iter_mut().for_each(|s| s.step(step)),
            Some(pool) => {
                let sites = &mut self.sites;
                pool.install(|| sites.par_iter_mut().for_each(|s| s.step(step)));
            }
        }
        let mut out = Vec::new();
        for (i, s) in self.sites.iter_mut().enumerate() {
            for m in s.outbox.drain(..) {
                self.ledger.record(m.phase(true), Endpoint::Site(i as u32), Endpoint::Coordinator, m.wire_len());
                out.push((i, m));
            }
        }
        out
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Evaluates `q` over `d`: optional candidate exchange, per-site partial
/// evaluation, optional feature pruning, assembly, and union with the
/// matches found inside single fragments.
pub fn run_query(d: &DistributedGraph, q: &QueryGraph, opts: &EngineOptions) -> Result<QueryOutcome> {
    if opts.bits == 0 {
        return Err(Error::ZeroLength);
    }
    let pool = match opts.threads {
        0 | 1 => None,
        n => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Runtime(e.to_string()))?,
        ),
    };
    let sites: Vec<Site<'_>> = d.fragments().iter().map(|f| Site::new(f, *opts)).collect();
    let mut co = Coordinator { sites, ledger: ShipmentLedger::default(), pool };
    let mut stages = StageTimes::default();
    let mut counts = Counts::default();
    let k = co.sites.len();

    for i in 0..k {
        co.send(i, Message::Query(q.clone()));
    }

    if opts.candidates {
        let t = Instant::now();
        let mut per_var: BTreeMap<u16, Vec<CandidateBitVector>> = BTreeMap::new();
        for (_, m) in co.barrier(Step::Candidates) {
            if let Message::Candidates(bv) = m {
                per_var.entry(bv.variable()).or_default().push(bv);
            }
        }
        for vectors in per_var.values() {
            let agg = aggregate(vectors)?;
            for i in 0..k {
                co.send(i, Message::Candidates(agg.clone()));
            }
        }
        stages.candidates_ms = ms_since(t);
    }

    let t = Instant::now();
    let mut intra = BTreeSet::new();
    let mut features: Vec<(usize, LecFeature)> = Vec::new();
    let mut shipped: Vec<LocalPartialMatch> = Vec::new();
    for (site, m) in co.barrier(Step::Evaluate) {
        match m {
            Message::Matches(ms) => intra.extend(ms),
            Message::Features(fs) => features.extend(fs.into_iter().map(|f| (site, f))),
            Message::Lpms(ls) => shipped.extend(ls),
            _ => unreachable!(),
        }
    }
    counts.lpms = co.sites.iter().map(|s| s.lpms.len()).sum::<usize>() + shipped.len();
    stages.lpm_ms = ms_since(t);

    let mut survivors = BTreeSet::new();
    let mut all_features: Vec<LecFeature> = Vec::new();
    if opts.prune {
        let t = Instant::now();
        if opts.prune_mode == PruneMode::CoordinatorSide {
            let set: BTreeSet<LecFeature> = shipped.iter().map(|l| feature_of(l, q)).collect();
            all_features = set.into_iter().collect();
        } else {
            all_features = features.iter().map(|(_, f)| f.clone()).collect();
        }
        stages.features_ms = ms_since(t);
        let t = Instant::now();
        let graph = build_feature_join_graph(group_features(&all_features));
        survivors = prune_features(&graph);
        stages.prune_ms = ms_since(t);
        match opts.prune_mode {
            PruneMode::RoundTrip => {
                let mut per_site: Vec<Vec<u32>> = vec![Vec::new(); k];
                let mut next_index = vec![0u32; k];
                for (site, f) in &features {
                    if survivors.contains(f) {
                        per_site[*site].push(next_index[*site]);
                    }
                    next_index[*site] += 1;
                }
                for (i, ids) in per_site.into_iter().enumerate() {
                    co.send(i, Message::Survivors(ids));
                }
                for (_, m) in co.barrier(Step::Ship) {
                    if let Message::Lpms(ls) = m {
                        shipped.extend(ls);
                    }
                }
            }
            PruneMode::CoordinatorSide => {
                shipped.retain(|l| survivors.contains(&feature_of(l, q)));
            }
        }
    }
    counts.features = all_features.len();
    counts.survivors = survivors.len();
    counts.lpms_shipped = shipped.len();

    let t = Instant::now();
    let crossing = if opts.lec_assembly {
        assemble(&build_lpm_join_graph(group_lpms(&shipped, q)))
    } else {
        basic_assemble(&shipped, q)
    };
    stages.assembly_ms = ms_since(t);

    let matches: BTreeSet<Match> = intra.union(&crossing).cloned().collect();
    counts.intra_matches = intra.len();
    counts.crossing_matches = crossing.len();
    counts.total_matches = matches.len();
    Ok(QueryOutcome {
        matches,
        crossing,
        intra,
        shipped_lpms: shipped,
        features: all_features,
        survivors,
        stats: QueryStats { stages, ledger: co.ledger, counts },
    })
}

/// Worst-case feature-phase bytes: per fragment `|crossing|^|query edges|`
/// features, each at most `16 * (|query edges| + |query vertices|) + 6`
/// bytes. Saturating.
pub fn feature_shipment_bound(d: &DistributedGraph, q: &QueryGraph) -> u128 {
    let per = (FEATURE_ENTRY_BYTES * (q.edge_count() + q.vertex_count()) + FEATURE_HEADER_BYTES) as u128;
    let exp = q.edge_count() as u32;
    d.fragments()
        .iter()
        .map(|f| (f.crossing_edges().len() as u128).saturating_pow(exp).saturating_mul(per))
        .fold(0u128, u128::saturating_add)
}

/// Candidate-phase bytes implied by the wire format: one vector per
/// variable, site and direction.
pub fn candidate_shipment_bytes(d: &DistributedGraph, q: &QueryGraph, bits: u32) -> u64 {
    let per = crate::candidates::VECTOR_HEADER_BYTES as u64 + u64::from(bits).div_ceil(8);
    q.variable_vertices().len() as u64 * d.fragments().len() as u64 * 2 * per
}

/// A named optimisation configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Baseline {
    pub name: &'static str,
    pub candidates: bool,
    pub prune: bool,
    pub lec_assembly: bool,
}

/// Cumulative configurations: none, LEC assembly, plus pruning, plus
/// candidate filtering.
pub const BASELINES: [Baseline; 4] = [
    Baseline { name: "Basic", candidates: false, prune: false, lec_assembly: false },
    Baseline { name: "LA", candidates: false, prune: false, lec_assembly: true },
    Baseline { name: "LO", candidates: false, prune: true, lec_assembly: true },
    Baseline { name: "Full", candidates: true, prune: true, lec_assembly: true },
];

#[derive(Debug, Clone)]
pub struct BaselineRow {
    pub name: &'static str,
    pub outcome: QueryOutcome,
}

/// Runs every configuration in [`BASELINES`]; `base` supplies bit length,
/// prune mode and threads.
pub fn baselines(d: &DistributedGraph, q: &QueryGraph, base: &EngineOptions) -> Result<Vec<BaselineRow>> {
    BASELINES
        .iter()
        .map(|b| {
            let opts = EngineOptions { candidates: b.candidates, prune: b.prune, lec_assembly: b.lec_assembly, ..*base };
            Ok(BaselineRow { name: b.name, outcome: run_query(d, q, &opts)? })
        })
        .collect()
}
