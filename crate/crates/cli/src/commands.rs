use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use lecq_core::candidates::{aggregate, compress, local_candidates, CandidateFilter};
use lecq_core::engine::{baselines, run_query, EngineOptions, Phase, QueryOutcome};
use lecq_core::local::{dump_lpms as dump_fragment_lpms, find_local_partial_matches};
use lecq_core::partition::partition_cost;
use lecq_core::synth::random_instance;
use lecq_core::{Match, QueryGraph, Vocab};

use crate::config::{load_data, resolve_threads, write_output, CliError, CliResult, PartitionSource, RunConfig};
use crate::{BenchArgs, DumpArgs, PartitionArgs, QueryArgs};

/// Renders rows as a text table: first column left-aligned, the rest
/// right-aligned.
fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let mut out = String::new();
    let header: Vec<String> = header.iter().map(|h| h.to_string()).collect();
    for r in std::iter::once(&header).chain(rows) {
        let cells: Vec<String> = r
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn partition(a: PartitionArgs) -> CliResult {
    let mut sources: Vec<PartitionSource> = a.hash_parts.iter().map(|&k| PartitionSource::Hash(k)).collect();
    sources.extend(a.partition_files.iter().cloned().map(PartitionSource::File));
    if sources.is_empty() {
        return Err(CliError::other("give at least one --hash-parts or --partition-file"));
    }
    let g = load_data(&a.data)?;
    let mut scored = Vec::new();
    for s in &sources {
        let assignment = s.assignment(&g)?;
        let d = lecq_core::build_distributed(&g, &assignment)?;
        scored.push((s, assignment, d.fragments().len(), partition_cost(&d)));
    }
    // Stable: equal costs keep command-line order.
    scored.sort_by_key(|x| x.3.cost);

    let rows: Vec<Vec<String>> = scored
        .iter()
        .enumerate()
        .map(|(i, (s, _, k, r))| {
            vec![
                s.label(),
                (i + 1).to_string(),
                k.to_string(),
                r.crossing_edges.to_string(),
                r.max_fragment_edges.to_string(),
                r.cost_exact(),
                format!("{:.4}", r.cost_decimal()),
            ]
        })
        .collect();
    print!("{}", table(&["source", "rank", "fragments", "crossing", "max_edges", "cost", "cost_decimal"], &rows));

    if let Some(path) = &a.cost {
        let ranking: Vec<Value> = scored
            .iter()
            .enumerate()
            .map(|(i, (s, _, k, r))| json!({"rank": i + 1, "source": s.label(), "fragments": k, "report": r.to_json()}))
            .collect();
        write_output(path, &pretty(&json!({ "ranking": ranking })))?;
    }
    if let Some(path) = &a.out {
        let (_, best, _, _) = &scored[0];
        write_output(path, &best.to_file_string(&g))?;
    }
    Ok(())
}

fn match_line(m: &Match, q: &QueryGraph, vocab: &Vocab) -> String {
    let mut b = m.bindings(q, vocab);
    if !q.projection().is_empty() {
        b.retain(|k, _| q.projection().contains(k));
    }
    let obj: Map<String, Value> = b.into_iter().map(|(k, v)| (k, Value::String(v))).collect();
    Value::Object(obj).to_string()
}

pub fn query(a: QueryArgs) -> CliResult {
    let mut cfg = RunConfig::new(a.data, a.query, &a.source, &a.engine)?;
    cfg.stats = a.stats;
    cfg.matches = a.matches;
    let (_, q, d) = cfg.load()?;
    let out = run_query(&d, &q, &cfg.options)?;

    let mut lines = String::new();
    for m in &out.matches {
        lines.push_str(&match_line(m, &q, d.vocab()));
        lines.push('\n');
    }
    match &cfg.matches {
        Some(path) => {
            write_output(path, &lines)?;
            let c = &out.stats.counts;
            println!("{} matches ({} crossing, {} intra-fragment)", c.total_matches, c.crossing_matches, c.intra_matches);
        }
        None => print!("{lines}"),
    }
    if let Some(path) = &cfg.stats {
        write_output(path, &pretty(&out.stats.to_json()))?;
    }
    Ok(())
}

fn bench_row(name: &str, out: &QueryOutcome, timings: bool) -> (Vec<String>, Value) {
    let s = &out.stats;
    let c = &s.counts;
    let l = &s.ledger;
    let candidate_bytes = l.bytes(Phase::CandidateUp) + l.bytes(Phase::CandidateDown);
    let mut row = vec![
        name.to_string(),
        c.total_matches.to_string(),
        c.lpms.to_string(),
        c.lpms_shipped.to_string(),
        c.features.to_string(),
        c.survivors.to_string(),
        candidate_bytes.to_string(),
        l.bytes(Phase::FeatureUp).to_string(),
        l.bytes(Phase::LpmUp).to_string(),
        l.total_bytes().to_string(),
    ];
    let mut json = json!({
        "name": name,
        "counts": s.to_json()["counts"],
        "shipment": s.to_json()["shipment"],
        "shipment_total": l.total_bytes(),
    });
    if timings {
        let st = &s.stages;
        let total = st.candidates_ms + st.lpm_ms + st.features_ms + st.prune_ms + st.assembly_ms;
        row.push(format!("{total:.3}"));
        json["stages"] = s.to_json()["stages"].clone();
    }
    (row, json)
}

pub fn bench(a: BenchArgs) -> CliResult {
    let threads = resolve_threads(a.threads)?;
    let base = EngineOptions { bits: a.bits, threads, ..Default::default() };
    let (label, q, d) = match (a.seed, &a.data, &a.query) {
        (Some(seed), _, _) => {
            let inst = random_instance(seed);
            (format!("seed:{seed}"), inst.query, inst.distributed)
        }
        (None, Some(data), Some(query)) => {
            let source = match (a.hash_parts, &a.partition_file) {
                (Some(k), _) => PartitionSource::Hash(k),
                (None, Some(p)) => PartitionSource::File(p.clone()),
                (None, None) => return Err(CliError::other("give --hash-parts or --partition-file with --data")),
            };
            let g = load_data(data)?;
            let q = crate::config::load_query(query)?;
            let d = source.distribute(&g)?;
            (source.label(), q, d)
        }
        _ => return Err(CliError::other("give --seed, or --data with --query and a partition source")),
    };
    let rows = baselines(&d, &q, &base)?;
    let mut header =
        vec!["config", "matches", "lpms", "shipped", "features", "survivors", "cand_bytes", "feat_bytes", "lpm_bytes", "total_bytes"];
    if a.timings {
        header.push("ms");
    }
    let (text_rows, json_rows): (Vec<_>, Vec<_>) = rows.iter().map(|r| bench_row(r.name, &r.outcome, a.timings)).unzip();
    println!("instance {label}: {} fragments, {} query edges", d.fragments().len(), q.edge_count());
    print!("{}", table(&header, &text_rows));
    if let Some(path) = &a.json {
        write_output(path, &pretty(&json!({ "instance": label, "rows": json_rows })))?;
    }
    Ok(())
}

pub fn dump_lpms(a: DumpArgs) -> CliResult {
    let cfg = RunConfig::new(
        a.data,
        a.query,
        &a.source,
        &crate::EngineArgs {
            bits: a.bits,
            no_candidates: !a.candidates,
            no_prune: true,
            basic_assembly: false,
            prune_mode: crate::PruneModeArg::RoundTrip,
            threads: Some(1),
        },
    )?;
    let (_, q, d) = cfg.load()?;
    let filter = if cfg.options.candidates {
        let mut filter = CandidateFilter::new(q.vertex_count());
        for v in q.variable_vertices() {
            let mut per_site = Vec::new();
            for f in d.fragments() {
                let local = local_candidates(f, &q, v)?;
                per_site.push(compress(&local, v as u16, cfg.options.bits)?);
            }
            filter.set(v, aggregate(&per_site)?);
        }
        Some(filter)
    } else {
        None
    };
    let mut counts = BTreeMap::new();
    for f in d.fragments() {
        let lpms = find_local_partial_matches(f, &q, filter.as_ref());
        counts.insert(f.id, lpms.len());
        print!("{}", dump_fragment_lpms(f, &lpms));
    }
    if counts.values().all(|&n| n == 0) {
        eprintln!("no local partial matches");
    }
    Ok(())
}
