use lecq_core::engine::{baselines, run_query, EngineOptions, Endpoint, Phase, PruneMode};
use lecq_core::fixtures;
use lecq_core::matching::find_matches_centralized;
use lecq_core::partition::{build_distributed, hash_partition};
use lecq_core::query::parse_bgp;
use lecq_core::synth::corpus;

#[test]
fn stats_json_has_every_section() {
    let d = fixtures::running_distributed();
    let q = fixtures::running_query();
    let out = run_query(&d, &q, &EngineOptions { candidates: false, ..Default::default() }).unwrap();
    let json = out.stats.to_json();
    for key in ["candidates_ms", "lpm_ms", "features_ms", "prune_ms", "assembly_ms"] {
        assert!(json["stages"][key].is_number(), "{key}");
    }
    for p in Phase::ALL {
        assert!(json["shipment"][p.name()].is_u64(), "{}", p.name());
    }
    for key in ["lpms", "features", "survivors", "crossing_matches", "total_matches"] {
        assert!(json["counts"][key].is_u64(), "{key}");
    }
    assert_eq!(json["counts"]["total_matches"], 4);
    assert_eq!(json["counts"]["lpms"], 8);
    assert_eq!(json["counts"]["features"], 7);
    assert_eq!(json["counts"]["survivors"], 6);
    assert_eq!(json["counts"]["lpms_shipped"], 7);
}

#[test]
fn candidate_filter_drops_the_isolated_match_early() {
    let d = fixtures::running_distributed();
    let q = fixtures::running_query();
    let counts = run_query(&d, &q, &EngineOptions::default()).unwrap().stats.counts;
    assert_eq!(counts.lpms, 7);
    assert_eq!(counts.features, 6);
    assert_eq!(counts.survivors, 6);
}

#[test]
fn every_message_is_between_coordinator_and_a_site() {
    let d = fixtures::running_distributed();
    let q = fixtures::running_query();
    let out = run_query(&d, &q, &EngineOptions::default()).unwrap();
    let entries = out.stats.ledger.entries();
    assert!(!entries.is_empty());
    for e in entries {
        let down = e.from == Endpoint::Coordinator && matches!(e.to, Endpoint::Site(_));
        let up = e.to == Endpoint::Coordinator && matches!(e.from, Endpoint::Site(_));
        assert!(down || up, "{e:?}");
    }
    assert_eq!(out.stats.ledger.messages(Phase::QueryDown), 3);
    let query_bytes = q.to_string().len() as u64;
    assert_eq!(out.stats.ledger.bytes(Phase::QueryDown), 3 * query_bytes);
}

#[test]
fn disabled_stages_ship_nothing() {
    let d = fixtures::running_distributed();
    let q = fixtures::running_query();
    let opts = EngineOptions { candidates: false, prune: false, ..Default::default() };
    let ledger = run_query(&d, &q, &opts).unwrap().stats.ledger;
    for p in [Phase::CandidateUp, Phase::CandidateDown, Phase::FeatureUp, Phase::PruneDown] {
        assert_eq!(ledger.bytes(p), 0, "{}", p.name());
        assert_eq!(ledger.messages(p), 0, "{}", p.name());
    }
    assert!(ledger.bytes(Phase::LpmUp) > 0);
}

#[test]
fn round_trip_ships_no_more_lpm_bytes_than_coordinator_side() {
    for inst in corpus(900, 150) {
        let rt = run_query(&inst.distributed, &inst.query, &EngineOptions::default()).unwrap();
        let cs = run_query(
            &inst.distributed,
            &inst.query,
            &EngineOptions { prune_mode: PruneMode::CoordinatorSide, ..Default::default() },
        )
        .unwrap();
        assert_eq!(rt.matches, cs.matches, "seed {}", inst.seed);
        assert_eq!(rt.survivors, cs.survivors, "seed {}", inst.seed);
        assert!(rt.stats.ledger.bytes(Phase::LpmUp) <= cs.stats.ledger.bytes(Phase::LpmUp));
        assert_eq!(cs.stats.ledger.bytes(Phase::FeatureUp), 0);
    }
}

#[test]
fn single_fragment_gives_four_identical_baselines() {
    let g = fixtures::running_graph();
    let d = build_distributed(&g, &hash_partition(&g, 1).unwrap()).unwrap();
    let q = fixtures::running_query();
    let rows = baselines(&d, &q, &EngineOptions::default()).unwrap();
    assert_eq!(rows.len(), 4);
    let expected = find_matches_centralized(&g, &q);
    for r in &rows {
        assert_eq!(r.outcome.matches, expected, "{}", r.name);
        assert_eq!(r.outcome.crossing.len(), 0);
        assert_eq!(r.outcome.stats.counts.lpms, 0);
    }
}

#[test]
fn empty_result_query_runs_cleanly() {
    let d = fixtures::running_distributed();
    let q = parse_bgp("SELECT ?x WHERE { ?x <http://example.org/nothing> ?y . }").unwrap();
    let out = run_query(&d, &q, &EngineOptions::default()).unwrap();
    assert!(out.matches.is_empty());
}

#[test]
fn running_example_counts_by_configuration() {
    let d = fixtures::running_distributed();
    let q = fixtures::running_query();
    let rows = baselines(&d, &q, &EngineOptions::default()).unwrap();
    let names: Vec<&str> = rows.iter().map(|r| r.name).collect();
    assert_eq!(names, ["Basic", "LA", "LO", "Full"]);
    for r in &rows {
        assert_eq!(r.outcome.matches.len(), 4, "{}", r.name);
    }
    let shipped = |i: usize| rows[i].outcome.stats.counts.lpms_shipped;
    assert_eq!(shipped(0), 8);
    assert_eq!(shipped(2), 7);
}
