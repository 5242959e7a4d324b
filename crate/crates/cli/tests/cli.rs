use std::path::PathBuf;
use std::process::{Command, Output};

use lecq_core::fixtures;
use tempfile::TempDir;

fn lecq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lecq")).args(args).env_remove("LECQ_THREADS").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Workspace { dir: tempfile::tempdir().unwrap() };
        ws.write("data.nt", fixtures::RUNNING_DATA);
        ws.write("query.rq", fixtures::RUNNING_QUERY);
        ws.write("parts.tsv", &fixtures::running_partition_file());
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn p(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn write(&self, name: &str, text: &str) {
        std::fs::write(self.path(name), text).unwrap();
    }

    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    fn query(&self, extra: &[&str]) -> Output {
        let (d, q, p) = (self.p("data.nt"), self.p("query.rq"), self.p("parts.tsv"));
        let mut args = vec!["query", "--data", &d, "--query", &q, "--partition-file", &p];
        args.extend_from_slice(extra);
        lecq(&args)
    }
}

#[test]
fn running_example_query_emits_every_match() {
    let ws = Workspace::new();
    let out = ws.query(&[]);
    assert!(out.status.success());
    let lines: Vec<String> = stdout(&out).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 4);
    assert!(lines.contains(&r#"{"l":"<http://example.org/009>","p2":"<http://example.org/006>"}"#.to_string()));
}

#[test]
fn optimisation_flags_do_not_change_match_files() {
    let ws = Workspace::new();
    let variants: [&[&str]; 4] = [
        &[],
        &["--no-prune", "--no-candidates"],
        &["--basic-assembly"],
        &["--prune-mode", "coordinator-side", "--bits", "3", "--threads", "4"],
    ];
    let mut files = Vec::new();
    for (i, flags) in variants.iter().enumerate() {
        let name = format!("m{i}.jsonl");
        let target = ws.p(&name);
        let mut args = flags.to_vec();
        args.extend_from_slice(&["--matches", &target]);
        let out = ws.query(&args);
        assert!(out.status.success(), "{flags:?}");
        files.push(ws.read(&name));
    }
    assert!(files.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn stats_file_follows_schema() {
    let ws = Workspace::new();
    let stats = ws.p("stats.json");
    assert!(ws.query(&["--stats", &stats]).status.success());
    let v: serde_json::Value = serde_json::from_str(&ws.read("stats.json")).unwrap();
    assert!(v["stages"]["assembly_ms"].is_number());
    assert_eq!(v["counts"]["total_matches"], 4);
    assert!(v["shipment"]["lpm-up"].as_u64().unwrap() > 0);
}

#[test]
fn empty_result_exits_zero() {
    let ws = Workspace::new();
    ws.write("empty.rq", "SELECT ?x WHERE { ?x <http://example.org/none> ?y . }");
    let (d, q) = (ws.p("data.nt"), ws.p("empty.rq"));
    let out = lecq(&["query", "--data", &d, "--query", &q, "--hash-parts", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
}

#[test]
fn exit_codes_follow_error_class() {
    let ws = Workspace::new();
    ws.write("bad.nt", "<a> <p> .\n");
    ws.write("bad.rq", "SELECT ?x WHERE { ?x <p> }");
    ws.write("short.tsv", "<http://example.org/001>\t0\n");
    let (d, q, p) = (ws.p("data.nt"), ws.p("query.rq"), ws.p("parts.tsv"));
    let (bd, bq, bp) = (ws.p("bad.nt"), ws.p("bad.rq"), ws.p("short.tsv"));
    let missing = ws.p("missing.nt");
    let cases: [(Vec<&str>, i32); 6] = [
        (vec!["query", "--data", &bd, "--query", &q, "--hash-parts", "2"], 2),
        (vec!["query", "--data", &missing, "--query", &q, "--hash-parts", "2"], 2),
        (vec!["query", "--data", &d, "--query", &bq, "--hash-parts", "2"], 3),
        (vec!["query", "--data", &d, "--query", &q, "--partition-file", &bp], 4),
        (vec!["query", "--data", &d, "--query", &q], 1),
        (vec!["query", "--data", &d, "--query", &q, "--hash-parts", "2", "--partition-file", &p], 1),
    ];
    for (args, code) in cases {
        let out = lecq(&args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    let out = lecq(&["query", "--data", &d, "--query", &q, "--hash-parts", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_thread_override_is_rejected() {
    let ws = Workspace::new();
    let (d, q) = (ws.p("data.nt"), ws.p("query.rq"));
    let out = Command::new(env!("CARGO_BIN_EXE_lecq"))
        .args(["query", "--data", &d, "--query", &q, "--hash-parts", "2"])
        .env("LECQ_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

fn star_files(ws: &Workspace) -> (String, String, String) {
    ws.write("star.nt", fixtures::STAR_DATA);
    let g = fixtures::star_graph();
    ws.write("a.tsv", &fixtures::star_assignment(&g, &fixtures::STAR_PARTITION_A).to_file_string(&g));
    ws.write("b.tsv", &fixtures::star_assignment(&g, &fixtures::STAR_PARTITION_B).to_file_string(&g));
    (ws.p("star.nt"), ws.p("a.tsv"), ws.p("b.tsv"))
}

#[test]
fn partition_ranks_cheaper_file_first() {
    let ws = Workspace::new();
    let (data, a, b) = star_files(&ws);
    let cost = ws.p("cost.json");
    let best = ws.p("best.tsv");
    let out = lecq(&["partition", "--data", &data, "--partition-file", &a, "--partition-file", &b, "--cost", &cost, "--out", &best]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&ws.read("cost.json")).unwrap();
    let ranking = v["ranking"].as_array().unwrap();
    assert_eq!(ranking[0]["source"], b.as_str());
    assert_eq!(ranking[0]["report"]["cost_exact"], "117/5");
    assert_eq!(ranking[1]["report"]["cost_exact"], "55/2");
    assert_eq!(ws.read("best.tsv"), ws.read("b.tsv"));
    let text = stdout(&out);
    assert!(text.find("b.tsv").unwrap() < text.find("a.tsv").unwrap());
}

#[test]
fn single_fragment_costs_nothing_and_ranks_first() {
    let ws = Workspace::new();
    let inst = lecq_core::synth::random_instance(11);
    let mut buf = Vec::new();
    lecq_core::ntriples::write_ntriples(&inst.graph, &mut buf).unwrap();
    ws.write("rand.nt", std::str::from_utf8(&buf).unwrap());
    let data = ws.p("rand.nt");
    let cost = ws.p("cost.json");
    let out = lecq(&["partition", "--data", &data, "--hash-parts", "3", "--hash-parts", "1", "--cost", &cost]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&ws.read("cost.json")).unwrap();
    assert_eq!(v["ranking"][0]["source"], "hash:1");
    assert_eq!(v["ranking"][0]["report"]["cost_exact"], "0");
}

fn bench_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(2).map(|l| l.split_whitespace().map(str::to_string).collect()).collect()
}

#[test]
fn bench_running_example_has_four_rows_with_equal_matches() {
    let ws = Workspace::new();
    let (d, q, p) = (ws.p("data.nt"), ws.p("query.rq"), ws.p("parts.tsv"));
    let json = ws.p("bench.json");
    let out = lecq(&["bench", "--data", &d, "--query", &q, "--partition-file", &p, "--json", &json]);
    assert!(out.status.success());
    let rows = bench_rows(&stdout(&out));
    let names: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["Basic", "LA", "LO", "Full"]);
    assert!(rows.iter().all(|r| r[1] == "4"));
    let v: serde_json::Value = serde_json::from_str(&ws.read("bench.json")).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 4);
}

#[test]
fn bench_single_fragment_rows_agree() {
    let ws = Workspace::new();
    let (d, q) = (ws.p("data.nt"), ws.p("query.rq"));
    let out = lecq(&["bench", "--data", &d, "--query", &q, "--hash-parts", "1"]);
    assert!(out.status.success());
    let rows = bench_rows(&stdout(&out));
    assert_eq!(rows.len(), 4);
    // Matches, partial matches, shipped partial matches and their bytes.
    for col in [1, 2, 3, 8] {
        assert!(rows.iter().all(|r| r[col] == rows[0][col]), "column {col}");
    }
}

#[test]
fn bench_with_fixed_seed_is_byte_identical() {
    let a = lecq(&["bench", "--seed", "1234", "--threads", "3"]);
    let b = lecq(&["bench", "--seed", "1234", "--threads", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn dump_lpms_marks_extended_vertices() {
    let ws = Workspace::new();
    let (d, q, p) = (ws.p("data.nt"), ws.p("query.rq"), ws.p("parts.tsv"));
    let out = lecq(&["dump-lpms", "--data", &d, "--query", &q, "--partition-file", &p]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 8);
    assert!(text.lines().any(|l| l == r#"F0: [<http://example.org/006>*, NULL, <http://example.org/001>, NULL, "Crispin Wright"@en]"#));
    let filtered = lecq(&["dump-lpms", "--data", &d, "--query", &q, "--partition-file", &p, "--candidates"]);
    assert_eq!(stdout(&filtered).lines().count(), 7);
}

#[test]
fn output_is_deterministic() {
    let ws = Workspace::new();
    let a = ws.query(&["--threads", "1"]);
    let b = ws.query(&["--threads", "4"]);
    assert_eq!(a.stdout, b.stdout);
}
