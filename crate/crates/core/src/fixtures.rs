//! Hand-built datasets used by tests, benchmarks and the command line demo:
//! a three-fragment person/interest graph with a four-pattern query, and a
//! two-partitioning comparison for the cost model.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::graph::RdfGraph;
use crate::ntriples::parse_ntriples_str;
use crate::partition::{build_distributed, DistributedGraph, VertexAssignment};
use crate::local::{validate_lpm, LocalPartialMatch};
use crate::query::{parse_bgp, QueryGraph, ResolvedQuery};
use crate::term::Term;

pub const EX: &str = "http://example.org/";

/// Person/interest graph. Vertex `003` is the literal `"Crispin Wright"@en`;
/// every other vertex is the IRI `http://example.org/<id>`.
pub const RUNNING_DATA: &str = r#"<http://example.org/001> <http://example.org/name> "Crispin Wright"@en .
<http://example.org/001> <http://example.org/type> <http://example.org/002> .
<http://example.org/005> <http://example.org/label> <http://example.org/004> .
<http://example.org/001> <http://example.org/influencedBy> <http://example.org/006> .
<http://example.org/001> <http://example.org/influencedBy> <http://example.org/012> .
<http://example.org/006> <http://example.org/mainInterest> <http://example.org/005> .
<http://example.org/006> <http://example.org/mainInterest> <http://example.org/008> .
<http://example.org/008> <http://example.org/label> <http://example.org/009> .
<http://example.org/006> <http://example.org/mainInterest> <http://example.org/007> .
<http://example.org/007> <http://example.org/label> <http://example.org/010> .
<http://example.org/014> <http://example.org/mainInterest> <http://example.org/013> .
<http://example.org/012> <http://example.org/mainInterest> <http://example.org/011> .
<http://example.org/011> <http://example.org/label> <http://example.org/015> .
<http://example.org/013> <http://example.org/label> <http://example.org/015> .
"#;

/// Vertex order of the parsed query: `?p2, ?t, ?p1, ?l, "Crispin Wright"@en`.
pub const RUNNING_QUERY: &str = r#"PREFIX ex: <http://example.org/>
SELECT ?p2 ?l WHERE {
  ?p2 ex:mainInterest ?t .
  ?p1 ex:influencedBy ?p2 .
  ?t ex:label ?l .
  ?p1 ex:name "Crispin Wright"@en .
}
"#;

/// Fragment membership by vertex id.
pub const RUNNING_FRAGMENTS: [&[&str]; 3] = [
    &["001", "002", "003", "004", "005"],
    &["006", "007", "008", "009", "010", "014"],
    &["011", "012", "013", "015"],
];

/// The term behind a running-example vertex id.
pub fn running_term(id: &str) -> Term {
    if id == "003" {
        Term::lang_literal("Crispin Wright", "en")
    } else {
        Term::iri(format!("{EX}{id}"))
    }
}

/// Short id of a running-example term (inverse of [`running_term`]).
pub fn running_id(t: &Term) -> String {
    if *t == running_term("003") {
        "003".into()
    } else {
        t.lexical.trim_start_matches(EX).to_string()
    }
}

pub fn running_graph() -> RdfGraph {
    parse_ntriples_str(RUNNING_DATA).expect("fixture parses")
}

pub fn running_query() -> QueryGraph {
    parse_bgp(RUNNING_QUERY).expect("fixture parses")
}

fn assignment_from(g: &RdfGraph, groups: &[&[&str]], term: impl Fn(&str) -> Term) -> Result<VertexAssignment> {
    let map: BTreeMap<Term, u32> = groups
        .iter()
        .enumerate()
        .flat_map(|(i, ids)| ids.iter().map(move |id| (i, *id)))
        .map(|(i, id)| (term(id), i as u32))
        .collect();
    VertexAssignment::from_terms(g, &map)
}

pub fn running_assignment(g: &RdfGraph) -> VertexAssignment {
    assignment_from(g, &RUNNING_FRAGMENTS, running_term).expect("fixture assignment is total")
}

pub fn running_distributed() -> DistributedGraph {
    let g = running_graph();
    build_distributed(&g, &running_assignment(&g)).expect("fixture builds")
}

/// The running example's local partial matches by name: fragment index,
/// bound vertex per query position (empty when unbound) and signature.
pub const RUNNING_LPMS: [(&str, u32, [&str; 5], &str); 8] = [
    ("f1-a", 0, ["006", "", "001", "", "003"], "00101"),
    ("f1-b", 0, ["012", "", "001", "", "003"], "00101"),
    ("f1-c", 0, ["006", "005", "", "004", ""], "01010"),
    ("f2-a", 1, ["006", "008", "001", "009", ""], "11010"),
    ("f2-b", 1, ["006", "007", "001", "010", ""], "11010"),
    ("f2-c", 1, ["006", "005", "001", "", ""], "10000"),
    ("f3-a", 2, ["012", "011", "001", "015", ""], "11010"),
    ("f3-b", 2, ["014", "013", "", "015", ""], "01010"),
];

/// Builds the named local partial matches of [`RUNNING_LPMS`] against the
/// running distribution. Panics if any entry is not a valid local partial
/// match of its fragment.
pub fn running_lpms(d: &DistributedGraph, q: &QueryGraph) -> Vec<(&'static str, LocalPartialMatch)> {
    RUNNING_LPMS
        .iter()
        .map(|(name, frag, ids, _)| {
            let f = d.fragment(*frag);
            let rq = ResolvedQuery::new(q, f.vocab());
            let asg: Vec<_> = ids
                .iter()
                .map(|id| (!id.is_empty()).then(|| d.vocab().vertex_id(&running_term(id)).expect("fixture vertex")))
                .collect();
            let lpm = validate_lpm(f, &rq, &asg).unwrap_or_else(|| panic!("{name} is not a local partial match"));
            (*name, lpm)
        })
        .collect()
}

/// Partition file text for the running example.
pub fn running_partition_file() -> String {
    let g = running_graph();
    running_assignment(&g).to_file_string(&g)
}

pub const STAR_BASE: &str = "http://example.org/star/";

/// Graph used to compare two partitionings under the cost model. A hub `h`
/// carries most of the star-query structure; `g` is a second, smaller hub.
pub const STAR_DATA: &str = "\
<http://example.org/star/h> <http://example.org/star/p> <http://example.org/star/a1> .
<http://example.org/star/h> <http://example.org/star/p> <http://example.org/star/a2> .
<http://example.org/star/h> <http://example.org/star/q> <http://example.org/star/a3> .
<http://example.org/star/h> <http://example.org/star/q> <http://example.org/star/a4> .
<http://example.org/star/h> <http://example.org/star/q> <http://example.org/star/b> .
<http://example.org/star/g> <http://example.org/star/p> <http://example.org/star/c1> .
<http://example.org/star/g> <http://example.org/star/q> <http://example.org/star/c2> .
<http://example.org/star/h> <http://example.org/star/r> <http://example.org/star/u1> .
<http://example.org/star/u1> <http://example.org/star/r> <http://example.org/star/g> .
<http://example.org/star/b> <http://example.org/star/r> <http://example.org/star/w1> .
<http://example.org/star/w1> <http://example.org/star/r> <http://example.org/star/c2> .
<http://example.org/star/a1> <http://example.org/star/r> <http://example.org/star/a2> .
<http://example.org/star/a3> <http://example.org/star/r> <http://example.org/star/a4> .
<http://example.org/star/a4> <http://example.org/star/r> <http://example.org/star/x1> .
<http://example.org/star/x1> <http://example.org/star/r> <http://example.org/star/x2> .
<http://example.org/star/x2> <http://example.org/star/r> <http://example.org/star/x3> .
<http://example.org/star/x3> <http://example.org/star/r> <http://example.org/star/a3> .
<http://example.org/star/x1> <http://example.org/star/r> <http://example.org/star/x3> .
";

pub const STAR_QUERY: &str =
    "SELECT * WHERE { ?c <http://example.org/star/p> ?x . ?c <http://example.org/star/q> ?y . }";

/// First partitioning: the hub `h` is cut from all of its `p`/`q` targets
/// except `b`.
pub const STAR_PARTITION_A: [&[&str]; 2] = [
    &["h", "b", "g", "c1", "c2", "u1", "w1"],
    &["a1", "a2", "a3", "a4", "x1", "x2", "x3"],
];

/// Second partitioning: cheaper under the cost model.
pub const STAR_PARTITION_B: [&[&str]; 2] = [
    &["h", "a1", "a2", "g", "u1"],
    &["a3", "a4", "b", "c1", "c2", "w1", "x1", "x2", "x3"],
];

pub fn star_term(id: &str) -> Term {
    Term::iri(format!("{STAR_BASE}{id}"))
}

pub fn star_graph() -> RdfGraph {
    parse_ntriples_str(STAR_DATA).expect("fixture parses")
}

pub fn star_query() -> QueryGraph {
    parse_bgp(STAR_QUERY).expect("fixture parses")
}

pub fn star_assignment(g: &RdfGraph, groups: &[&[&str]]) -> VertexAssignment {
    assignment_from(g, groups, star_term).expect("fixture assignment is total")
}

pub fn star_distributed(groups: &[&[&str]]) -> DistributedGraph {
    let g = star_graph();
    build_distributed(&g, &star_assignment(&g, groups)).expect("fixture builds")
}
