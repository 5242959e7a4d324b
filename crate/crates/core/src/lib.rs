//! Distributed evaluation of SPARQL basic graph patterns over an RDF graph
//! split into vertex-disjoint fragments.
//!
//! Each fragment keeps its internal vertices, the edges between them, and a
//! replica of every edge that leaves the fragment. Sites compute local
//! partial matches, summarise them as compact features, prune features that
//! can never reach a complete match, and ship the surviving partial matches
//! to a coordinator that joins them. [`engine::run_query`] drives the whole
//! pipeline over simulated sites and records every byte exchanged.

pub mod assembly;
pub mod candidates;
pub mod engine;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod hash;
pub mod lec;
pub mod local;
pub mod matching;
pub mod ntriples;
pub mod partition;
pub mod query;
pub mod synth;
pub mod term;

pub use engine::{run_query, EngineOptions, PruneMode, QueryOutcome, QueryStats};
pub use error::{Error, ErrorClass, Result};
pub use graph::{Edge, LabelId, RdfGraph, VertexId, Vocab};
pub use lec::{LecFeature, LecSign};
pub use local::LocalPartialMatch;
pub use matching::{find_matches_centralized, Match};
pub use partition::{build_distributed, hash_partition, DistributedGraph, Fragment, VertexAssignment};
pub use query::{parse_bgp, QueryGraph, QueryTerm};
pub use term::{Term, Triple};
