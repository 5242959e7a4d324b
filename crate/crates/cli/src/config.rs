use std::fmt;
use std::path::{Path, PathBuf};

use lecq_core::engine::{EngineOptions, PruneMode};
use lecq_core::partition::{build_distributed, hash_partition, parse_partition_file};
use lecq_core::{parse_bgp, DistributedGraph, ErrorClass, QueryGraph, RdfGraph, VertexAssignment};

use crate::{EngineArgs, PruneModeArg, SourceArgs};

/// An error with the exit code of its class: 2 data, 3 query, 4 partition,
/// 1 anything else.
#[derive(Debug)]
pub struct CliError {
    class: ErrorClass,
    message: String,
}

impl CliError {
    pub const USAGE: u8 = 1;

    pub fn new(class: ErrorClass, message: impl Into<String>) -> Self {
        CliError { class, message: message.into() }
    }

    pub fn other(message: impl Into<String>) -> Self {
        Self::new(ErrorClass::Other, message)
    }

    pub fn code(&self) -> u8 {
        match self.class {
            ErrorClass::Data => 2,
            ErrorClass::Query => 3,
            ErrorClass::Partition => 4,
            ErrorClass::Other => 1,
        }
    }

    fn at(path: &Path, e: lecq_core::Error, fallback: ErrorClass) -> Self {
        let class = match e.class() {
            ErrorClass::Other => fallback,
            c => c,
        };
        Self::new(class, format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<lecq_core::Error> for CliError {
    fn from(e: lecq_core::Error) -> Self {
        CliError::new(e.class(), e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn read_text(path: &Path, class: ErrorClass) -> CliResult<String> {
    std::fs::read(path)
        .map_err(|e| CliError::new(class, format!("{}: {e}", path.display())))
        .and_then(|bytes| {
            String::from_utf8(bytes).map_err(|_| CliError::new(class, format!("{}: invalid UTF-8", path.display())))
        })
}

pub fn load_data(path: &Path) -> CliResult<RdfGraph> {
    let file = std::fs::File::open(path).map_err(|e| CliError::new(ErrorClass::Data, format!("{}: {e}", path.display())))?;
    lecq_core::ntriples::parse_ntriples(std::io::BufReader::new(file)).map_err(|e| CliError::at(path, e, ErrorClass::Data))
}

pub fn load_query(path: &Path) -> CliResult<QueryGraph> {
    let text = read_text(path, ErrorClass::Query)?;
    parse_bgp(&text).map_err(|e| CliError::at(path, e, ErrorClass::Query))
}

pub fn write_output(path: &Path, text: &str) -> CliResult {
    std::fs::write(path, text).map_err(|e| CliError::other(format!("{}: {e}", path.display())))
}

/// Where the vertex assignment comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionSource {
    Hash(u32),
    File(PathBuf),
}

impl PartitionSource {
    pub fn label(&self) -> String {
        match self {
            PartitionSource::Hash(k) => format!("hash:{k}"),
            PartitionSource::File(p) => p.display().to_string(),
        }
    }

    pub fn assignment(&self, g: &RdfGraph) -> CliResult<VertexAssignment> {
        match self {
            PartitionSource::Hash(k) => Ok(hash_partition(g, *k)?),
            PartitionSource::File(p) => {
                let text = read_text(p, ErrorClass::Partition)?;
                parse_partition_file(g, &text).map_err(|e| CliError::at(p, e, ErrorClass::Partition))
            }
        }
    }

    pub fn distribute(&self, g: &RdfGraph) -> CliResult<DistributedGraph> {
        let a = self.assignment(g)?;
        build_distributed(g, &a).map_err(|e| CliError::new(ErrorClass::Partition, e.to_string()))
    }
}

impl From<&SourceArgs> for PartitionSource {
    fn from(s: &SourceArgs) -> Self {
        match (&s.hash_parts, &s.partition_file) {
            (Some(k), _) => PartitionSource::Hash(*k),
            (None, Some(p)) => PartitionSource::File(p.clone()),
            (None, None) => unreachable!("clap requires one partition source"),
        }
    }
}

/// Thread count: explicit flag, then `LECQ_THREADS`, then available
/// parallelism.
pub fn resolve_threads(flag: Option<u32>) -> CliResult<usize> {
    if let Some(n) = flag {
        return Ok(n as usize);
    }
    if let Ok(v) = std::env::var("LECQ_THREADS") {
        return match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::other(format!("LECQ_THREADS must be a positive integer, got '{v}'"))),
        };
    }
    Ok(std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Everything a query run needs, resolved from the command line.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data: PathBuf,
    pub partition: PartitionSource,
    pub query: PathBuf,
    pub options: EngineOptions,
    pub stats: Option<PathBuf>,
    pub matches: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(data: PathBuf, query: PathBuf, source: &SourceArgs, engine: &EngineArgs) -> CliResult<Self> {
        let options = EngineOptions {
            candidates: !engine.no_candidates,
            prune: !engine.no_prune,
            lec_assembly: !engine.basic_assembly,
            bits: engine.bits,
            prune_mode: match engine.prune_mode {
                PruneModeArg::RoundTrip => PruneMode::RoundTrip,
                PruneModeArg::CoordinatorSide => PruneMode::CoordinatorSide,
            },
            threads: resolve_threads(engine.threads)?,
        };
        Ok(RunConfig { data, partition: source.into(), query, options, stats: None, matches: None })
    }

    /// Loads the data, query and distribution, reporting errors in that
    /// order.
    pub fn load(&self) -> CliResult<(RdfGraph, QueryGraph, DistributedGraph)> {
        let g = load_data(&self.data)?;
        let q = load_query(&self.query)?;
        let d = self.partition.distribute(&g)?;
        Ok((g, q, d))
    }
}
