//! `lecq`: partition RDF data, rank partitionings by cost, and run basic
//! graph pattern queries over simulated sites.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::CliError;

#[derive(Debug, Parser)]
#[command(name = "lecq", version, about = "Distributed BGP evaluation over fragmented RDF graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score one or more partitionings of a dataset and rank them by cost.
    Partition(PartitionArgs),
    /// Evaluate a query and write its matches and statistics.
    Query(QueryArgs),
    /// Compare the Basic, LA, LO and Full configurations on one query.
    Bench(BenchArgs),
    /// Print the local partial matches computed at every site.
    DumpLpms(DumpArgs),
}

#[derive(Debug, Args)]
struct PartitionArgs {
    /// N-Triples data file.
    #[arg(long)]
    data: PathBuf,
    /// Hash partitioning into K fragments; repeatable.
    #[arg(long = "hash-parts", value_name = "K", value_parser = clap::value_parser!(u32).range(1..))]
    hash_parts: Vec<u32>,
    /// Partition file with `<term>\t<fragment-id>` lines; repeatable.
    #[arg(long = "partition-file", value_name = "PATH")]
    partition_files: Vec<PathBuf>,
    /// Write the best-ranked partitioning here as a partition file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write the ranking with full cost reports as JSON.
    #[arg(long, value_name = "PATH")]
    cost: Option<PathBuf>,
}

/// Exactly one partition source.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Hash partitioning into K fragments.
    #[arg(long = "hash-parts", value_name = "K", value_parser = clap::value_parser!(u32).range(1..))]
    hash_parts: Option<u32>,
    /// Partition file with `<term>\t<fragment-id>` lines.
    #[arg(long = "partition-file", value_name = "PATH")]
    partition_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PruneModeArg {
    RoundTrip,
    CoordinatorSide,
}

#[derive(Debug, Clone, Args)]
struct EngineArgs {
    /// Candidate bit-vector length in bits.
    #[arg(long, value_name = "B", default_value_t = lecq_core::candidates::DEFAULT_BITS, value_parser = clap::value_parser!(u32).range(1..))]
    bits: u32,
    /// Skip the candidate exchange.
    #[arg(long)]
    no_candidates: bool,
    /// Skip feature pruning.
    #[arg(long)]
    no_prune: bool,
    /// Join partial matches pairwise instead of by signature groups.
    #[arg(long)]
    basic_assembly: bool,
    /// Where pruning decisions are applied.
    #[arg(long, value_enum, default_value_t = PruneModeArg::RoundTrip)]
    prune_mode: PruneModeArg,
    /// Worker threads; defaults to LECQ_THREADS, then available parallelism.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
}

#[derive(Debug, Args)]
struct QueryArgs {
    /// N-Triples data file.
    #[arg(long)]
    data: PathBuf,
    /// SPARQL SELECT query or bare triple-pattern list.
    #[arg(long)]
    query: PathBuf,
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Write statistics JSON here.
    #[arg(long, value_name = "PATH")]
    stats: Option<PathBuf>,
    /// Write one JSON object per match here instead of standard output.
    #[arg(long, value_name = "PATH")]
    matches: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// N-Triples data file; needs --query.
    #[arg(long, requires = "query")]
    data: Option<PathBuf>,
    /// Query file; needs --data.
    #[arg(long, requires = "data")]
    query: Option<PathBuf>,
    /// Hash partitioning into K fragments.
    #[arg(long = "hash-parts", value_name = "K", value_parser = clap::value_parser!(u32).range(1..), conflicts_with = "partition_file")]
    hash_parts: Option<u32>,
    /// Partition file with `<term>\t<fragment-id>` lines.
    #[arg(long = "partition-file", value_name = "PATH")]
    partition_file: Option<PathBuf>,
    /// Use a generated instance with this seed instead of files.
    #[arg(long, conflicts_with_all = ["data", "query", "hash_parts", "partition_file"])]
    seed: Option<u64>,
    /// Candidate bit-vector length in bits.
    #[arg(long, value_name = "B", default_value_t = lecq_core::candidates::DEFAULT_BITS, value_parser = clap::value_parser!(u32).range(1..))]
    bits: u32,
    /// Worker threads.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    threads: Option<u32>,
    /// Include stage wall times (output is then no longer reproducible).
    #[arg(long)]
    timings: bool,
    /// Write the table as JSON here.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DumpArgs {
    /// N-Triples data file.
    #[arg(long)]
    data: PathBuf,
    /// SPARQL SELECT query or bare triple-pattern list.
    #[arg(long)]
    query: PathBuf,
    #[command(flatten)]
    source: SourceArgs,
    /// Apply candidate filtering before enumerating.
    #[arg(long)]
    candidates: bool,
    /// Candidate bit-vector length in bits.
    #[arg(long, value_name = "B", default_value_t = lecq_core::candidates::DEFAULT_BITS, value_parser = clap::value_parser!(u32).range(1..))]
    bits: u32,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(CliError::USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Partition(a) => commands::partition(a),
        Command::Query(a) => commands::query(a),
        Command::Bench(a) => commands::bench(a),
        Command::DumpLpms(a) => commands::dump_lpms(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lecq: {e}");
            ExitCode::from(e.code())
        }
    }
}
