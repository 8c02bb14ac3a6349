use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pqtable::commands::{
    self, AnalyzeConfig, BenchConfig, BenchData, BuildConfig, QueryConfig, SearchMode, TrainConfig,
};
use pqtable::dataset::{ElementKind, Synthetic};
use pqtable::Error;

#[derive(Parser)]
#[command(
    name = "pqtable",
    version,
    about = "Product-quantization hash-table search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Vector file (.fvecs, .bvecs or .ivecs).
    #[arg(long)]
    data: PathBuf,
    /// Element type, inferred from the extension when omitted.
    #[arg(long)]
    kind: Option<ElementKind>,
    /// Read at most this many vectors.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a product quantizer and write its codebook.
    Train {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 256)]
        k: usize,
        #[arg(long, default_value_t = 20)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also learn a rotation, alternating this many times.
        #[arg(long)]
        opq: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encode a database and write the index.
    Build {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        codebook: PathBuf,
        /// Number of tables; planned from the code length and N when omitted.
        #[arg(long)]
        tables: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Search an index and report latency and recall.
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        queries: PathBuf,
        #[arg(long)]
        kind: Option<ElementKind>,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value_t = 1)]
        topk: usize,
        /// Ground-truth .ivecs file.
        #[arg(long)]
        gt: Option<PathBuf>,
        /// Use the exhaustive scan instead of the tables.
        #[arg(long)]
        linear: bool,
    },
    /// Sweep N, code length and L on files or synthetic data.
    Bench {
        /// Base vectors; synthetic clustered data is generated when omitted.
        #[arg(long, requires = "queries")]
        data: Option<PathBuf>,
        #[arg(long, requires = "data")]
        queries: Option<PathBuf>,
        #[arg(long)]
        kind: Option<ElementKind>,
        #[arg(long, default_value_t = 100)]
        query_count: usize,
        #[arg(long, default_value_t = 32)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "10000,100000")]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "32,64")]
        bits: Vec<u32>,
        #[arg(long, value_delimiter = ',', default_value = "1,10,100")]
        topk: Vec<usize>,
        #[arg(long, default_value_t = 20000)]
        train_size: usize,
        #[arg(long, default_value_t = 20)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also time the exhaustive scan.
        #[arg(long)]
        linear: bool,
    },
    /// Print fill rate, expected hashings, slot occupancy and planned tables.
    Analyze {
        #[arg(long, value_delimiter = ',', default_value = "32,64")]
        bits: Vec<u32>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "100,1000,10000,100000,1000000,10000000,100000000,1000000000"
        )]
        sizes: Vec<u64>,
        /// Check against a Monte-Carlo simulation with this many insertions.
        #[arg(long)]
        simulate: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn emit<T: Serialize>(rows: &[T]) -> Result<(), Error> {
    for r in rows {
        println!(
            "{}",
            serde_json::to_string(r).map_err(|e| Error::InvalidParameter(e.to_string()))?
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Train {
            input,
            m,
            k,
            iterations,
            seed,
            opq,
            out,
        } => emit(&[commands::train(&TrainConfig {
            data: input.data,
            kind: input.kind,
            limit: input.limit,
            m,
            k,
            iterations,
            seed,
            opq,
            out,
        })?]),
        Command::Build {
            input,
            codebook,
            tables,
            out,
        } => emit(&[commands::build(&BuildConfig {
            data: input.data,
            kind: input.kind,
            limit: input.limit,
            codebook,
            tables,
            out,
        })?]),
        Command::Query {
            index,
            queries,
            kind,
            limit,
            topk,
            gt,
            linear,
        } => emit(&[commands::query(&QueryConfig {
            index,
            queries,
            kind,
            limit,
            topk,
            gt,
            mode: if linear {
                SearchMode::Linear
            } else {
                SearchMode::Table
            },
        })?]),
        Command::Bench {
            data,
            queries,
            kind,
            query_count,
            dim,
            sizes,
            bits,
            topk,
            train_size,
            iterations,
            seed,
            linear,
        } => {
            let source = match (data, queries) {
                (Some(base), Some(queries)) => BenchData::Files {
                    base,
                    queries,
                    kind,
                },
                _ => BenchData::Synthetic {
                    kind: Synthetic::default(),
                    n: sizes.iter().copied().max().unwrap_or(0),
                    queries: query_count,
                    dim,
                },
            };
            emit(&commands::bench(&BenchConfig {
                data: source,
                query_limit: Some(query_count),
                sizes,
                bits,
                topk,
                train_size,
                iterations,
                seed,
                linear,
            })?)
        }
        Command::Analyze {
            bits,
            sizes,
            simulate,
            seed,
        } => emit(&commands::analyze(&AnalyzeConfig {
            bits,
            sizes,
            simulate,
            seed,
        })?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
