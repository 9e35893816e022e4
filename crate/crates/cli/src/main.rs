//! `plmgraph`: residue graphs, embedding fusion, toy position tasks and metrics.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 rejected by the
//! domain logic or configuration.

mod commands;
mod config;
mod error;
mod manifest;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{fuse, graph, metrics, toytask};

#[derive(Debug, Parser)]
#[command(name = "plmgraph", version, about, args_override_self = true)]
struct Cli {
    /// JSON object of flag values; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<std::path::PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a residue graph from a PDB file.
    Graph(graph::GraphArgs),
    /// Attach per-residue embeddings to a graph.
    Fuse(fuse::FuseArgs),
    /// Train and evaluate a position-recovery toy task.
    Toytask(toytask::ToytaskArgs),
    /// Compute a benchmark metric suite.
    Metrics(metrics::MetricsArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv = match config::expand(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = Cli::parse_from(argv);
    let result = match cli.command {
        Command::Graph(a) => graph::run(a),
        Command::Fuse(a) => fuse::run(a),
        Command::Toytask(a) => toytask::run(a),
        Command::Metrics(a) => metrics::run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
