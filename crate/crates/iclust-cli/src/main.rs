//! Command line for the iclust library: cluster, lof, eval, sample,
//! bench. Every command is a pure function of its inputs, flags and
//! seed; machine-readable outputs are byte-identical across repeated
//! invocations (run timings in summaries excepted).

mod bench;
mod cluster;
mod common;
mod eval;
mod lof;
mod sample;

use anyhow::Context;
use clap::{Parser, Subcommand};

const VERSION: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (defaults: cv1, q_max=5, k_init=ceil(10*ln n), ward)"
);

#[derive(Parser)]
#[command(
    name = "iclust",
    version = VERSION,
    about = "Iterative cluster merging guided by two-sided LOF tests"
)]
struct Cli {
    /// Worker threads for parallel sections; falls back to the
    /// ICLUST_THREADS environment variable, then to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a CSV dataset and write assignments, trace and summary.
    Cluster(cluster::ClusterArgs),
    /// Score a whole dataset with LOF at one or several neighborhood sizes.
    Lof(lof::LofArgs),
    /// Compare a predicted partition against ground-truth labels.
    Eval(eval::EvalArgs),
    /// Draw imbalanced subsamples from a labeled source dataset.
    Sample(sample::SampleArgs),
    /// Run a replicated sampling experiment and aggregate the metrics.
    Bench(bench::BenchArgs),
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {}", render(&err));
        std::process::exit(1);
    }
}

/// The error chain as one line, skipping causes a layer above already
/// spelled out in its own message.
fn render(err: &anyhow::Error) -> String {
    let mut text = err.to_string();
    let mut shown = text.clone();
    for cause in err.chain().skip(1) {
        let msg = cause.to_string();
        if !shown.contains(&msg) {
            text.push_str(": ");
            text.push_str(&msg);
            shown = msg;
        }
    }
    text
}

fn run(cli: Cli) -> anyhow::Result<()> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Cluster(args) => cluster::run(args),
        Command::Lof(args) => lof::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Sample(args) => sample::run(args),
        Command::Bench(args) => bench::run(args),
    }
}

/// `--threads` beats ICLUST_THREADS; neither set means rayon's default.
/// Parallelism only changes wall time, never results.
fn init_threads(flag: Option<usize>) -> anyhow::Result<()> {
    let from_env = match std::env::var("ICLUST_THREADS") {
        Ok(v) => Some(
            v.parse::<usize>()
                .map_err(|_| anyhow::anyhow!("ICLUST_THREADS must be an integer, got {v:?}"))?,
        ),
        Err(_) => None,
    };
    if let Some(threads) = flag.or(from_env) {
        if threads == 0 {
            anyhow::bail!("thread count must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("failed to configure the thread pool")?;
    }
    Ok(())
}
