//! `iclust cluster`: run the full pipeline on one dataset and write the
//! assignment, merge trace and run summary.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use iclust::{
    cluster, load_csv, read_partition_csv, write_partition_csv, CvStrategy, InitMethod,
    MergeConfig, PipelineConfig,
};
use serde::Serialize;

use crate::common::{self, InitArg, KInitArg};

#[derive(Args)]
pub struct ClusterArgs {
    /// Input CSV (headered, numeric features).
    #[arg(long)]
    input: PathBuf,

    /// Header name of a label column to exclude from the features.
    #[arg(long)]
    label_column: Option<String>,

    /// Skip per-column standardization.
    #[arg(long)]
    no_standardize: bool,

    /// Initial clustering method.
    #[arg(long, value_enum, default_value_t = InitArg::Ward)]
    init: InitArg,

    /// Initial partition CSV (row_index,cluster_id) for --init external.
    #[arg(long)]
    partition: Option<PathBuf>,

    /// Initial cluster count: auto (10 ln n), 5log, 15log, n4, or an integer.
    #[arg(long, default_value = "auto")]
    k_init: KInitArg,

    /// Largest LOF neighborhood size used by the merge test.
    #[arg(long, default_value_t = 5)]
    q_max: usize,

    /// Critical-value strategy (cv1..cv4).
    #[arg(long, default_value = "cv1")]
    cv: CvStrategy,

    /// Scale factor making the MAD consistent with the standard deviation.
    #[arg(long, default_value_t = 1.4826)]
    mad_scale: f64,

    /// Spread units above the center for the critical value.
    #[arg(long, default_value_t = 2.0)]
    spread: f64,

    /// Seed for randomized initializers.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Directory receiving assignments.csv, trace.jsonl and summary.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Serialize)]
struct Summary {
    n: usize,
    p: usize,
    standardize: bool,
    init: &'static str,
    k_init: usize,
    k_final: usize,
    merges: usize,
    rejections: usize,
    q_max: usize,
    cv: CvStrategy,
    mad_scale: f64,
    spread_multiplier: f64,
    seed: u64,
    elapsed_ms: u128,
}

pub fn run(args: ClusterArgs) -> Result<()> {
    if args.q_max == 0 {
        bail!("--q-max must be at least 1");
    }
    if args.partition.is_some() && args.init != InitArg::External {
        bail!("--partition only applies with --init external");
    }

    let started = Instant::now();
    let ds = load_csv(&args.input, args.label_column.as_deref())?;
    let n = ds.matrix.n();

    let init = match args.init.method() {
        Some(method) => method,
        None => {
            let path = args
                .partition
                .as_deref()
                .context("--init external requires --partition")?;
            InitMethod::External(read_partition_csv(path)?)
        }
    };

    let config = PipelineConfig {
        standardize: !args.no_standardize,
        init,
        k_init: Some(args.k_init.resolve(n)),
        merge: MergeConfig {
            q_max_cap: args.q_max,
            cv_strategy: args.cv,
            mad_scale: args.mad_scale,
            spread_multiplier: args.spread,
        },
        seed: args.seed,
    };

    let result = cluster(&ds.matrix, &config)?;
    let partition = result.final_partition();

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("failed to create {}", args.out_dir.display()))?;
    write_partition_csv(&args.out_dir.join("assignments.csv"), partition)?;
    common::write_text(&args.out_dir.join("trace.jsonl"), &result.trace.to_jsonl())?;

    let summary = Summary {
        n,
        p: ds.matrix.p(),
        standardize: !args.no_standardize,
        init: args.init.name(),
        k_init: result.k_init,
        k_final: partition.k(),
        merges: result.trace.merges,
        rejections: result.trace.rejections,
        q_max: args.q_max,
        cv: args.cv,
        mad_scale: args.mad_scale,
        spread_multiplier: args.spread,
        seed: args.seed,
        elapsed_ms: started.elapsed().as_millis(),
    };
    common::write_json(&args.out_dir.join("summary.json"), &summary)?;

    println!(
        "n={n} k_init={} k_final={} merges={} rejections={} -> {}",
        summary.k_init,
        summary.k_final,
        summary.merges,
        summary.rejections,
        args.out_dir.display()
    );
    Ok(())
}
