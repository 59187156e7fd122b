//! `iclust sample`: draw replicated imbalanced subsamples from a labeled
//! source dataset and write each as its own CSV.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use iclust::{load_csv, sample_imbalanced, SamplingSpec};

use crate::common;

#[derive(Args)]
pub struct SampleArgs {
    /// Source CSV (headered, numeric features plus a label column).
    #[arg(long)]
    input: PathBuf,

    /// Header name of the label column in the source.
    #[arg(long)]
    label_column: String,

    /// Comma-separated slot sizes, e.g. 100,75,50,4,3,3,2,2,1,1.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,

    #[arg(long, default_value_t = 10)]
    replications: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Pin slot i to the group with the i-th listed label instead of a
    /// random assignment.
    #[arg(long, value_delimiter = ',')]
    pin: Option<Vec<String>>,

    /// Directory receiving rep_000.csv, rep_001.csv, ...
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

pub fn run(args: SampleArgs) -> Result<()> {
    let source = load_csv(&args.input, Some(&args.label_column))?;
    let spec = SamplingSpec {
        group_sizes: args.sizes.clone(),
        replications: args.replications,
        seed: args.seed,
        pinned_labels: args.pin.clone(),
    };
    let datasets = sample_imbalanced(&source, &spec)?;

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("failed to create {}", args.out_dir.display()))?;
    for (i, ds) in datasets.iter().enumerate() {
        common::write_dataset_csv(&args.out_dir.join(format!("rep_{i:03}.csv")), ds)?;
    }

    let n: usize = args.sizes.iter().sum();
    println!(
        "{} replications of n={n} -> {}",
        datasets.len(),
        args.out_dir.display()
    );
    Ok(())
}
