//! `iclust eval`: compare a predicted partition against ground-truth
//! labels and report the full metric set with both extreme baselines.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use iclust::{evaluate_with_baselines, read_partition_csv};

use crate::common;

#[derive(Args)]
pub struct EvalArgs {
    /// Predicted partition CSV (row_index,cluster_id).
    #[arg(long)]
    pred: PathBuf,

    /// CSV holding the ground-truth labels, aligned with the predicted
    /// row indices by row order.
    #[arg(long)]
    truth: PathBuf,

    /// Header name of the label column in the truth file.
    #[arg(long, default_value = "label")]
    truth_column: String,

    /// Groups at or below this size count as small in the weighted
    /// F-measures.
    #[arg(long, default_value_t = 10)]
    small_threshold: usize,

    /// Output JSON path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn run(args: EvalArgs) -> Result<()> {
    let pred = read_partition_csv(&args.pred)?;
    let truth = common::read_label_column(&args.truth, &args.truth_column)?;
    if truth.len() != pred.n() {
        bail!(
            "row mismatch: {} truth rows but {} predicted rows",
            truth.len(),
            pred.n()
        );
    }

    let report = evaluate_with_baselines(&truth, pred.assignment(), args.small_threshold)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    common::emit(args.output.as_deref(), &text)
}
