//! `iclust lof`: score a whole dataset for outlyingness, either at one
//! neighborhood size or across a 1..=q_max profile.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use iclust::{load_csv, lof_profile, lof_scores, pairwise_distances, standardize};

use crate::common;

#[derive(Args)]
pub struct LofArgs {
    /// Input CSV (headered, numeric features).
    #[arg(long)]
    input: PathBuf,

    /// Header name of a label column to exclude from the features.
    #[arg(long)]
    label_column: Option<String>,

    /// Standardize columns before computing distances.
    #[arg(long)]
    standardize: bool,

    /// Score a single neighborhood size instead of a profile.
    #[arg(long, conflicts_with = "q_max")]
    q: Option<usize>,

    /// Largest neighborhood size of the score profile.
    #[arg(long, default_value_t = 5)]
    q_max: usize,

    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn run(args: LofArgs) -> Result<()> {
    if args.q == Some(0) || args.q_max == 0 {
        bail!("neighborhood sizes must be at least 1");
    }

    let ds = load_csv(&args.input, args.label_column.as_deref())?;
    let matrix = if args.standardize {
        standardize(&ds.matrix)?.matrix
    } else {
        ds.matrix
    };
    let n = matrix.n();
    let dm = pairwise_distances(&matrix);
    let scope: Vec<usize> = (0..n).collect();

    let mut out = String::new();
    match args.q {
        Some(q) => {
            // A single q is its own representative.
            let scores = lof_scores(&dm, &scope, q)?;
            writeln!(out, "row_index,lof_{q},representative")?;
            for (i, s) in scores.iter().enumerate() {
                writeln!(out, "{i},{s},{s}")?;
            }
        }
        None => {
            let profile = lof_profile(&dm, &scope, args.q_max)?;
            let columns: Vec<Vec<f64>> =
                (1..=args.q_max).map(|q| profile.scores_for_q(q)).collect();
            out.push_str("row_index");
            for q in 1..=args.q_max {
                write!(out, ",lof_{q}")?;
            }
            out.push_str(",representative\n");
            for i in 0..n {
                write!(out, "{i}")?;
                for column in &columns {
                    write!(out, ",{}", column[i])?;
                }
                writeln!(out, ",{}", profile.representative_of(i))?;
            }
        }
    }

    common::emit(args.output.as_deref(), &out)
}
