//! `iclust bench`: replicated imbalanced-sampling experiments with
//! aggregated evaluation metrics, boxplot-ready.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use iclust::{
    cluster, derive_seed, evaluate_with_baselines, load_csv, sample_imbalanced, standardize,
    CvStrategy, EvaluationReport, LabeledDataset, MergeConfig, MetricSet, PipelineConfig,
    SamplingSpec,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::common::{self, quantile, InitArg, KInitArg};

/// The shipped experiment designs: group sizes of the four reference
/// studies on audio, pen-digit, human-activity and satellite data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    Audio,
    Pen,
    Har,
    Satellite,
}

impl Preset {
    fn sizes(self) -> Vec<usize> {
        match self {
            Preset::Audio => vec![100, 75, 50, 4, 3, 3, 2, 2, 1, 1],
            Preset::Pen => vec![1000, 750, 500, 40, 30, 30, 20, 20, 10, 10],
            Preset::Har => vec![200, 150, 100, 8, 6, 4],
            Preset::Satellite => vec![300, 225, 150, 12, 9, 3],
        }
    }

    fn name(self) -> &'static str {
        match self {
            Preset::Audio => "audio",
            Preset::Pen => "pen",
            Preset::Har => "har",
            Preset::Satellite => "satellite",
        }
    }
}

#[derive(Args)]
pub struct BenchArgs {
    /// Named experiment design supplying the slot sizes.
    #[arg(long, value_enum, required_unless_present = "sizes")]
    preset: Option<Preset>,

    /// Custom comma-separated slot sizes instead of a preset.
    #[arg(long, value_delimiter = ',', conflicts_with = "preset")]
    sizes: Option<Vec<usize>>,

    /// Source dataset CSV the subsamples are drawn from.
    #[arg(long)]
    input: PathBuf,

    /// Header name of the label column in the source.
    #[arg(long)]
    label_column: String,

    #[arg(long, default_value_t = 10)]
    replications: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Groups at or below this size count as small in the weighted
    /// F-measures.
    #[arg(long, default_value_t = 10)]
    small_threshold: usize,

    /// Standardize the source once before sampling instead of each
    /// subsample independently.
    #[arg(long)]
    standardize_before: bool,

    /// Initial clustering method (external is not available here).
    #[arg(long, value_enum, default_value_t = InitArg::Ward)]
    init: InitArg,

    /// Initial cluster count rule; see `cluster --help`.
    #[arg(long, default_value = "auto")]
    k_init: KInitArg,

    /// Largest LOF neighborhood size used by the merge test.
    #[arg(long, default_value_t = 5)]
    q_max: usize,

    /// Critical-value strategy (cv1..cv4).
    #[arg(long, default_value = "cv1")]
    cv: CvStrategy,

    /// Directory receiving results.csv and aggregate.json.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// The metrics exported per replication; weighted categories may be
/// absent when a size class is empty.
fn flatten(m: &MetricSet) -> [(&'static str, Option<f64>); 8] {
    [
        ("purity", Some(m.purity)),
        ("f_measure", Some(m.f_measure)),
        ("homogeneity", Some(m.homogeneity)),
        ("completeness", Some(m.completeness)),
        ("v_measure", Some(m.v_measure)),
        ("wf_big", m.weighted.big.f),
        ("wf_small", m.weighted.small.f),
        ("k_detected", Some(m.k_detected as f64)),
    ]
}

#[derive(Serialize)]
struct Quartiles {
    median: f64,
    q1: f64,
    q3: f64,
}

/// Quartiles per metric, over the replications where the metric exists.
#[derive(Serialize)]
struct MethodAggregate {
    purity: Quartiles,
    f_measure: Quartiles,
    homogeneity: Quartiles,
    completeness: Quartiles,
    v_measure: Quartiles,
    wf_big: Option<Quartiles>,
    wf_small: Option<Quartiles>,
    k_detected: Quartiles,
}

#[derive(Serialize)]
struct Aggregate {
    experiment: String,
    sizes: Vec<usize>,
    n_per_replication: usize,
    replications: usize,
    seed: u64,
    small_threshold: usize,
    iclust: MethodAggregate,
    all_singletons: MethodAggregate,
    one_cluster: MethodAggregate,
}

fn aggregate_method<F: Fn(&EvaluationReport) -> &MetricSet>(
    reports: &[EvaluationReport],
    select: F,
) -> MethodAggregate {
    let stats = |pick: fn(&MetricSet) -> Option<f64>| -> Option<Quartiles> {
        let mut values: Vec<f64> = reports
            .iter()
            .filter_map(|r| pick(select(r)))
            .collect();
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        Some(Quartiles {
            median: quantile(&values, 0.5),
            q1: quantile(&values, 0.25),
            q3: quantile(&values, 0.75),
        })
    };
    let always = |pick: fn(&MetricSet) -> Option<f64>| stats(pick).expect("metric always present");
    MethodAggregate {
        purity: always(|m| Some(m.purity)),
        f_measure: always(|m| Some(m.f_measure)),
        homogeneity: always(|m| Some(m.homogeneity)),
        completeness: always(|m| Some(m.completeness)),
        v_measure: always(|m| Some(m.v_measure)),
        wf_big: stats(|m| m.weighted.big.f),
        wf_small: stats(|m| m.weighted.small.f),
        k_detected: always(|m| Some(m.k_detected as f64)),
    }
}

pub fn run(args: BenchArgs) -> Result<()> {
    if args.init == InitArg::External {
        bail!("--init external is not available for bench");
    }
    let (experiment, sizes) = match (&args.sizes, args.preset) {
        (Some(sizes), _) => ("custom".to_owned(), sizes.clone()),
        (None, Some(preset)) => (preset.name().to_owned(), preset.sizes()),
        (None, None) => unreachable!("clap enforces one of --preset/--sizes"),
    };
    let n_per_replication: usize = sizes.iter().sum();

    let source = load_csv(&args.input, Some(&args.label_column))?;
    let (source, standardize_each) = if args.standardize_before {
        let rescaled = standardize(&source.matrix)?.matrix;
        (LabeledDataset::new(rescaled, source.labels)?, false)
    } else {
        (source, true)
    };

    let spec = SamplingSpec {
        group_sizes: sizes.clone(),
        replications: args.replications,
        seed: args.seed,
        pinned_labels: None,
    };
    let datasets = sample_imbalanced(&source, &spec)?;

    // Replications run in parallel; seeds are derived per index up front,
    // so the schedule cannot affect any result.
    let init = args.init.method().expect("external rejected above");
    let reports: Vec<EvaluationReport> = datasets
        .par_iter()
        .enumerate()
        .map(|(i, ds)| {
            let config = PipelineConfig {
                standardize: standardize_each,
                init: init.clone(),
                k_init: Some(args.k_init.resolve(ds.matrix.n())),
                merge: MergeConfig {
                    q_max_cap: args.q_max,
                    cv_strategy: args.cv,
                    ..MergeConfig::default()
                },
                seed: derive_seed(args.seed, i as u64),
            };
            let result = cluster(&ds.matrix, &config)?;
            evaluate_with_baselines(
                &ds.labels,
                result.final_partition().assignment(),
                args.small_threshold,
            )
        })
        .collect::<iclust::Result<_>>()?;

    let mut long = String::from("replication,method,metric,value\n");
    for (i, report) in reports.iter().enumerate() {
        let methods = [
            ("iclust", &report.metrics),
            ("all_singletons", &report.all_singletons),
            ("one_cluster", &report.one_cluster),
        ];
        for (method, metrics) in methods {
            for (metric, value) in flatten(metrics) {
                if let Some(v) = value {
                    writeln!(long, "{i},{method},{metric},{v}")?;
                }
            }
        }
    }

    let aggregate = Aggregate {
        experiment,
        sizes,
        n_per_replication,
        replications: args.replications,
        seed: args.seed,
        small_threshold: args.small_threshold,
        iclust: aggregate_method(&reports, |r| &r.metrics),
        all_singletons: aggregate_method(&reports, |r| &r.all_singletons),
        one_cluster: aggregate_method(&reports, |r| &r.one_cluster),
    };

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("failed to create {}", args.out_dir.display()))?;
    common::write_text(&args.out_dir.join("results.csv"), &long)?;
    common::write_json(&args.out_dir.join("aggregate.json"), &aggregate)?;

    println!(
        "{} replications of n={n_per_replication} -> {}",
        args.replications,
        args.out_dir.display()
    );
    Ok(())
}
