//! Argument types and output helpers shared by the subcommands.

use std::path::Path;

use anyhow::{Context, Result};
use iclust::{InitMethod, LabeledDataset};

/// Initial clustering method named on the command line. `External` needs
/// a partition file and is resolved by the owning subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InitArg {
    Ward,
    Complete,
    Single,
    Kmeans,
    External,
}

impl InitArg {
    pub fn name(self) -> &'static str {
        match self {
            InitArg::Ward => "ward",
            InitArg::Complete => "complete",
            InitArg::Single => "single",
            InitArg::Kmeans => "kmeans",
            InitArg::External => "external",
        }
    }

    /// The corresponding pipeline method for the internal initializers;
    /// `None` for `External`.
    pub fn method(self) -> Option<InitMethod> {
        match self {
            InitArg::Ward => Some(InitMethod::Ward),
            InitArg::Complete => Some(InitMethod::Complete),
            InitArg::Single => Some(InitMethod::Single),
            InitArg::Kmeans => Some(InitMethod::Kmeans),
            InitArg::External => None,
        }
    }
}

/// `--k-init` value: the default rule, one of the alternative rules, or
/// an explicit count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KInitArg {
    /// ⌈10·ln n⌉, the algorithm default.
    Auto,
    /// ⌈factor·ln n⌉ for the 5log / 15log variants.
    ScaledLog(f64),
    /// ⌈n/4⌉.
    Quarter,
    Fixed(usize),
}

impl KInitArg {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            KInitArg::Auto => iclust::default_k_init(n),
            KInitArg::ScaledLog(factor) => iclust::scaled_log_k_init(n, factor),
            KInitArg::Quarter => iclust::quarter_k_init(n),
            KInitArg::Fixed(k) => k,
        }
    }
}

impl std::str::FromStr for KInitArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" | "10log" => Ok(KInitArg::Auto),
            "5log" => Ok(KInitArg::ScaledLog(5.0)),
            "15log" => Ok(KInitArg::ScaledLog(15.0)),
            "n4" => Ok(KInitArg::Quarter),
            other => other.parse::<usize>().map(KInitArg::Fixed).map_err(|_| {
                format!("expected auto, 5log, 10log, 15log, n4 or an integer, got {other:?}")
            }),
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("failed to write {}", path.display()))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Emits `text` to `path` when given, otherwise to stdout.
pub fn emit(target: Option<&Path>, text: &str) -> Result<()> {
    match target {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Writes a dataset as CSV with generated `x1..xp` feature headers and a
/// trailing `label` column.
pub fn write_dataset_csv(path: &Path, ds: &LabeledDataset) -> Result<()> {
    let p = ds.matrix.p();
    let mut writer = csv::Writer::from_path(path)
        .with_context(|| format!("failed to write {}", path.display()))?;
    let mut header: Vec<String> = (1..=p).map(|j| format!("x{j}")).collect();
    header.push("label".to_owned());
    writer.write_record(&header)?;
    let mut record = Vec::with_capacity(p + 1);
    for (row, label) in ds.matrix.rows().zip(&ds.labels) {
        record.clear();
        record.extend(row.iter().map(|v| format!("{v}")));
        record.push(label.clone());
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Reads the named column of a headered CSV as one label per row.
pub fn read_label_column(path: &Path, column: &str) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("failed to read {}", path.display()))?;
    let idx = reader
        .headers()
        .with_context(|| format!("failed to read {}", path.display()))?
        .iter()
        .position(|h| h == column)
        .with_context(|| format!("column {column:?} not found in {}", path.display()))?;
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.with_context(|| format!("failed to read {}", path.display()))?;
        let field = record
            .get(idx)
            .with_context(|| format!("short row in {}", path.display()))?;
        labels.push(field.to_owned());
    }
    Ok(labels)
}

/// Linear-interpolation quantile of pre-sorted values (the convention
/// used by most statistics environments).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty() && (0.0..=1.0).contains(&p));
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - h.floor()) * (sorted[hi] - sorted[lo])
}
