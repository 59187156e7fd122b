//! Dataset loading, standardization, and seeded group-imbalanced sampling.

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Label assigned to every row when no label column is configured.
pub const UNLABELED: &str = "_";

/// Dense row-major matrix of finite f64 values.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Vec<f64>,
    n: usize,
    p: usize,
}

impl DataMatrix {
    /// Builds a matrix from rows, requiring a nonempty rectangular layout
    /// and finite entries.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty);
        }
        let p = rows[0].len();
        if p == 0 {
            return Err(Error::invalid("rows have no columns"));
        }
        let mut values = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(Error::RaggedRow {
                    row: i + 1,
                    expected: p,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Parse {
                        row: i + 1,
                        column: format!("{}", j + 1),
                        message: format!("non-finite value {v}"),
                    });
                }
                values.push(v);
            }
        }
        let n = rows.len();
        Ok(DataMatrix { values, n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.p..(i + 1) * self.p]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.p + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.p)
    }

    /// New matrix containing the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> DataMatrix {
        let mut values = Vec::with_capacity(indices.len() * self.p);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        DataMatrix {
            values,
            n: indices.len(),
            p: self.p,
        }
    }
}

/// A data matrix paired with one string label per row.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub matrix: DataMatrix,
    pub labels: Vec<String>,
}

impl LabeledDataset {
    pub fn new(matrix: DataMatrix, labels: Vec<String>) -> Result<Self> {
        if labels.len() != matrix.n() {
            return Err(Error::invalid(format!(
                "{} labels for {} rows",
                labels.len(),
                matrix.n()
            )));
        }
        Ok(LabeledDataset { matrix, labels })
    }
}

/// Reads a headered CSV. When `label_column` names a header field, that
/// column becomes the row labels and the remaining columns the features;
/// otherwise every column is a feature and labels are all [`UNLABELED`].
pub fn load_csv(path: &Path, label_column: Option<&str>) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()
        .map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?
        .iter()
        .map(str::to_owned)
        .collect();

    let label_idx = match label_column {
        Some(name) => Some(
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::LabelColumnMissing(name.to_owned()))?,
        ),
        None => None,
    };

    let feature_names: Vec<&String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != label_idx)
        .map(|(_, h)| h)
        .collect();
    if feature_names.is_empty() {
        return Err(Error::invalid("no feature columns besides the label"));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0usize;
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let row = row_idx + 1;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow {
                row,
                expected: headers.len(),
                found: record.len(),
            });
        }
        for (col, field) in record.iter().enumerate() {
            if Some(col) == label_idx {
                labels.push(field.to_owned());
                continue;
            }
            let value: f64 = field.trim().parse().map_err(|_| Error::Parse {
                row,
                column: headers[col].clone(),
                message: format!("cannot parse {field:?} as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    row,
                    column: headers[col].clone(),
                    message: format!("non-finite value {field:?}"),
                });
            }
            values.push(value);
        }
        if label_idx.is_none() {
            labels.push(UNLABELED.to_owned());
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty);
    }

    let matrix = DataMatrix {
        values,
        n,
        p: feature_names.len(),
    };
    LabeledDataset::new(matrix, labels)
}

/// Result of column-wise standardization.
#[derive(Debug, Clone)]
pub struct Standardization {
    pub matrix: DataMatrix,
    pub means: Vec<f64>,
    pub sds: Vec<f64>,
    /// Columns whose values were all identical; they are emitted as zeros
    /// and their reported sd is 0.
    pub constant_columns: Vec<usize>,
}

/// Centers each column at its mean and scales by its sample standard
/// deviation (n−1 denominator). Constant columns become all zeros and are
/// flagged instead of dividing by zero.
pub fn standardize(matrix: &DataMatrix) -> Result<Standardization> {
    let n = matrix.n();
    let p = matrix.p();
    if n < 2 {
        return Err(Error::invalid("standardization needs at least 2 rows"));
    }

    let mut means = vec![0.0; p];
    for row in matrix.rows() {
        for (j, &v) in row.iter().enumerate() {
            means[j] += v;
        }
    }
    for m in &mut means {
        *m /= n as f64;
    }

    let mut sds = vec![0.0; p];
    let mut constant = vec![true; p];
    for row in matrix.rows() {
        for (j, &v) in row.iter().enumerate() {
            let d = v - means[j];
            sds[j] += d * d;
            if v != matrix.get(0, j) {
                constant[j] = false;
            }
        }
    }
    let mut constant_columns = Vec::new();
    for j in 0..p {
        sds[j] = (sds[j] / (n - 1) as f64).sqrt();
        if constant[j] || sds[j] == 0.0 {
            sds[j] = 0.0;
            constant_columns.push(j);
        }
    }

    let mut values = Vec::with_capacity(n * p);
    for row in matrix.rows() {
        for (j, &v) in row.iter().enumerate() {
            if sds[j] == 0.0 {
                values.push(0.0);
            } else {
                values.push((v - means[j]) / sds[j]);
            }
        }
    }

    Ok(Standardization {
        matrix: DataMatrix { values, n, p },
        means,
        sds,
        constant_columns,
    })
}

/// Group-imbalance design: how many rows to draw for each slot, how many
/// replicated datasets to build, and the master seed.
#[derive(Debug, Clone)]
pub struct SamplingSpec {
    /// Requested size of each slot; each slot is served by a distinct
    /// source group.
    pub group_sizes: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    /// When set, slot `i` draws from the group with this label instead of
    /// a randomly chosen one. Must match `group_sizes` in length.
    pub pinned_labels: Option<Vec<String>>,
}

/// Stable per-replication seed derivation from a master seed
/// (SplitMix64 finalizer).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `spec.replications` datasets from `source`. Each replication
/// assigns the slots of `spec.group_sizes` to distinct source groups
/// (uniformly at random unless pinned) and samples rows without
/// replacement within each group. Fully determined by `spec.seed`.
pub fn sample_imbalanced(
    source: &LabeledDataset,
    spec: &SamplingSpec,
) -> Result<Vec<LabeledDataset>> {
    if spec.group_sizes.is_empty() {
        return Err(Error::invalid("sampling spec has no slots"));
    }
    if spec.group_sizes.contains(&0) {
        return Err(Error::invalid("slot sizes must be at least 1"));
    }
    if spec.replications == 0 {
        return Err(Error::invalid("replications must be at least 1"));
    }

    // Group rows by label; BTreeMap gives a label order independent of the
    // row order of the source file.
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, label) in source.labels.iter().enumerate() {
        groups.entry(label).or_default().push(i);
    }
    if groups.len() < spec.group_sizes.len() {
        return Err(Error::InsufficientGroups {
            needed: spec.group_sizes.len(),
            available: groups.len(),
        });
    }
    let labels_sorted: Vec<&str> = groups.keys().copied().collect();

    if let Some(pinned) = &spec.pinned_labels {
        if pinned.len() != spec.group_sizes.len() {
            return Err(Error::invalid(format!(
                "{} pinned labels for {} slots",
                pinned.len(),
                spec.group_sizes.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for label in pinned {
            if !groups.contains_key(label.as_str()) {
                return Err(Error::invalid(format!("unknown pinned label {label:?}")));
            }
            if !seen.insert(label.as_str()) {
                return Err(Error::invalid(format!("pinned label {label:?} repeated")));
            }
        }
    }

    let mut out = Vec::with_capacity(spec.replications);
    for rep in 0..spec.replications {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, rep as u64));

        let slot_labels: Vec<&str> = match &spec.pinned_labels {
            Some(pinned) => pinned.iter().map(String::as_str).collect(),
            None => {
                let mut pool = labels_sorted.clone();
                // Partial Fisher-Yates: the first `slots` entries are a
                // uniform draw of distinct labels.
                let slots = spec.group_sizes.len();
                for i in 0..slots {
                    let j = rand::Rng::random_range(&mut rng, i..pool.len());
                    pool.swap(i, j);
                }
                pool.truncate(slots);
                pool
            }
        };

        let mut indices = Vec::new();
        for (label, &size) in slot_labels.iter().zip(&spec.group_sizes) {
            let members = &groups[label];
            if members.len() < size {
                return Err(Error::InsufficientRows {
                    label: (*label).to_owned(),
                    requested: size,
                    available: members.len(),
                });
            }
            let mut picks: Vec<usize> = rand::seq::index::sample(&mut rng, members.len(), size)
                .iter()
                .map(|k| members[k])
                .collect();
            picks.sort_unstable();
            indices.extend(picks);
        }
        rand::seq::SliceRandom::shuffle(indices.as_mut_slice(), &mut rng);

        let matrix = source.matrix.select_rows(&indices);
        let labels = indices.iter().map(|&i| source.labels[i].clone()).collect();
        out.push(LabeledDataset::new(matrix, labels)?);
    }
    Ok(out)
}
