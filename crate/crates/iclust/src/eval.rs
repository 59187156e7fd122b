//! External evaluation of a predicted partition against ground-truth
//! group labels: purity, pairwise-free F-measure, V-measure, and
//! size-weighted per-category measures, plus the two degenerate
//! baselines they should be read against.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Group × cluster co-occurrence counts. Groups are ordered by label,
/// clusters by id.
#[derive(Debug, Clone)]
pub struct ContingencyTable {
    counts: Vec<usize>,
    group_names: Vec<String>,
    cluster_ids: Vec<usize>,
    group_sizes: Vec<usize>,
    cluster_sizes: Vec<usize>,
    n: usize,
}

impl ContingencyTable {
    pub fn new(truth: &[String], pred: &[usize]) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::Empty);
        }
        if truth.len() != pred.len() {
            return Err(Error::invalid(format!(
                "{} labels but {} assignments",
                truth.len(),
                pred.len()
            )));
        }

        let mut group_index: BTreeMap<&str, usize> = BTreeMap::new();
        for label in truth {
            let next = group_index.len();
            group_index.entry(label).or_insert(next);
        }
        // BTreeMap iteration is sorted; renumber so index order matches.
        let group_names: Vec<String> = group_index.keys().map(|s| (*s).to_owned()).collect();
        for (i, name) in group_names.iter().enumerate() {
            *group_index.get_mut(name.as_str()).expect("known label") = i;
        }

        let mut cluster_index: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in pred {
            let next = cluster_index.len();
            cluster_index.entry(c).or_insert(next);
        }
        let cluster_ids: Vec<usize> = cluster_index.keys().copied().collect();
        for (i, &id) in cluster_ids.iter().enumerate() {
            *cluster_index.get_mut(&id).expect("known cluster") = i;
        }

        let g = group_names.len();
        let k = cluster_ids.len();
        let mut counts = vec![0usize; g * k];
        for (label, &cluster) in truth.iter().zip(pred) {
            counts[group_index[label.as_str()] * k + cluster_index[&cluster]] += 1;
        }
        let group_sizes = (0..g)
            .map(|gi| counts[gi * k..(gi + 1) * k].iter().sum())
            .collect();
        let cluster_sizes = (0..k)
            .map(|ci| (0..g).map(|gi| counts[gi * k + ci]).sum())
            .collect();

        Ok(ContingencyTable {
            counts,
            group_names,
            cluster_ids,
            group_sizes,
            cluster_sizes,
            n: truth.len(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn group_names(&self) -> &[String] {
        &self.group_names
    }

    pub fn cluster_ids(&self) -> &[usize] {
        &self.cluster_ids
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }

    /// Count of rows with group index `g` and cluster index `c`.
    pub fn count(&self, g: usize, c: usize) -> usize {
        self.counts[g * self.cluster_ids.len() + c]
    }
}

/// Fraction of rows that belong to their cluster's majority group.
pub fn purity(table: &ContingencyTable) -> f64 {
    let majority_sum: usize = (0..table.cluster_ids.len())
        .map(|c| {
            (0..table.group_names.len())
                .map(|g| table.count(g, c))
                .max()
                .unwrap_or(0)
        })
        .sum();
    majority_sum as f64 / table.n as f64
}

fn f_score(n_gc: usize, n_g: usize, n_c: usize) -> f64 {
    if n_gc == 0 {
        return 0.0;
    }
    let precision = n_gc as f64 / n_c as f64;
    let recall = n_gc as f64 / n_g as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Cluster index that maximizes the F-score of group `g` (ties keep the
/// lowest cluster index).
fn best_cluster(table: &ContingencyTable, g: usize) -> usize {
    let mut best = 0;
    let mut best_f = -1.0;
    for c in 0..table.cluster_ids.len() {
        let f = f_score(table.count(g, c), table.group_sizes[g], table.cluster_sizes[c]);
        if f > best_f {
            best_f = f;
            best = c;
        }
    }
    best
}

/// Size-weighted mean over groups of each group's best-matching
/// cluster F-score.
pub fn f_measure(table: &ContingencyTable) -> f64 {
    let mut sum = 0.0;
    for g in 0..table.group_names.len() {
        let c = best_cluster(table, g);
        let f = f_score(table.count(g, c), table.group_sizes[g], table.cluster_sizes[c]);
        sum += table.group_sizes[g] as f64 * f;
    }
    sum / table.n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VMeasure {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v: f64,
}

fn entropy(sizes: &[usize], n: f64) -> f64 {
    -sizes
        .iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            p * p.ln()
        })
        .sum::<f64>()
}

/// V-measure with natural-log entropies. A degenerate marginal (single
/// group or single cluster) makes the corresponding component 1 by
/// convention.
pub fn v_measure(table: &ContingencyTable) -> VMeasure {
    let n = table.n as f64;
    let g_count = table.group_names.len();
    let k_count = table.cluster_ids.len();

    let h_g = entropy(&table.group_sizes, n);
    let h_k = entropy(&table.cluster_sizes, n);

    let mut h_g_given_k = 0.0;
    let mut h_k_given_g = 0.0;
    for g in 0..g_count {
        for c in 0..k_count {
            let n_gc = table.count(g, c);
            if n_gc == 0 {
                continue;
            }
            let joint = n_gc as f64 / n;
            h_g_given_k -= joint * (n_gc as f64 / table.cluster_sizes[c] as f64).ln();
            h_k_given_g -= joint * (n_gc as f64 / table.group_sizes[g] as f64).ln();
        }
    }

    let homogeneity = if h_g == 0.0 {
        1.0
    } else {
        (1.0 - h_g_given_k / h_g).clamp(0.0, 1.0)
    };
    let completeness = if h_k == 0.0 {
        1.0
    } else {
        (1.0 - h_k_given_g / h_k).clamp(0.0, 1.0)
    };
    let v = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };

    VMeasure {
        homogeneity,
        completeness,
        v,
    }
}

/// Size-weighted precision, recall, and F over one size category of
/// groups; `None` when the category is empty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CategoryMeasures {
    pub f: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightedMeasures {
    pub big: CategoryMeasures,
    pub small: CategoryMeasures,
}

/// Splits groups into small (size ≤ threshold) and big, matches each
/// group to its best-F cluster, and aggregates that cluster's precision,
/// recall, and F per category, weighted by group size.
pub fn weighted_group_measures(table: &ContingencyTable, small_threshold: usize) -> WeightedMeasures {
    let mut acc = [(0.0, 0.0, 0.0, 0usize); 2]; // (f, precision, recall, weight) for big, small
    for g in 0..table.group_names.len() {
        let size = table.group_sizes[g];
        let c = best_cluster(table, g);
        let n_gc = table.count(g, c);
        let f = f_score(n_gc, size, table.cluster_sizes[c]);
        let precision = n_gc as f64 / table.cluster_sizes[c] as f64;
        let recall = n_gc as f64 / size as f64;
        let slot = usize::from(size <= small_threshold);
        acc[slot].0 += size as f64 * f;
        acc[slot].1 += size as f64 * precision;
        acc[slot].2 += size as f64 * recall;
        acc[slot].3 += size;
    }
    let category = |(f, precision, recall, weight): (f64, f64, f64, usize)| {
        if weight == 0 {
            CategoryMeasures {
                f: None,
                precision: None,
                recall: None,
            }
        } else {
            let w = weight as f64;
            CategoryMeasures {
                f: Some(f / w),
                precision: Some(precision / w),
                recall: Some(recall / w),
            }
        }
    };
    WeightedMeasures {
        big: category(acc[0]),
        small: category(acc[1]),
    }
}

/// Every measure for one (truth, prediction) pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricSet {
    pub purity: f64,
    pub f_measure: f64,
    pub homogeneity: f64,
    pub completeness: f64,
    pub v_measure: f64,
    pub weighted: WeightedMeasures,
    pub k_detected: usize,
}

pub fn evaluate(truth: &[String], pred: &[usize], small_threshold: usize) -> Result<MetricSet> {
    let table = ContingencyTable::new(truth, pred)?;
    let vm = v_measure(&table);
    Ok(MetricSet {
        purity: purity(&table),
        f_measure: f_measure(&table),
        homogeneity: vm.homogeneity,
        completeness: vm.completeness,
        v_measure: vm.v,
        weighted: weighted_group_measures(&table, small_threshold),
        k_detected: table.cluster_ids.len(),
    })
}

/// Reference points for reading the scores: every row its own cluster
/// (trivially homogeneous) and one all-encompassing cluster (trivially
/// complete).
pub fn extreme_baselines(
    truth: &[String],
    small_threshold: usize,
) -> Result<(MetricSet, MetricSet)> {
    let singleton_pred: Vec<usize> = (0..truth.len()).collect();
    let one_pred = vec![0usize; truth.len()];
    Ok((
        evaluate(truth, &singleton_pred, small_threshold)?,
        evaluate(truth, &one_pred, small_threshold)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub metrics: MetricSet,
    pub all_singletons: MetricSet,
    pub one_cluster: MetricSet,
}

pub fn evaluate_with_baselines(
    truth: &[String],
    pred: &[usize],
    small_threshold: usize,
) -> Result<EvaluationReport> {
    let metrics = evaluate(truth, pred, small_threshold)?;
    let (all_singletons, one_cluster) = extreme_baselines(truth, small_threshold)?;
    Ok(EvaluationReport {
        metrics,
        all_singletons,
        one_cluster,
    })
}
