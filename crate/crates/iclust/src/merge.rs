//! Iterative cluster merging gated by two-sided local outlier factor
//! tests.
//!
//! Each round considers the pair of clusters with the smallest
//! point-to-point distance. The closest point of each side is tested
//! against the other side: it may join only if its representative LOF
//! within host ∪ {candidate} stays below a critical value derived from
//! the score spread of that scope. Both directions must pass. Rejected
//! pairs are set aside until one of their clusters changes.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::initcluster::Partition;
use crate::lof::{lof_profile, LofProfile};
use crate::neighbors::DistanceMatrix;

/// How the critical value summarizes a score sample: robust (median +
/// spread·mad) or moment-based (mean + spread·sd), over either all
/// (point, q) scores or the per-point representatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CvStrategy {
    /// median + spread·mad over all scores
    Cv1,
    /// mean + spread·sd over all scores
    Cv2,
    /// median + spread·mad over representatives
    Cv3,
    /// mean + spread·sd over representatives
    Cv4,
}

impl std::str::FromStr for CvStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cv1" => Ok(CvStrategy::Cv1),
            "cv2" => Ok(CvStrategy::Cv2),
            "cv3" => Ok(CvStrategy::Cv3),
            "cv4" => Ok(CvStrategy::Cv4),
            _ => Err(Error::invalid(format!("unknown cv strategy {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MergeConfig {
    /// Largest neighborhood size in the LOF profile; the effective range
    /// is `1..=min(|scope|−1, q_max_cap)`.
    pub q_max_cap: usize,
    pub cv_strategy: CvStrategy,
    /// Factor applied to the median absolute deviation; 1.4826 makes it
    /// consistent with the standard deviation under normality.
    pub mad_scale: f64,
    /// How many spread units above the center the critical value sits.
    pub spread_multiplier: f64,
}

impl Default for MergeConfig {
    fn default() -> Self {
        MergeConfig {
            q_max_cap: 5,
            cv_strategy: CvStrategy::Cv1,
            mad_scale: 1.4826,
            spread_multiplier: 2.0,
        }
    }
}

impl MergeConfig {
    fn validate(&self) -> Result<()> {
        if self.q_max_cap == 0 {
            return Err(Error::invalid("q_max_cap must be at least 1"));
        }
        if !self.mad_scale.is_finite() || self.mad_scale <= 0.0 {
            return Err(Error::invalid("mad_scale must be finite and positive"));
        }
        if !self.spread_multiplier.is_finite() || self.spread_multiplier < 0.0 {
            return Err(Error::invalid(
                "spread_multiplier must be finite and nonnegative",
            ));
        }
        Ok(())
    }
}

/// One directional admission test. Infinite values serialize as null.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MergeTest {
    pub candidate_point: usize,
    pub host_cluster: usize,
    pub lof_value: f64,
    pub cv: f64,
    pub passed: bool,
}

/// The closest pair of clusters and the two points realizing their
/// single-linkage distance (`point_a` in `cluster_a`, which has the
/// smaller id).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestPair {
    pub cluster_a: usize,
    pub cluster_b: usize,
    pub point_a: usize,
    pub point_b: usize,
    pub distance: f64,
}

/// One considered pair: the first test admits `point_other` into `host`,
/// the second (skipped if the first fails) admits `point_host` into
/// `other`. The pair merges only if both pass.
#[derive(Debug, Clone, Serialize)]
pub struct MergeEvent {
    pub host: usize,
    pub other: usize,
    pub point_host: usize,
    pub point_other: usize,
    pub distance: f64,
    pub first_test: MergeTest,
    pub second_test: Option<MergeTest>,
    pub merged: bool,
}

/// Complete record of a merge phase.
#[derive(Debug, Clone)]
pub struct MergeTrace {
    pub events: Vec<MergeEvent>,
    pub partition: Partition,
    pub merges: usize,
    pub rejections: usize,
}

impl MergeTrace {
    /// One JSON object per considered pair, newline separated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for event in &self.events {
            out.push_str(&serde_json::to_string(event).expect("event serializes"));
            out.push('\n');
        }
        out
    }
}

fn sanitize(x: f64) -> f64 {
    if x.is_nan() {
        f64::INFINITY
    } else {
        x
    }
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    }
}

fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    median_of_sorted(&sorted)
}

/// Critical value for admission: center + spread_multiplier · spread of
/// the profile's scores, per the configured strategy. Never NaN; an
/// undefined spread (infinite scores) yields +∞.
pub fn critical_value(profile: &LofProfile, config: &MergeConfig) -> f64 {
    let values: Vec<f64> = match config.cv_strategy {
        CvStrategy::Cv1 | CvStrategy::Cv2 => profile.all_scores().iter().copied().map(sanitize).collect(),
        CvStrategy::Cv3 | CvStrategy::Cv4 => {
            profile.representative().iter().copied().map(sanitize).collect()
        }
    };
    let cv = match config.cv_strategy {
        CvStrategy::Cv1 | CvStrategy::Cv3 => {
            let med = median(&values);
            let deviations: Vec<f64> = values.iter().map(|v| sanitize((v - med).abs())).collect();
            med + config.spread_multiplier * (config.mad_scale * median(&deviations))
        }
        CvStrategy::Cv2 | CvStrategy::Cv4 => {
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
            mean + config.spread_multiplier * var.sqrt()
        }
    };
    sanitize(cv)
}

/// Tests whether `candidate` may join the cluster `host_members`
/// (reported as cluster `host_id`): its representative LOF within
/// host ∪ {candidate} must fall strictly below the critical value.
pub fn merge_test(
    dm: &DistanceMatrix,
    host_id: usize,
    host_members: &[usize],
    candidate: usize,
    config: &MergeConfig,
) -> Result<MergeTest> {
    config.validate()?;
    if host_members.contains(&candidate) {
        return Err(Error::invalid(format!(
            "candidate {candidate} already belongs to the host"
        )));
    }
    let mut scope: Vec<usize> = Vec::with_capacity(host_members.len() + 1);
    scope.extend_from_slice(host_members);
    scope.push(candidate);
    scope.sort_unstable();

    let q_max = (scope.len() - 1).min(config.q_max_cap);
    let profile = lof_profile(dm, &scope, q_max)?;
    let pos = scope.binary_search(&candidate).expect("candidate is in scope");
    let lof_value = profile.representative_of(pos);
    let cv = critical_value(&profile, config);
    Ok(MergeTest {
        candidate_point: candidate,
        host_cluster: host_id,
        lof_value,
        cv,
        passed: lof_value < cv,
    })
}

/// Exhaustive closest-pair search over all inter-cluster point pairs,
/// skipping excluded cluster pairs (keys are (smaller id, larger id)).
/// Ties break by cluster ids, then point ids. `Ok(None)` when every
/// pair is excluded.
pub fn closest_pair(
    partition: &Partition,
    dm: &DistanceMatrix,
    excluded: &HashSet<(usize, usize)>,
) -> Result<Option<ClosestPair>> {
    if partition.n() != dm.n() {
        return Err(Error::invalid(format!(
            "partition covers {} rows, distances cover {}",
            partition.n(),
            dm.n()
        )));
    }
    if partition.k() < 2 {
        return Err(Error::invalid("closest_pair needs at least 2 clusters"));
    }
    let assignment = partition.assignment();
    let n = partition.n();
    let mut best: Option<(f64, usize, usize, usize, usize)> = None;
    for i in 0..n {
        for j in i + 1..n {
            let (ci, cj) = (assignment[i], assignment[j]);
            if ci == cj {
                continue;
            }
            let (ca, cb, pa, pb) = if ci < cj { (ci, cj, i, j) } else { (cj, ci, j, i) };
            if excluded.contains(&(ca, cb)) {
                continue;
            }
            let key = (dm.get(i, j), ca, cb, pa, pb);
            let better = match best {
                None => true,
                Some(current) => {
                    key.0
                        .total_cmp(&current.0)
                        .then(key.1.cmp(&current.1))
                        .then(key.2.cmp(&current.2))
                        .then(key.3.cmp(&current.3))
                        .then(key.4.cmp(&current.4))
                        .is_lt()
                }
            };
            if better {
                best = Some(key);
            }
        }
    }
    Ok(best.map(|(distance, cluster_a, cluster_b, point_a, point_b)| ClosestPair {
        cluster_a,
        cluster_b,
        point_a,
        point_b,
        distance,
    }))
}

/// Single-linkage representative of a cluster pair: distance and the two
/// realizing points, stored under the key (smaller cluster id, larger
/// cluster id) with `point_a` on the smaller-id side.
#[derive(Debug, Clone, Copy)]
struct PairEntry {
    distance: f64,
    point_a: usize,
    point_b: usize,
}

impl PairEntry {
    fn better_than(&self, other: &PairEntry) -> bool {
        self.distance
            .total_cmp(&other.distance)
            .then(self.point_a.cmp(&other.point_a))
            .then(self.point_b.cmp(&other.point_b))
            .is_lt()
    }
}

type PairTable = HashMap<(usize, usize), PairEntry>;

fn build_pair_table(partition: &Partition, dm: &DistanceMatrix) -> PairTable {
    let assignment = partition.assignment();
    let n = partition.n();
    let mut table = PairTable::new();
    for i in 0..n {
        for j in i + 1..n {
            let (ci, cj) = (assignment[i], assignment[j]);
            if ci == cj {
                continue;
            }
            let (key, entry) = if ci < cj {
                ((ci, cj), PairEntry { distance: dm.get(i, j), point_a: i, point_b: j })
            } else {
                ((cj, ci), PairEntry { distance: dm.get(i, j), point_a: j, point_b: i })
            };
            table
                .entry(key)
                .and_modify(|current| {
                    if entry.better_than(current) {
                        *current = entry;
                    }
                })
                .or_insert(entry);
        }
    }
    table
}

/// After merging `absorb` into `keep`, fold every (absorb, x) entry into
/// (keep, x), keeping the better representative. Exact because the
/// single-linkage closest pair of a union is the better of the parts.
fn fold_pair_table(table: &mut PairTable, keep: usize, absorb: usize) {
    let absorbed: Vec<((usize, usize), PairEntry)> = {
        let keys: Vec<(usize, usize)> = table
            .keys()
            .filter(|&&(a, b)| a == absorb || b == absorb)
            .copied()
            .collect();
        keys.into_iter()
            .map(|key| (key, table.remove(&key).expect("key just listed")))
            .collect()
    };
    for ((a, b), entry) in absorbed {
        let (other, point_absorb, point_other) = if a == absorb {
            (b, entry.point_a, entry.point_b)
        } else {
            (a, entry.point_b, entry.point_a)
        };
        if other == keep {
            continue;
        }
        let (key, folded) = if keep < other {
            ((keep, other), PairEntry { distance: entry.distance, point_a: point_absorb, point_b: point_other })
        } else {
            ((other, keep), PairEntry { distance: entry.distance, point_a: point_other, point_b: point_absorb })
        };
        table
            .entry(key)
            .and_modify(|current| {
                if folded.better_than(current) {
                    *current = folded;
                }
            })
            .or_insert(folded);
    }
}

fn sorted_pairs(table: &PairTable) -> Vec<((usize, usize), PairEntry)> {
    let mut pairs: Vec<((usize, usize), PairEntry)> = table.iter().map(|(&k, &e)| (k, e)).collect();
    pairs.sort_unstable_by(|x, y| {
        x.1.distance
            .total_cmp(&y.1.distance)
            .then(x.0 .0.cmp(&y.0 .0))
            .then(x.0 .1.cmp(&y.0 .1))
    });
    pairs
}

/// Runs the merge phase to exhaustion: repeatedly take the closest
/// non-excluded cluster pair, apply both directional tests, and either
/// merge (the larger id disappears into the smaller, and exclusions
/// touching either side are lifted) or exclude the pair. Stops when no
/// admissible pair remains. Selection matches [`closest_pair`] but is
/// computed incrementally.
pub fn run(dm: &DistanceMatrix, initial: Partition, config: &MergeConfig) -> Result<MergeTrace> {
    config.validate()?;
    if initial.n() != dm.n() {
        return Err(Error::invalid(format!(
            "partition covers {} rows, distances cover {}",
            initial.n(),
            dm.n()
        )));
    }

    let mut partition = initial;
    let mut events = Vec::new();
    let mut merges = 0usize;
    let mut rejections = 0usize;
    let mut excluded: HashSet<(usize, usize)> = HashSet::new();

    let mut table = build_pair_table(&partition, dm);
    let mut plateau = sorted_pairs(&table);
    let mut cursor = 0usize;

    let k0 = partition.k() as u64;
    // Merges are bounded by k0 − 1 and each plateau can reject each pair
    // at most once, so the loop count is strictly below this.
    let budget = k0 * k0 * k0 + k0 + 2;
    let mut spent = 0u64;

    loop {
        let mut selected = None;
        while cursor < plateau.len() {
            let (key, entry) = plateau[cursor];
            if excluded.contains(&key) {
                cursor += 1;
                continue;
            }
            selected = Some((key, entry));
            break;
        }
        let Some(((l, m), entry)) = selected else { break };
        let (o, p, distance) = (entry.point_a, entry.point_b, entry.distance);

        spent += 1;
        assert!(spent <= budget, "merge loop exceeded its work bound");

        let host_members = partition.members(l).expect("cluster l exists");
        let first = merge_test(dm, l, host_members, p, config)?;
        if !first.passed {
            events.push(MergeEvent {
                host: l,
                other: m,
                point_host: o,
                point_other: p,
                distance,
                first_test: first,
                second_test: None,
                merged: false,
            });
            excluded.insert((l, m));
            rejections += 1;
            cursor += 1;
            continue;
        }

        let other_members = partition.members(m).expect("cluster m exists");
        let second = merge_test(dm, m, other_members, o, config)?;
        let merged = second.passed;
        events.push(MergeEvent {
            host: l,
            other: m,
            point_host: o,
            point_other: p,
            distance,
            first_test: first,
            second_test: Some(second),
            merged,
        });
        if !merged {
            excluded.insert((l, m));
            rejections += 1;
            cursor += 1;
            continue;
        }

        partition.merge_into(l, m);
        merges += 1;
        excluded.retain(|&(a, b)| a != l && b != l && a != m && b != m);
        fold_pair_table(&mut table, l, m);
        plateau = sorted_pairs(&table);
        cursor = 0;
    }

    Ok(MergeTrace {
        events,
        partition,
        merges,
        rejections,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataMatrix;
    use crate::neighbors::pairwise_distances;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn line(points: &[f64]) -> DistanceMatrix {
        let rows = points.iter().map(|&x| vec![x]).collect();
        pairwise_distances(&DataMatrix::from_rows(rows).unwrap())
    }

    fn profile(scores: &[f64]) -> LofProfile {
        let ids = (0..scores.len()).collect();
        LofProfile::from_scores(ids, 1, scores.to_vec()).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(MergeConfig::default().validate().is_ok());
        let bad = [
            MergeConfig { q_max_cap: 0, ..Default::default() },
            MergeConfig { mad_scale: 0.0, ..Default::default() },
            MergeConfig { mad_scale: -1.0, ..Default::default() },
            MergeConfig { mad_scale: f64::NAN, ..Default::default() },
            MergeConfig { spread_multiplier: -0.5, ..Default::default() },
            MergeConfig { spread_multiplier: f64::INFINITY, ..Default::default() },
        ];
        for config in bad {
            assert!(config.validate().is_err(), "{config:?} accepted");
        }
    }

    #[test]
    fn cv_strategy_parsing() {
        assert_eq!("cv1".parse::<CvStrategy>().unwrap(), CvStrategy::Cv1);
        assert_eq!("cv4".parse::<CvStrategy>().unwrap(), CvStrategy::Cv4);
        assert!("cv5".parse::<CvStrategy>().is_err());
    }

    #[test]
    fn cv1_with_zero_mad_collapses_to_median() {
        let p = profile(&[1.0, 1.0, 1.0, 1.0, 3.0]);
        let config = MergeConfig::default();
        assert_eq!(critical_value(&p, &config), 1.0);
    }

    #[test]
    fn cv2_moment_form() {
        let p = profile(&[1.0, 1.0, 1.0, 1.0, 3.0]);
        let config = MergeConfig { cv_strategy: CvStrategy::Cv2, ..Default::default() };
        // mean 1.4, sample variance 0.8
        let expected = 1.4 + 2.0 * 0.8f64.sqrt();
        assert!((critical_value(&p, &config) - expected).abs() < 1e-12);
    }

    #[test]
    fn cv3_cv4_use_representatives() {
        // per-point scores (1,3), (2,2), (0,4): all representatives are 2
        let p = LofProfile::from_scores(vec![0, 1, 2], 2, vec![1.0, 3.0, 2.0, 2.0, 0.0, 4.0])
            .unwrap();
        let cv3 = MergeConfig { cv_strategy: CvStrategy::Cv3, ..Default::default() };
        let cv4 = MergeConfig { cv_strategy: CvStrategy::Cv4, ..Default::default() };
        assert_eq!(critical_value(&p, &cv3), 2.0);
        assert_eq!(critical_value(&p, &cv4), 2.0);
        // over the raw scores the spread is visible
        let cv1 = critical_value(&p, &MergeConfig::default());
        assert!((cv1 - (2.0 + 2.0 * 1.4826)).abs() < 1e-12);
        let cv2cfg = MergeConfig { cv_strategy: CvStrategy::Cv2, ..Default::default() };
        assert!((critical_value(&p, &cv2cfg) - (2.0 + 2.0 * 2.0f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn critical_value_never_nan() {
        let p = profile(&[f64::NAN, 1.0, 1.0, 1.0]);
        let cv1 = critical_value(&p, &MergeConfig::default());
        assert_eq!(cv1, 1.0); // NaN becomes +inf, median robust to it
        let cv2cfg = MergeConfig { cv_strategy: CvStrategy::Cv2, ..Default::default() };
        assert_eq!(critical_value(&p, &cv2cfg), f64::INFINITY);
    }

    #[test]
    fn merge_test_rejects_far_outlier() {
        let mut points: Vec<f64> = (0..12).map(|i| i as f64 * 0.13).collect();
        points.push(100.0);
        let dm = line(&points);
        let host: Vec<usize> = (0..12).collect();
        let result = merge_test(&dm, 0, &host, 12, &MergeConfig::default()).unwrap();
        assert!(!result.passed);
        assert!(result.lof_value >= result.cv);
        assert!(result.lof_value > 10.0);
    }

    #[test]
    fn merge_test_accepts_central_duplicate() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut rows: Vec<Vec<f64>> = (0..20)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        rows.push(rows[0].clone()); // candidate duplicates a host point
        let dm = pairwise_distances(&DataMatrix::from_rows(rows).unwrap());
        let host: Vec<usize> = (0..20).collect();
        let result = merge_test(&dm, 0, &host, 20, &MergeConfig::default()).unwrap();
        assert!(result.passed, "lof {} vs cv {}", result.lof_value, result.cv);
    }

    #[test]
    fn merge_test_coincident_clump_fails_by_strictness() {
        // host {0, 0, 10}, candidate another 0: every score lands on the
        // median, so cv equals the candidate's value and strict < fails
        let dm = line(&[0.0, 0.0, 10.0, 0.0]);
        let result = merge_test(&dm, 0, &[0, 1, 2], 3, &MergeConfig::default()).unwrap();
        assert_eq!(result.lof_value, 1.0);
        assert_eq!(result.cv, 1.0);
        assert!(!result.passed);
    }

    #[test]
    fn merge_test_rejects_candidate_already_in_host() {
        let dm = line(&[0.0, 1.0, 2.0]);
        assert!(merge_test(&dm, 0, &[0, 1], 1, &MergeConfig::default()).is_err());
    }

    #[test]
    fn closest_pair_basic_and_ties() {
        let dm = line(&[0.0, 1.0, 5.0, 6.0]);
        let partition = Partition::from_assignment(vec![0, 0, 1, 1]).unwrap();
        let pair = closest_pair(&partition, &dm, &HashSet::new()).unwrap().unwrap();
        assert_eq!(
            (pair.cluster_a, pair.cluster_b, pair.point_a, pair.point_b, pair.distance),
            (0, 1, 1, 2, 4.0)
        );

        // equal distances resolve by cluster then point ids
        let dm = line(&[0.0, 1.0, 2.0]);
        let singletons = Partition::from_assignment(vec![0, 1, 2]).unwrap();
        let pair = closest_pair(&singletons, &dm, &HashSet::new()).unwrap().unwrap();
        assert_eq!((pair.cluster_a, pair.cluster_b), (0, 1));
    }

    #[test]
    fn closest_pair_honors_exclusions() {
        let dm = line(&[0.0, 1.0, 2.0]);
        let singletons = Partition::from_assignment(vec![0, 1, 2]).unwrap();
        let mut excluded = HashSet::new();
        excluded.insert((0, 1));
        let pair = closest_pair(&singletons, &dm, &excluded).unwrap().unwrap();
        assert_eq!((pair.cluster_a, pair.cluster_b), (1, 2));
        excluded.insert((1, 2));
        excluded.insert((0, 2));
        assert!(closest_pair(&singletons, &dm, &excluded).unwrap().is_none());
    }

    #[test]
    fn closest_pair_errors() {
        let dm = line(&[0.0, 1.0, 2.0]);
        let one = Partition::from_assignment(vec![0, 0, 0]).unwrap();
        assert!(closest_pair(&one, &dm, &HashSet::new()).is_err());
        let mismatched = Partition::from_assignment(vec![0, 1]).unwrap();
        assert!(closest_pair(&mismatched, &dm, &HashSet::new()).is_err());
    }

    #[test]
    fn run_with_one_cluster_is_a_no_op() {
        let dm = line(&[0.0, 1.0, 2.0]);
        let initial = Partition::from_assignment(vec![0, 0, 0]).unwrap();
        let trace = run(&dm, initial.clone(), &MergeConfig::default()).unwrap();
        assert!(trace.events.is_empty());
        assert_eq!((trace.merges, trace.rejections), (0, 0));
        assert_eq!(trace.partition.assignment(), initial.assignment());
    }

    #[test]
    fn singletons_never_merge() {
        // two-point scopes score exactly the critical value, so every
        // singleton pair is rejected on the first test
        let dm = line(&[0.0, 0.5, 4.0, 9.0]);
        let singletons = Partition::from_assignment(vec![0, 1, 2, 3]).unwrap();
        let trace = run(&dm, singletons, &MergeConfig::default()).unwrap();
        assert_eq!(trace.merges, 0);
        assert_eq!(trace.rejections, 6);
        assert_eq!(trace.partition.k(), 4);
        for event in &trace.events {
            assert!(!event.merged);
            assert!(event.second_test.is_none());
            assert_eq!(event.first_test.lof_value, event.first_test.cv);
        }
    }

    #[test]
    fn run_merges_clump_halves_but_not_clumps() {
        // two tight clumps of six points; the initial four clusters are
        // the clump halves, which rejoin without bridging the gap
        let mut points = Vec::new();
        for i in 0..6 {
            points.push(i as f64 * 0.1);
        }
        for i in 0..6 {
            points.push(50.0 + i as f64 * 0.1);
        }
        let dm = line(&points);
        let initial = Partition::from_assignment(vec![0, 0, 0, 1, 1, 1, 2, 2, 2, 3, 3, 3]).unwrap();
        let trace = run(&dm, initial, &MergeConfig::default()).unwrap();
        assert_eq!(trace.merges, 2, "events: {:#?}", trace.events);
        assert_eq!(trace.partition.k(), 2);
        let canon = trace.partition.canonicalized();
        assert_eq!(canon.assignment(), &[0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 1]);
    }

    #[test]
    fn run_trace_is_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..24)
            .map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let m = DataMatrix::from_rows(rows).unwrap();
        let dm = pairwise_distances(&m);
        let initial = crate::initcluster::kmeans(&m, 8, 1, 100).unwrap();
        let k0 = initial.k();
        let trace = run(&dm, initial, &MergeConfig::default()).unwrap();
        assert!(trace.merges <= k0 - 1);
        assert_eq!(trace.partition.k(), k0 - trace.merges);
        assert_eq!(trace.events.len(), trace.merges + trace.rejections);
        for event in &trace.events {
            let both_passed =
                event.first_test.passed && event.second_test.map_or(false, |t| t.passed);
            assert_eq!(event.merged, both_passed);
            if !event.first_test.passed {
                assert!(event.second_test.is_none());
            }
        }
    }

    #[test]
    fn jsonl_serializes_infinities_as_null() {
        let event = MergeEvent {
            host: 0,
            other: 1,
            point_host: 2,
            point_other: 3,
            distance: 4.5,
            first_test: MergeTest {
                candidate_point: 3,
                host_cluster: 0,
                lof_value: f64::INFINITY,
                cv: 1.0,
                passed: false,
            },
            second_test: None,
            merged: false,
        };
        let trace = MergeTrace {
            events: vec![event],
            partition: Partition::from_assignment(vec![0, 1]).unwrap(),
            merges: 0,
            rejections: 1,
        };
        let jsonl = trace.to_jsonl();
        let lines: Vec<&str> = jsonl.lines().collect();
        assert_eq!(lines.len(), 1);
        let value: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
        assert!(value["first_test"]["lof_value"].is_null());
        assert_eq!(value["distance"], 4.5);
        assert_eq!(value["merged"], false);
    }
}
