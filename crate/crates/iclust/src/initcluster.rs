//! Initial over-clustering: agglomerative hierarchical methods via
//! Lance-Williams updates, seeded k-means, and the partition type the
//! merge phase operates on.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::DataMatrix;
use crate::error::{Error, Result};
use crate::neighbors::DistanceMatrix;

/// A partition of observations `0..n` into nonempty clusters. Cluster ids
/// are arbitrary but stable; member lists are kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    assignment: Vec<usize>,
    clusters: BTreeMap<usize, Vec<usize>>,
}

impl Partition {
    pub fn from_assignment(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::Empty);
        }
        let mut clusters: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in assignment.iter().enumerate() {
            clusters.entry(c).or_default().push(i);
        }
        Ok(Partition {
            assignment,
            clusters,
        })
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_of(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn members(&self, id: usize) -> Option<&[usize]> {
        self.clusters.get(&id).map(Vec::as_slice)
    }

    /// Clusters in ascending id order.
    pub fn clusters(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.clusters.iter().map(|(&id, m)| (id, m.as_slice()))
    }

    /// Moves every member of `absorb` into `keep`; `absorb` disappears.
    pub(crate) fn merge_into(&mut self, keep: usize, absorb: usize) {
        assert!(keep != absorb, "cannot merge a cluster into itself");
        let absorbed = self.clusters.remove(&absorb).expect("absorbed cluster exists");
        for &i in &absorbed {
            self.assignment[i] = keep;
        }
        let target = self.clusters.get_mut(&keep).expect("kept cluster exists");
        target.extend(absorbed);
        target.sort_unstable();
    }

    /// Same grouping with ids renumbered `0..k`, ordered by each
    /// cluster's smallest member.
    pub fn canonicalized(&self) -> Partition {
        let mut firsts: Vec<(usize, usize)> = self
            .clusters
            .iter()
            .map(|(&id, members)| (members[0], id))
            .collect();
        firsts.sort_unstable();
        let remap: BTreeMap<usize, usize> = firsts
            .iter()
            .enumerate()
            .map(|(new, &(_, old))| (old, new))
            .collect();
        let assignment = self.assignment.iter().map(|c| remap[c]).collect();
        Partition::from_assignment(assignment).expect("relabeling preserves validity")
    }
}

/// One agglomeration: the two merged node ids and the merge height.
/// Leaves are `0..n`; the node formed at step `t` is `n + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeStep {
    pub left: usize,
    pub right: usize,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    n: usize,
    steps: Vec<MergeStep>,
}

impl Dendrogram {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> &[MergeStep] {
        &self.steps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    Ward,
    Complete,
    Single,
}

impl Linkage {
    /// Distance from cluster `x` to the merger of `a` and `b`, given the
    /// current dissimilarities (squared Euclidean for Ward).
    fn update(self, dxa: f64, dxb: f64, dab: f64, sx: f64, sa: f64, sb: f64) -> f64 {
        match self {
            Linkage::Single => dxa.min(dxb),
            Linkage::Complete => dxa.max(dxb),
            Linkage::Ward => {
                ((sa + sx) * dxa + (sb + sx) * dxb - sx * dab) / (sa + sb + sx)
            }
        }
    }
}

impl std::str::FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ward" => Ok(Linkage::Ward),
            "complete" => Ok(Linkage::Complete),
            "single" => Ok(Linkage::Single),
            _ => Err(Error::invalid(format!("unknown linkage {s:?}"))),
        }
    }
}

/// Pair ordering used to pick the next agglomeration: distance first,
/// then the smaller and larger node id. Total, hence deterministic.
#[inline]
fn pair_key(dist: f64, id_a: usize, id_b: usize) -> (f64, usize, usize) {
    (dist, id_a.min(id_b), id_a.max(id_b))
}

#[inline]
fn key_lt(a: (f64, usize, usize), b: (f64, usize, usize)) -> bool {
    a.0.total_cmp(&b.0)
        .then(a.1.cmp(&b.1))
        .then(a.2.cmp(&b.2))
        .is_lt()
}

/// Agglomerative clustering over a precomputed distance matrix. Ward
/// operates on squared distances and reports square-rooted heights;
/// complete and single linkage use the distances as given.
///
/// Each cluster caches its best partner, so the usual case runs near
/// O(n²); ties are broken by node id, making the dendrogram unique.
pub fn hierarchical(dm: &DistanceMatrix, linkage: Linkage) -> Dendrogram {
    let n = dm.n();
    let mut steps = Vec::with_capacity(n.saturating_sub(1));
    if n < 2 {
        return Dendrogram { n, steps };
    }

    // Working dissimilarities, indexed like the condensed input; slots are
    // reused as clusters merge.
    let mut work: Vec<f64> = dm.condensed().to_vec();
    if linkage == Linkage::Ward {
        for d in &mut work {
            *d *= *d;
        }
    }
    let at = |i: usize, j: usize| -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * n - i * (i + 1) / 2 + (j - i - 1)
    };

    let mut alive: Vec<bool> = vec![true; n];
    let mut node_id: Vec<usize> = (0..n).collect();
    let mut size: Vec<f64> = vec![1.0; n];
    // Best partner per live slot: (dissimilarity, partner slot).
    let mut cand: Vec<(f64, usize)> = vec![(f64::INFINITY, usize::MAX); n];

    let full_key = |slot: usize, c: (f64, usize), node_id: &[usize]| {
        pair_key(c.0, node_id[slot], node_id[c.1])
    };
    let rescan = |slot: usize, alive: &[bool], node_id: &[usize], work: &[f64]| {
        let mut best = (f64::INFINITY, usize::MAX);
        let mut best_key = (f64::INFINITY, usize::MAX, usize::MAX);
        for other in 0..n {
            if other == slot || !alive[other] {
                continue;
            }
            let key = pair_key(work[at(slot, other)], node_id[slot], node_id[other]);
            if key_lt(key, best_key) {
                best_key = key;
                best = (key.0, other);
            }
        }
        best
    };

    for slot in 0..n {
        cand[slot] = rescan(slot, &alive, &node_id, &work);
    }

    for step in 0..n - 1 {
        let mut best_slot = usize::MAX;
        let mut best_key = (f64::INFINITY, usize::MAX, usize::MAX);
        for slot in 0..n {
            if !alive[slot] {
                continue;
            }
            let key = full_key(slot, cand[slot], &node_id);
            if key_lt(key, best_key) {
                best_key = key;
                best_slot = slot;
            }
        }

        let a = best_slot;
        let b = cand[a].1;
        let dab = work[at(a, b)];
        let (id_a, id_b) = (node_id[a], node_id[b]);
        steps.push(MergeStep {
            left: id_a.min(id_b),
            right: id_a.max(id_b),
            height: if linkage == Linkage::Ward {
                dab.sqrt()
            } else {
                dab
            },
        });

        let keep = a.min(b);
        let drop = a.max(b);
        for other in 0..n {
            if !alive[other] || other == a || other == b {
                continue;
            }
            work[at(other, keep)] = linkage.update(
                work[at(other, a)],
                work[at(other, b)],
                dab,
                size[other],
                size[a],
                size[b],
            );
        }
        alive[drop] = false;
        size[keep] = size[a] + size[b];
        node_id[keep] = n + step;

        if step + 1 == n - 1 {
            break;
        }
        for slot in 0..n {
            if !alive[slot] || slot == keep {
                continue;
            }
            if cand[slot].1 == a || cand[slot].1 == b {
                cand[slot] = rescan(slot, &alive, &node_id, &work);
            } else {
                let challenger = pair_key(work[at(slot, keep)], node_id[slot], node_id[keep]);
                if key_lt(challenger, full_key(slot, cand[slot], &node_id)) {
                    cand[slot] = (challenger.0, keep);
                }
            }
        }
        cand[keep] = rescan(keep, &alive, &node_id, &work);
    }

    Dendrogram { n, steps }
}

/// Cuts a dendrogram into exactly `k` clusters by undoing the last
/// `k − 1` merges. Ids are canonical (`0..k`, ordered by smallest member).
pub fn cut(dendrogram: &Dendrogram, k: usize) -> Result<Partition> {
    let n = dendrogram.n();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} outside [1, {n}]")));
    }

    let mut parent: Vec<usize> = (0..2 * n - 1).collect();
    for (t, step) in dendrogram.steps().iter().take(n - k).enumerate() {
        parent[step.left] = n + t;
        parent[step.right] = n + t;
    }
    let root = |mut x: usize| {
        while parent[x] != x {
            x = parent[x];
        }
        x
    };

    let assignment: Vec<usize> = (0..n).map(|i| root(i)).collect();
    Ok(Partition::from_assignment(assignment)?.canonicalized())
}

/// Outcome of a k-means run, including the per-iteration within-cluster
/// sum of squares measured after each centroid update.
#[derive(Debug, Clone)]
pub struct KmeansRun {
    pub partition: Partition,
    pub sse_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Default Lloyd iteration cap.
pub const KMEANS_MAX_ITER: usize = 100;

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        sum += d * d;
    }
    sum
}

/// Seeded k-means: k-means++ initialization, then Lloyd iterations until
/// the assignment reaches a fixpoint or `max_iter` passes. Empty
/// clusters are repaired by reseeding them with the point farthest from
/// its current centroid.
pub fn kmeans(matrix: &DataMatrix, k: usize, seed: u64, max_iter: usize) -> Result<Partition> {
    Ok(kmeans_detailed(matrix, k, seed, max_iter)?.partition)
}

pub fn kmeans_detailed(
    matrix: &DataMatrix,
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<KmeansRun> {
    let n = matrix.n();
    let p = matrix.p();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} outside [1, {n}]")));
    }
    if max_iter == 0 {
        return Err(Error::invalid("max_iter must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ seeding.
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    centers.push(matrix.row(first).to_vec());
    let mut best_d2: Vec<f64> = (0..n)
        .map(|i| squared_distance(matrix.row(i), &centers[0]))
        .collect();
    while centers.len() < k {
        let total: f64 = best_d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut cumulative = 0.0;
            let mut chosen = None;
            for (i, &d2) in best_d2.iter().enumerate() {
                cumulative += d2;
                if cumulative > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or_else(|| {
                best_d2
                    .iter()
                    .rposition(|&d2| d2 > 0.0)
                    .expect("positive mass exists when total > 0")
            })
        } else {
            // Every point coincides with a center already.
            rng.random_range(0..n)
        };
        centers.push(matrix.row(next).to_vec());
        for i in 0..n {
            let d2 = squared_distance(matrix.row(i), &centers[centers.len() - 1]);
            if d2 < best_d2[i] {
                best_d2[i] = d2;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    let mut sse_trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..max_iter {
        iterations += 1;

        let mut next: Vec<usize> = (0..n)
            .map(|i| {
                let mut best = 0;
                let mut best_d2 = squared_distance(matrix.row(i), &centers[0]);
                for (c, center) in centers.iter().enumerate().skip(1) {
                    let d2 = squared_distance(matrix.row(i), center);
                    if d2 < best_d2 {
                        best_d2 = d2;
                        best = c;
                    }
                }
                best
            })
            .collect();

        // Repair empty clusters with the farthest point whose cluster can
        // spare it.
        let mut counts = vec![0usize; k];
        for &c in &next {
            counts[c] += 1;
        }
        for empty in 0..k {
            if counts[empty] > 0 {
                continue;
            }
            let mut pick = None;
            let mut pick_d2 = -1.0;
            for i in 0..n {
                if counts[next[i]] < 2 {
                    continue;
                }
                let d2 = squared_distance(matrix.row(i), &centers[next[i]]);
                if d2 > pick_d2 {
                    pick_d2 = d2;
                    pick = Some(i);
                }
            }
            if let Some(i) = pick {
                counts[next[i]] -= 1;
                counts[empty] += 1;
                next[i] = empty;
            }
        }

        let stable = iterations > 1 && next == assignment;
        assignment = next;

        for center in &mut centers {
            center.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assignment[i]] += 1;
            for j in 0..p {
                centers[assignment[i]][j] += matrix.get(i, j);
            }
        }
        for (center, &count) in centers.iter_mut().zip(&counts) {
            if count > 0 {
                center.iter_mut().for_each(|v| *v /= count as f64);
            }
        }

        let sse: f64 = (0..n)
            .map(|i| squared_distance(matrix.row(i), &centers[assignment[i]]))
            .sum();
        sse_trace.push(sse);

        if stable {
            converged = true;
            break;
        }
    }

    Ok(KmeansRun {
        partition: Partition::from_assignment(assignment)?,
        sse_trace,
        iterations,
        converged,
    })
}

/// Default cluster count for the over-clustering stage: ⌈10·ln n⌉,
/// clamped to [1, n].
pub fn default_k_init(n: usize) -> usize {
    scaled_log_k_init(n, 10.0)
}

/// ⌈factor·ln n⌉ clamped to [1, n].
pub fn scaled_log_k_init(n: usize, factor: f64) -> usize {
    let raw = (factor * (n as f64).ln()).ceil();
    (raw as usize).clamp(1, n.max(1))
}

/// ⌈n/4⌉ clamped to [1, n].
pub fn quarter_k_init(n: usize) -> usize {
    n.div_ceil(4).clamp(1, n.max(1))
}

/// Writes a partition as `row_index,cluster_id` CSV.
pub fn write_partition_csv(path: &Path, partition: &Partition) -> Result<()> {
    let mut out = String::from("row_index,cluster_id\n");
    for (i, c) in partition.assignment().iter().enumerate() {
        out.push_str(&format!("{i},{c}\n"));
    }
    let mut file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(out.as_bytes()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a `row_index,cluster_id` CSV; rows must cover `0..n` exactly.
pub fn read_partition_csv(path: &Path) -> Result<Partition> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|source| Error::Csv {
            path: path.to_path_buf(),
            source,
        })?;
        let row = row_idx + 1;
        if record.len() != 2 {
            return Err(Error::RaggedRow {
                row,
                expected: 2,
                found: record.len(),
            });
        }
        let parse = |field: &str, column: &str| -> Result<usize> {
            field.trim().parse().map_err(|_| Error::Parse {
                row,
                column: column.to_owned(),
                message: format!("cannot parse {field:?} as an index"),
            })
        };
        pairs.push((parse(&record[0], "row_index")?, parse(&record[1], "cluster_id")?));
    }
    if pairs.is_empty() {
        return Err(Error::Empty);
    }

    let n = pairs.len();
    let mut assignment = vec![usize::MAX; n];
    for (row_index, cluster) in pairs {
        if row_index >= n {
            return Err(Error::invalid(format!(
                "row_index {row_index} outside 0..{n}"
            )));
        }
        if assignment[row_index] != usize::MAX {
            return Err(Error::invalid(format!("row_index {row_index} repeated")));
        }
        assignment[row_index] = cluster;
    }
    Partition::from_assignment(assignment)
}
