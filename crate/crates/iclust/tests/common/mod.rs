//! Independent reference implementations used to cross-check the
//! library: straight-line transcriptions of the defining formulas,
//! deliberately coded without reusing library internals.

#![allow(dead_code)]

use rand::Rng;

// ---------------------------------------------------------------------
// generators

pub fn std_normal(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub fn gaussian_blob(rng: &mut impl Rng, n: usize, center: &[f64], sd: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| center.iter().map(|&c| c + sd * std_normal(rng)).collect())
        .collect()
}

// ---------------------------------------------------------------------
// distances and neighborhoods

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// q-distance of `center` within `scope`, by full sort.
fn oracle_qdist(points: &[Vec<f64>], scope: &[usize], center: usize, q: usize) -> f64 {
    let mut ds: Vec<f64> = scope
        .iter()
        .filter(|&&j| j != center)
        .map(|&j| euclid(&points[center], &points[j]))
        .collect();
    ds.sort_by(f64::total_cmp);
    ds[q - 1]
}

/// Tie-aware neighborhood members of `center` within `scope`, ascending.
pub fn oracle_members(points: &[Vec<f64>], scope: &[usize], center: usize, q: usize) -> Vec<usize> {
    let qd = oracle_qdist(points, scope, center, q);
    scope
        .iter()
        .copied()
        .filter(|&j| j != center && euclid(&points[center], &points[j]) <= qd)
        .collect()
}

// ---------------------------------------------------------------------
// LOF (Breunig definitions, transcribed)

pub fn oracle_lrd(points: &[Vec<f64>], scope: &[usize], center: usize, q: usize) -> f64 {
    let members = oracle_members(points, scope, center, q);
    let reach_sum: f64 = members
        .iter()
        .map(|&b| euclid(&points[center], &points[b]).max(oracle_qdist(points, scope, b, q)))
        .sum();
    if reach_sum == 0.0 {
        f64::INFINITY
    } else {
        members.len() as f64 / reach_sum
    }
}

/// LOF_q for every scope point, in scope order.
pub fn oracle_lof(points: &[Vec<f64>], scope: &[usize], q: usize) -> Vec<f64> {
    scope
        .iter()
        .map(|&i| {
            let members = oracle_members(points, scope, i, q);
            let own = oracle_lrd(points, scope, i, q);
            let total: f64 = members
                .iter()
                .map(|&b| {
                    let theirs = oracle_lrd(points, scope, b, q);
                    if theirs.is_infinite() && own.is_infinite() {
                        1.0
                    } else {
                        theirs / own
                    }
                })
                .sum();
            total / members.len() as f64
        })
        .collect()
}

/// Equality that treats two infinities of the same sign as equal.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol
}

// ---------------------------------------------------------------------
// agglomerative clustering, recompute-all-pairs form
//
// Cluster dissimilarities come straight from member points each step:
// single = min cross distance, complete = max cross distance, Ward =
// 2|A||B|/(|A|+|B|) · ||centroid difference||² (reported height is the
// square root), so no Lance-Williams recursion is involved.

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum OracleLinkage {
    Ward,
    Complete,
    Single,
}

struct OracleCluster {
    id: usize,
    members: Vec<usize>,
}

fn oracle_dissimilarity(points: &[Vec<f64>], a: &OracleCluster, b: &OracleCluster, linkage: OracleLinkage) -> f64 {
    match linkage {
        OracleLinkage::Single => {
            let mut best = f64::INFINITY;
            for &i in &a.members {
                for &j in &b.members {
                    best = best.min(euclid(&points[i], &points[j]));
                }
            }
            best
        }
        OracleLinkage::Complete => {
            let mut worst = 0.0f64;
            for &i in &a.members {
                for &j in &b.members {
                    worst = worst.max(euclid(&points[i], &points[j]));
                }
            }
            worst
        }
        OracleLinkage::Ward => {
            let p = points[0].len();
            let centroid = |c: &OracleCluster| -> Vec<f64> {
                let mut mu = vec![0.0; p];
                for &i in &c.members {
                    for (m, v) in mu.iter_mut().zip(&points[i]) {
                        *m += v;
                    }
                }
                mu.iter().map(|v| v / c.members.len() as f64).collect()
            };
            let (mu_a, mu_b) = (centroid(a), centroid(b));
            let gap2: f64 = mu_a
                .iter()
                .zip(&mu_b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            let (na, nb) = (a.members.len() as f64, b.members.len() as f64);
            2.0 * na * nb / (na + nb) * gap2
        }
    }
}

/// Merge sequence (left node id, right node id, height), tie-broken by
/// (dissimilarity, smaller node id, larger node id).
pub fn oracle_linkage(points: &[Vec<f64>], linkage: OracleLinkage) -> Vec<(usize, usize, f64)> {
    let n = points.len();
    let mut clusters: Vec<OracleCluster> = (0..n)
        .map(|i| OracleCluster {
            id: i,
            members: vec![i],
        })
        .collect();
    let mut steps = Vec::new();
    for t in 0..n.saturating_sub(1) {
        let mut best = (f64::INFINITY, usize::MAX, usize::MAX);
        let mut best_pair = (0, 0);
        for x in 0..clusters.len() {
            for y in x + 1..clusters.len() {
                let d = oracle_dissimilarity(points, &clusters[x], &clusters[y], linkage);
                let (lo, hi) = if clusters[x].id < clusters[y].id {
                    (clusters[x].id, clusters[y].id)
                } else {
                    (clusters[y].id, clusters[x].id)
                };
                let key = (d, lo, hi);
                if key.0.total_cmp(&best.0).then(key.1.cmp(&best.1)).then(key.2.cmp(&best.2)).is_lt() {
                    best = key;
                    best_pair = (x, y);
                }
            }
        }
        let (x, y) = best_pair;
        let height = if linkage == OracleLinkage::Ward {
            best.0.sqrt()
        } else {
            best.0
        };
        steps.push((best.1, best.2, height));
        let second = clusters.remove(y);
        let first = clusters.remove(x);
        let mut members = first.members;
        members.extend(second.members);
        members.sort_unstable();
        clusters.push(OracleCluster { id: n + t, members });
    }
    steps
}

// ---------------------------------------------------------------------
// moments

pub fn oracle_mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn oracle_std(xs: &[f64]) -> f64 {
    let m = oracle_mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)).sqrt()
}

pub fn oracle_median(xs: &[f64]) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

pub fn oracle_mad(xs: &[f64], scale: f64) -> f64 {
    let med = oracle_median(xs);
    let devs: Vec<f64> = xs.iter().map(|x| (x - med).abs()).collect();
    scale * oracle_median(&devs)
}

// ---------------------------------------------------------------------
// evaluation measures (Table-1 formulas, recomputed from a counts matrix)

pub struct OracleMetrics {
    pub purity: f64,
    pub f: f64,
    pub homogeneity: f64,
    pub completeness: f64,
    pub v: f64,
    pub wf_big: Option<f64>,
    pub wpr_big: Option<f64>,
    pub wre_big: Option<f64>,
    pub wf_small: Option<f64>,
    pub wpr_small: Option<f64>,
    pub wre_small: Option<f64>,
}

pub fn oracle_metrics(counts: &[Vec<usize>], small_threshold: usize) -> OracleMetrics {
    let g = counts.len();
    let k = counts[0].len();
    let n: usize = counts.iter().flatten().sum();
    let nf = n as f64;
    let group_sizes: Vec<usize> = counts.iter().map(|row| row.iter().sum()).collect();
    let cluster_sizes: Vec<usize> = (0..k).map(|c| (0..g).map(|gi| counts[gi][c]).sum()).collect();

    let purity = (0..k)
        .map(|c| (0..g).map(|gi| counts[gi][c]).max().unwrap() as f64)
        .sum::<f64>()
        / nf;

    let pair_f = |gi: usize, c: usize| -> f64 {
        let overlap = counts[gi][c] as f64;
        if overlap == 0.0 {
            return 0.0;
        }
        let precision = overlap / cluster_sizes[c] as f64;
        let recall = overlap / group_sizes[gi] as f64;
        2.0 * precision * recall / (precision + recall)
    };

    let mut f = 0.0;
    for gi in 0..g {
        let best = (0..k).map(|c| pair_f(gi, c)).fold(0.0f64, f64::max);
        f += group_sizes[gi] as f64 / nf * best;
    }

    let ent = |sizes: &[usize]| -> f64 {
        -sizes
            .iter()
            .filter(|&&s| s > 0)
            .map(|&s| (s as f64 / nf) * (s as f64 / nf).ln())
            .sum::<f64>()
    };
    let h_g = ent(&group_sizes);
    let h_k = ent(&cluster_sizes);
    let mut h_g_k = 0.0;
    let mut h_k_g = 0.0;
    for gi in 0..g {
        for c in 0..k {
            if counts[gi][c] == 0 {
                continue;
            }
            let joint = counts[gi][c] as f64 / nf;
            h_g_k -= joint * ((counts[gi][c] as f64 / cluster_sizes[c] as f64).ln());
            h_k_g -= joint * ((counts[gi][c] as f64 / group_sizes[gi] as f64).ln());
        }
    }
    let homogeneity = if h_g == 0.0 { 1.0 } else { 1.0 - h_g_k / h_g };
    let completeness = if h_k == 0.0 { 1.0 } else { 1.0 - h_k_g / h_k };
    let v = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };

    let cat = |small: bool| -> (Option<f64>, Option<f64>, Option<f64>) {
        let groups: Vec<usize> = (0..g)
            .filter(|&gi| (group_sizes[gi] <= small_threshold) == small)
            .collect();
        if groups.is_empty() {
            return (None, None, None);
        }
        let total: f64 = groups.iter().map(|&gi| group_sizes[gi] as f64).sum();
        let (mut wf, mut wpr, mut wre) = (0.0, 0.0, 0.0);
        for &gi in &groups {
            let mut best_c = 0;
            let mut best_f = -1.0;
            for c in 0..k {
                let fv = pair_f(gi, c);
                if fv > best_f {
                    best_f = fv;
                    best_c = c;
                }
            }
            let overlap = counts[gi][best_c] as f64;
            let w = group_sizes[gi] as f64 / total;
            wf += w * best_f;
            wpr += w * (overlap / cluster_sizes[best_c] as f64);
            wre += w * (overlap / group_sizes[gi] as f64);
        }
        (Some(wf), Some(wpr), Some(wre))
    };
    let (wf_big, wpr_big, wre_big) = cat(false);
    let (wf_small, wpr_small, wre_small) = cat(true);

    OracleMetrics {
        purity,
        f,
        homogeneity,
        completeness,
        v,
        wf_big,
        wpr_big,
        wre_big,
        wf_small,
        wpr_small,
        wre_small,
    }
}
