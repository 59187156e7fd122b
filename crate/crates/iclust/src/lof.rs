//! Local outlier factor over a range of neighborhood sizes.
//!
//! All computations follow one set of conventions so that scores are
//! reproducible bit for bit: neighborhoods are tie-aware, sums run in
//! ascending global index order, a zero reachability sum gives an
//! infinite local reachability density, and the ratio of two infinite
//! densities counts as 1.

use crate::error::{Error, Result};
use crate::neighbors::{neighborhood, validate_scope, DistanceMatrix};

/// LOF scores for every point of a scope at every q in `1..=q_max`,
/// plus the per-point mean across q used as the representative score.
#[derive(Debug, Clone)]
pub struct LofProfile {
    point_ids: Vec<usize>,
    q_max: usize,
    scores: Vec<f64>,
    representative: Vec<f64>,
}

impl LofProfile {
    /// Assembles a profile from an externally produced score matrix
    /// (point-major, `q_max` scores per point); representatives are the
    /// row means.
    pub fn from_scores(point_ids: Vec<usize>, q_max: usize, scores: Vec<f64>) -> Result<Self> {
        if q_max == 0 {
            return Err(Error::invalid("q_max must be at least 1"));
        }
        if point_ids.is_empty() || scores.len() != point_ids.len() * q_max {
            return Err(Error::invalid(format!(
                "{} scores for {} points × q_max = {q_max}",
                scores.len(),
                point_ids.len()
            )));
        }
        let representative = scores
            .chunks_exact(q_max)
            .map(|row| row.iter().sum::<f64>() / q_max as f64)
            .collect();
        Ok(LofProfile {
            point_ids,
            q_max,
            scores,
            representative,
        })
    }

    pub fn point_ids(&self) -> &[usize] {
        &self.point_ids
    }

    pub fn q_max(&self) -> usize {
        self.q_max
    }

    /// Score of the point at scope position `pos` for neighborhood size `q`.
    pub fn score(&self, pos: usize, q: usize) -> f64 {
        assert!(q >= 1 && q <= self.q_max, "q = {q} outside profile range");
        self.scores[pos * self.q_max + (q - 1)]
    }

    /// All scores in scope order for a fixed `q`.
    pub fn scores_for_q(&self, q: usize) -> Vec<f64> {
        (0..self.point_ids.len()).map(|p| self.score(p, q)).collect()
    }

    /// Every score, point-major then q.
    pub fn all_scores(&self) -> &[f64] {
        &self.scores
    }

    /// Mean score across `q = 1..=q_max` per point, in scope order.
    pub fn representative(&self) -> &[f64] {
        &self.representative
    }

    pub fn representative_of(&self, pos: usize) -> f64 {
        self.representative[pos]
    }
}

/// Per-point sorted neighbor prefixes covering everything up to the
/// q_max-distance, from which all smaller neighborhoods can be read off.
struct ScopedNeighbors<'a> {
    dm: &'a DistanceMatrix,
    scope: &'a [usize],
    /// For each scope position: (distance, scope position of the other
    /// point), sorted by distance then global index, holding every point
    /// with distance ≤ the q_max-distance.
    prefixes: Vec<Vec<(f64, usize)>>,
}

impl<'a> ScopedNeighbors<'a> {
    fn build(dm: &'a DistanceMatrix, scope: &'a [usize], q_max: usize) -> Result<Self> {
        validate_scope(dm, scope)?;
        let s = scope.len();
        if s < 2 {
            return Err(Error::invalid("scope needs at least 2 points"));
        }
        if q_max == 0 || q_max > s - 1 {
            return Err(Error::invalid(format!(
                "q_max = {q_max} outside [1, {}]",
                s - 1
            )));
        }

        let cmp = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.total_cmp(&b.0).then(scope[a.1].cmp(&scope[b.1]))
        };

        let mut prefixes = Vec::with_capacity(s);
        for a in 0..s {
            let mut dists: Vec<(f64, usize)> = (0..s)
                .filter(|&b| b != a)
                .map(|b| (dm.get(scope[a], scope[b]), b))
                .collect();
            let prefix = if dists.len() > q_max {
                // Partial selection: everything up to the q_max-th smallest
                // distance plus its ties is enough for every q ≤ q_max.
                dists.select_nth_unstable_by(q_max - 1, cmp);
                let pivot = dists[q_max - 1].0;
                let mut kept: Vec<(f64, usize)> = dists[..q_max].to_vec();
                kept.extend(dists[q_max..].iter().filter(|(d, _)| *d == pivot));
                kept.sort_unstable_by(cmp);
                kept
            } else {
                dists.sort_unstable_by(cmp);
                dists
            };
            prefixes.push(prefix);
        }

        Ok(ScopedNeighbors {
            dm,
            scope,
            prefixes,
        })
    }

    fn q_distance(&self, pos: usize, q: usize) -> f64 {
        self.prefixes[pos][q - 1].0
    }

    /// Scope positions of the tie-aware q-neighborhood, ascending by
    /// global index.
    fn members(&self, pos: usize, q: usize) -> Vec<usize> {
        let qdist = self.q_distance(pos, q);
        let mut members: Vec<usize> = self.prefixes[pos]
            .iter()
            .take_while(|(d, _)| *d <= qdist)
            .map(|&(_, b)| b)
            .collect();
        members.sort_unstable_by_key(|&b| self.scope[b]);
        members
    }

    fn lrd_column(&self, q: usize) -> Vec<f64> {
        let s = self.scope.len();
        let mut lrd = Vec::with_capacity(s);
        for a in 0..s {
            let members = self.members(a, q);
            let mut reach_sum = 0.0;
            for &b in &members {
                let d = self.dm.get(self.scope[a], self.scope[b]);
                reach_sum += d.max(self.q_distance(b, q));
            }
            lrd.push(if reach_sum == 0.0 {
                f64::INFINITY
            } else {
                members.len() as f64 / reach_sum
            });
        }
        lrd
    }

    fn lof_column(&self, q: usize) -> Vec<f64> {
        let lrd = self.lrd_column(q);
        let s = self.scope.len();
        let mut lof = Vec::with_capacity(s);
        for a in 0..s {
            let members = self.members(a, q);
            let mut sum = 0.0;
            for &b in &members {
                sum += lrd_ratio(lrd[b], lrd[a]);
            }
            lof.push(sum / members.len() as f64);
        }
        lof
    }
}

/// Density ratio with the convention ∞/∞ = 1; other divisions follow
/// IEEE semantics (finite/∞ = 0, ∞/finite = ∞).
#[inline]
fn lrd_ratio(numerator: f64, denominator: f64) -> f64 {
    if numerator.is_infinite() && denominator.is_infinite() {
        1.0
    } else {
        numerator / denominator
    }
}

/// Local reachability density of `center` within `scope` at size `q`:
/// |N| divided by the sum of reachability distances to the neighborhood,
/// where reach(a→b) = max(q-distance of b, d(a,b)). A zero sum (only
/// possible inside a clump of duplicates) gives +∞.
pub fn lrd(dm: &DistanceMatrix, center: usize, q: usize, scope: &[usize]) -> Result<f64> {
    let nb = neighborhood(dm, center, q, Some(scope))?;
    let mut reach_sum = 0.0;
    for &b in &nb.members {
        let qd_b = neighborhood(dm, b, q, Some(scope))?.q_distance;
        reach_sum += dm.get(center, b).max(qd_b);
    }
    Ok(if reach_sum == 0.0 {
        f64::INFINITY
    } else {
        nb.members.len() as f64 / reach_sum
    })
}

/// LOF of every scope point at a single neighborhood size `q`, in scope
/// order: the mean over the q-neighborhood of neighbor density divided
/// by own density.
pub fn lof_scores(dm: &DistanceMatrix, scope: &[usize], q: usize) -> Result<Vec<f64>> {
    let scoped = ScopedNeighbors::build(dm, scope, q)?;
    Ok(scoped.lof_column(q))
}

/// Full profile over `q = 1..=q_max` with the per-point mean as the
/// representative score.
pub fn lof_profile(dm: &DistanceMatrix, scope: &[usize], q_max: usize) -> Result<LofProfile> {
    let scoped = ScopedNeighbors::build(dm, scope, q_max)?;
    let s = scope.len();
    let mut scores = vec![0.0; s * q_max];
    for q in 1..=q_max {
        for (a, &value) in scoped.lof_column(q).iter().enumerate() {
            scores[a * q_max + (q - 1)] = value;
        }
    }
    let representative = scores
        .chunks_exact(q_max)
        .map(|row| row.iter().sum::<f64>() / q_max as f64)
        .collect();
    Ok(LofProfile {
        point_ids: scope.to_vec(),
        q_max,
        scores,
        representative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::DataMatrix;
    use crate::neighbors::pairwise_distances;

    fn line(points: &[f64]) -> DistanceMatrix {
        let rows = points.iter().map(|&x| vec![x]).collect();
        pairwise_distances(&DataMatrix::from_rows(rows).unwrap())
    }

    fn scope(n: usize) -> Vec<usize> {
        (0..n).collect()
    }

    #[test]
    fn lrd_on_evenly_spaced_line() {
        // points 0, 1, 2 with q = 2: the center reaches both ends at
        // reach 2 each (their 2-distances are 2), the ends sum 1 + 2.
        let dm = line(&[0.0, 1.0, 2.0]);
        let s = scope(3);
        assert_eq!(lrd(&dm, 1, 2, &s).unwrap(), 2.0 / 4.0);
        assert_eq!(lrd(&dm, 0, 2, &s).unwrap(), 2.0 / 3.0);
        assert_eq!(lrd(&dm, 2, 2, &s).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn lrd_of_duplicates_is_infinite() {
        let dm = line(&[5.0, 5.0, 5.0, 5.0]);
        let s = scope(4);
        for i in 0..4 {
            assert_eq!(lrd(&dm, i, 2, &s).unwrap(), f64::INFINITY);
        }
    }

    #[test]
    fn lof_identical_points_score_one() {
        let dm = line(&[5.0, 5.0, 5.0, 5.0]);
        let scores = lof_scores(&dm, &scope(4), 2).unwrap();
        assert_eq!(scores, vec![1.0; 4]);
    }

    #[test]
    fn lof_exact_values_with_one_outlier() {
        // 0, 1, 2, 10 at q = 2. lrds: 2/3, 1/2, 2/3, 2/17.
        let dm = line(&[0.0, 1.0, 2.0, 10.0]);
        let scores = lof_scores(&dm, &scope(4), 2).unwrap();
        let expected = [7.0 / 8.0, 4.0 / 3.0, 7.0 / 8.0, 119.0 / 24.0];
        for (got, want) in scores.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn lof_infinite_only_next_to_duplicate_clump() {
        // The isolated point's neighbors form a duplicate clump with
        // infinite density, so its own score is +∞ while the clump
        // members score 1.
        let dm = line(&[0.0, 0.0, 0.0, 1.0]);
        let scores = lof_scores(&dm, &scope(4), 2).unwrap();
        assert_eq!(scores[0], 1.0);
        assert_eq!(scores[1], 1.0);
        assert_eq!(scores[2], 1.0);
        assert_eq!(scores[3], f64::INFINITY);
    }

    #[test]
    fn two_point_scope_scores_one() {
        let dm = line(&[3.0, 8.0]);
        let profile = lof_profile(&dm, &[0, 1], 1).unwrap();
        assert_eq!(profile.all_scores(), &[1.0, 1.0]);
        assert_eq!(profile.representative(), &[1.0, 1.0]);
    }

    #[test]
    fn profile_layout_and_representative() {
        let dm = line(&[0.0, 1.0, 2.0, 10.0]);
        let profile = lof_profile(&dm, &scope(4), 3).unwrap();
        assert_eq!(profile.point_ids(), &[0, 1, 2, 3]);
        assert_eq!(profile.q_max(), 3);
        assert_eq!(profile.scores_for_q(2)[3], 119.0 / 24.0);
        for pos in 0..4 {
            let mean = (1..=3).map(|q| profile.score(pos, q)).sum::<f64>() / 3.0;
            assert_eq!(profile.representative_of(pos), mean);
        }
        // matches the single-q entry point column by column
        for q in 1..=3 {
            assert_eq!(profile.scores_for_q(q), lof_scores(&dm, &scope(4), q).unwrap());
        }
    }

    #[test]
    fn profile_respects_scope_subset() {
        // restricting to {0, 1, 3} must ignore point 2 entirely
        let dm = line(&[0.0, 1.0, 2.0, 10.0]);
        let sub = [0usize, 1, 3];
        let profile = lof_profile(&dm, &sub, 2).unwrap();
        let dm_sub = line(&[0.0, 1.0, 10.0]);
        let direct = lof_profile(&dm_sub, &[0, 1, 2], 2).unwrap();
        assert_eq!(profile.all_scores(), direct.all_scores());
    }

    #[test]
    fn from_scores_builds_representatives() {
        let profile = LofProfile::from_scores(vec![7, 9], 2, vec![1.0, 3.0, 2.0, 2.0]).unwrap();
        assert_eq!(profile.representative(), &[2.0, 2.0]);
        assert_eq!(profile.score(0, 2), 3.0);
        assert!(LofProfile::from_scores(vec![7], 0, vec![]).is_err());
        assert!(LofProfile::from_scores(vec![7], 2, vec![1.0]).is_err());
    }

    #[test]
    fn invalid_arguments_rejected() {
        let dm = line(&[0.0, 1.0, 2.0]);
        assert!(lof_profile(&dm, &[0], 1).is_err());
        assert!(lof_profile(&dm, &[0, 1], 2).is_err());
        assert!(lof_scores(&dm, &[0, 0, 1], 1).is_err());
        assert!(lrd(&dm, 0, 3, &[0, 1, 2]).is_err());
    }
}
