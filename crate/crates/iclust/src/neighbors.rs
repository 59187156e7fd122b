//! Pairwise Euclidean distances and tie-aware q-neighborhoods.

use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Symmetric distance matrix stored as the condensed upper triangle
/// (n·(n−1)/2 entries, row-major above the diagonal).
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    condensed: Vec<f64>,
    n: usize,
}

impl DistanceMatrix {
    /// Wraps an existing condensed triangle. Entries must be finite and
    /// nonnegative and the length must match `n`.
    pub fn from_condensed(condensed: Vec<f64>, n: usize) -> Result<Self> {
        if condensed.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::invalid(format!(
                "condensed length {} does not match n = {n}",
                condensed.len()
            )));
        }
        if let Some(bad) = condensed.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::invalid(format!("invalid distance {bad}")));
        }
        Ok(DistanceMatrix { condensed, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn condensed(&self) -> &[f64] {
        &self.condensed
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < j && j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Distance between observations `i` and `j`; zero on the diagonal.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.condensed[self.offset(i, j)]
    }
}

#[inline]
fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        sum += d * d;
    }
    sum.sqrt()
}

/// All pairwise Euclidean distances. Rows are computed in parallel but
/// each entry is a fixed-order sum, so the result is identical for any
/// thread count.
pub fn pairwise_distances(matrix: &DataMatrix) -> DistanceMatrix {
    let n = matrix.n();
    let mut condensed = vec![0.0; n * n.saturating_sub(1) / 2];

    let mut rows: Vec<(usize, &mut [f64])> = Vec::with_capacity(n.saturating_sub(1));
    let mut rest = condensed.as_mut_slice();
    for i in 0..n.saturating_sub(1) {
        let (head, tail) = rest.split_at_mut(n - 1 - i);
        rows.push((i, head));
        rest = tail;
    }

    rows.into_par_iter().for_each(|(i, row)| {
        let xi = matrix.row(i);
        for (offset, slot) in row.iter_mut().enumerate() {
            *slot = euclidean(xi, matrix.row(i + 1 + offset));
        }
    });

    DistanceMatrix { condensed, n }
}

/// The q-neighborhood of a point: its q-distance and every scope member
/// within it (ties included, so there may be more than q members).
#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub center: usize,
    pub q: usize,
    /// Distance to the q-th nearest other point within the scope.
    pub q_distance: f64,
    /// All scope members at distance ≤ `q_distance`, ascending by index.
    pub members: Vec<usize>,
}

pub(crate) fn validate_scope(dm: &DistanceMatrix, scope: &[usize]) -> Result<()> {
    let mut seen = vec![false; dm.n()];
    for &i in scope {
        if i >= dm.n() {
            return Err(Error::invalid(format!(
                "scope index {i} out of range for n = {}",
                dm.n()
            )));
        }
        if seen[i] {
            return Err(Error::invalid(format!("scope index {i} repeated")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Computes the q-neighborhood of `center` restricted to `scope`
/// (`None` meaning all observations). Requires `center` to be in scope
/// and `1 ≤ q ≤ |scope| − 1`.
pub fn neighborhood(
    dm: &DistanceMatrix,
    center: usize,
    q: usize,
    scope: Option<&[usize]>,
) -> Result<Neighborhood> {
    let all: Vec<usize>;
    let scope = match scope {
        Some(s) => {
            validate_scope(dm, s)?;
            s
        }
        None => {
            all = (0..dm.n()).collect();
            &all
        }
    };
    if !scope.contains(&center) {
        return Err(Error::invalid(format!("center {center} not in scope")));
    }
    if q == 0 || q > scope.len() - 1 {
        return Err(Error::invalid(format!(
            "q = {q} outside [1, {}]",
            scope.len() - 1
        )));
    }

    let mut dists: Vec<(f64, usize)> = scope
        .iter()
        .filter(|&&i| i != center)
        .map(|&i| (dm.get(center, i), i))
        .collect();
    dists.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let q_distance = dists[q - 1].0;
    let mut members: Vec<usize> = dists
        .iter()
        .take_while(|(d, _)| *d <= q_distance)
        .map(|&(_, i)| i)
        .collect();
    members.sort_unstable();

    Ok(Neighborhood {
        center,
        q,
        q_distance,
        members,
    })
}
