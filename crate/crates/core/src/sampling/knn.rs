//! Exact brute-force nearest-neighbour search.

use std::cmp::Ordering;

use crate::data::RowMatrix;
use crate::error::{Error, Result};

#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(a, b).sqrt()
}

fn by_dist_then_index(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Indices of the `k` rows of `pool` closest to `query`, nearest first.
/// `exclude` removes one pool row (the query itself when searching within
/// its own set). Ties go to the lower index.
pub fn knn(query: &[f64], pool: &RowMatrix, k: usize, exclude: Option<usize>) -> Result<Vec<usize>> {
    knn_among(query, pool, (0..pool.n_rows()).filter(|&i| Some(i) != exclude), k)
}

/// Like [`knn`] but restricted to the candidate rows yielded by `candidates`.
pub fn knn_among(query: &[f64], pool: &RowMatrix, candidates: impl Iterator<Item = usize>, k: usize) -> Result<Vec<usize>> {
    let mut scored: Vec<(f64, usize)> = candidates.map(|i| (sq_dist(query, pool.row(i)), i)).collect();
    if k > scored.len() {
        return Err(Error::InvalidInput(format!(
            "k = {k} exceeds the {} available neighbours",
            scored.len()
        )));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, by_dist_then_index);
        scored.truncate(k);
    }
    scored.sort_by(by_dist_then_index);
    Ok(scored.into_iter().map(|(_, i)| i).collect())
}
