//! Random oversampling and SMOTE interpolation.

use crate::data::RowMatrix;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::sampling::knn::knn;

/// `n` rows drawn with replacement from `minority`.
pub fn random_oversample(minority: &RowMatrix, n: usize, rng: &mut RandomSource) -> Result<RowMatrix> {
    if minority.is_empty() {
        return Err(Error::InvalidInput("cannot oversample an empty minority set".into()));
    }
    let mut out = RowMatrix::new(minority.n_cols());
    for _ in 0..n {
        out.push_row(minority.row(rng.below(minority.n_rows())))?;
    }
    Ok(out)
}

/// `x + α (z − x)` with `α ~ U[0, 1)`.
pub(crate) fn interpolate(x: &[f64], z: &[f64], rng: &mut RandomSource) -> Vec<f64> {
    let alpha = rng.uniform();
    x.iter().zip(z).map(|(a, b)| a + alpha * (b - a)).collect()
}

/// Each synthetic row interpolates a uniformly chosen minority row towards one
/// of its `k` nearest minority neighbours.
pub fn smote(minority: &RowMatrix, n: usize, k: usize, rng: &mut RandomSource) -> Result<RowMatrix> {
    let m = minority.n_rows();
    if m < 2 {
        log::warn!("SMOTE needs >= 2 minority rows, got {m}; falling back to random oversampling");
        return random_oversample(minority, n, rng);
    }
    if k == 0 {
        return Err(Error::Config("SMOTE k must be >= 1".into()));
    }
    let k = if k > m - 1 {
        log::warn!("SMOTE k = {k} clipped to {}", m - 1);
        m - 1
    } else {
        k
    };
    let mut neighbours: Vec<Option<Vec<usize>>> = vec![None; m];
    let mut out = RowMatrix::new(minority.n_cols());
    for _ in 0..n {
        let i = rng.below(m);
        let nn = match &neighbours[i] {
            Some(nn) => nn,
            None => neighbours[i].insert(knn(minority.row(i), minority, k, Some(i))?),
        };
        let z = nn[rng.below(nn.len())];
        out.push_row(&interpolate(minority.row(i), minority.row(z), rng))?;
    }
    Ok(out)
}
