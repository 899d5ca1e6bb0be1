//! Majority-vote k-nearest-neighbour classifier.

use serde::{Deserialize, Serialize};

use crate::data::{FeatureMatrix, RowMatrix};
use crate::error::{Error, Result};
use crate::sampling::knn::knn;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub train: FeatureMatrix,
}

impl KnnModel {
    pub fn fit(train: &FeatureMatrix, k: usize) -> Result<Self> {
        if k == 0 || k > train.n_rows() {
            return Err(Error::Config(format!("k = {k} must be in 1..={}", train.n_rows())));
        }
        Ok(Self {
            k,
            train: train.clone(),
        })
    }

    /// Vote fractions over the full class set.
    pub fn predict_proba(&self, x: &RowMatrix) -> Result<RowMatrix> {
        if x.n_cols() != self.train.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: self.train.n_cols(),
                actual: x.n_cols(),
            });
        }
        let c = self.train.classes().len();
        let mut out = RowMatrix::new(c);
        for q in x.rows() {
            let mut votes = vec![0.0; c];
            for j in knn(q, self.train.data(), self.k, None)? {
                votes[self.train.labels()[j]] += 1.0 / self.k as f64;
            }
            out.push_row(&votes)?;
        }
        Ok(out)
    }
}

/// Majority vote among the `k` nearest training rows; ties go to the lower
/// class id.
pub fn knn_classify(train: &FeatureMatrix, test: &RowMatrix, k: usize) -> Result<Vec<usize>> {
    let p = KnnModel::fit(train, k)?.predict_proba(test)?;
    Ok(p.rows().map(super::argmax).collect())
}
