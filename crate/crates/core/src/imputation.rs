//! Gaussian estimation over complete minority rows and conditional-mean
//! imputation of masked attributes.
//!
//! Because every minority training row is complete, the EM iteration for a
//! multivariate normal converges in one step to the sample mean and
//! covariance; `fit_gaussian` computes that fixed point directly.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::data::RowMatrix;
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Mean, sample covariance and the ridge added to its diagonal for solves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianModel {
    pub mean: Vec<f64>,
    /// Row-major `d × d` sample covariance, without the ridge.
    pub covariance: Vec<f64>,
    pub ridge: f64,
}

impl GaussianModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.covariance[i * self.dim() + j]
    }

    fn regularized(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |a, b| {
            self.cov(idx[a], idx[b]) + if a == b { self.ridge } else { 0.0 }
        })
    }
}

/// Sample mean and 1/(m−1) covariance; ridge `1e-6 · trace / d` unless given.
pub fn fit_gaussian(rows: &RowMatrix, ridge: Option<f64>) -> Result<GaussianModel> {
    let (m, d) = (rows.n_rows(), rows.n_cols());
    if m < 2 {
        return Err(Error::InvalidInput(format!("Gaussian fit needs >= 2 rows, got {m}")));
    }
    if d == 0 {
        return Err(Error::InvalidInput("Gaussian fit needs >= 1 column".into()));
    }
    let mut mean = vec![0.0; d];
    for r in rows.rows() {
        for (acc, v) in mean.iter_mut().zip(r) {
            *acc += v;
        }
    }
    mean.iter_mut().for_each(|v| *v /= m as f64);
    let mut cov = vec![0.0; d * d];
    let mut c = vec![0.0; d];
    for r in rows.rows() {
        for j in 0..d {
            c[j] = r[j] - mean[j];
        }
        for i in 0..d {
            let ci = c[i];
            for j in i..d {
                cov[i * d + j] += ci * c[j];
            }
        }
    }
    let denom = (m - 1) as f64;
    for i in 0..d {
        for j in i..d {
            let v = cov[i * d + j] / denom;
            cov[i * d + j] = v;
            cov[j * d + i] = v;
        }
    }
    let ridge = match ridge {
        Some(r) => r,
        None => {
            let trace: f64 = (0..d).map(|i| cov[i * d + i]).sum();
            if trace > 0.0 {
                1e-6 * trace / d as f64
            } else {
                // All rows identical: any positive ridge makes the matrix PD.
                1e-6
            }
        }
    };
    Ok(GaussianModel {
        mean,
        covariance: cov,
        ridge,
    })
}

fn split_indices(d: usize, missing: &[usize]) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut is_missing = vec![false; d];
    for &j in missing {
        if j >= d {
            return Err(Error::InvalidInput(format!("missing index {j} out of range {d}")));
        }
        is_missing[j] = true;
    }
    let m: Vec<usize> = (0..d).filter(|&j| is_missing[j]).collect();
    let o: Vec<usize> = (0..d).filter(|&j| !is_missing[j]).collect();
    if m.is_empty() {
        return Err(Error::InvalidInput("no missing attributes to impute".into()));
    }
    if o.is_empty() {
        return Err(Error::InvalidInput("cannot impute when every attribute is missing".into()));
    }
    Ok((m, o))
}

fn solve_spd(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<DMatrix<f64>> {
    match a.clone().cholesky() {
        Some(ch) => Ok(ch.solve(&b)),
        None => a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Numerical("singular observed-block covariance".into())),
    }
}

/// Regression of the missing block on the observed block:
/// returns `(missing, observed, B)` with `B = Σ_MO (Σ_OO + ridge·I)^-1`.
fn regression(model: &GaussianModel, missing: &[usize]) -> Result<(Vec<usize>, Vec<usize>, DMatrix<f64>)> {
    let (m, o) = split_indices(model.dim(), missing)?;
    let soo = model.regularized(&o);
    let som = DMatrix::from_fn(o.len(), m.len(), |a, b| model.cov(o[a], m[b]));
    // (Σ_OO)^-1 Σ_OM, transposed.
    let coef = solve_spd(soo, som)?.transpose();
    Ok((m, o, coef))
}

fn check_len(model: &GaussianModel, x: &[f64]) -> Result<()> {
    if x.len() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            actual: x.len(),
        });
    }
    Ok(())
}

/// `x_M ← μ_M + Σ_MO (Σ_OO + ridge·I)^-1 (x_O − μ_O)`; observed entries unchanged.
/// Values of `x` at missing positions are ignored.
pub fn impute_conditional(model: &GaussianModel, x: &[f64], missing: &[usize]) -> Result<Vec<f64>> {
    check_len(model, x)?;
    let (m, o, coef) = regression(model, missing)?;
    let dev = DVector::from_iterator(o.len(), o.iter().map(|&j| x[j] - model.mean[j]));
    let shift = coef * dev;
    let mut out = x.to_vec();
    for (k, &j) in m.iter().enumerate() {
        out[j] = model.mean[j] + shift[k];
    }
    Ok(out)
}

/// Conditional mean plus a draw from the conditional covariance
/// `Σ_MM − Σ_MO (Σ_OO + ridge·I)^-1 Σ_OM` (clamped to PSD).
pub fn impute_stochastic(model: &GaussianModel, x: &[f64], missing: &[usize], rng: &mut RandomSource) -> Result<Vec<f64>> {
    check_len(model, x)?;
    let (m, o, coef) = regression(model, missing)?;
    let smm = DMatrix::from_fn(m.len(), m.len(), |a, b| model.cov(m[a], m[b]));
    let som = DMatrix::from_fn(o.len(), m.len(), |a, b| model.cov(o[a], m[b]));
    let mut cond = smm - &coef * som;
    cond = (&cond + cond.transpose()) * 0.5;
    let eig = SymmetricEigen::new(cond);
    let z = DVector::from_iterator(m.len(), (0..m.len()).map(|_| rng.normal()));
    let scaled = DVector::from_iterator(
        m.len(),
        eig.eigenvalues.iter().zip(z.iter()).map(|(l, zi)| l.max(0.0).sqrt() * zi),
    );
    let noise = &eig.eigenvectors * scaled;
    let dev = DVector::from_iterator(o.len(), o.iter().map(|&j| x[j] - model.mean[j]));
    let shift = coef * dev;
    let mut out = x.to_vec();
    for (k, &j) in m.iter().enumerate() {
        out[j] = model.mean[j] + shift[k] + noise[k];
    }
    Ok(out)
}

/// Precomputed single-attribute conditional means.
///
/// With `P = (Σ + ridge·I)^-1`, the regression coefficients of attribute `j`
/// on all others are `−P_jk / P_jj`, identical to solving the observed block,
/// so one inversion serves every mask of size one.
#[derive(Debug, Clone)]
pub struct SingleMaskImputer {
    mean: Vec<f64>,
    /// Row `j` holds the coefficients for imputing attribute `j` (entry `j` is 0).
    coef: Vec<f64>,
}

impl SingleMaskImputer {
    pub fn new(model: &GaussianModel) -> Result<Self> {
        let d = model.dim();
        if d < 2 {
            return Err(Error::InvalidInput("single-attribute imputation needs d >= 2".into()));
        }
        let all: Vec<usize> = (0..d).collect();
        let reg = model.regularized(&all);
        let precision = match reg.clone().cholesky() {
            Some(ch) => ch.inverse(),
            None => reg
                .try_inverse()
                .ok_or_else(|| Error::Numerical("singular covariance".into()))?,
        };
        let mut coef = vec![0.0; d * d];
        for j in 0..d {
            let pjj = precision[(j, j)];
            for k in 0..d {
                if k != j {
                    coef[j * d + k] = -precision[(j, k)] / pjj;
                }
            }
        }
        Ok(Self {
            mean: model.mean.clone(),
            coef,
        })
    }

    pub fn impute(&self, x: &[f64], attribute: usize) -> Vec<f64> {
        let d = self.mean.len();
        let row = &self.coef[attribute * d..(attribute + 1) * d];
        let shift: f64 = row
            .iter()
            .zip(x)
            .zip(&self.mean)
            .enumerate()
            .filter(|(k, _)| *k != attribute)
            .map(|(_, ((c, v), m))| c * (v - m))
            .sum();
        let mut out = x.to_vec();
        out[attribute] = self.mean[attribute] + shift;
        out
    }
}
