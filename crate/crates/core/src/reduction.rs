//! Column standardization and linear dimensionality reduction (PCA, LDA).
//!
//! Every model here is fitted on training rows only and then applied to any
//! matrix with the same column count.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::data::{FeatureMatrix, RowMatrix};
use crate::error::{Error, Result};

fn column_means(x: &RowMatrix) -> Vec<f64> {
    let mut means = vec![0.0; x.n_cols()];
    for r in x.rows() {
        for (m, v) in means.iter_mut().zip(r) {
            *m += v;
        }
    }
    let n = x.n_rows().max(1) as f64;
    means.iter_mut().for_each(|m| *m /= n);
    means
}

fn check_cols(expected: usize, x: &RowMatrix) -> Result<()> {
    if x.n_cols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: x.n_cols(),
        });
    }
    Ok(())
}

/// Per-column z-score. Zero-variance columns keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &RowMatrix) -> Result<Self> {
        if x.n_rows() == 0 {
            return Err(Error::InvalidInput("cannot standardize an empty matrix".into()));
        }
        let means = column_means(x);
        let mut var = vec![0.0; x.n_cols()];
        for r in x.rows() {
            for ((s, v), m) in var.iter_mut().zip(r).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let denom = (x.n_rows().max(2) - 1) as f64;
        let scales = var
            .iter()
            .map(|s| {
                let sd = (s / denom).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { means, scales })
    }

    pub fn transform(&self, x: &RowMatrix) -> Result<RowMatrix> {
        check_cols(self.means.len(), x)?;
        let mut out = x.clone();
        for i in 0..out.n_rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.means).zip(&self.scales) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }

    pub fn inverse_transform(&self, x: &RowMatrix) -> Result<RowMatrix> {
        check_cols(self.means.len(), x)?;
        let mut out = x.clone();
        for i in 0..out.n_rows() {
            for ((v, m), s) in out.row_mut(i).iter_mut().zip(&self.means).zip(&self.scales) {
                *v = *v * s + m;
            }
        }
        Ok(out)
    }
}

/// Sorted eigen-pairs of a symmetric matrix, largest first, with the sign of
/// each vector fixed so its largest-magnitude entry is positive.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        fix_sign(&mut v);
        vectors.set_column(col, &v);
    }
    (values, vectors)
}

fn fix_sign(v: &mut DVector<f64>) {
    let mut pivot = 0;
    for i in 0..v.len() {
        if v[i].abs() > v[pivot].abs() {
            pivot = i;
        }
    }
    if !v.is_empty() && v[pivot] < 0.0 {
        *v *= -1.0;
    }
}

fn project(x: &RowMatrix, means: &[f64], projection: &DMatrix<f64>) -> Result<RowMatrix> {
    check_cols(means.len(), x)?;
    let r = projection.ncols();
    let mut out = RowMatrix::new(r);
    let mut centered = vec![0.0; means.len()];
    let mut row = vec![0.0; r];
    for src in x.rows() {
        for ((c, v), m) in centered.iter_mut().zip(src).zip(means) {
            *c = v - m;
        }
        for (k, out_v) in row.iter_mut().enumerate() {
            *out_v = projection
                .column(k)
                .iter()
                .zip(&centered)
                .map(|(p, c)| p * c)
                .sum();
        }
        out.push_row(&row)?;
    }
    Ok(out)
}

fn to_vec_matrix(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn from_vec_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(n, c, |i, j| rows[i][j])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PcaTarget {
    Dims(usize),
    /// Smallest r whose cumulative explained ratio reaches this fraction.
    Variance(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub means: Vec<f64>,
    /// d × r, stored row-major by input dimension.
    projection: Vec<Vec<f64>>,
    pub explained_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.explained_ratio.len()
    }

    pub fn projection(&self) -> DMatrix<f64> {
        from_vec_matrix(&self.projection)
    }

    pub fn transform(&self, x: &RowMatrix) -> Result<RowMatrix> {
        project(x, &self.means, &self.projection())
    }

    /// Map reduced coordinates back into the input space.
    pub fn reconstruct(&self, z: &RowMatrix) -> Result<RowMatrix> {
        let p = self.projection();
        check_cols(p.ncols(), z)?;
        let mut out = RowMatrix::new(self.means.len());
        let mut row = vec![0.0; self.means.len()];
        for zr in z.rows() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.means[j] + p.row(j).iter().zip(zr).map(|(a, b)| a * b).sum::<f64>();
            }
            out.push_row(&row)?;
        }
        Ok(out)
    }
}

/// Eigendecomposition of the 1/(m−1) sample covariance.
pub fn pca_fit(x: &RowMatrix, target: PcaTarget) -> Result<PcaModel> {
    let (m, d) = (x.n_rows(), x.n_cols());
    if m < 2 || d == 0 {
        return Err(Error::InvalidInput(format!("PCA needs >= 2 rows and >= 1 column, got {m}×{d}")));
    }
    let means = column_means(x);
    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut c = DVector::<f64>::zeros(d);
    for r in x.rows() {
        for j in 0..d {
            c[j] = r[j] - means[j];
        }
        cov.ger(1.0, &c, &c, 1.0);
    }
    cov /= (m - 1) as f64;
    let (values, vectors) = sorted_eigen(cov);
    let values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
    let total: f64 = values.iter().sum();
    let top = values.first().copied().unwrap_or(0.0);
    let rank = values.iter().filter(|&&v| v > top * 1e-12 * d as f64 && v > 0.0).count();
    let ratios: Vec<f64> = values
        .iter()
        .map(|v| if total > 0.0 { v / total } else { 0.0 })
        .collect();
    let wanted = match target {
        PcaTarget::Dims(r) => r,
        PcaTarget::Variance(frac) => {
            if !(frac > 0.0 && frac <= 1.0) {
                return Err(Error::Config(format!("variance target {frac} outside (0, 1]")));
            }
            let mut acc = 0.0;
            let mut r = d;
            for (i, ratio) in ratios.iter().enumerate() {
                acc += ratio;
                if acc >= frac - 1e-12 {
                    r = i + 1;
                    break;
                }
            }
            r
        }
    };
    if wanted == 0 {
        return Err(Error::Config("PCA needs at least one component".into()));
    }
    let r = if wanted > rank.max(1) {
        log::warn!("requested {wanted} PCA components but data rank is {rank}; clipping");
        rank.max(1)
    } else {
        wanted
    };
    let projection = vectors.columns(0, r).into_owned();
    Ok(PcaModel {
        means,
        projection: to_vec_matrix(&projection),
        explained_ratio: ratios[..r].to_vec(),
    })
}

pub fn pca_transform(model: &PcaModel, x: &RowMatrix) -> Result<RowMatrix> {
    model.transform(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub means: Vec<f64>,
    projection: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

impl LdaModel {
    pub fn n_components(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn projection(&self) -> DMatrix<f64> {
        from_vec_matrix(&self.projection)
    }

    pub fn transform(&self, x: &RowMatrix) -> Result<RowMatrix> {
        project(x, &self.means, &self.projection())
    }
}

/// Fisher LDA via the whitened between-class scatter. At most `C − 1`
/// directions are returned; the within-class scatter carries a
/// `1e-6 · trace / d` ridge.
pub fn lda_fit(x: &RowMatrix, labels: &[usize], r: usize) -> Result<LdaModel> {
    let (m, d) = (x.n_rows(), x.n_cols());
    if labels.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: labels.len(),
        });
    }
    let mut present: Vec<usize> = labels.to_vec();
    present.sort_unstable();
    present.dedup();
    if present.len() < 2 {
        return Err(Error::InvalidInput("LDA needs at least two classes".into()));
    }
    if d == 0 {
        return Err(Error::InvalidInput("LDA needs at least one column".into()));
    }
    let cap = present.len() - 1;
    let r = match r {
        0 => return Err(Error::Config("LDA needs at least one component".into())),
        r if r > cap => {
            // usize::MAX means "as many as the classes allow"
            if r != usize::MAX {
                log::warn!("requested {r} LDA components but {} classes allow {cap}; clipping", present.len());
            }
            cap
        }
        r => r.min(d),
    };

    let means = column_means(x);
    let mut class_means = vec![DVector::<f64>::zeros(d); present.len()];
    let mut counts = vec![0usize; present.len()];
    let slot = |l: usize| present.binary_search(&l).expect("present label");
    for (row, &l) in x.rows().zip(labels) {
        let s = slot(l);
        counts[s] += 1;
        for j in 0..d {
            class_means[s][j] += row[j];
        }
    }
    for (mu, &n) in class_means.iter_mut().zip(&counts) {
        *mu /= n as f64;
    }

    let mut sw = DMatrix::<f64>::zeros(d, d);
    let mut c = DVector::<f64>::zeros(d);
    for (row, &l) in x.rows().zip(labels) {
        let mu = &class_means[slot(l)];
        for j in 0..d {
            c[j] = row[j] - mu[j];
        }
        sw.ger(1.0, &c, &c, 1.0);
    }
    let mut sb = DMatrix::<f64>::zeros(d, d);
    let overall = DVector::from_vec(means.clone());
    for (mu, &n) in class_means.iter().zip(&counts) {
        let diff = mu - &overall;
        sb.ger(n as f64, &diff, &diff, 1.0);
    }
    let trace = sw.trace();
    let ridge = if trace > 0.0 { 1e-6 * trace / d as f64 } else { 1e-6 };
    for j in 0..d {
        sw[(j, j)] += ridge;
    }

    let chol = sw
        .cholesky()
        .ok_or_else(|| Error::Numerical("within-class scatter not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let mut whitened = &l_inv * sb * l_inv.transpose();
    whitened = (&whitened + whitened.transpose()) * 0.5;
    let (values, vectors) = sorted_eigen(whitened);
    let lt_inv = l_inv.transpose();
    let mut projection = DMatrix::<f64>::zeros(d, r);
    for k in 0..r {
        let mut w = &lt_inv * vectors.column(k);
        fix_sign(&mut w);
        projection.set_column(k, &w);
    }
    Ok(LdaModel {
        means,
        projection: to_vec_matrix(&projection),
        eigenvalues: values[..r].iter().map(|v| v.max(0.0)).collect(),
    })
}

pub fn lda_transform(model: &LdaModel, x: &RowMatrix) -> Result<RowMatrix> {
    model.transform(x)
}

/// Which reduction to apply inside the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ReductionSpec {
    #[default]
    None,
    Pca(PcaTarget),
    Lda { dims: usize },
}

impl ReductionSpec {
    /// Build from the `--reduce`, `--pca-dims`, `--pca-variance`, `--lda-dims` values.
    pub fn from_options(kind: &str, pca_dims: Option<usize>, pca_variance: Option<f64>, lda_dims: Option<usize>) -> Result<Self> {
        ReductionKind::from_str(kind).map(|k| match k {
            ReductionKind::None => ReductionSpec::None,
            ReductionKind::Pca => match (pca_dims, pca_variance) {
                (Some(r), _) => ReductionSpec::Pca(PcaTarget::Dims(r)),
                (None, Some(v)) => ReductionSpec::Pca(PcaTarget::Variance(v)),
                (None, None) => ReductionSpec::Pca(PcaTarget::Variance(0.95)),
            },
            ReductionKind::Lda => ReductionSpec::Lda {
                dims: lda_dims.unwrap_or(usize::MAX),
            },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionKind {
    None,
    Pca,
    Lda,
}

impl FromStr for ReductionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ReductionKind::None),
            "pca" => Ok(ReductionKind::Pca),
            "lda" => Ok(ReductionKind::Lda),
            other => Err(Error::Config(format!("unknown reduction `{other}`"))),
        }
    }
}

/// A fitted reduction of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Reducer {
    Identity,
    Pca(PcaModel),
    Lda(LdaModel),
}

impl Reducer {
    pub fn fit(spec: ReductionSpec, train: &FeatureMatrix) -> Result<Reducer> {
        Ok(match spec {
            ReductionSpec::None => Reducer::Identity,
            ReductionSpec::Pca(target) => Reducer::Pca(pca_fit(train.data(), target)?),
            ReductionSpec::Lda { dims } => Reducer::Lda(lda_fit(train.data(), train.labels(), dims)?),
        })
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let (data, prefix) = match self {
            Reducer::Identity => return Ok(x.clone()),
            Reducer::Pca(m) => (m.transform(x.data())?, "pc"),
            Reducer::Lda(m) => (m.transform(x.data())?, "ld"),
        };
        let names = (0..data.n_cols()).map(|k| format!("{prefix}{k}")).collect();
        x.with_data(data, names)
    }
}
