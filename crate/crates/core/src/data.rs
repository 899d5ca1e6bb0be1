//! Shared domain types passed between pipeline stages.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered set of class names; a class id is an index into it.
///
/// Names are kept sorted so that ids are stable regardless of the order in
/// which labels were first seen.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassSet {
    names: Vec<String>,
}

impl ClassSet {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let set: BTreeSet<String> = names.into_iter().map(Into::into).collect();
        Self {
            names: set.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn union(&self, other: &ClassSet) -> ClassSet {
        ClassSet::new(self.names.iter().chain(other.names.iter()).cloned())
    }

    /// Encode string labels, failing on names outside the set.
    pub fn encode<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.id(l.as_ref())
                    .ok_or_else(|| Error::InvalidInput(format!("unknown class `{}`", l.as_ref())))
            })
            .collect()
    }

    /// Translate ids of `self` into ids of `target`.
    pub fn remap(&self, ids: &[usize], target: &ClassSet) -> Result<Vec<usize>> {
        ids.iter()
            .map(|&i| {
                target.id(self.name(i)).ok_or_else(|| {
                    Error::InvalidInput(format!("class `{}` missing from target set", self.name(i)))
                })
            })
            .collect()
    }
}

/// Dense row-major matrix of reals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RowMatrix {
    data: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl RowMatrix {
    pub fn new(n_cols: usize) -> Self {
        Self {
            data: Vec::new(),
            n_rows: 0,
            n_cols,
        }
    }

    pub fn from_vec(data: Vec<f64>, n_rows: usize, n_cols: usize) -> Result<Self> {
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                actual: data.len(),
            });
        }
        Ok(Self {
            data,
            n_rows,
            n_cols,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = RowMatrix::new(n_cols);
        for r in rows {
            m.push_row(r.as_ref())?;
        }
        Ok(m)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                actual: row.len(),
            });
        }
        self.data.extend_from_slice(row);
        self.n_rows += 1;
        Ok(())
    }

    pub fn extend(&mut self, other: &RowMatrix) -> Result<()> {
        if other.n_cols != self.n_cols {
            return Err(Error::DimensionMismatch {
                expected: self.n_cols,
                actual: other.n_cols,
            });
        }
        self.data.extend_from_slice(&other.data);
        self.n_rows += other.n_rows;
        Ok(())
    }

    pub fn select_rows(&self, idx: &[usize]) -> RowMatrix {
        let mut data = Vec::with_capacity(idx.len() * self.n_cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        RowMatrix {
            data,
            n_rows: idx.len(),
            n_cols: self.n_cols,
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Instances × features with an aligned label vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    data: RowMatrix,
    labels: Vec<usize>,
    classes: ClassSet,
    feature_names: Vec<String>,
}

impl FeatureMatrix {
    pub fn new(
        data: RowMatrix,
        labels: Vec<usize>,
        classes: ClassSet,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if labels.len() != data.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: data.n_rows(),
                actual: labels.len(),
            });
        }
        if feature_names.len() != data.n_cols() {
            return Err(Error::DimensionMismatch {
                expected: data.n_cols(),
                actual: feature_names.len(),
            });
        }
        if !data.all_finite() {
            return Err(Error::InvalidInput("feature matrix contains non-finite values".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::InvalidInput(format!("label id {bad} outside class set")));
        }
        Ok(Self {
            data,
            labels,
            classes,
            feature_names,
        })
    }

    /// Convenience constructor with generated names `f0, f1, …`.
    pub fn with_default_names(data: RowMatrix, labels: Vec<usize>, classes: ClassSet) -> Result<Self> {
        let names = (0..data.n_cols()).map(|j| format!("f{j}")).collect();
        Self::new(data, labels, classes, names)
    }

    pub fn data(&self) -> &RowMatrix {
        &self.data
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> &ClassSet {
        &self.classes
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_rows(&self) -> usize {
        self.data.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.data.n_cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.data.row(i)
    }

    pub fn select_rows(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            data: self.data.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Row indices carrying class `class`.
    pub fn rows_of_class(&self, class: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| self.labels[i] == class).collect()
    }

    /// Same labels and classes, new feature values.
    pub fn with_data(&self, data: RowMatrix, feature_names: Vec<String>) -> Result<FeatureMatrix> {
        FeatureMatrix::new(data, self.labels.clone(), self.classes.clone(), feature_names)
    }

    /// Re-express the labels against a (super)set of classes.
    pub fn with_classes(&self, classes: &ClassSet) -> Result<FeatureMatrix> {
        let labels = self.classes.remap(&self.labels, classes)?;
        Ok(FeatureMatrix {
            data: self.data.clone(),
            labels,
            classes: classes.clone(),
            feature_names: self.feature_names.clone(),
        })
    }

    pub fn into_parts(self) -> (RowMatrix, Vec<usize>, ClassSet, Vec<String>) {
        (self.data, self.labels, self.classes, self.feature_names)
    }
}

/// Multichannel time series with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesFrame {
    timestamps: Vec<f64>,
    channel_names: Vec<String>,
    channels: Vec<Vec<f64>>,
}

impl TimeSeriesFrame {
    pub fn new(timestamps: Vec<f64>, channel_names: Vec<String>, channels: Vec<Vec<f64>>) -> Result<Self> {
        if channel_names.len() != channels.len() {
            return Err(Error::DimensionMismatch {
                expected: channel_names.len(),
                actual: channels.len(),
            });
        }
        for (name, ch) in channel_names.iter().zip(&channels) {
            if ch.len() != timestamps.len() {
                return Err(Error::InvalidInput(format!(
                    "channel `{name}` has {} samples, expected {}",
                    ch.len(),
                    timestamps.len()
                )));
            }
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[1] <= w[0]) {
            if w[1] == w[0] {
                return Err(Error::DuplicateTimestamp(w[0]));
            }
            return Err(Error::InvalidInput(format!(
                "timestamps not increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        Ok(Self {
            timestamps,
            channel_names,
            channels,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        &self.channels[c]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    /// Rows with `lo <= t < hi`.
    pub fn slice_time(&self, lo: f64, hi: f64) -> TimeSeriesFrame {
        let start = self.timestamps.partition_point(|&t| t < lo);
        let end = self.timestamps.partition_point(|&t| t < hi);
        TimeSeriesFrame {
            timestamps: self.timestamps[start..end].to_vec(),
            channel_names: self.channel_names.clone(),
            channels: self.channels.iter().map(|c| c[start..end].to_vec()).collect(),
        }
    }
}

/// Closed interval `[t_start, t_end]` carrying a class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultInterval {
    pub t_start: f64,
    pub t_end: f64,
    pub label: String,
}

impl FaultInterval {
    pub fn new(t_start: f64, t_end: f64, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if !(t_start.is_finite() && t_end.is_finite()) || t_start > t_end {
            return Err(Error::InvalidInterval(format!("({t_start}, {t_end}, {label})")));
        }
        Ok(Self { t_start, t_end, label })
    }

    pub fn contains(&self, t: f64) -> bool {
        self.t_start <= t && t <= self.t_end
    }

    pub fn overlaps(&self, other: &FaultInterval) -> bool {
        self.t_start <= other.t_end && other.t_start <= self.t_end
    }
}

/// Predicted fault events share the interval representation.
pub type FaultEvent = FaultInterval;

/// One sliding-window slice: `values[channel][offset]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowInstance {
    pub start_index: usize,
    pub values: Vec<Vec<f64>>,
    pub label: usize,
}

impl WindowInstance {
    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_channels(&self) -> usize {
        self.values.len()
    }
}

/// Per-class counts and imbalance ratios.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassDistribution {
    /// Indexed by class id.
    pub counts: Vec<usize>,
    pub majority: usize,
    /// `majority_count / count`; infinite for absent classes.
    pub ratios: Vec<f64>,
}

impl ClassDistribution {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn majority_count(&self) -> usize {
        self.counts[self.majority]
    }
}

/// Count labels over `n_classes` ids. Ties for the majority go to the lower id.
pub fn class_distribution(labels: &[usize], n_classes: usize) -> Result<ClassDistribution> {
    if labels.is_empty() {
        return Err(Error::InvalidInput("empty label vector".into()));
    }
    let mut counts = vec![0usize; n_classes];
    for &l in labels {
        if l >= n_classes {
            return Err(Error::InvalidInput(format!("label id {l} outside {n_classes} classes")));
        }
        counts[l] += 1;
    }
    let mut majority = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[majority] {
            majority = c;
        }
    }
    let top = counts[majority] as f64;
    let ratios = counts
        .iter()
        .map(|&n| if n == 0 { f64::INFINITY } else { top / n as f64 })
        .collect();
    Ok(ClassDistribution {
        counts,
        majority,
        ratios,
    })
}

/// Class distribution of string labels, returning the interned class set too.
pub fn class_distribution_of_names<S: AsRef<str>>(labels: &[S]) -> Result<(ClassSet, ClassDistribution)> {
    let classes = ClassSet::new(labels.iter().map(|l| l.as_ref().to_string()));
    let ids = classes.encode(labels)?;
    let dist = class_distribution(&ids, classes.len())?;
    Ok((classes, dist))
}

/// Oversampler hyperparameters. `k3 = None` means `ceil(|S_min| / 2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    pub k: usize,
    pub k1: usize,
    pub k2: usize,
    pub k3: Option<usize>,
    pub cp: f64,
    pub cf_th: f64,
    pub cmax: f64,
    /// Target synthetic count; `None` means "raise to the majority count".
    pub n_synthetic: Option<usize>,
    pub seed: u64,
    /// Draw from the conditional distribution instead of using its mean.
    pub stochastic_imputation: bool,
    /// Override for the covariance ridge; `None` uses `1e-6 · trace / d`.
    pub emi_ridge: Option<f64>,
}

impl Default for SamplerParams {
    fn default() -> Self {
        Self {
            k: 5,
            k1: 5,
            k2: 3,
            k3: None,
            cp: 3.0,
            cf_th: 5.0,
            cmax: 2.0,
            n_synthetic: None,
            seed: 0,
            stochastic_imputation: false,
            emi_ridge: None,
        }
    }
}

impl SamplerParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k1 == 0 || self.k2 == 0 || self.k3 == Some(0) {
            return Err(Error::Config("neighbor counts must be >= 1".into()));
        }
        for (name, v) in [("cp", self.cp), ("cf_th", self.cf_th), ("cmax", self.cmax)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be > 0, got {v}")));
            }
        }
        if let Some(r) = self.emi_ridge {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(Error::Config(format!("emi ridge must be >= 0, got {r}")));
            }
        }
        Ok(())
    }

    /// `k3` for a minority set of `n_min` rows.
    pub fn k3_for(&self, n_min: usize) -> usize {
        self.k3.unwrap_or_else(|| n_min.div_ceil(2)).max(1)
    }
}
