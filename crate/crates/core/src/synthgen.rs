//! Seeded synthetic datasets: Gaussian blobs, two planted geometric traps for
//! oversamplers, and labeled multichannel time series.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::{ClassSet, FaultInterval, FeatureMatrix, RowMatrix, TimeSeriesFrame};
use crate::error::{Error, Result};
use crate::ingestion::{label_timestamps, LabeledSeries, DEFAULT_NORMAL_LABEL};
use crate::rng::RandomSource;

/// One Gaussian class component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub mean: Vec<f64>,
    /// Row-major `d × d`, positive definite.
    pub covariance: Vec<f64>,
    pub count: usize,
    pub label: String,
}

impl BlobSpec {
    pub fn isotropic(mean: Vec<f64>, sd: f64, count: usize, label: impl Into<String>) -> Self {
        let d = mean.len();
        let covariance = (0..d * d).map(|k| if k / d == k % d { sd * sd } else { 0.0 }).collect();
        Self {
            mean,
            covariance,
            count,
            label: label.into(),
        }
    }
}

/// Rows in spec order. Several specs may share a label.
pub fn gaussian_blobs(specs: &[BlobSpec], seed: u64) -> Result<FeatureMatrix> {
    let d = specs
        .first()
        .ok_or_else(|| Error::InvalidInput("no blob specs".into()))?
        .mean
        .len();
    let classes = ClassSet::new(specs.iter().map(|s| s.label.clone()));
    let mut rng = RandomSource::new(seed);
    let mut data = RowMatrix::new(d);
    let mut labels = Vec::new();
    for spec in specs {
        if spec.mean.len() != d || spec.covariance.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: spec.mean.len(),
            });
        }
        let cov = DMatrix::from_row_slice(d, d, &spec.covariance);
        let chol = cov
            .cholesky()
            .ok_or_else(|| Error::InvalidInput(format!("covariance of '{}' is not positive definite", spec.label)))?;
        let l = chol.l();
        let id = classes.id(&spec.label).expect("label interned");
        for _ in 0..spec.count {
            let z: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let row: Vec<f64> = (0..d)
                .map(|i| spec.mean[i] + (0..=i).map(|j| l[(i, j)] * z[j]).sum::<f64>())
                .collect();
            data.push_row(&row)?;
            labels.push(id);
        }
    }
    FeatureMatrix::with_default_names(data, labels, classes)
}

pub const MAJORITY_LABEL: &str = "majority";
pub const MINORITY_LABEL: &str = "minority";

/// Minority cluster beside a majority mass, plus minority outliers buried in
/// the majority mass.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisyScenario {
    pub data: FeatureMatrix,
    /// Row indices (into `data`) of the planted minority outliers.
    pub outliers: Vec<usize>,
}

impl NoisyScenario {
    pub fn minority_id(&self) -> usize {
        self.data.classes().id(MINORITY_LABEL).expect("minority class")
    }
}

/// 2-D noisy-minority scenario. Every outlier is ringed by six majority points
/// at radius 0.05, so its five nearest neighbours are all majority rows.
pub fn fig2a_noisy_scenario(seed: u64) -> NoisyScenario {
    let mut rng = RandomSource::new(seed);
    let classes = ClassSet::new([MAJORITY_LABEL, MINORITY_LABEL]);
    let (maj, min) = (classes.id(MAJORITY_LABEL).unwrap(), classes.id(MINORITY_LABEL).unwrap());
    let mut data = RowMatrix::new(2);
    let mut labels = Vec::new();
    let mut push = |row: [f64; 2], label: usize, data: &mut RowMatrix| {
        data.push_row(&row).expect("two columns");
        labels.push(label);
        data.n_rows() - 1
    };
    for _ in 0..300 {
        push([1.5 * rng.normal(), 1.5 * rng.normal()], maj, &mut data);
    }
    for _ in 0..40 {
        push([6.0 + 0.5 * rng.normal(), 0.5 * rng.normal()], min, &mut data);
    }
    let mut outliers = Vec::new();
    let mut centres: Vec<[f64; 2]> = Vec::new();
    while centres.len() < 3 {
        let c = [2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0];
        if centres.iter().all(|o| ((o[0] - c[0]).powi(2) + (o[1] - c[1]).powi(2)).sqrt() > 0.5) {
            centres.push(c);
        }
    }
    for c in centres {
        outliers.push(push(c, min, &mut data));
        let phase = rng.uniform() * PI;
        for k in 0..6 {
            let a = phase + k as f64 * PI / 3.0;
            push([c[0] + 0.05 * a.cos(), c[1] + 0.05 * a.sin()], maj, &mut data);
        }
    }
    let data = FeatureMatrix::with_default_names(data, labels, classes).expect("finite scenario");
    NoisyScenario { data, outliers }
}

/// Minority rows strung along a diagonal with a few majority rows sitting in
/// the gap between the two inner minority rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitClusterScenario {
    pub data: FeatureMatrix,
    pub gap_center: Vec<f64>,
    pub gap_radius: f64,
}

impl SplitClusterScenario {
    pub fn minority_id(&self) -> usize {
        self.data.classes().id(MINORITY_LABEL).expect("minority class")
    }

    pub fn in_gap(&self, row: &[f64]) -> bool {
        crate::sampling::knn::dist(row, &self.gap_center) < self.gap_radius
    }
}

/// 2-D split-cluster scenario: minority at diagonal positions ±0.8 and ±2.2
/// (jittered), three majority rows around the origin, and a majority
/// background kept 2.5 away from every minority row. Average linkage with the
/// default `Cp` puts all minority rows in one cluster, so interpolation
/// between the lobes crosses the majority gap.
pub fn fig2b_split_cluster_scenario(seed: u64) -> SplitClusterScenario {
    let mut rng = RandomSource::new(seed);
    let classes = ClassSet::new([MAJORITY_LABEL, MINORITY_LABEL]);
    let (maj, min) = (classes.id(MAJORITY_LABEL).unwrap(), classes.id(MINORITY_LABEL).unwrap());
    let mut data = RowMatrix::new(2);
    let mut labels = Vec::new();
    let mut minority: Vec<[f64; 2]> = Vec::new();
    for t in [-2.2, -0.8, 0.8, 2.2] {
        let along = t + 0.05 * rng.normal();
        let across = 0.05 * rng.normal();
        minority.push([
            FRAC_1_SQRT_2 * (along - across),
            FRAC_1_SQRT_2 * (along + across),
        ]);
    }
    for m in &minority {
        data.push_row(m).expect("two columns");
        labels.push(min);
    }
    for _ in 0..3 {
        data.push_row(&[0.15 * rng.normal(), 0.15 * rng.normal()]).expect("two columns");
        labels.push(maj);
    }
    let mut background = 0;
    while background < 200 {
        let p = [16.0 * rng.uniform() - 8.0, 16.0 * rng.uniform() - 8.0];
        if minority.iter().all(|m| crate::sampling::knn::dist(m, &p) > 2.5) {
            data.push_row(&p).expect("two columns");
            labels.push(maj);
            background += 1;
        }
    }
    let data = FeatureMatrix::with_default_names(data, labels, classes).expect("finite scenario");
    SplitClusterScenario {
        data,
        gap_center: vec![0.0, 0.0],
        gap_radius: 0.5,
    }
}

/// Parameters for [`synthetic_timeseries`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesSpec {
    pub n_ticks: usize,
    pub n_channels: usize,
    /// Mean offset applied per channel inside fault intervals.
    pub shift: f64,
    pub noise: f64,
    pub intervals: Vec<FaultInterval>,
}

impl TimeSeriesSpec {
    pub fn new(n_ticks: usize, n_channels: usize, shift: f64, intervals: Vec<FaultInterval>) -> Self {
        Self {
            n_ticks,
            n_channels,
            shift,
            noise: 0.5,
            intervals,
        }
    }
}

/// Sinusoid-plus-noise channels sampled at integer timestamps. Inside an
/// interval with fault label `j` (index among the sorted fault labels),
/// channel `c` is offset by `±shift · (1 + j / 2)`, positive when bit `c` of
/// `j + 1` is set, so every fault label has a distinct signature.
pub fn synthetic_timeseries(spec: &TimeSeriesSpec, seed: u64) -> Result<(TimeSeriesFrame, Vec<FaultInterval>)> {
    if spec.n_channels == 0 || spec.n_ticks == 0 {
        return Err(Error::Config("time series needs >= 1 channel and >= 1 tick".into()));
    }
    let mut rng = RandomSource::new(seed);
    let mut faults: Vec<&str> = spec.intervals.iter().map(|i| i.label.as_str()).collect();
    faults.sort_unstable();
    faults.dedup();
    let timestamps: Vec<f64> = (0..spec.n_ticks).map(|t| t as f64).collect();
    let periods: Vec<f64> = (0..spec.n_channels).map(|c| 37.0 + 11.0 * c as f64).collect();
    let phases: Vec<f64> = (0..spec.n_channels).map(|_| 2.0 * PI * rng.uniform()).collect();
    let mut channels = vec![Vec::with_capacity(spec.n_ticks); spec.n_channels];
    for &t in &timestamps {
        let active = spec
            .intervals
            .iter()
            .find(|i| i.contains(t))
            .map(|i| faults.binary_search(&i.label.as_str()).expect("label listed"));
        for (c, ch) in channels.iter_mut().enumerate() {
            let mut v = (2.0 * PI * t / periods[c] + phases[c]).sin() + spec.noise * rng.normal();
            if let Some(j) = active {
                let sign = if ((j + 1) >> (c % 64)) & 1 == 1 { 1.0 } else { -1.0 };
                v += sign * spec.shift * (1.0 + 0.5 * j as f64);
            }
            ch.push(v);
        }
    }
    let names = (0..spec.n_channels).map(|c| format!("ch{c}")).collect();
    let frame = TimeSeriesFrame::new(timestamps, names, channels)?;
    Ok((frame, spec.intervals.clone()))
}

/// [`synthetic_timeseries`] with per-tick labels attached.
pub fn synthetic_labeled_series(spec: &TimeSeriesSpec, seed: u64) -> Result<LabeledSeries> {
    let (frame, intervals) = synthetic_timeseries(spec, seed)?;
    label_timestamps(&frame, &intervals, DEFAULT_NORMAL_LABEL)
}
