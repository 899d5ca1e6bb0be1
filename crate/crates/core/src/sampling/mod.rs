//! Oversamplers and one-vs-rest multi-class balancing.

pub mod ewmote;
pub mod knn;
pub mod mwmote;
pub mod smote;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{class_distribution, FeatureMatrix, RowMatrix, SamplerParams};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

pub use ewmote::{emicil, ewmote, ewmote_synthetic};
pub use knn::{dist, knn, knn_among, sq_dist};
pub use mwmote::{
    agglomerative_clusters, borderline_majority, closeness, filtered_minority, information_weight, informative_minority,
    mean_nearest_distance, mwmote, selection_probabilities, ClusterAssignment, WeightedMinoritySet,
};
pub use smote::{random_oversample, smote};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    #[default]
    None,
    Random,
    Smote,
    Emicil,
    Mwmote,
    Ewmote,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 6] = [
        SamplerKind::None,
        SamplerKind::Random,
        SamplerKind::Smote,
        SamplerKind::Emicil,
        SamplerKind::Mwmote,
        SamplerKind::Ewmote,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SamplerKind::None => "none",
            SamplerKind::Random => "random",
            SamplerKind::Smote => "smote",
            SamplerKind::Emicil => "emicil",
            SamplerKind::Mwmote => "mwmote",
            SamplerKind::Ewmote => "ewmote",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SamplerKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown sampler '{s}'")))
    }
}

/// `n` synthetic minority rows. `None` always returns an empty matrix.
pub fn generate(
    kind: SamplerKind,
    majority: &RowMatrix,
    minority: &RowMatrix,
    n: usize,
    params: &SamplerParams,
    rng: &mut RandomSource,
) -> Result<RowMatrix> {
    match kind {
        SamplerKind::None => Ok(RowMatrix::new(minority.n_cols())),
        SamplerKind::Random => random_oversample(minority, n, rng),
        SamplerKind::Smote => smote(minority, n, params.k, rng),
        SamplerKind::Emicil => emicil(minority, n, params, rng),
        SamplerKind::Mwmote => mwmote(majority, minority, n, params, rng),
        SamplerKind::Ewmote => ewmote_synthetic(majority, minority, n, params, rng),
    }
}

/// Balanced matrix plus a flag per row marking generated rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ResampleOutput {
    pub matrix: FeatureMatrix,
    pub synthetic: Vec<bool>,
}

impl ResampleOutput {
    pub fn n_synthetic(&self) -> usize {
        self.synthetic.iter().filter(|&&s| s).count()
    }
}

/// Raise every non-majority class to the majority count (or add
/// `params.n_synthetic` rows per class when set). Each class is treated as
/// `S_min` against all remaining rows as `S_maj`, with its own child stream
/// of `rng`. Output: the input rows, then synthetics grouped by class id.
pub fn resample_multiclass(
    x: &FeatureMatrix,
    kind: SamplerKind,
    params: &SamplerParams,
    rng: &RandomSource,
) -> Result<ResampleOutput> {
    params.validate()?;
    let dist = class_distribution(x.labels(), x.classes().len())?;
    let target = dist.majority_count();
    let jobs: Vec<(usize, usize)> = if kind == SamplerKind::None {
        Vec::new()
    } else {
        (0..x.classes().len())
            .filter(|&c| c != dist.majority && dist.counts[c] > 0)
            .map(|c| (c, params.n_synthetic.unwrap_or(target - dist.counts[c])))
            .filter(|&(_, n)| n > 0)
            .collect()
    };
    let generated: Vec<(usize, RowMatrix)> = jobs
        .par_iter()
        .map(|&(c, n)| {
            let (min_idx, maj_idx): (Vec<usize>, Vec<usize>) = (0..x.n_rows()).partition(|&i| x.labels()[i] == c);
            let minority = x.data().select_rows(&min_idx);
            let majority = x.data().select_rows(&maj_idx);
            let mut child = rng.child(c as u64);
            generate(kind, &majority, &minority, n, params, &mut child).map(|rows| (c, rows))
        })
        .collect::<Result<_>>()?;

    let mut data = x.data().clone();
    let mut labels = x.labels().to_vec();
    let mut synthetic = vec![false; x.n_rows()];
    for (c, rows) in generated {
        data.extend(&rows)?;
        labels.extend(std::iter::repeat_n(c, rows.n_rows()));
        synthetic.extend(std::iter::repeat_n(true, rows.n_rows()));
    }
    let matrix = FeatureMatrix::new(data, labels, x.classes().clone(), x.feature_names().to_vec())?;
    Ok(ResampleOutput { matrix, synthetic })
}
