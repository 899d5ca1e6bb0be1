//! Classifier interface, boosted trees and k-NN.

pub mod gbt;
pub mod knn;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::data::{FeatureMatrix, RowMatrix};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

pub use gbt::{gbt_train, GbtModel, GbtParams, Loss, Node, Tree};
pub use knn::{knn_classify, KnnModel};

/// Current on-disk model format.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Anything that maps feature rows to class probabilities. Columns cover the
/// full class set of the training matrix.
pub trait Predictor {
    fn n_features(&self) -> usize;
    fn predict_proba(&self, x: &RowMatrix) -> Result<RowMatrix>;

    /// Argmax of `predict_proba`, ties to the lower class id.
    fn predict(&self, x: &RowMatrix) -> Result<Vec<usize>> {
        Ok(self.predict_proba(x)?.rows().map(argmax).collect())
    }
}

/// Index of the largest entry; the first one wins ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = j;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ClassifierSpec {
    Gbt(GbtParams),
    Knn { k: usize },
}

impl Default for ClassifierSpec {
    fn default() -> Self {
        ClassifierSpec::Gbt(GbtParams::default())
    }
}

impl ClassifierSpec {
    pub fn train(&self, x: &FeatureMatrix, rng: &mut RandomSource) -> Result<TrainedModel> {
        if !x.data().all_finite() {
            return Err(Error::InvalidInput("training features contain non-finite values".into()));
        }
        Ok(match self {
            ClassifierSpec::Gbt(p) => TrainedModel::Gbt(gbt_train(x, p, rng)?),
            ClassifierSpec::Knn { k } => TrainedModel::Knn(KnnModel::fit(x, *k)?),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TrainedModel {
    Gbt(GbtModel),
    Knn(KnnModel),
}

impl Predictor for GbtModel {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn predict_proba(&self, x: &RowMatrix) -> Result<RowMatrix> {
        GbtModel::predict_proba(self, x)
    }
}

impl Predictor for KnnModel {
    fn n_features(&self) -> usize {
        self.train.n_cols()
    }

    fn predict_proba(&self, x: &RowMatrix) -> Result<RowMatrix> {
        KnnModel::predict_proba(self, x)
    }
}

impl Predictor for TrainedModel {
    fn n_features(&self) -> usize {
        match self {
            TrainedModel::Gbt(m) => m.n_features,
            TrainedModel::Knn(m) => m.train.n_cols(),
        }
    }

    fn predict_proba(&self, x: &RowMatrix) -> Result<RowMatrix> {
        match self {
            TrainedModel::Gbt(m) => m.predict_proba(x),
            TrainedModel::Knn(m) => m.predict_proba(x),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<T> {
    format_version: u32,
    model: T,
}

/// Serialize `model` inside a `{format_version, model}` envelope.
pub(crate) fn to_versioned_json<T: Serialize>(model: &T) -> Result<String> {
    Ok(serde_json::to_string(&Envelope {
        format_version: MODEL_FORMAT_VERSION,
        model,
    })?)
}

pub(crate) fn from_versioned_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    let env: Envelope<T> = serde_json::from_str(s)?;
    check_version(env.format_version)?;
    Ok(env.model)
}

pub(crate) fn save_versioned<T: Serialize>(model: &T, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer(
        &mut w,
        &Envelope {
            format_version: MODEL_FORMAT_VERSION,
            model,
        },
    )?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn load_versioned<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let env: Envelope<T> = serde_json::from_reader(BufReader::new(file))?;
    check_version(env.format_version)?;
    Ok(env.model)
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String> {
        to_versioned_json(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        from_versioned_json(s)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        save_versioned(self, path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        load_versioned(path)
    }
}

fn check_version(v: u32) -> Result<()> {
    if v != MODEL_FORMAT_VERSION {
        return Err(Error::Schema(format!(
            "model format version {v} not supported (expected {MODEL_FORMAT_VERSION})"
        )));
    }
    Ok(())
}
