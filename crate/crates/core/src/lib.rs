//! Class-imbalance learning for fault diagnostics.
//!
//! Pipeline: ingest a labeled multichannel series, cut sliding windows,
//! extract time, frequency and wavelet-packet statistics, optionally reduce
//! with PCA or LDA, oversample minority classes, train boosted trees, and
//! evaluate per class or as merged fault events.

pub mod classifier;
pub mod data;
pub mod error;
pub mod events;
pub mod features;
pub mod imputation;
pub mod ingestion;
pub mod metrics;
pub mod pipeline;
pub mod reduction;
pub mod rng;
pub mod sampling;
pub mod segmentation;
pub mod synthgen;

pub use classifier::{ClassifierSpec, GbtParams, Predictor, TrainedModel};
pub use data::{
    class_distribution, ClassDistribution, ClassSet, FaultEvent, FaultInterval, FeatureMatrix, RowMatrix,
    SamplerParams, TimeSeriesFrame, WindowInstance,
};
pub use error::{Error, Result};
pub use imputation::GaussianModel;
pub use ingestion::LabeledSeries;
pub use metrics::{ConfusionMatrix, MetricsReport};
pub use pipeline::{CrossValConfig, CrossValReport, EventConfig, EventReport, PipelineConfig, PipelineModel, ResampleStage};
pub use reduction::ReductionSpec;
pub use rng::{seeded_rng, RandomSource};
pub use sampling::{ResampleOutput, SamplerKind, WeightedMinoritySet};
