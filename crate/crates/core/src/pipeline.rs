//! Fold-safe training pipeline, stratified cross-validation and window-level
//! event prediction.
//!
//! Every fitted transform and the resampler see training rows only.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{ClassifierSpec, Predictor, TrainedModel};
use crate::data::{
    class_distribution, ClassSet, FaultEvent, FaultInterval, FeatureMatrix, RowMatrix, SamplerParams, TimeSeriesFrame,
};
use crate::error::{Error, Result};
use crate::events::{event_confusion, merge_events, windows_to_events, EventConfusion};
use crate::features::{featurize, FeatureConfig};
use crate::ingestion::{label_timestamps, LabeledSeries};
use crate::metrics::{macro_metrics, roc_points, ClassMetrics, ConfusionMatrix, MacroMetrics, MetricsReport};
use crate::reduction::{ReductionSpec, Reducer, Standardizer};
use crate::rng::RandomSource;
use crate::sampling::{resample_multiclass, ResampleOutput, SamplerKind};
use crate::segmentation::{segment, LabelRule};

/// Where resampling happens relative to feature reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResampleStage {
    Before,
    #[default]
    After,
}

impl FromStr for ResampleStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "before" | "before-reduction" => Ok(ResampleStage::Before),
            "after" | "after-reduction" => Ok(ResampleStage::After),
            other => Err(Error::Config(format!("unknown resample stage '{other}'"))),
        }
    }
}

impl fmt::Display for ResampleStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResampleStage::Before => "before",
            ResampleStage::After => "after",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub standardize: bool,
    pub reduction: ReductionSpec,
    pub sampler: SamplerKind,
    pub sampler_params: SamplerParams,
    pub classifier: ClassifierSpec,
    pub resample_stage: ResampleStage,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            standardize: true,
            reduction: ReductionSpec::None,
            sampler: SamplerKind::None,
            sampler_params: SamplerParams::default(),
            classifier: ClassifierSpec::default(),
            resample_stage: ResampleStage::After,
        }
    }
}

/// Everything fitted on one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub standardizer: Option<Standardizer>,
    pub reducer: Reducer,
    pub resampled: ResampleOutput,
    pub model: TrainedModel,
}

impl FittedPipeline {
    /// Apply the fitted transforms to rows in the original feature space.
    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let scaled = match &self.standardizer {
            Some(s) => x.with_data(s.transform(x.data())?, x.feature_names().to_vec())?,
            None => x.clone(),
        };
        self.reducer.transform(&scaled)
    }

    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<RowMatrix> {
        self.model.predict_proba(self.transform(x)?.data())
    }
    /// Keep only what prediction needs.
    pub fn to_model(&self, train: &FeatureMatrix, normal_label: &str) -> PipelineModel {
        PipelineModel {
            classes: train.classes().clone(),
            normal_label: normal_label.to_string(),
            feature_names: train.feature_names().to_vec(),
            standardizer: self.standardizer.clone(),
            reducer: self.reducer.clone(),
            model: self.model.clone(),
        }
    }
}

/// A fitted pipeline without its training data, for saving and reuse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineModel {
    pub classes: ClassSet,
    pub normal_label: String,
    /// Input columns in the order the model expects them.
    pub feature_names: Vec<String>,
    pub standardizer: Option<Standardizer>,
    pub reducer: Reducer,
    pub model: TrainedModel,
}

impl PipelineModel {
    fn check_columns(&self, x: &FeatureMatrix) -> Result<()> {
        if x.feature_names() != self.feature_names.as_slice() {
            return Err(Error::Schema(format!(
                "feature columns do not match the model ({} given, {} expected)",
                x.n_cols(),
                self.feature_names.len()
            )));
        }
        Ok(())
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        self.check_columns(x)?;
        let scaled = match &self.standardizer {
            Some(s) => x.with_data(s.transform(x.data())?, x.feature_names().to_vec())?,
            None => x.clone(),
        };
        self.reducer.transform(&scaled)
    }

    /// Scores with one column per entry of `self.classes`.
    pub fn predict_proba(&self, x: &FeatureMatrix) -> Result<RowMatrix> {
        self.model.predict_proba(self.transform(x)?.data())
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<usize>> {
        Ok(self.predict_proba(x)?.rows().map(crate::classifier::argmax).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        crate::classifier::to_versioned_json(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        crate::classifier::from_versioned_json(s)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        crate::classifier::save_versioned(self, path)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        crate::classifier::load_versioned(path)
    }
}

/// Standardize, reduce and resample (in the configured order), then train.
/// The sampler draws from `rng.child(0)` and the classifier from
/// `rng.child(1)`.
pub fn fit_pipeline(train: &FeatureMatrix, cfg: &PipelineConfig, rng: &RandomSource) -> Result<FittedPipeline> {
    let standardizer = if cfg.standardize {
        Some(Standardizer::fit(train.data())?)
    } else {
        None
    };
    let scaled = match &standardizer {
        Some(s) => train.with_data(s.transform(train.data())?, train.feature_names().to_vec())?,
        None => train.clone(),
    };
    let sampler_rng = rng.child(0);
    let (reducer, resampled) = match cfg.resample_stage {
        ResampleStage::After => {
            let reducer = Reducer::fit(cfg.reduction, &scaled)?;
            let reduced = reducer.transform(&scaled)?;
            let resampled = resample_multiclass(&reduced, cfg.sampler, &cfg.sampler_params, &sampler_rng)?;
            (reducer, resampled)
        }
        ResampleStage::Before => {
            let resampled = resample_multiclass(&scaled, cfg.sampler, &cfg.sampler_params, &sampler_rng)?;
            let reducer = Reducer::fit(cfg.reduction, &resampled.matrix)?;
            let matrix = reducer.transform(&resampled.matrix)?;
            (
                reducer,
                ResampleOutput {
                    matrix,
                    synthetic: resampled.synthetic,
                },
            )
        }
    };
    let model = cfg.classifier.train(&resampled.matrix, &mut rng.child(1))?;
    Ok(FittedPipeline {
        standardizer,
        reducer,
        resampled,
        model,
    })
}

/// Fold id per row. Rows of each class are shuffled and dealt round-robin,
/// continuing the deal across classes so fold sizes differ by at most one.
pub fn stratified_folds(labels: &[usize], n_classes: usize, folds: usize, rng: &mut RandomSource) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::Config(format!("folds must be >= 2, got {folds}")));
    }
    if folds > labels.len() {
        return Err(Error::Config(format!("{folds} folds exceed {} rows", labels.len())));
    }
    let mut assignment = vec![0; labels.len()];
    let mut next = 0;
    for c in 0..n_classes {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if !rows.is_empty() && rows.len() < folds {
            log::warn!("class {c} has {} rows for {folds} folds; some folds will lack it", rows.len());
        }
        rng.shuffle(&mut rows);
        for i in rows {
            assignment[i] = next % folds;
            next += 1;
        }
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossValConfig {
    pub folds: usize,
    pub seed: u64,
    pub pipeline: PipelineConfig,
}

impl Default for CrossValConfig {
    fn default() -> Self {
        Self {
            folds: 10,
            seed: 0,
            pipeline: PipelineConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldReport {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub n_synthetic: usize,
    pub metrics: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValReport {
    pub classes: ClassSet,
    pub folds: Vec<FoldReport>,
    /// Per-class metrics averaged over folds (support summed).
    pub mean_per_class: Vec<ClassMetrics>,
    /// Fold macro averages, averaged over folds.
    pub mean_macro: MacroMetrics,
    pub pooled_confusion: ConfusionMatrix,
    /// Out-of-fold class probabilities in input row order.
    pub oof_scores: RowMatrix,
    pub truth: Vec<usize>,
}

impl CrossValReport {
    /// One-vs-rest ROC of `class` over the pooled out-of-fold scores.
    pub fn roc(&self, class: usize) -> Result<Vec<(f64, f64)>> {
        let t: Vec<bool> = self.truth.iter().map(|&l| l == class).collect();
        roc_points(&t, &self.oof_scores.column(class))
    }

    pub fn minority_recall(&self, class: usize) -> f64 {
        self.mean_per_class[class].recall
    }
}

/// Train on `train_idx`, score `test_idx`.
pub fn run_fold(
    data: &FeatureMatrix,
    train_idx: &[usize],
    test_idx: &[usize],
    cfg: &PipelineConfig,
    rng: &RandomSource,
) -> Result<(FittedPipeline, RowMatrix)> {
    let train = data.select_rows(train_idx);
    let test = data.select_rows(test_idx);
    let fitted = fit_pipeline(&train, cfg, rng)?;
    let scores = fitted.predict_proba(&test)?;
    Ok((fitted, scores))
}

/// Stratified k-fold cross-validation. Folds run in parallel, fold `f`
/// drawing from child stream `f + 1` of the seed.
pub fn run_crossval(data: &FeatureMatrix, cfg: &CrossValConfig) -> Result<CrossValReport> {
    let root = RandomSource::new(cfg.seed);
    let n_classes = data.classes().len();
    class_distribution(data.labels(), n_classes)?;
    let assignment = stratified_folds(data.labels(), n_classes, cfg.folds, &mut root.child(0))?;
    let results: Vec<(FoldReport, Vec<usize>, RowMatrix)> = (0..cfg.folds)
        .into_par_iter()
        .map(|f| {
            let (test_idx, train_idx): (Vec<usize>, Vec<usize>) = (0..data.n_rows()).partition(|&i| assignment[i] == f);
            let (fitted, scores) = run_fold(data, &train_idx, &test_idx, &cfg.pipeline, &root.child(f as u64 + 1))?;
            let truth: Vec<usize> = test_idx.iter().map(|&i| data.labels()[i]).collect();
            let metrics = macro_metrics(&truth, &scores)?;
            let report = FoldReport {
                fold: f,
                n_train: train_idx.len(),
                n_test: test_idx.len(),
                n_synthetic: fitted.resampled.n_synthetic(),
                metrics,
            };
            Ok((report, test_idx, scores))
        })
        .collect::<Result<_>>()?;

    let mut oof = RowMatrix::from_vec(vec![0.0; data.n_rows() * n_classes], data.n_rows(), n_classes)?;
    let mut pooled = ConfusionMatrix::zeros(n_classes);
    let mut folds = Vec::with_capacity(results.len());
    for (report, test_idx, scores) in results {
        for (k, &i) in test_idx.iter().enumerate() {
            oof.row_mut(i).copy_from_slice(scores.row(k));
        }
        pooled.add(&report.metrics.confusion)?;
        folds.push(report);
    }
    let mean_per_class = (0..n_classes)
        .map(|c| {
            let rows: Vec<&ClassMetrics> = folds.iter().map(|f| &f.metrics.per_class[c]).collect();
            let n = rows.len() as f64;
            let avg = |g: fn(&ClassMetrics) -> f64| rows.iter().map(|r| g(r)).sum::<f64>() / n;
            ClassMetrics {
                class: c,
                support: rows.iter().map(|r| r.support).sum(),
                precision: avg(|r| r.precision),
                recall: avg(|r| r.recall),
                f_measure: avg(|r| r.f_measure),
                auc: avg(|r| r.auc),
                mcc: avg(|r| r.mcc),
                fam: avg(|r| r.fam),
                degenerate: rows.iter().any(|r| r.degenerate),
            }
        })
        .collect();
    let n = folds.len() as f64;
    let avg = |g: fn(&MacroMetrics) -> f64| folds.iter().map(|f| g(&f.metrics.macro_avg)).sum::<f64>() / n;
    let mean_macro = MacroMetrics {
        precision: avg(|m| m.precision),
        recall: avg(|m| m.recall),
        f_measure: avg(|m| m.f_measure),
        auc: avg(|m| m.auc),
        mcc: avg(|m| m.mcc),
        fam: avg(|m| m.fam),
    };
    Ok(CrossValReport {
        classes: data.classes().clone(),
        folds,
        mean_per_class,
        mean_macro,
        pooled_confusion: pooled,
        oof_scores: oof,
        truth: data.labels().to_vec(),
    })
}

/// Windowing, features and model settings for event prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct EventConfig {
    pub window_len: usize,
    pub slide_len: usize,
    pub label_rule: LabelRule,
    pub features: FeatureConfig,
    pub pipeline: PipelineConfig,
    pub seed: u64,
}

impl Default for EventConfig {
    fn default() -> Self {
        Self {
            window_len: 20,
            slide_len: 5,
            label_rule: LabelRule::Majority,
            features: FeatureConfig::default(),
            pipeline: PipelineConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventReport {
    /// Merged predicted events.
    pub events: Vec<FaultEvent>,
    pub confusion: EventConfusion,
    /// Ticks of the test range inside some true fault interval.
    pub faulty_ticks: usize,
    pub window_starts: Vec<usize>,
    pub window_predictions: Vec<String>,
}

fn windows_matrix(series: &LabeledSeries, cfg: &EventConfig) -> Result<(FeatureMatrix, Vec<usize>)> {
    let windows = segment(series, cfg.window_len, cfg.slide_len, cfg.label_rule)?;
    let starts = windows.iter().map(|w| w.start_index).collect();
    let fm = featurize(&windows, &cfg.features, series.frame.channel_names(), &series.classes)?;
    Ok((fm, starts))
}

/// Fit the window classifier on a labeled training series.
pub fn fit_event_model(train: &LabeledSeries, cfg: &EventConfig) -> Result<PipelineModel> {
    let (train_fm, _) = windows_matrix(train, cfg)?;
    let fitted = fit_pipeline(&train_fm, &cfg.pipeline, &RandomSource::new(cfg.seed))?;
    Ok(fitted.to_model(&train_fm, train.normal_label()))
}

/// Predict windows of `test` with `model`, merge them into events and
/// compare with `truth` tick by tick.
pub fn predict_events(model: &PipelineModel, test: &TimeSeriesFrame, truth: &[FaultInterval], cfg: &EventConfig) -> Result<EventReport> {
    let normal = model
        .classes
        .id(&model.normal_label)
        .ok_or_else(|| Error::Schema(format!("normal label `{}` missing from model classes", model.normal_label)))?;
    let test_series = label_timestamps(test, truth, &model.normal_label)?;
    let test_series = test_series.with_classes(&model.classes.union(&test_series.classes))?;
    let (test_fm, starts) = windows_matrix(&test_series, cfg)?;
    // Feature columns do not depend on labels, so the union class space is harmless here.
    let pred = model.predict(&test_fm)?;
    let raw = windows_to_events(&pred, &starts, cfg.window_len, test.timestamps(), &model.classes, normal)?;
    let events = merge_events(&raw);
    let confusion = event_confusion(&events, truth, test.timestamps());
    let faulty_ticks = test.timestamps().iter().filter(|&&t| truth.iter().any(|iv| iv.contains(t))).count();
    Ok(EventReport {
        events,
        confusion,
        faulty_ticks,
        window_starts: starts,
        window_predictions: pred.iter().map(|&p| model.classes.name(p).to_string()).collect(),
    })
}

/// [`fit_event_model`] on `train` followed by [`predict_events`] on `test`.
pub fn run_predict_events(train: &LabeledSeries, test: &TimeSeriesFrame, truth: &[FaultInterval], cfg: &EventConfig) -> Result<EventReport> {
    let model = fit_event_model(train, cfg)?;
    predict_events(&model, test, truth, cfg)
}
