use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use imbalearn::classifier::GbtParams;
use imbalearn::features::{FeatureConfig, Wavelet};
use imbalearn::ingestion::DEFAULT_NORMAL_LABEL;
use imbalearn::segmentation::LabelRule;
use imbalearn::{ClassifierSpec, EventConfig, FaultInterval, PipelineConfig, ReductionSpec, ResampleStage, Result, SamplerKind, SamplerParams};

#[derive(Debug, Parser)]
#[command(name = "imbalearn", version, about = "Class-imbalance learning for fault diagnostics")]
pub struct Cli {
    /// Flat `key = value` file of flags for the subcommand; command-line flags override it.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Join fault intervals onto a time series and write a labeled series.
    #[command(args_override_self = true)]
    Ingest(IngestArgs),
    /// Write synthetic data in the canonical CSV schemas.
    #[command(args_override_self = true)]
    Synthgen(SynthArgs),
    /// Cut a labeled series into windows and write the feature matrix.
    #[command(args_override_self = true)]
    Featurize(FeaturizeArgs),
    /// Oversample a feature matrix; adds a `synthetic` column.
    #[command(args_override_self = true)]
    Resample(ResampleArgs),
    /// Stratified k-fold evaluation of one pipeline.
    #[command(args_override_self = true)]
    Crossval(CrossvalArgs),
    /// Train on a labeled series, predict fault events on a test series.
    #[command(name = "predict-events", args_override_self = true)]
    PredictEvents(PredictEventsArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long, value_name = "CSV")]
    pub timeseries: PathBuf,
    /// `t_start,t_end,label` file; omit for an all-normal series.
    #[arg(long, value_name = "CSV")]
    pub intervals: Option<PathBuf>,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    #[command(flatten)]
    pub schema: SchemaArgs,
    #[arg(long, default_value = DEFAULT_NORMAL_LABEL)]
    pub normal_label: String,
}

#[derive(Debug, Args)]
pub struct SchemaArgs {
    #[arg(long, default_value = "timestamp")]
    pub timestamp_col: String,
    /// Comma-separated channel columns; default is every other column.
    #[arg(long, value_delimiter = ',')]
    pub channels: Option<Vec<String>>,
}

impl SchemaArgs {
    pub fn schema(&self) -> imbalearn::ingestion::TimeSeriesSchema {
        imbalearn::ingestion::TimeSeriesSchema {
            timestamp: self.timestamp_col.clone(),
            channels: self.channels.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthKind {
    /// Two isotropic Gaussian blobs (feature matrix).
    Blobs,
    /// Minority cluster with planted outliers (feature matrix).
    Noisy,
    /// Minority cluster split by majority rows (feature matrix).
    Split,
    /// Multichannel series plus interval file.
    Timeseries,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(value_enum)]
    pub kind: SynthKind,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2577)]
    pub majority: usize,
    #[arg(long, default_value_t = 155)]
    pub minority: usize,
    #[arg(long, default_value_t = 2)]
    pub dims: usize,
    /// Distance between blob centres along the first axis.
    #[arg(long, default_value_t = 2.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 1000)]
    pub ticks: usize,
    #[arg(long = "n-channels", default_value_t = 2)]
    pub n_channels: usize,
    #[arg(long, default_value_t = 3.0)]
    pub shift: f64,
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    /// Fault interval `start:end:label`; repeatable.
    #[arg(long = "fault", value_name = "START:END:LABEL", value_parser = parse_fault)]
    pub faults: Vec<FaultInterval>,
    /// Where the time-series kind writes its interval file.
    #[arg(long, value_name = "CSV")]
    pub intervals_out: Option<PathBuf>,
}

fn parse_fault(s: &str) -> Result<FaultInterval> {
    let bad = || imbalearn::Error::Config(format!("fault `{s}`: expected START:END:LABEL"));
    let mut parts = s.splitn(3, ':');
    let (a, b, label) = (parts.next(), parts.next(), parts.next());
    let (Some(a), Some(b), Some(label)) = (a, b, label) else {
        return Err(bad());
    };
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    FaultInterval::new(a, b, label.trim())
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    #[arg(long, default_value_t = 20)]
    pub window_len: usize,
    #[arg(long, default_value_t = 5)]
    pub slide_len: usize,
    #[arg(long, default_value = "majority")]
    pub label_rule: LabelRule,
    /// Comma-separated subset of origin, time, frequency, timefreq.
    #[arg(long, default_value = "time")]
    pub domains: String,
    #[arg(long, default_value_t = 3)]
    pub wpt_depth: usize,
    #[arg(long, default_value = "haar")]
    pub wavelet: Wavelet,
}

impl WindowArgs {
    pub fn features(&self) -> Result<FeatureConfig> {
        let cfg = FeatureConfig {
            domains: FeatureConfig::parse_domains(&self.domains)?,
            wpt_depth: self.wpt_depth,
            wavelet: self.wavelet,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct FeaturizeArgs {
    /// Labeled series (`timestamp`, channels, `label`).
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    #[command(flatten)]
    pub window: WindowArgs,
    #[arg(long, default_value = DEFAULT_NORMAL_LABEL)]
    pub normal_label: String,
}

#[derive(Debug, Args)]
pub struct SamplerArgs {
    #[arg(long, default_value = "none")]
    pub sampler: SamplerKind,
    /// SMOTE neighbours.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// Noise filter neighbours.
    #[arg(long, default_value_t = 5)]
    pub k1: usize,
    /// Borderline majority neighbours.
    #[arg(long, default_value_t = 3)]
    pub k2: usize,
    /// Informative minority neighbours; default is half the minority size.
    #[arg(long)]
    pub k3: Option<usize>,
    #[arg(long, default_value_t = 3.0)]
    pub cp: f64,
    #[arg(long, default_value_t = 5.0)]
    pub cf_th: f64,
    #[arg(long, default_value_t = 2.0)]
    pub cmax: f64,
    /// Synthetic rows per minority class; default raises it to the majority count.
    #[arg(long)]
    pub n_synthetic: Option<usize>,
    /// Draw imputed values instead of using the conditional mean.
    #[arg(long)]
    pub stochastic: bool,
    /// Covariance ridge for the imputation model.
    #[arg(long)]
    pub emi_ridge: Option<f64>,
}

impl SamplerArgs {
    pub fn params(&self, seed: u64) -> SamplerParams {
        SamplerParams {
            k: self.k,
            k1: self.k1,
            k2: self.k2,
            k3: self.k3,
            cp: self.cp,
            cf_th: self.cf_th,
            cmax: self.cmax,
            n_synthetic: self.n_synthetic,
            seed,
            stochastic_imputation: self.stochastic,
            emi_ridge: self.emi_ridge,
        }
    }
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// none, pca or lda.
    #[arg(long, default_value = "none")]
    pub reduce: String,
    #[arg(long)]
    pub pca_dims: Option<usize>,
    /// Keep the fewest components explaining this variance fraction.
    #[arg(long)]
    pub pca_variance: Option<f64>,
    #[arg(long)]
    pub lda_dims: Option<usize>,
    /// Skip z-scoring before reduction and resampling.
    #[arg(long)]
    pub no_standardize: bool,
    /// Resample before or after reduction.
    #[arg(long, default_value = "after")]
    pub resample_stage: ResampleStage,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, default_value_t = 300)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0.3)]
    pub lr: f64,
    #[arg(long, default_value_t = 6)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl PipelineArgs {
    pub fn pipeline(&self) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            standardize: !self.no_standardize,
            reduction: ReductionSpec::from_options(&self.reduce, self.pca_dims, self.pca_variance, self.lda_dims)?,
            sampler: self.sampler.sampler,
            sampler_params: self.sampler.params(self.seed),
            classifier: ClassifierSpec::Gbt(GbtParams {
                rounds: self.rounds,
                learning_rate: self.lr,
                max_depth: self.max_depth,
                ..GbtParams::default()
            }),
            resample_stage: self.resample_stage,
        })
    }
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    /// Feature matrix CSV with a trailing `label` column.
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,
    #[command(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct CrossvalArgs {
    #[arg(long, value_name = "CSV")]
    pub input: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    /// Also fit on all rows and save the model here.
    #[arg(long, value_name = "JSON")]
    pub model_out: Option<PathBuf>,
    /// Class treated as normal in the saved model.
    #[arg(long, default_value = DEFAULT_NORMAL_LABEL)]
    pub normal_label: String,
}

#[derive(Debug, Args)]
pub struct PredictEventsArgs {
    /// Labeled training series; not needed with `--model-in`.
    #[arg(long, value_name = "CSV", required_unless_present = "model_in")]
    pub train: Option<PathBuf>,
    /// Unlabeled test series.
    #[arg(long, value_name = "CSV")]
    pub test: PathBuf,
    /// Ground-truth intervals for the test series; omit when there are none.
    #[arg(long, value_name = "CSV")]
    pub truth: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub schema: SchemaArgs,
    #[command(flatten)]
    pub window: WindowArgs,
    #[command(flatten)]
    pub pipeline: PipelineArgs,
    #[arg(long, value_name = "JSON")]
    pub model_in: Option<PathBuf>,
    #[arg(long, value_name = "JSON", conflicts_with = "model_in")]
    pub model_out: Option<PathBuf>,
    #[arg(long, default_value = DEFAULT_NORMAL_LABEL)]
    pub normal_label: String,
}

impl PredictEventsArgs {
    pub fn event_config(&self) -> Result<EventConfig> {
        Ok(EventConfig {
            window_len: self.window.window_len,
            slide_len: self.window.slide_len,
            label_rule: self.window.label_rule,
            features: self.window.features()?,
            pipeline: self.pipeline.pipeline()?,
            seed: self.pipeline.seed,
        })
    }
}
