//! Per-window statistical features in the time, frequency and
//! time-frequency domains.
//!
//! Each channel of each window is summarised by nine statistics: mean, RMS,
//! max, min, median, range, crest factor, impulse factor and margin factor.
//! The frequency domain applies them to the full unnormalized DFT magnitude
//! spectrum; the time-frequency domain applies them to every terminal subband
//! of a wavelet packet tree.

use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::data::{ClassSet, FeatureMatrix, RowMatrix, WindowInstance};
use crate::error::{Error, Result};

pub const STAT_NAMES: [&str; 9] = [
    "mean", "rms", "max", "min", "median", "range", "crest", "impulse", "margin",
];

/// Nine summary statistics of a segment, in [`STAT_NAMES`] order.
pub fn time_stats(segment: &[f64]) -> [f64; 9] {
    let l = segment.len();
    if l == 0 {
        return [0.0; 9];
    }
    let n = l as f64;
    let mean = segment.iter().sum::<f64>() / n;
    let rms = (segment.iter().map(|x| x * x).sum::<f64>() / n).sqrt();
    let max = segment.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = segment.iter().copied().fold(f64::INFINITY, f64::min);
    let mut sorted = segment.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if l.is_multiple_of(2) {
        (sorted[l / 2 - 1] + sorted[l / 2]) / 2.0
    } else {
        sorted[l / 2]
    };
    let peak = segment.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mean_abs = segment.iter().map(|x| x.abs()).sum::<f64>() / n;
    let mean_sqrt_abs = segment.iter().map(|x| x.abs().sqrt()).sum::<f64>() / n;
    // 0/0 on an all-zero segment is reported as 0.
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    [
        mean,
        rms,
        max,
        min,
        median,
        max - min,
        ratio(peak, rms),
        ratio(peak, mean_abs),
        ratio(peak, mean_sqrt_abs * mean_sqrt_abs),
    ]
}

fn magnitudes(fft: &dyn Fft<f64>, segment: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex<f64>> = segment.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fft.process(&mut buf);
    buf.iter().map(|c| c.norm()).collect()
}

/// Unnormalized DFT magnitudes `|X_k|` for `k = 0..l`.
pub fn fft_magnitude(segment: &[f64]) -> Vec<f64> {
    if segment.is_empty() {
        return Vec::new();
    }
    let fft = FftPlanner::new().plan_fft_forward(segment.len());
    magnitudes(fft.as_ref(), segment)
}

pub fn freq_stats(segment: &[f64]) -> [f64; 9] {
    time_stats(&fft_magnitude(segment))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Wavelet {
    #[default]
    Haar,
}

impl FromStr for Wavelet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" | "db1" => Ok(Wavelet::Haar),
            other => Err(Error::Config(format!("unsupported wavelet `{other}`"))),
        }
    }
}

impl Wavelet {
    /// One analysis step with periodic extension: (approximation, detail).
    fn split(self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match self {
            Wavelet::Haar => {
                let half = x.len().div_ceil(2);
                let mut a = Vec::with_capacity(half);
                let mut d = Vec::with_capacity(half);
                for k in 0..half {
                    let x0 = x[2 * k];
                    let x1 = x[(2 * k + 1) % x.len()];
                    a.push((x0 + x1) * std::f64::consts::FRAC_1_SQRT_2);
                    d.push((x0 - x1) * std::f64::consts::FRAC_1_SQRT_2);
                }
                (a, d)
            }
        }
    }
}

/// Full wavelet packet tree of depth `depth`; returns the `2^depth` terminal
/// subbands in natural (filter-bank) order.
pub fn wpt_decompose(segment: &[f64], depth: usize, wavelet: Wavelet) -> Result<Vec<Vec<f64>>> {
    if depth == 0 {
        return Err(Error::Config("wavelet packet depth must be >= 1".into()));
    }
    let need = 1usize.checked_shl(depth as u32).unwrap_or(usize::MAX);
    if segment.len() < need {
        return Err(Error::InvalidInput(format!(
            "segment of length {} too short for depth {depth}",
            segment.len()
        )));
    }
    let mut level = vec![segment.to_vec()];
    for _ in 0..depth {
        level = level
            .iter()
            .flat_map(|node| {
                let (a, d) = wavelet.split(node);
                [a, d]
            })
            .collect();
    }
    Ok(level)
}

/// Nine statistics per terminal subband, concatenated in subband order.
pub fn wpt_stats(segment: &[f64], depth: usize, wavelet: Wavelet) -> Result<Vec<f64>> {
    Ok(wpt_decompose(segment, depth, wavelet)?
        .iter()
        .flat_map(|band| time_stats(band))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Domain {
    Origin,
    Time,
    Frequency,
    TimeFreq,
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "origin" => Ok(Domain::Origin),
            "time" => Ok(Domain::Time),
            "frequency" | "freq" => Ok(Domain::Frequency),
            "timefreq" | "wpt" => Ok(Domain::TimeFreq),
            other => Err(Error::Config(format!("unknown feature domain `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub domains: Vec<Domain>,
    pub wpt_depth: usize,
    pub wavelet: Wavelet,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            domains: vec![Domain::Time],
            wpt_depth: 3,
            wavelet: Wavelet::Haar,
        }
    }
}

impl FeatureConfig {
    /// Parse a comma-separated domain list such as `time,frequency`.
    pub fn parse_domains(list: &str) -> Result<Vec<Domain>> {
        list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.domains.is_empty() {
            return Err(Error::Config("at least one feature domain required".into()));
        }
        if self.domains.contains(&Domain::TimeFreq) && self.wpt_depth == 0 {
            return Err(Error::Config("wavelet packet depth must be >= 1".into()));
        }
        Ok(())
    }

    fn ordered_domains(&self) -> Vec<Domain> {
        let mut d = self.domains.clone();
        d.sort();
        d.dedup();
        d
    }

    /// Column names for windows of `window_len` samples.
    pub fn feature_names(&self, channel_names: &[String], window_len: usize) -> Vec<String> {
        let mut names = Vec::new();
        for domain in self.ordered_domains() {
            for ch in channel_names {
                match domain {
                    Domain::Origin => names.extend((0..window_len).map(|i| format!("{ch}.origin.{i}"))),
                    Domain::Time => names.extend(STAT_NAMES.iter().map(|s| format!("{ch}.time.{s}"))),
                    Domain::Frequency => names.extend(STAT_NAMES.iter().map(|s| format!("{ch}.freq.{s}"))),
                    Domain::TimeFreq => {
                        for band in 0..1usize << self.wpt_depth {
                            names.extend(STAT_NAMES.iter().map(|s| format!("{ch}.wpt{band}.{s}")));
                        }
                    }
                }
            }
        }
        names
    }
}

fn window_features(w: &WindowInstance, domains: &[Domain], cfg: &FeatureConfig, fft: &dyn Fft<f64>) -> Result<Vec<f64>> {
    let mut row = Vec::new();
    for &domain in domains {
        for ch in &w.values {
            match domain {
                Domain::Origin => row.extend_from_slice(ch),
                Domain::Time => row.extend(time_stats(ch)),
                Domain::Frequency => row.extend(time_stats(&magnitudes(fft, ch))),
                Domain::TimeFreq => row.extend(wpt_stats(ch, cfg.wpt_depth, cfg.wavelet)?),
            }
        }
    }
    Ok(row)
}

/// One feature row per window; columns grouped by domain, then channel.
pub fn featurize(
    windows: &[WindowInstance],
    config: &FeatureConfig,
    channel_names: &[String],
    classes: &ClassSet,
) -> Result<FeatureMatrix> {
    config.validate()?;
    let first = windows
        .first()
        .ok_or_else(|| Error::InvalidInput("no windows to featurize".into()))?;
    let (n_ch, len) = (first.n_channels(), first.len());
    if n_ch != channel_names.len() {
        return Err(Error::DimensionMismatch {
            expected: channel_names.len(),
            actual: n_ch,
        });
    }
    if let Some(bad) = windows
        .iter()
        .find(|w| w.n_channels() != n_ch || w.values.iter().any(|c| c.len() != len))
    {
        return Err(Error::InvalidInput(format!(
            "window at {} has inconsistent shape",
            bad.start_index
        )));
    }
    let domains = config.ordered_domains();
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft_forward(len.max(1));
    let rows = windows
        .par_iter()
        .map(|w| window_features(w, &domains, config, fft.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let names = config.feature_names(channel_names, len);
    let data = RowMatrix::from_rows(&rows)?;
    let labels = windows.iter().map(|w| w.label).collect();
    FeatureMatrix::new(data, labels, classes.clone(), names)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn naive_dft(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (t, &v) in x.iter().enumerate() {
                    let ang = -std::f64::consts::TAU * (k * t) as f64 / n as f64;
                    re += v * ang.cos();
                    im += v * ang.sin();
                }
                (re * re + im * im).sqrt()
            })
            .collect()
    }

    #[test]
    fn stats_of_one_to_four() {
        let s = time_stats(&[1.0, 2.0, 3.0, 4.0]);
        assert_abs_diff_eq!(s[0], 2.5);
        assert_abs_diff_eq!(s[1], 7.5f64.sqrt(), epsilon = 1e-12);
        assert_eq!((s[2], s[3], s[4], s[5]), (4.0, 1.0, 2.5, 3.0));
    }

    #[test]
    fn constant_segment_factors_are_one() {
        let s = time_stats(&[2.5; 7]);
        for v in &s[6..] {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn crest_of_mixed_signs() {
        let s = time_stats(&[3.0, -4.0]);
        assert_abs_diff_eq!(s[1], 12.5f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s[6], 1.13137, epsilon = 1e-5);
    }

    #[test]
    fn zero_segment_is_all_zero() {
        assert_eq!(time_stats(&[0.0; 5]), [0.0; 9]);
        assert_eq!(freq_stats(&[0.0; 5]), [0.0; 9]);
    }

    #[test]
    fn odd_median_is_middle() {
        assert_eq!(time_stats(&[5.0, 1.0, 3.0])[4], 3.0);
    }

    #[test]
    fn fft_simple_spectra() {
        let dc = fft_magnitude(&[1.0; 4]);
        let nyq = fft_magnitude(&[1.0, -1.0, 1.0, -1.0]);
        for (a, b) in dc.iter().zip([4.0, 0.0, 0.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        for (a, b) in nyq.iter().zip([0.0, 0.0, 4.0, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_signal_freq_max() {
        let s = freq_stats(&[0.5; 10]);
        assert_abs_diff_eq!(s[2], 5.0, epsilon = 1e-12);
    }

    #[test]
    fn two_sinusoids_peak_at_dominant_bin() {
        let n = 32;
        let x: Vec<f64> = (0..n)
            .map(|t| {
                let t = t as f64 / n as f64;
                3.0 * (std::f64::consts::TAU * 4.0 * t).sin() + (std::f64::consts::TAU * 9.0 * t).cos()
            })
            .collect();
        let oracle = naive_dft(&x);
        let peak = oracle.iter().copied().fold(0.0, f64::max);
        assert_abs_diff_eq!(freq_stats(&x)[2], peak, epsilon = 1e-9);
        assert_abs_diff_eq!(peak, 48.0, epsilon = 1e-9);
    }

    #[test]
    fn haar_depth_one() {
        let bands = wpt_decompose(&[3.0, 1.0], 1, Wavelet::Haar).unwrap();
        assert_abs_diff_eq!(bands[0][0], 4.0 / 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(bands[1][0], 2.0 / 2f64.sqrt(), epsilon = 1e-15);
        let bands = wpt_decompose(&[1.0; 4], 1, Wavelet::Haar).unwrap();
        assert!(bands[1].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wpt_too_short() {
        assert!(wpt_decompose(&[1.0; 7], 3, Wavelet::Haar).is_err());
        assert!(wpt_decompose(&[1.0; 8], 3, Wavelet::Haar).is_ok());
    }

    #[test]
    fn wpt_stats_shapes() {
        assert_eq!(wpt_stats(&[1.0; 16], 3, Wavelet::Haar).unwrap().len(), 72);
        assert!(wpt_stats(&[0.0; 16], 3, Wavelet::Haar).unwrap().iter().all(|&v| v == 0.0));
        let c = wpt_stats(&[2.0; 16], 3, Wavelet::Haar).unwrap();
        assert!(c[..9].iter().any(|&v| v != 0.0));
        assert!(c[9..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn wpt_odd_length_uses_periodic_extension() {
        let bands = wpt_decompose(&[1.0, 2.0, 3.0], 1, Wavelet::Haar).unwrap();
        assert_eq!(bands[0].len(), 2);
        assert_abs_diff_eq!(bands[1][1], (3.0 - 1.0) / 2f64.sqrt(), epsilon = 1e-15);
    }

    fn window(n_ch: usize, len: usize) -> WindowInstance {
        WindowInstance {
            start_index: 0,
            values: (0..n_ch).map(|c| (0..len).map(|i| (i * (c + 1)) as f64).collect()).collect(),
            label: 0,
        }
    }

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|c| format!("ch{c}")).collect()
    }

    #[test]
    fn featurize_widths() {
        let classes = ClassSet::new(["N"]);
        let cfg = FeatureConfig::default();
        let m = featurize(&[window(28, 16)], &cfg, &names(28), &classes).unwrap();
        assert_eq!(m.n_cols(), 252);
        assert_eq!(m.feature_names()[1], "ch0.time.rms");
        let cfg = FeatureConfig {
            domains: vec![Domain::Frequency, Domain::Time],
            ..Default::default()
        };
        let m = featurize(&[window(8, 20)], &cfg, &names(8), &classes).unwrap();
        assert_eq!(m.n_cols(), 144);
        assert_eq!(m.feature_names()[0], "ch0.time.mean");
        let cfg = FeatureConfig {
            domains: vec![Domain::Origin],
            ..Default::default()
        };
        let m = featurize(&[window(2, 20)], &cfg, &names(2), &classes).unwrap();
        assert_eq!(m.n_cols(), 40);
        let cfg = FeatureConfig {
            domains: FeatureConfig::parse_domains("timefreq").unwrap(),
            ..Default::default()
        };
        let m = featurize(&[window(2, 20)], &cfg, &names(2), &classes).unwrap();
        assert_eq!(m.n_cols(), 144);
        assert_eq!(m.feature_names()[9], "ch0.wpt1.mean");
    }

    #[test]
    fn featurize_rejects_inconsistent_channels() {
        let classes = ClassSet::new(["N"]);
        let err = featurize(&[window(2, 8), window(3, 8)], &FeatureConfig::default(), &names(2), &classes);
        assert!(err.is_err());
        assert!(featurize(&[], &FeatureConfig::default(), &names(2), &classes).is_err());
    }

    #[test]
    fn domain_parsing() {
        assert!(FeatureConfig::parse_domains("time,bogus").is_err());
        assert_eq!(FeatureConfig::parse_domains("time,frequency").unwrap().len(), 2);
    }

    proptest! {
        #[test]
        fn stats_permutation_invariant(mut xs in prop::collection::vec(-100.0f64..100.0, 2..40), seed in any::<u64>()) {
            let a = time_stats(&xs);
            crate::rng::seeded_rng(seed).shuffle(&mut xs);
            let b = time_stats(&xs);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs()));
            }
        }

        #[test]
        fn stats_scale_property(xs in prop::collection::vec(-100.0f64..100.0, 2..40), s in 0.01f64..100.0) {
            prop_assume!(xs.iter().any(|x| x.abs() > 1e-3));
            let a = time_stats(&xs);
            let scaled: Vec<f64> = xs.iter().map(|x| x * s).collect();
            let b = time_stats(&scaled);
            for i in 0..6 {
                prop_assert!((b[i] - s * a[i]).abs() <= 1e-9 * (1.0 + (s * a[i]).abs()));
            }
            for i in 6..9 {
                prop_assert!((b[i] - a[i]).abs() <= 1e-9 * (1.0 + a[i].abs()));
            }
        }

        #[test]
        fn fft_matches_naive(xs in prop::collection::vec(-10.0f64..10.0, 2..=64)) {
            let fast = fft_magnitude(&xs);
            let slow = naive_dft(&xs);
            for (a, b) in fast.iter().zip(&slow) {
                prop_assert!((a - b).abs() < 1e-9);
            }
        }
    }
}
