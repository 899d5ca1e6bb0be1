//! Fixed-length sliding windows over a labeled series.

use std::str::FromStr;

use crate::data::WindowInstance;
use crate::error::{Error, Result};
use crate::ingestion::LabeledSeries;

/// How a window's label is derived from its per-timestamp labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelRule {
    /// Most frequent label; ties prefer a fault over normal, then the lower id.
    #[default]
    Majority,
    /// Any faulty timestamp makes the window faulty (most frequent fault).
    AnyFault,
    /// Label of the middle timestamp (`len / 2`).
    Midpoint,
}

impl FromStr for LabelRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "majority" => Ok(LabelRule::Majority),
            "any_fault" | "any-fault" => Ok(LabelRule::AnyFault),
            "midpoint" => Ok(LabelRule::Midpoint),
            other => Err(Error::Config(format!("unknown label rule `{other}`"))),
        }
    }
}

impl std::fmt::Display for LabelRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LabelRule::Majority => "majority",
            LabelRule::AnyFault => "any_fault",
            LabelRule::Midpoint => "midpoint",
        })
    }
}

/// Most frequent fault label in the slice, ties to the lower id.
fn dominant_fault(counts: &[usize], normal: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (id, &n) in counts.iter().enumerate() {
        if id == normal || n == 0 {
            continue;
        }
        if best.is_none_or(|(_, bn)| n > bn) {
            best = Some((id, n));
        }
    }
    best
}

/// Label a window from its per-timestamp labels.
pub fn window_label(labels: &[usize], n_classes: usize, normal: usize, rule: LabelRule) -> Result<usize> {
    if labels.is_empty() {
        return Err(Error::InvalidInput("empty window".into()));
    }
    if rule == LabelRule::Midpoint {
        return Ok(labels[labels.len() / 2]);
    }
    let mut counts = vec![0usize; n_classes.max(normal + 1)];
    for &l in labels {
        if l >= counts.len() {
            return Err(Error::InvalidInput(format!("label id {l} outside {n_classes} classes")));
        }
        counts[l] += 1;
    }
    let fault = dominant_fault(&counts, normal);
    Ok(match (rule, fault) {
        (_, None) => normal,
        (LabelRule::AnyFault, Some((id, _))) => id,
        (_, Some((id, n))) => {
            let tied_faults = counts
                .iter()
                .enumerate()
                .filter(|&(c, &k)| c != normal && k == n)
                .count();
            if tied_faults > 1 {
                log::debug!("ambiguous window: {tied_faults} fault labels tie at {n}");
            }
            if n >= counts[normal] {
                id
            } else {
                normal
            }
        }
    })
}

/// Windows start at 0, N, 2N, … while `start + L <= len`; partial tails are dropped.
pub fn segment(series: &LabeledSeries, window_len: usize, slide_len: usize, rule: LabelRule) -> Result<Vec<WindowInstance>> {
    let len = series.frame.len();
    if slide_len == 0 {
        return Err(Error::Config("slide length must be >= 1".into()));
    }
    if window_len == 0 || window_len > len {
        return Err(Error::Config(format!(
            "window length {window_len} must be in 1..={len}"
        )));
    }
    let n_classes = series.classes.len();
    (0..=len - window_len)
        .step_by(slide_len)
        .map(|start| {
            let end = start + window_len;
            let values = series
                .frame
                .channels()
                .iter()
                .map(|c| c[start..end].to_vec())
                .collect();
            let label = window_label(&series.labels[start..end], n_classes, series.normal, rule)?;
            Ok(WindowInstance {
                start_index: start,
                values,
                label,
            })
        })
        .collect()
}

/// `floor((T - L) / N) + 1` for `T >= L`, else 0.
pub fn window_count(len: usize, window_len: usize, slide_len: usize) -> usize {
    if len < window_len || slide_len == 0 {
        0
    } else {
        (len - window_len) / slide_len + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ClassSet, TimeSeriesFrame};
    use proptest::prelude::*;

    // classes: F=0, F2=1, N=2
    const F: usize = 0;
    const F2: usize = 1;
    const N: usize = 2;

    fn series(labels: Vec<usize>) -> LabeledSeries {
        let t: Vec<f64> = (0..labels.len()).map(|i| i as f64).collect();
        let ch: Vec<f64> = t.iter().map(|v| v * 10.0).collect();
        let frame = TimeSeriesFrame::new(t, vec!["a".into()], vec![ch]).unwrap();
        LabeledSeries::new(frame, labels, ClassSet::new(["F", "F2", "N"]), N).unwrap()
    }

    #[test]
    fn window_starts() {
        let w = segment(&series(vec![N; 10]), 4, 2, LabelRule::Majority).unwrap();
        let starts: Vec<usize> = w.iter().map(|w| w.start_index).collect();
        assert_eq!(starts, vec![0, 2, 4, 6]);
    }

    #[test]
    fn reference_window_geometries() {
        assert_eq!(window_count(1000, 106, 20), (1000 - 106) / 20 + 1);
        assert_eq!(window_count(1000, 20, 5), 197);
        let w = segment(&series(vec![N; 200]), 106, 20, LabelRule::Majority).unwrap();
        assert_eq!(w.len(), 5);
        assert!(w.iter().all(|w| w.len() == 106));
    }

    #[test]
    fn too_long_window_errors() {
        assert!(segment(&series(vec![N; 3]), 4, 1, LabelRule::Majority).is_err());
        assert!(segment(&series(vec![N; 3]), 2, 0, LabelRule::Majority).is_err());
    }

    #[test]
    fn majority_rule() {
        assert_eq!(window_label(&[N, N, F, F, F], 3, N, LabelRule::Majority).unwrap(), F);
        assert_eq!(window_label(&[N, N, N, F], 3, N, LabelRule::Majority).unwrap(), N);
    }

    #[test]
    fn majority_tie_goes_to_fault() {
        assert_eq!(window_label(&[N, F], 3, N, LabelRule::Majority).unwrap(), F);
    }

    #[test]
    fn two_faults_tie_to_lower_id() {
        assert_eq!(window_label(&[F2, F, N], 3, N, LabelRule::Majority).unwrap(), F);
        assert_eq!(window_label(&[F2, F2, F, N], 3, N, LabelRule::Majority).unwrap(), F2);
    }

    #[test]
    fn any_fault_rule() {
        assert_eq!(window_label(&[N, N, N, N], 3, N, LabelRule::AnyFault).unwrap(), N);
        assert_eq!(window_label(&[N, N, N, F2], 3, N, LabelRule::AnyFault).unwrap(), F2);
    }

    #[test]
    fn midpoint_rule() {
        assert_eq!(window_label(&[N, F, N], 3, N, LabelRule::Midpoint).unwrap(), F);
        assert_eq!(window_label(&[N, N, F, F], 3, N, LabelRule::Midpoint).unwrap(), F);
    }

    #[test]
    fn unknown_rule_is_config_error() {
        assert!(matches!("mode".parse::<LabelRule>(), Err(Error::Config(_))));
        assert_eq!("any_fault".parse::<LabelRule>().unwrap(), LabelRule::AnyFault);
    }

    proptest! {
        #[test]
        fn count_and_contiguity(t in 1usize..80, l in 1usize..30, n in 1usize..12) {
            prop_assume!(l <= t);
            let s = series(vec![N; t]);
            let w = segment(&s, l, n, LabelRule::Majority).unwrap();
            prop_assert_eq!(w.len(), (t - l) / n + 1);
            for win in &w {
                prop_assert_eq!(&win.values[0][..], &s.frame.channel(0)[win.start_index..win.start_index + l]);
            }
        }
    }
}
