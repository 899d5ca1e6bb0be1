//! Window predictions to fault events, same-label merging and tick-level
//! error counts.

use serde::{Deserialize, Serialize};

use crate::data::{ClassSet, FaultEvent};
use crate::error::{Error, Result};

/// One event `[t(start), t(start + L − 1)]` per window predicted as a fault.
pub fn windows_to_events(
    predictions: &[usize],
    starts: &[usize],
    window_len: usize,
    timestamps: &[f64],
    classes: &ClassSet,
    normal: usize,
) -> Result<Vec<FaultEvent>> {
    if predictions.len() != starts.len() {
        return Err(Error::DimensionMismatch {
            expected: starts.len(),
            actual: predictions.len(),
        });
    }
    if window_len == 0 {
        return Err(Error::Config("window length must be >= 1".into()));
    }
    let mut out = Vec::new();
    for (&p, &s) in predictions.iter().zip(starts) {
        if p == normal {
            continue;
        }
        let end = s + window_len - 1;
        if end >= timestamps.len() {
            return Err(Error::InvalidInput(format!(
                "window at {s} of length {window_len} exceeds {} ticks",
                timestamps.len()
            )));
        }
        if p >= classes.len() {
            return Err(Error::InvalidInput(format!("label id {p} outside class set")));
        }
        out.push(FaultEvent::new(timestamps[s], timestamps[end], classes.name(p))?);
    }
    Ok(out)
}

/// Merge overlapping (inclusive) events of the same label until none remain.
/// Touching-but-disjoint events stay separate. Output is sorted by
/// `(t_start, label, t_end)`.
pub fn merge_events(events: &[FaultEvent]) -> Vec<FaultEvent> {
    let mut sorted = events.to_vec();
    sorted.sort_by(|a, b| {
        a.label
            .cmp(&b.label)
            .then(a.t_start.total_cmp(&b.t_start))
            .then(a.t_end.total_cmp(&b.t_end))
    });
    let mut out: Vec<FaultEvent> = Vec::new();
    for e in sorted {
        match out.last_mut() {
            Some(last) if last.label == e.label && e.t_start <= last.t_end => {
                last.t_end = last.t_end.max(e.t_end);
            }
            _ => out.push(e),
        }
    }
    out.sort_by(|a, b| {
        a.t_start
            .total_cmp(&b.t_start)
            .then(a.label.cmp(&b.label))
            .then(a.t_end.total_cmp(&b.t_end))
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EventConfusion {
    /// Truly faulty ticks not covered by a predicted event of that label.
    pub fn_ticks: usize,
    /// Ticks covered by a predicted event (counted per predicted label) that
    /// lie outside every true interval of that label.
    pub fp_ticks: usize,
}

/// Tick-level comparison over `timestamps`.
pub fn event_confusion(predicted: &[FaultEvent], truth: &[FaultEvent], timestamps: &[f64]) -> EventConfusion {
    let mut labels: Vec<&str> = predicted.iter().chain(truth).map(|e| e.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    let covers = |set: &[FaultEvent], label: &str, t: f64| set.iter().any(|e| e.label == label && e.contains(t));
    let mut out = EventConfusion::default();
    for &t in timestamps {
        for &label in &labels {
            let is_true = covers(truth, label, t);
            let is_pred = covers(predicted, label, t);
            if is_true && !is_pred {
                out.fn_ticks += 1;
            }
            if is_pred && !is_true {
                out.fp_ticks += 1;
            }
        }
    }
    out
}
