//! Confusion matrices and imbalance-aware scores.
//!
//! Undefined ratios (0/0) evaluate to 0 and set the `degenerate` flag of the
//! report row they belong to.

use serde::{Deserialize, Serialize};

use crate::data::RowMatrix;
use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    n: usize,
    counts: Vec<usize>,
}

impl ConfusionMatrix {
    pub fn zeros(n_classes: usize) -> Self {
        Self {
            n: n_classes,
            counts: vec![0; n_classes * n_classes],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n
    }

    pub fn get(&self, truth: usize, pred: usize) -> usize {
        self.counts[truth * self.n + pred]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        (0..self.n).map(|t| (0..self.n).map(|p| self.get(t, p)).sum()).collect()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: other.n,
            });
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        Ok(())
    }

    /// Collapse to `positive` vs everything else.
    pub fn one_vs_rest(&self, positive: usize) -> BinaryCounts {
        let mut b = BinaryCounts::default();
        for t in 0..self.n {
            for p in 0..self.n {
                let v = self.get(t, p);
                match (t == positive, p == positive) {
                    (true, true) => b.tp += v,
                    (true, false) => b.fn_ += v,
                    (false, true) => b.fp += v,
                    (false, false) => b.tn += v,
                }
            }
        }
        b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BinaryCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

pub fn confusion(truth: &[usize], pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if truth.len() != pred.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: pred.len(),
        });
    }
    let mut cm = ConfusionMatrix::zeros(n_classes);
    for (&t, &p) in truth.iter().zip(pred) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::InvalidInput(format!("label outside {n_classes} classes")));
        }
        cm.counts[t * n_classes + p] += 1;
    }
    Ok(cm)
}

fn ratio(num: f64, den: f64, degenerate: &mut bool) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        *degenerate = true;
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub degenerate: bool,
}

pub fn precision_recall_f(cm: &ConfusionMatrix, positive: usize) -> Prf {
    prf_counts(cm.one_vs_rest(positive))
}

pub fn prf_counts(b: BinaryCounts) -> Prf {
    let mut degenerate = false;
    let precision = ratio(b.tp as f64, (b.tp + b.fp) as f64, &mut degenerate);
    let recall = ratio(b.tp as f64, (b.tp + b.fn_) as f64, &mut degenerate);
    let f_measure = ratio(2.0 * precision * recall, precision + recall, &mut degenerate);
    Prf {
        precision,
        recall,
        f_measure,
        degenerate,
    }
}

/// `(TP·TN − FP·FN) / √((TP+FP)(TP+FN)(TN+FP)(TN+FN))`; 0 when undefined.
pub fn mcc(b: BinaryCounts) -> f64 {
    let (tp, fp, fn_, tn) = (b.tp as f64, b.fp as f64, b.fn_ as f64, b.tn as f64);
    let den = ((tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_)).sqrt();
    if den > 0.0 {
        (tp * tn - fp * fn_) / den
    } else {
        0.0
    }
}

pub fn fam(f_measure: f64, auc: f64, mcc: f64) -> f64 {
    (f_measure + auc + mcc) / 3.0
}

/// ROC curve as `(FPR, TPR)` pairs, thresholding at each distinct score in
/// descending order, from `(0, 0)` to `(1, 1)`. A class with no positives
/// (or no negatives) keeps that rate at 0.
pub fn roc_points(truth: &[bool], scores: &[f64]) -> Result<Vec<(f64, f64)>> {
    if truth.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: scores.len(),
        });
    }
    let pos = truth.iter().filter(|&&t| t).count() as f64;
    let neg = truth.len() as f64 - pos;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let rate = |v: f64, total: f64| if total > 0.0 { v / total } else { 0.0 };
    let mut points = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0.0, 0.0);
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        while i < order.len() && scores[order[i]] == s {
            if truth[order[i]] {
                tp += 1.0;
            } else {
                fp += 1.0;
            }
            i += 1;
        }
        points.push((rate(fp, neg), rate(tp, pos)));
    }
    if points.last() != Some(&(1.0, 1.0)) {
        points.push((1.0, 1.0));
    }
    Ok(points)
}

/// Mann–Whitney AUC with half credit for tied scores; 0 when one class is
/// missing.
pub fn auc(truth: &[bool], scores: &[f64]) -> Result<f64> {
    if truth.len() != scores.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: scores.len(),
        });
    }
    let pos = truth.iter().filter(|&&t| t).count();
    let neg = truth.len() - pos;
    if pos == 0 || neg == 0 {
        return Ok(0.0);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j share their average.
        let avg = (i + 1 + j) as f64 / 2.0;
        rank_sum += avg * order[i..j].iter().filter(|&&k| truth[k]).count() as f64;
        i = j;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// Trapezoidal area under a ROC polyline.
pub fn trapezoid_area(points: &[(f64, f64)]) -> f64 {
    points.windows(2).map(|w| (w[1].0 - w[0].0) * (w[1].1 + w[0].1) / 2.0).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub support: usize,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub auc: f64,
    pub mcc: f64,
    pub fam: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacroMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub auc: f64,
    pub mcc: f64,
    pub fam: f64,
}

impl MacroMetrics {
    pub fn mean_of(rows: &[ClassMetrics]) -> MacroMetrics {
        let n = rows.len().max(1) as f64;
        let avg = |f: fn(&ClassMetrics) -> f64| rows.iter().map(f).sum::<f64>() / n;
        MacroMetrics {
            precision: avg(|r| r.precision),
            recall: avg(|r| r.recall),
            f_measure: avg(|r| r.f_measure),
            auc: avg(|r| r.auc),
            mcc: avg(|r| r.mcc),
            fam: avg(|r| r.fam),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_class: Vec<ClassMetrics>,
    /// Unweighted mean over classes with non-zero support.
    pub macro_avg: MacroMetrics,
    pub confusion: ConfusionMatrix,
}

/// One-vs-rest metrics for every class; `scores` column `c` is the score for
/// class `c`.
pub fn macro_metrics(truth: &[usize], scores: &RowMatrix) -> Result<MetricsReport> {
    if truth.len() != scores.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            actual: scores.n_rows(),
        });
    }
    let n_classes = scores.n_cols();
    let pred: Vec<usize> = scores.rows().map(crate::classifier::argmax).collect();
    let cm = confusion(truth, &pred, n_classes)?;
    let support = cm.row_sums();
    let mut per_class = Vec::with_capacity(n_classes);
    for c in 0..n_classes {
        let b = cm.one_vs_rest(c);
        let prf = prf_counts(b);
        let is_c: Vec<bool> = truth.iter().map(|&t| t == c).collect();
        let col = scores.column(c);
        let a = auc(&is_c, &col)?;
        let m = mcc(b);
        let auc_undefined = support[c] == 0 || support[c] == truth.len();
        per_class.push(ClassMetrics {
            class: c,
            support: support[c],
            precision: prf.precision,
            recall: prf.recall,
            f_measure: prf.f_measure,
            auc: a,
            mcc: m,
            fam: fam(prf.f_measure, a, m),
            degenerate: prf.degenerate || auc_undefined,
        });
    }
    let supported: Vec<ClassMetrics> = per_class.iter().filter(|r| r.support > 0).cloned().collect();
    Ok(MetricsReport {
        macro_avg: MacroMetrics::mean_of(&supported),
        per_class,
        confusion: cm,
    })
}
