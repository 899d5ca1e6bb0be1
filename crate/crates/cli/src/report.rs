//! CSV report files. Floats use Rust's shortest round-trip formatting, so
//! identical runs give byte-identical files.

use std::fs::File;
use std::path::{Path, PathBuf};

use imbalearn::metrics::{ClassMetrics, MacroMetrics};
use imbalearn::pipeline::EventReport;
use imbalearn::{ClassSet, CrossValReport, Error, Result};

pub const METRIC_COLUMNS: [&str; 7] = ["support", "precision", "recall", "f_measure", "auc", "mcc", "fam"];

fn writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn class_cells(m: &ClassMetrics) -> Vec<String> {
    [m.precision, m.recall, m.f_measure, m.auc, m.mcc, m.fam]
        .iter()
        .map(f64::to_string)
        .collect()
}

fn macro_cells(m: &MacroMetrics) -> Vec<String> {
    [m.precision, m.recall, m.f_measure, m.auc, m.mcc, m.fam]
        .iter()
        .map(f64::to_string)
        .collect()
}

/// Class name reduced to characters safe in a file name.
pub fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Write the cross-validation report files into `dir` and return their paths.
pub fn write_crossval(dir: &Path, method: &str, report: &CrossValReport) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let classes = &report.classes;
    let mut written = Vec::new();

    let path = dir.join("metrics_per_fold.csv");
    let mut w = writer(&path)?;
    let mut header = vec!["fold", "class", "n_train", "n_test", "n_synthetic"];
    header.extend(METRIC_COLUMNS);
    header.push("degenerate");
    w.write_record(&header)?;
    for f in &report.folds {
        let lead = [f.fold.to_string(), f.n_train.to_string(), f.n_test.to_string(), f.n_synthetic.to_string()];
        for m in &f.metrics.per_class {
            let mut row = vec![lead[0].clone(), classes.name(m.class).to_string()];
            row.extend_from_slice(&lead[1..]);
            row.push(m.support.to_string());
            row.extend(class_cells(m));
            row.push((m.degenerate as u8).to_string());
            w.write_record(&row)?;
        }
        let mut row = vec![lead[0].clone(), "macro".to_string()];
        row.extend_from_slice(&lead[1..]);
        row.push(f.n_test.to_string());
        row.extend(macro_cells(&f.metrics.macro_avg));
        row.push(String::new());
        w.write_record(&row)?;
    }
    finish(w, &path)?;
    written.push(path);

    let path = dir.join("metrics_mean.csv");
    let mut w = writer(&path)?;
    let mut header = vec!["method", "class"];
    header.extend(METRIC_COLUMNS);
    w.write_record(&header)?;
    for m in &report.mean_per_class {
        let mut row = vec![method.to_string(), classes.name(m.class).to_string(), m.support.to_string()];
        row.extend(class_cells(m));
        w.write_record(&row)?;
    }
    let mut row = vec![method.to_string(), "macro".to_string(), report.truth.len().to_string()];
    row.extend(macro_cells(&report.mean_macro));
    w.write_record(&row)?;
    finish(w, &path)?;
    written.push(path);

    let path = dir.join("confusion.csv");
    write_confusion(&path, classes, |t, p| report.pooled_confusion.get(t, p))?;
    written.push(path);

    for c in 0..classes.len() {
        let path = dir.join(format!("roc_{}.csv", file_stem(classes.name(c))));
        let mut w = writer(&path)?;
        w.write_record(["fpr", "tpr"])?;
        for (fpr, tpr) in report.roc(c)? {
            w.write_record([fpr.to_string(), tpr.to_string()])?;
        }
        finish(w, &path)?;
        written.push(path);
    }
    Ok(written)
}

/// Rows are true classes, columns predicted classes.
fn write_confusion(path: &Path, classes: &ClassSet, get: impl Fn(usize, usize) -> usize) -> Result<()> {
    let mut w = writer(path)?;
    let mut header = vec!["truth".to_string()];
    header.extend(classes.names().iter().cloned());
    w.write_record(&header)?;
    for t in 0..classes.len() {
        let mut row = vec![classes.name(t).to_string()];
        row.extend((0..classes.len()).map(|p| get(t, p).to_string()));
        w.write_record(&row)?;
    }
    finish(w, path)
}

/// `events.csv`, `event_report.csv` and `windows.csv` in `dir`.
pub fn write_events(dir: &Path, report: &EventReport, timestamps: &[f64]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let events = dir.join("events.csv");
    imbalearn::ingestion::write_intervals_csv(&events, &report.events)?;

    let summary = dir.join("event_report.csv");
    let mut w = writer(&summary)?;
    w.write_record(["n_events", "faulty_ticks", "fn_ticks", "fp_ticks"])?;
    w.write_record([
        report.events.len().to_string(),
        report.faulty_ticks.to_string(),
        report.confusion.fn_ticks.to_string(),
        report.confusion.fp_ticks.to_string(),
    ])?;
    finish(w, &summary)?;

    let windows = dir.join("windows.csv");
    let mut w = writer(&windows)?;
    w.write_record(["window_start", "prediction"])?;
    for (&s, p) in report.window_starts.iter().zip(&report.window_predictions) {
        w.write_record([timestamps[s].to_string(), p.clone()])?;
    }
    finish(w, &windows)?;
    Ok(vec![events, summary, windows])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems_are_file_safe() {
        assert_eq!(file_stem("fault/1 a"), "fault_1_a");
        assert_eq!(file_stem("f-2_b"), "f-2_b");
    }

    #[test]
    fn confusion_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let classes = ClassSet::new(["normal", "f1"]);
        write_confusion(&path, &classes, |t, p| 10 * t + p).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "truth,f1,normal\nf1,0,1\nnormal,10,11\n");
    }
}
