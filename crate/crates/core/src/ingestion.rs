//! CSV readers and writers for time series, fault intervals and feature
//! matrices, plus the interval-to-timestamp labeling join.
//!
//! All files are UTF-8, comma separated, with a header row. Reals are written
//! with Rust's shortest round-trip formatting, so write → read is bit-exact.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::data::{ClassSet, FaultInterval, FeatureMatrix, RowMatrix, TimeSeriesFrame};
use crate::error::{Error, Result};

pub const DEFAULT_NORMAL_LABEL: &str = "normal";

/// Which columns of a time-series file to read.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesSchema {
    pub timestamp: String,
    /// `None` reads every non-timestamp column (except `label`) in file order.
    pub channels: Option<Vec<String>>,
}

impl Default for TimeSeriesSchema {
    fn default() -> Self {
        Self {
            timestamp: "timestamp".into(),
            channels: None,
        }
    }
}

/// A frame with one class label per timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub frame: TimeSeriesFrame,
    pub labels: Vec<usize>,
    pub classes: ClassSet,
    pub normal: usize,
}

impl LabeledSeries {
    pub fn new(frame: TimeSeriesFrame, labels: Vec<usize>, classes: ClassSet, normal: usize) -> Result<Self> {
        if labels.len() != frame.len() {
            return Err(Error::DimensionMismatch {
                expected: frame.len(),
                actual: labels.len(),
            });
        }
        if normal >= classes.len() || labels.iter().any(|&l| l >= classes.len()) {
            return Err(Error::InvalidInput("label id outside class set".into()));
        }
        Ok(Self {
            frame,
            labels,
            classes,
            normal,
        })
    }

    pub fn normal_label(&self) -> &str {
        self.classes.name(self.normal)
    }

    /// Re-express labels against a superset of classes.
    pub fn with_classes(&self, classes: &ClassSet) -> Result<LabeledSeries> {
        let labels = self.classes.remap(&self.labels, classes)?;
        let normal = classes
            .id(self.normal_label())
            .ok_or_else(|| Error::InvalidInput("normal label missing from target set".into()))?;
        Ok(LabeledSeries {
            frame: self.frame.clone(),
            labels,
            classes: classes.clone(),
            normal,
        })
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

fn parse_real(cell: &str, row: usize, column: &str) -> Result<f64> {
    let trimmed = cell.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse {
            row,
            column: column.to_string(),
            message: "blank cell".into(),
        });
    }
    let v: f64 = trimmed.parse().map_err(|_| Error::Parse {
        row,
        column: column.to_string(),
        message: format!("not a number: `{trimmed}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            row,
            column: column.to_string(),
            message: format!("non-finite value `{trimmed}`"),
        });
    }
    Ok(v)
}

fn column_index(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::Schema(format!("missing column `{name}`")))
}

fn line_of(record: &csv::StringRecord, fallback: usize) -> usize {
    record.position().map_or(fallback, |p| p.line() as usize)
}

/// Read a time series from any reader; see [`read_timeseries_csv`].
pub fn read_timeseries<R: Read>(reader: R, schema: &TimeSeriesSchema) -> Result<TimeSeriesFrame> {
    read_timeseries_with_labels(reader, schema, None).map(|(f, _)| f)
}

fn read_timeseries_with_labels<R: Read>(
    reader: R,
    schema: &TimeSeriesSchema,
    label_column: Option<&str>,
) -> Result<(TimeSeriesFrame, Vec<String>)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let ts_idx = column_index(&headers, &schema.timestamp)?;
    let label_idx = label_column.map(|l| column_index(&headers, l)).transpose()?;
    let channel_names: Vec<String> = match &schema.channels {
        Some(cols) => cols.clone(),
        None => headers
            .iter()
            .enumerate()
            .filter(|(i, h)| *i != ts_idx && Some(*i) != label_idx && h.trim() != "label")
            .map(|(_, h)| h.trim().to_string())
            .collect(),
    };
    let channel_idx = channel_names
        .iter()
        .map(|c| column_index(&headers, c))
        .collect::<Result<Vec<_>>>()?;

    let mut rows: Vec<(f64, Vec<f64>, String)> = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let record = record?;
        let line = line_of(&record, n + 2);
        let cell = |i: usize| record.get(i).unwrap_or("");
        let t = parse_real(cell(ts_idx), line, &schema.timestamp)?;
        let values = channel_idx
            .iter()
            .zip(&channel_names)
            .map(|(&i, name)| parse_real(cell(i), line, name))
            .collect::<Result<Vec<_>>>()?;
        let label = label_idx.map(|i| cell(i).trim().to_string()).unwrap_or_default();
        rows.push((t, values, label));
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateTimestamp(w[0].0));
    }

    let timestamps: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mut channels = vec![Vec::with_capacity(rows.len()); channel_names.len()];
    let mut labels = Vec::with_capacity(rows.len());
    for (_, values, label) in rows {
        for (c, v) in values.into_iter().enumerate() {
            channels[c].push(v);
        }
        labels.push(label);
    }
    Ok((TimeSeriesFrame::new(timestamps, channel_names, channels)?, labels))
}

/// Read a time-series CSV. Rows are sorted by timestamp; duplicates fail.
pub fn read_timeseries_csv(path: impl AsRef<Path>, schema: &TimeSeriesSchema) -> Result<TimeSeriesFrame> {
    read_timeseries(open(path.as_ref())?, schema)
}

pub fn write_timeseries<W: Write>(writer: W, frame: &TimeSeriesFrame) -> Result<()> {
    write_series_rows(writer, frame, None)
}

pub fn write_timeseries_csv(path: impl AsRef<Path>, frame: &TimeSeriesFrame) -> Result<()> {
    write_timeseries(create(path.as_ref())?, frame)
}

fn write_series_rows<W: Write>(writer: W, frame: &TimeSeriesFrame, labels: Option<&LabeledSeries>) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["timestamp".to_string()];
    header.extend(frame.channel_names().iter().cloned());
    if labels.is_some() {
        header.push("label".into());
    }
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..frame.len() {
        record.clear();
        record.push(frame.timestamps()[i].to_string());
        for c in 0..frame.n_channels() {
            record.push(frame.channel(c)[i].to_string());
        }
        if let Some(s) = labels {
            record.push(s.classes.name(s.labels[i]).to_string());
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Write a labeled series as `timestamp,<channels…>,label`.
pub fn write_labeled_series<W: Write>(writer: W, series: &LabeledSeries) -> Result<()> {
    write_series_rows(writer, &series.frame, Some(series))
}

pub fn write_labeled_series_csv(path: impl AsRef<Path>, series: &LabeledSeries) -> Result<()> {
    write_labeled_series(create(path.as_ref())?, series)
}

/// Read a file written by [`write_labeled_series`].
pub fn read_labeled_series<R: Read>(reader: R, normal_label: &str) -> Result<LabeledSeries> {
    let (frame, labels) = read_timeseries_with_labels(reader, &TimeSeriesSchema::default(), Some("label"))?;
    let classes = ClassSet::new(labels.iter().cloned().chain([normal_label.to_string()]));
    let ids = classes.encode(&labels)?;
    let normal = classes.id(normal_label).expect("normal label inserted");
    LabeledSeries::new(frame, ids, classes, normal)
}

pub fn read_labeled_series_csv(path: impl AsRef<Path>, normal_label: &str) -> Result<LabeledSeries> {
    read_labeled_series(open(path.as_ref())?, normal_label)
}

/// Read intervals with header exactly `t_start,t_end,label`.
pub fn read_intervals<R: Read>(reader: R) -> Result<Vec<FaultInterval>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        None => return Ok(Vec::new()),
        Some(h) => h?,
    };
    let names: Vec<&str> = header.iter().map(str::trim).collect();
    if names != ["t_start", "t_end", "label"] {
        return Err(Error::Schema(format!(
            "interval file header must be `t_start,t_end,label`, got `{}`",
            names.join(",")
        )));
    }
    let mut out = Vec::new();
    for (n, record) in records.enumerate() {
        let record = record?;
        let line = line_of(&record, n + 2);
        let t_start = parse_real(record.get(0).unwrap_or(""), line, "t_start")?;
        let t_end = parse_real(record.get(1).unwrap_or(""), line, "t_end")?;
        let label = record.get(2).unwrap_or("").trim();
        if label.is_empty() {
            return Err(Error::Parse {
                row: line,
                column: "label".into(),
                message: "blank label".into(),
            });
        }
        out.push(FaultInterval::new(t_start, t_end, label).map_err(|e| match e {
            Error::InvalidInterval(m) => Error::InvalidInterval(format!("row {line}: {m}")),
            other => other,
        })?);
    }
    Ok(out)
}

pub fn read_intervals_csv(path: impl AsRef<Path>) -> Result<Vec<FaultInterval>> {
    read_intervals(open(path.as_ref())?)
}

pub fn write_intervals<W: Write>(writer: W, intervals: &[FaultInterval]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["t_start", "t_end", "label"])?;
    for iv in intervals {
        w.write_record([iv.t_start.to_string(), iv.t_end.to_string(), iv.label.clone()])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn write_intervals_csv(path: impl AsRef<Path>, intervals: &[FaultInterval]) -> Result<()> {
    write_intervals(create(path.as_ref())?, intervals)
}

/// Merge overlapping same-label intervals; different-label overlap fails.
pub fn normalize_intervals(intervals: &[FaultInterval]) -> Result<Vec<FaultInterval>> {
    let mut sorted: Vec<FaultInterval> = intervals.to_vec();
    sorted.sort_by(|a, b| a.t_start.total_cmp(&b.t_start).then(a.t_end.total_cmp(&b.t_end)));
    let mut merged: Vec<FaultInterval> = Vec::with_capacity(sorted.len());
    for iv in sorted {
        // Earlier intervals that still reach into this one.
        for prev in merged.iter().rev() {
            if prev.t_end < iv.t_start {
                continue;
            }
            if prev.overlaps(&iv) && prev.label != iv.label {
                return Err(Error::LabelConflict(format!(
                    "[{}, {}] `{}` overlaps [{}, {}] `{}`",
                    prev.t_start, prev.t_end, prev.label, iv.t_start, iv.t_end, iv.label
                )));
            }
        }
        match merged.iter_mut().rev().find(|p| p.label == iv.label && p.overlaps(&iv)) {
            Some(p) => p.t_end = p.t_end.max(iv.t_end),
            None => merged.push(iv),
        }
    }
    Ok(merged)
}

/// Label each timestamp by the interval containing it (bounds inclusive),
/// otherwise `default_label`.
pub fn label_timestamps(
    frame: &TimeSeriesFrame,
    intervals: &[FaultInterval],
    default_label: &str,
) -> Result<LabeledSeries> {
    let merged = normalize_intervals(intervals)?;
    let classes = ClassSet::new(
        merged
            .iter()
            .map(|iv| iv.label.clone())
            .chain([default_label.to_string()]),
    );
    let normal = classes.id(default_label).expect("default label inserted");
    let ids: Vec<usize> = merged
        .iter()
        .map(|iv| classes.id(&iv.label).expect("interval label inserted"))
        .collect();
    let mut labels = vec![normal; frame.len()];
    for (iv, &id) in merged.iter().zip(&ids) {
        let ts = frame.timestamps();
        let lo = ts.partition_point(|&t| t < iv.t_start);
        let hi = ts.partition_point(|&t| t <= iv.t_end);
        for l in &mut labels[lo..hi] {
            *l = id;
        }
    }
    LabeledSeries::new(frame.clone(), labels, classes, normal)
}

/// Write a feature matrix with header `<feature_names…>,label[,synthetic]`.
pub fn write_feature_matrix<W: Write>(writer: W, m: &FeatureMatrix, synthetic: Option<&[bool]>) -> Result<()> {
    if let Some(s) = synthetic {
        if s.len() != m.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: m.n_rows(),
                actual: s.len(),
            });
        }
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = m.feature_names().to_vec();
    header.push("label".into());
    if synthetic.is_some() {
        header.push("synthetic".into());
    }
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for i in 0..m.n_rows() {
        record.clear();
        record.extend(m.row(i).iter().map(|v| v.to_string()));
        record.push(m.classes().name(m.labels()[i]).to_string());
        if let Some(s) = synthetic {
            record.push(if s[i] { "1".into() } else { "0".into() });
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

pub fn write_feature_matrix_csv(path: impl AsRef<Path>, m: &FeatureMatrix, synthetic: Option<&[bool]>) -> Result<()> {
    write_feature_matrix(create(path.as_ref())?, m, synthetic)
}

/// Read a feature CSV: every column except `label` (and an optional
/// `synthetic` flag column) is a feature.
pub fn read_feature_matrix<R: Read>(reader: R) -> Result<FeatureMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let label_idx = column_index(&headers, "label")?;
    let feature_idx: Vec<usize> = headers
        .iter()
        .enumerate()
        .filter(|(i, h)| *i != label_idx && h.trim() != "synthetic")
        .map(|(i, _)| i)
        .collect();
    let names: Vec<String> = feature_idx.iter().map(|&i| headers[i].trim().to_string()).collect();
    let mut data = RowMatrix::new(names.len());
    let mut labels = Vec::new();
    let mut row = Vec::with_capacity(names.len());
    for (n, record) in rdr.records().enumerate() {
        let record = record?;
        let line = line_of(&record, n + 2);
        row.clear();
        for (&i, name) in feature_idx.iter().zip(&names) {
            row.push(parse_real(record.get(i).unwrap_or(""), line, name)?);
        }
        data.push_row(&row)?;
        labels.push(record.get(label_idx).unwrap_or("").trim().to_string());
    }
    let classes = ClassSet::new(labels.iter().cloned());
    let ids = classes.encode(&labels)?;
    FeatureMatrix::new(data, ids, classes, names)
}

pub fn read_feature_matrix_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    read_feature_matrix(open(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame_0_to_9() -> TimeSeriesFrame {
        let ts: Vec<f64> = (0..10).map(f64::from).collect();
        TimeSeriesFrame::new(ts.clone(), vec!["a".into()], vec![ts]).unwrap()
    }

    fn names(s: &LabeledSeries) -> Vec<&str> {
        s.labels.iter().map(|&l| s.classes.name(l)).collect()
    }

    #[test]
    fn reads_small_file() {
        let csv = "timestamp,x,y\n2,5,6\n0,1,2\n1,3,4\n";
        let f = read_timeseries(csv.as_bytes(), &TimeSeriesSchema::default()).unwrap();
        assert_eq!(f.len(), 3);
        assert_eq!(f.n_channels(), 2);
        assert_eq!(f.timestamps(), &[0.0, 1.0, 2.0]);
        assert_eq!(f.channel(1), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn reads_declared_channel_order() {
        let csv = "t,x,y\n0,1,2\n";
        let schema = TimeSeriesSchema {
            timestamp: "t".into(),
            channels: Some(vec!["y".into(), "x".into()]),
        };
        let f = read_timeseries(csv.as_bytes(), &schema).unwrap();
        assert_eq!(f.channel_names(), &["y", "x"]);
        assert_eq!(f.channel(0), &[2.0]);
    }

    #[test]
    fn wide_frame() {
        let mut csv = String::from("timestamp");
        for c in 0..28 {
            csv.push_str(&format!(",s{c}"));
        }
        csv.push('\n');
        for t in 0..4 {
            csv.push_str(&t.to_string());
            for c in 0..28 {
                csv.push_str(&format!(",{}", c * t));
            }
            csv.push('\n');
        }
        let f = read_timeseries(csv.as_bytes(), &TimeSeriesSchema::default()).unwrap();
        assert_eq!(f.n_channels(), 28);
    }

    #[test]
    fn blank_cell_names_row() {
        let csv = "timestamp,x\n0,1\n1,\n";
        let err = read_timeseries(csv.as_bytes(), &TimeSeriesSchema::default()).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "x");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_is_schema_error() {
        let csv = "timestamp,x\n0,1\n";
        let schema = TimeSeriesSchema {
            timestamp: "timestamp".into(),
            channels: Some(vec!["z".into()]),
        };
        assert!(matches!(read_timeseries(csv.as_bytes(), &schema), Err(Error::Schema(_))));
    }

    #[test]
    fn duplicate_timestamps_rejected() {
        let csv = "timestamp,x\n1,1\n0,1\n1,2\n";
        assert!(matches!(
            read_timeseries(csv.as_bytes(), &TimeSeriesSchema::default()),
            Err(Error::DuplicateTimestamp(_))
        ));
    }

    #[test]
    fn intervals_parse_and_validate() {
        let ok = read_intervals("t_start,t_end,label\n100,200,F\n".as_bytes()).unwrap();
        assert_eq!(ok, vec![FaultInterval::new(100.0, 200.0, "F").unwrap()]);
        assert!(matches!(
            read_intervals("t_start,t_end,label\n200,100,F\n".as_bytes()),
            Err(Error::InvalidInterval(_))
        ));
        assert!(read_intervals("".as_bytes()).unwrap().is_empty());
        assert!(read_intervals("t_start,t_end,label\n".as_bytes()).unwrap().is_empty());
        assert!(matches!(read_intervals("a,b,c\n".as_bytes()), Err(Error::Schema(_))));
    }

    #[test]
    fn labels_inclusive_bounds() {
        let s = label_timestamps(&frame_0_to_9(), &[FaultInterval::new(5.0, 7.0, "F").unwrap()], "N").unwrap();
        assert_eq!(names(&s), ["N", "N", "N", "N", "N", "F", "F", "F", "N", "N"]);
    }

    #[test]
    fn no_intervals_all_default() {
        let s = label_timestamps(&frame_0_to_9(), &[], "N").unwrap();
        assert!(s.labels.iter().all(|&l| l == s.normal));
        assert_eq!(s.normal_label(), "N");
    }

    #[test]
    fn conflicting_overlap_rejected() {
        let ivs = [
            FaultInterval::new(0.0, 4.0, "F1").unwrap(),
            FaultInterval::new(3.0, 6.0, "F2").unwrap(),
        ];
        assert!(matches!(
            label_timestamps(&frame_0_to_9(), &ivs, "N"),
            Err(Error::LabelConflict(_))
        ));
    }

    #[test]
    fn same_label_overlap_merged() {
        let ivs = [
            FaultInterval::new(0.0, 4.0, "F").unwrap(),
            FaultInterval::new(3.0, 6.0, "F").unwrap(),
            FaultInterval::new(8.0, 8.0, "G").unwrap(),
        ];
        let merged = normalize_intervals(&ivs).unwrap();
        assert_eq!(merged.len(), 2);
        assert_eq!(merged[0].t_end, 6.0);
        let s = label_timestamps(&frame_0_to_9(), &ivs, "N").unwrap();
        assert_eq!(names(&s), ["F", "F", "F", "F", "F", "F", "F", "N", "G", "N"]);
    }

    #[test]
    fn labeling_idempotent() {
        let ivs = [FaultInterval::new(2.0, 3.0, "F").unwrap()];
        let once = label_timestamps(&frame_0_to_9(), &ivs, "N").unwrap();
        let twice = label_timestamps(&once.frame, &ivs, "N").unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn labeled_series_round_trip_bit_exact() {
        let ts = vec![0.0, 0.5, 1.25];
        let ch = vec![vec![0.1, 1.0 / 3.0, -2.5e-17], vec![f64::MAX, f64::MIN_POSITIVE, 7.0]];
        let frame = TimeSeriesFrame::new(ts, vec!["a".into(), "b".into()], ch).unwrap();
        let s = label_timestamps(&frame, &[FaultInterval::new(0.5, 0.5, "F").unwrap()], "N").unwrap();
        let mut buf = Vec::new();
        write_labeled_series(&mut buf, &s).unwrap();
        let back = read_labeled_series(buf.as_slice(), "N").unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn feature_matrix_round_trip() {
        let data = RowMatrix::from_rows(&[[0.1, 2.0], [3.5, -1.0 / 7.0]]).unwrap();
        let m = FeatureMatrix::new(
            data,
            vec![1, 0],
            ClassSet::new(["F", "N"]),
            vec!["ch0.time.mean".into(), "ch0.time.rms".into()],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_feature_matrix(&mut buf, &m, Some(&[false, true])).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("ch0.time.mean,ch0.time.rms,label,synthetic\n"));
        let back = read_feature_matrix(buf.as_slice()).unwrap();
        assert_eq!(back, m);
    }
}
