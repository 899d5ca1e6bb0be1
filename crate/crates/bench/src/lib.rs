//! Fixtures shared by the criterion benches in `benches/`.

use imbalearn::synthgen::{gaussian_blobs, synthetic_labeled_series, BlobSpec, TimeSeriesSpec};
use imbalearn::{FaultInterval, FeatureMatrix, LabeledSeries, RowMatrix};

/// Two isotropic blobs in `dims` dimensions, minority shifted along axis 0.
pub fn imbalanced_blobs(n_majority: usize, n_minority: usize, dims: usize, seed: u64) -> FeatureMatrix {
    let mut centre = vec![0.0; dims];
    centre[0] = 1.5;
    gaussian_blobs(
        &[
            BlobSpec::isotropic(vec![0.0; dims], 1.0, n_majority, "normal"),
            BlobSpec::isotropic(centre, 1.0, n_minority, "fault"),
        ],
        seed,
    )
    .expect("valid blob spec")
}

/// Rows of `x` with label `class`.
pub fn rows_of(x: &FeatureMatrix, class: usize) -> RowMatrix {
    let idx: Vec<usize> = (0..x.n_rows()).filter(|&i| x.labels()[i] == class).collect();
    x.data().select_rows(&idx)
}

/// Three-channel series with two fault labels.
pub fn fault_series(ticks: usize, seed: u64) -> LabeledSeries {
    let q = ticks as f64 / 8.0;
    let intervals = vec![
        FaultInterval::new(q, 2.0 * q - 1.0, "f1").unwrap(),
        FaultInterval::new(5.0 * q, 6.0 * q - 1.0, "f2").unwrap(),
    ];
    synthetic_labeled_series(&TimeSeriesSpec::new(ticks, 3, 3.0, intervals), seed).expect("valid series spec")
}
