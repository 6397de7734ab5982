//! The eleven per-second, per-channel features and the window feature matrix.

mod spectral;
mod stats;

use std::io::{Read, Write};

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::preprocess::{BandName, WindowSegment};

pub use spectral::{spectral_entropy, SpectralEntropy};
pub use stats::{hjorth, moments, shape_stats, Hjorth, Moments};

pub const N_FEATURES: usize = 11;
/// Channels in the montage, and so rows of a window feature matrix.
pub const N_NODES: usize = 23;
pub const SECONDS_PER_WINDOW: usize = 6;
/// Columns of a window feature matrix: 11 features × 6 seconds.
pub const NODE_FEATURE_DIM: usize = N_FEATURES * SECONDS_PER_WINDOW;
pub const FLAT_DIM: usize = N_NODES * NODE_FEATURE_DIM;

pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "spectral_entropy",
    "activity",
    "mobility",
    "complexity",
    "kurtosis",
    "skewness",
    "std",
    "max_amp",
    "variance",
    "median",
    "mean",
];

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("expected {expected} channels, segment has {found}")]
    ChannelCount { expected: usize, found: usize },
    #[error("window of {len} samples is not a whole number of 1 s frames at {fs} Hz")]
    FrameMismatch { len: usize, fs: f64 },
    #[error("feature CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("feature CSV row {row}: {message}")]
    Malformed { row: usize, message: String },
}

/// Feature values in the fixed order of [`FEATURE_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector11(pub [f64; N_FEATURES]);

impl FeatureVector11 {
    pub const SPECTRAL_ENTROPY: usize = 0;
    pub const ACTIVITY: usize = 1;
    pub const MOBILITY: usize = 2;
    pub const COMPLEXITY: usize = 3;
    pub const KURTOSIS: usize = 4;
    pub const SKEWNESS: usize = 5;
    pub const STD: usize = 6;
    pub const MAX_AMP: usize = 7;
    pub const VARIANCE: usize = 8;
    pub const MEDIAN: usize = 9;
    pub const MEAN: usize = 10;

    pub fn get(&self, idx: usize) -> f64 {
        self.0[idx]
    }
}

/// Reusable scratch space for computing features of equal-length frames.
pub struct FeatureExtractor {
    entropy: SpectralEntropy,
    sort_buf: Vec<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

impl FeatureExtractor {
    pub fn new(frame_len: usize) -> Self {
        Self {
            entropy: SpectralEntropy::new(frame_len),
            sort_buf: Vec::with_capacity(frame_len),
            d1: Vec::with_capacity(frame_len),
            d2: Vec::with_capacity(frame_len),
        }
    }

    pub fn frame(&mut self, frame: &[f64]) -> FeatureVector11 {
        let m = stats::moments_with(frame, &mut self.sort_buf);
        let (skewness, kurtosis) = shape_stats(frame);
        let h = stats::hjorth_with(frame, &mut self.d1, &mut self.d2);
        let entropy = self.entropy.compute(frame);
        FeatureVector11([
            entropy,
            m.variance,
            h.mobility,
            h.complexity,
            kurtosis,
            skewness,
            m.std,
            m.max_amp,
            m.variance,
            m.median,
            m.mean,
        ])
    }

    /// Builds the channels × (11 · seconds) matrix; columns `11t..11t+10`
    /// hold second `t`.
    pub fn segment(&mut self, segment: &WindowSegment) -> Result<SegmentFeatureMatrix, FeatureError> {
        if segment.samples.nrows() != N_NODES {
            return Err(FeatureError::ChannelCount {
                expected: N_NODES,
                found: segment.samples.nrows(),
            });
        }
        let node_features = self.node_features(segment.samples.view(), segment.fs)?;
        Ok(SegmentFeatureMatrix {
            node_features,
            label: segment.label,
            band: segment.band,
            source_file: segment.source_file.clone(),
            window_k: segment.index_k,
        })
    }

    /// Feature matrix for any channel count.
    pub fn node_features(&mut self, samples: ndarray::ArrayView2<f64>, fs: f64) -> Result<Array2<f64>, FeatureError> {
        let len = samples.ncols();
        let frame_len = fs.round() as usize;
        if fs.fract() != 0.0 || frame_len == 0 || !len.is_multiple_of(frame_len) || frame_len != self.entropy.frame_len() {
            return Err(FeatureError::FrameMismatch { len, fs });
        }
        let seconds = len / frame_len;
        let mut out = Array2::<f64>::zeros((samples.nrows(), N_FEATURES * seconds));
        let mut frame = vec![0.0; frame_len];
        for (c, row) in samples.rows().into_iter().enumerate() {
            for t in 0..seconds {
                for (dst, src) in frame.iter_mut().zip(row.iter().skip(t * frame_len)) {
                    *dst = *src;
                }
                let fv = self.frame(&frame);
                for (i, v) in fv.0.iter().enumerate() {
                    out[[c, N_FEATURES * t + i]] = *v;
                }
            }
        }
        Ok(out)
    }
}

/// Node-feature matrix of one window, with its label and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentFeatureMatrix {
    pub node_features: Array2<f64>,
    pub label: u8,
    pub band: BandName,
    pub source_file: String,
    pub window_k: usize,
}

impl SegmentFeatureMatrix {
    /// Row-major flattening (channel-major), length 1518 for a full window.
    pub fn flatten(&self) -> Vec<f64> {
        self.node_features.iter().copied().collect()
    }
}

pub fn extract_segment_features(segment: &WindowSegment) -> Result<SegmentFeatureMatrix, FeatureError> {
    let frame_len = segment.fs.round().max(1.0) as usize;
    FeatureExtractor::new(frame_len).segment(segment)
}

pub fn write_feature_csv<W: Write>(out: W, rows: &[SegmentFeatureMatrix]) -> Result<(), FeatureError> {
    let mut w = csv::Writer::from_writer(out);
    let width = rows.first().map_or(FLAT_DIM, |r| r.node_features.len());
    let mut header = vec!["source_file".to_string(), "band".into(), "window_k".into(), "label".into()];
    header.extend((0..width).map(|i| format!("f_{i}")));
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(width + 4);
    for r in rows {
        record.clear();
        record.push(r.source_file.clone());
        record.push(r.band.to_string());
        record.push(r.window_k.to_string());
        record.push(r.label.to_string());
        record.extend(r.node_features.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Reads rows written by [`write_feature_csv`]; each row's features are
/// reshaped to `(len / 66) × 66`.
pub fn read_feature_csv<R: Read>(input: R) -> Result<Vec<SegmentFeatureMatrix>, FeatureError> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |message: String| FeatureError::Malformed { row: i + 1, message };
        if rec.len() < 5 {
            return Err(bad(format!("only {} columns", rec.len())));
        }
        let band: BandName = rec[1].parse().map_err(bad)?;
        let window_k = rec[2].parse().map_err(|e| bad(format!("window_k: {e}")))?;
        let label: u8 = rec[3].parse().map_err(|e| bad(format!("label: {e}")))?;
        if label > 1 {
            return Err(bad(format!("label {label} is not binary")));
        }
        let values = rec
            .iter()
            .skip(4)
            .map(|v| v.parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| bad(format!("feature value: {e}")))?;
        if values.len() % NODE_FEATURE_DIM != 0 {
            return Err(bad(format!("{} features is not a multiple of {NODE_FEATURE_DIM}", values.len())));
        }
        let nodes = values.len() / NODE_FEATURE_DIM;
        rows.push(SegmentFeatureMatrix {
            node_features: Array2::from_shape_vec((nodes, NODE_FEATURE_DIM), values).expect("divisible"),
            label,
            band,
            source_file: rec[0].to_string(),
            window_k,
        });
    }
    Ok(rows)
}

/// Per-column z-scoring fitted on training rows. Constant columns are
/// centred but not scaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: ndarray::ArrayView2<f64>) -> Self {
        let n = rows.nrows().max(1) as f64;
        let mean: Vec<f64> = rows.sum_axis(Axis(0)).iter().map(|s| s / n).collect();
        let scale = rows
            .axis_iter(Axis(1))
            .zip(&mean)
            .map(|(col, mu)| {
                let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
                let sd = var.sqrt();
                if sd > 0.0 && sd.is_finite() { sd } else { 1.0 }
            })
            .collect();
        Self { mean, scale }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn transform_row(&self, row: ArrayView1<f64>) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, rows: &mut Array2<f64>) {
        for mut row in rows.rows_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(samples: Array2<f64>) -> WindowSegment {
        WindowSegment {
            band: BandName::Delta,
            index_k: 3,
            samples,
            fs: 256.0,
            label: 1,
            source_file: "x.edf".into(),
        }
    }

    #[test]
    fn dimensions_23_by_66() {
        let w = window(Array2::from_shape_fn((23, 1536), |(c, j)| ((c * 7 + j) as f64).sin()));
        let m = extract_segment_features(&w).unwrap();
        assert_eq!(m.node_features.dim(), (23, 66));
        assert_eq!(m.flatten().len(), 1518);
        assert_eq!((m.label, m.band, m.window_k), (1, BandName::Delta, 3));
    }

    #[test]
    fn zero_segment_gives_zero_features() {
        let m = extract_segment_features(&window(Array2::zeros((23, 1536)))).unwrap();
        assert!(m.node_features.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn loud_channel_dominates() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut samples = Array2::from_shape_fn((23, 1536), |_| rng.random_range(-1.0..1.0));
        for j in 0..1536 {
            samples[[5, j]] = 100.0 * (2.0 * std::f64::consts::PI * 3.0 * j as f64 / 256.0).sin();
        }
        let m = extract_segment_features(&window(samples)).unwrap();
        for t in 0..6 {
            for idx in [FeatureVector11::ACTIVITY, FeatureVector11::MAX_AMP] {
                let col = 11 * t + idx;
                for c in (0..23).filter(|&c| c != 5) {
                    assert!(m.node_features[[5, col]] > m.node_features[[c, col]]);
                }
            }
        }
    }

    #[test]
    fn layout_is_second_major() {
        let mut samples = Array2::zeros((23, 1536));
        // second 4 of channel 0 is a constant 7
        for j in 4 * 256..5 * 256 {
            samples[[0, j]] = 7.0;
        }
        let m = extract_segment_features(&window(samples)).unwrap();
        assert_eq!(m.node_features[[0, 44 + FeatureVector11::MEAN]], 7.0);
        assert_eq!(m.node_features[[0, 33 + FeatureVector11::MEAN]], 0.0);
        assert_eq!(m.node_features[[0, 55 + FeatureVector11::MEAN]], 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            extract_segment_features(&window(Array2::zeros((22, 1536)))),
            Err(FeatureError::ChannelCount { expected: 23, found: 22 })
        ));
        assert!(matches!(
            extract_segment_features(&window(Array2::zeros((23, 1500)))),
            Err(FeatureError::FrameMismatch { .. })
        ));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let rows: Vec<_> = (0..3)
            .map(|k| SegmentFeatureMatrix {
                node_features: Array2::from_shape_fn((23, 66), |_| rng.random::<f64>() * 1e3 - 500.0),
                label: (k % 2) as u8,
                band: BandName::LowerBeta,
                source_file: "a,b.edf".into(),
                window_k: k,
            })
            .collect();
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &rows).unwrap();
        let header = String::from_utf8_lossy(&buf).lines().next().unwrap().to_string();
        assert_eq!(header.split(',').count(), 4 + 1518);
        assert!(header.ends_with("f_1517"));
        assert_eq!(read_feature_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn standardizer_centres_and_scales() {
        let x = ndarray::array![[1.0, 5.0], [3.0, 5.0]];
        let s = Standardizer::fit(x.view());
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.scale, vec![1.0, 1.0]);
        let mut y = x.clone();
        s.transform(&mut y);
        assert_eq!(y, ndarray::array![[-1.0, 0.0], [1.0, 0.0]]);
    }
}
