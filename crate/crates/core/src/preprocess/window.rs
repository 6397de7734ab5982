use ndarray::{s, Array2};

use super::bands::BandName;
use super::PreprocessError;
use crate::signal_io::{Recording, SeizureAnnotation};

/// One fixed-length, per-band slice of a recording across all channels.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSegment {
    pub band: BandName,
    pub index_k: usize,
    /// channels × L
    pub samples: Array2<f64>,
    pub fs: f64,
    pub label: u8,
    pub source_file: String,
}

impl WindowSegment {
    pub fn len(&self) -> usize {
        self.samples.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.ncols() == 0
    }

    /// Inclusive sample range `[kL, kL + L - 1]` in the source recording.
    pub fn sample_range(&self) -> (usize, usize) {
        let l = self.len();
        (self.index_k * l, self.index_k * l + l - 1)
    }

    pub fn start_s(&self) -> f64 {
        (self.index_k * self.len()) as f64 / self.fs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub windows: Vec<WindowSegment>,
    /// Set when the recording holds less than one full window.
    pub too_short: bool,
}

/// Samples per window, `T_w * fs`, which must be a whole number.
pub fn window_len(window_s: f64, fs: f64) -> Result<usize, PreprocessError> {
    let l = window_s * fs;
    if !(l.is_finite() && l >= 1.0) || (l - l.round()).abs() > 1e-9 {
        return Err(PreprocessError::FractionalWindow { window_s, fs });
    }
    Ok(l.round() as usize)
}

/// Tiles the recording with non-overlapping windows; a trailing remainder
/// shorter than a window is dropped. Labels start at 0.
pub fn segment(
    recording: &Recording,
    band: BandName,
    window_s: f64,
    source_file: &str,
) -> Result<Segmentation, PreprocessError> {
    let l = window_len(window_s, recording.fs())?;
    let count = recording.n_samples() / l;
    if count == 0 {
        log::warn!(
            "{source_file}: {} samples is shorter than one {l}-sample window",
            recording.n_samples()
        );
    }
    let windows = (0..count)
        .map(|k| WindowSegment {
            band,
            index_k: k,
            samples: recording.data().slice(s![.., k * l..(k + 1) * l]).to_owned(),
            fs: recording.fs(),
            label: 0,
            source_file: source_file.to_string(),
        })
        .collect();
    Ok(Segmentation {
        windows,
        too_short: count == 0,
    })
}

/// Ictal flag for window `k` of length `l`: any overlap between its sample
/// range and `[floor(t_s fs), floor(t_e fs)]` of some annotation.
pub fn ictal_labels(n_windows: usize, l: usize, fs: f64, annotations: &[SeizureAnnotation]) -> Vec<u8> {
    let spans: Vec<(usize, usize)> = annotations
        .iter()
        .map(|a| ((a.t_s * fs).floor() as usize, (a.t_e * fs).floor() as usize))
        .collect();
    (0..n_windows)
        .map(|k| {
            let (lo, hi) = (k * l, (k + 1) * l - 1);
            spans.iter().any(|&(ns, ne)| lo <= ne && ns <= hi) as u8
        })
        .collect()
}

/// Assigns binary ictal labels. Annotations must already be restricted to
/// the segments' source file.
pub fn label_windows(mut segments: Vec<WindowSegment>, annotations: &[SeizureAnnotation]) -> Vec<WindowSegment> {
    for seg in &mut segments {
        let l = seg.len();
        let (lo, hi) = (seg.index_k * l, seg.index_k * l + l - 1);
        seg.label = annotations.iter().any(|a| {
            let ns = (a.t_s * seg.fs).floor() as usize;
            let ne = (a.t_e * seg.fs).floor() as usize;
            lo <= ne && ns <= hi
        }) as u8;
    }
    segments
}

/// The label-1 windows, in input order.
pub fn extract_ictal_only(segments: &[WindowSegment]) -> Vec<WindowSegment> {
    segments.iter().filter(|s| s.label == 1).cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal_io::ChannelLabel;

    fn rec(secs: usize, fs: usize) -> Recording {
        let n = secs * fs;
        let data = Array2::from_shape_fn((2, n), |(c, j)| (c * n + j) as f64);
        let ch = vec![ChannelLabel::parse("A-B").unwrap(), ChannelLabel::parse("B-C").unwrap()];
        Recording::new(ch, fs as f64, data).unwrap()
    }

    fn ann(t_s: f64, t_e: f64) -> SeizureAnnotation {
        SeizureAnnotation { file_id: "f".into(), t_s, t_e }
    }

    #[test]
    fn hour_gives_600_windows() {
        let r = rec(3600, 4);
        let s = segment(&r, BandName::Delta, 6.0, "f").unwrap();
        assert_eq!(s.windows.len(), 3600 / 6);
        assert!(!s.too_short);
    }

    #[test]
    fn short_recording_gives_none() {
        let s = segment(&rec(5, 256), BandName::Delta, 6.0, "f").unwrap();
        assert!(s.windows.is_empty());
        assert!(s.too_short);
    }

    #[test]
    fn window_length_1536() {
        assert_eq!(window_len(6.0, 256.0).unwrap(), 1536);
        assert!(window_len(0.3, 5.0).is_err());
    }

    #[test]
    fn partition_reproduces_samples() {
        let r = rec(40, 8);
        let s = segment(&r, BandName::Alpha, 6.0, "f").unwrap();
        let l = 48;
        for w in &s.windows {
            assert_eq!(w.sample_range(), (w.index_k * l, w.index_k * l + l - 1));
            for c in 0..2 {
                for j in 0..l {
                    assert_eq!(w.samples[[c, j]], r.data()[[c, w.index_k * l + j]]);
                }
            }
        }
        assert_eq!(s.windows.len() * l, 36 * 8);
    }

    /// Brute force: mark every ictal sample, then look for any inside each window.
    fn brute_labels(n_windows: usize, l: usize, fs: f64, anns: &[SeizureAnnotation]) -> Vec<u8> {
        let total = n_windows * l;
        let mut ictal = vec![false; total];
        for a in anns {
            let ns = (a.t_s * fs).floor() as usize;
            let ne = (a.t_e * fs).floor() as usize;
            for (j, flag) in ictal.iter_mut().enumerate() {
                if j >= ns && j <= ne {
                    *flag = true;
                }
            }
        }
        (0..n_windows)
            .map(|k| ictal[k * l..(k + 1) * l].iter().any(|&b| b) as u8)
            .collect()
    }

    #[test]
    fn ictal_samples_3072_to_4607_mark_window_2() {
        let fs = 256.0;
        let a = [ann(3072.0 / fs, 4607.0 / fs)];
        let labels = ictal_labels(5, 1536, fs, &a);
        assert_eq!(labels, vec![0, 0, 1, 0, 0]);
        assert_eq!(labels, brute_labels(5, 1536, fs, &a));
    }

    #[test]
    fn boundary_straddle_marks_both() {
        let fs = 256.0;
        let a = [ann(3071.0 / fs, 3072.0 / fs)];
        let labels = ictal_labels(4, 1536, fs, &a);
        assert_eq!(labels, vec![0, 1, 1, 0]);
        assert_eq!(labels, brute_labels(4, 1536, fs, &a));
    }

    #[test]
    fn matches_brute_force_on_random_intervals() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let n = rng.random_range(1..20);
            let mut anns = Vec::new();
            for _ in 0..rng.random_range(0..4) {
                let s = rng.random_range(0.0..(n * 6) as f64);
                anns.push(ann(s, s + rng.random_range(0.01..15.0)));
            }
            assert_eq!(ictal_labels(n, 48, 8.0, &anns), brute_labels(n, 48, 8.0, &anns));
        }
    }

    #[test]
    fn label_windows_and_filter() {
        let r = rec(60, 4);
        let segs = segment(&r, BandName::Delta, 6.0, "f").unwrap().windows;
        let none = label_windows(segs.clone(), &[]);
        assert!(none.iter().all(|w| w.label == 0));
        assert!(extract_ictal_only(&none).is_empty());
        let labeled = label_windows(segs, &[ann(13.0, 20.0)]);
        let labels: Vec<u8> = labeled.iter().map(|w| w.label).collect();
        assert_eq!(labels, vec![0, 0, 1, 1, 0, 0, 0, 0, 0, 0]);
        let ictal = extract_ictal_only(&labeled);
        assert_eq!(ictal.iter().map(|w| w.index_k).collect::<Vec<_>>(), vec![2, 3]);
    }
}
