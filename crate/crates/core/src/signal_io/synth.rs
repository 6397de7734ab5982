//! Labeled synthetic EEG: 1/f background with sinusoidal ictal bursts.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::annotations::SeizureAnnotation;
use super::recording::{ChannelLabel, Recording};
use crate::graphs::CHB_MIT_MONTAGE;

#[derive(Debug, Error, PartialEq)]
pub enum SynthError {
    #[error("need at least one channel")]
    NoChannels,
    #[error("sampling rate {fs} Hz aliases a {freq} Hz burst")]
    Aliasing { fs: f64, freq: f64 },
    #[error("invalid synthesis parameter: {0}")]
    Invalid(String),
}

fn default_rms() -> f64 {
    20.0
}

fn default_file_id() -> String {
    "synthetic.edf".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSpec {
    pub duration_s: f64,
    pub fs: f64,
    pub n_channels: usize,
    pub seizure_intervals: Vec<(f64, f64)>,
    pub burst_frequencies_hz: Vec<f64>,
    pub burst_amplitude_ratio: f64,
    pub noise_seed: u64,
    /// Background RMS in microvolts; burst amplitude is this times the ratio.
    #[serde(default = "default_rms")]
    pub background_rms_uv: f64,
    #[serde(default = "default_file_id")]
    pub file_id: String,
}

impl SynthesisSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.n_channels < 1 {
            return Err(SynthError::NoChannels);
        }
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return Err(SynthError::Invalid(format!("fs = {}", self.fs)));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(SynthError::Invalid(format!("duration_s = {}", self.duration_s)));
        }
        if !(self.burst_amplitude_ratio.is_finite() && self.burst_amplitude_ratio > 0.0) {
            return Err(SynthError::Invalid(format!(
                "burst_amplitude_ratio = {}",
                self.burst_amplitude_ratio
            )));
        }
        if !(self.background_rms_uv.is_finite() && self.background_rms_uv > 0.0) {
            return Err(SynthError::Invalid(format!(
                "background_rms_uv = {}",
                self.background_rms_uv
            )));
        }
        for &f in &self.burst_frequencies_hz {
            if !(f.is_finite() && f > 0.0) {
                return Err(SynthError::Invalid(format!("burst frequency {f}")));
            }
            if self.fs < 2.0 * f {
                return Err(SynthError::Aliasing { fs: self.fs, freq: f });
            }
        }
        let mut sorted = self.seizure_intervals.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(s, e) in &sorted {
            if !(s >= 0.0 && e > s && e <= self.duration_s) {
                return Err(SynthError::Invalid(format!(
                    "interval ({s}, {e}) outside [0, {}]",
                    self.duration_s
                )));
            }
        }
        for w in sorted.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(SynthError::Invalid(format!(
                    "intervals ({}, {}) and ({}, {}) overlap",
                    w[0].0, w[0].1, w[1].0, w[1].1
                )));
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        (self.duration_s * self.fs).round() as usize
    }
}

/// Channel labels for a synthetic recording: the CHB-MIT montage when the
/// channel count matches it, numbered referential labels otherwise.
pub fn synthetic_labels(n_channels: usize) -> Vec<ChannelLabel> {
    if n_channels == CHB_MIT_MONTAGE.len() {
        CHB_MIT_MONTAGE
            .iter()
            .map(|l| ChannelLabel::parse(l).expect("montage labels are valid"))
            .collect()
    } else {
        (0..n_channels)
            .map(|i| ChannelLabel::parse(&format!("C{i}-REF")).expect("valid label"))
            .collect()
    }
}

/// Refined Paul Kellet pink-noise filter (about -3 dB/octave above a few
/// hundredths of the sampling rate's low end).
#[derive(Default)]
struct PinkFilter {
    b: [f64; 7],
}

impl PinkFilter {
    fn next(&mut self, white: f64) -> f64 {
        let b = &mut self.b;
        b[0] = 0.99886 * b[0] + white * 0.0555179;
        b[1] = 0.99332 * b[1] + white * 0.0750759;
        b[2] = 0.96900 * b[2] + white * 0.1538520;
        b[3] = 0.86650 * b[3] + white * 0.3104856;
        b[4] = 0.55000 * b[4] + white * 0.5329522;
        b[5] = -0.7616 * b[5] - white * 0.0168980;
        let out = b[0] + b[1] + b[2] + b[3] + b[4] + b[5] + b[6] + white * 0.5362;
        b[6] = white * 0.115926;
        out
    }
}

const PINK_WARMUP: usize = 8192;

/// Generates a recording and its ictal annotations from `spec`.
///
/// Pure in `spec`: the same spec yields bit-identical samples.
pub fn synthesize_recording(
    spec: &SynthesisSpec,
) -> Result<(Recording, Vec<SeizureAnnotation>), SynthError> {
    spec.validate()?;
    let n = spec.n_samples();
    let fs = spec.fs;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.noise_seed);
    let phases: Vec<Vec<f64>> = (0..spec.n_channels)
        .map(|_| {
            spec.burst_frequencies_hz
                .iter()
                .map(|_| rng.random::<f64>() * std::f64::consts::TAU)
                .collect()
        })
        .collect();

    let mut data = Array2::<f64>::zeros((spec.n_channels, n));
    for mut row in data.rows_mut() {
        let mut pink = PinkFilter::default();
        for _ in 0..PINK_WARMUP {
            pink.next(rng.sample(StandardNormal));
        }
        for v in row.iter_mut() {
            *v = pink.next(rng.sample(StandardNormal));
        }
        let rms = (row.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
        if rms > 0.0 {
            let scale = spec.background_rms_uv / rms;
            row.mapv_inplace(|v| v * scale);
        }
    }

    let amplitude = spec.burst_amplitude_ratio * spec.background_rms_uv;
    for &(t_s, t_e) in &spec.seizure_intervals {
        let start = (t_s * fs).ceil() as usize;
        let end = ((t_e * fs).ceil() as usize).min(n);
        for (c, mut row) in data.rows_mut().into_iter().enumerate() {
            for j in start..end {
                let t = j as f64 / fs - t_s;
                let burst: f64 = spec
                    .burst_frequencies_hz
                    .iter()
                    .zip(&phases[c])
                    .map(|(&f, &phi)| (std::f64::consts::TAU * f * t + phi).sin())
                    .sum();
                row[j] += amplitude * burst;
            }
        }
    }

    let recording = Recording::new(synthetic_labels(spec.n_channels), fs, data)
        .expect("shape is consistent by construction");
    let annotations = spec
        .seizure_intervals
        .iter()
        .map(|&(t_s, t_e)| SeizureAnnotation {
            file_id: spec.file_id.clone(),
            t_s,
            t_e,
        })
        .collect();
    Ok((recording, annotations))
}

/// Draws `count` disjoint whole-second intervals with lengths in
/// `[min_len, max_len]`, at least `min_gap` seconds apart and from the edges.
pub fn random_intervals(
    duration_s: f64,
    count: usize,
    min_len: f64,
    max_len: f64,
    min_gap: f64,
    seed: u64,
) -> Result<Vec<(f64, f64)>, SynthError> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if !(min_len > 0.0 && max_len >= min_len) {
        return Err(SynthError::Invalid(format!(
            "interval length range [{min_len}, {max_len}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lengths: Vec<f64> = (0..count)
        .map(|_| rng.random_range(min_len..=max_len).round().max(1.0))
        .collect();
    let slack = duration_s - lengths.iter().sum::<f64>() - (count + 1) as f64 * min_gap;
    if slack < 0.0 {
        return Err(SynthError::Invalid(format!(
            "{count} intervals do not fit in {duration_s} s"
        )));
    }
    let weights: Vec<f64> = (0..=count).map(|_| rng.random::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    let mut intervals = Vec::with_capacity(count);
    let mut t = 0.0;
    for (i, len) in lengths.iter().enumerate() {
        t += min_gap + (slack * weights[i] / total).floor();
        intervals.push((t, t + len));
        t += len;
    }
    Ok(intervals)
}
