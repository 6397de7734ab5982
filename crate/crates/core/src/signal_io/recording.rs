use std::fmt;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::SignalError;

/// A bipolar channel label such as `FP1-F7`.
///
/// CHB-MIT repeats the `T8-P8` derivation; the repeats are told apart by a
/// trailing `-0`/`-1`, which is kept in `duplicate` rather than in the
/// electrode name.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelLabel {
    pub raw: String,
    pub electrode_a: String,
    pub electrode_b: String,
    pub duplicate: Option<u32>,
}

impl ChannelLabel {
    pub fn parse(raw: &str) -> Result<Self, SignalError> {
        let raw = raw.trim().to_uppercase();
        let (a, rest) = raw
            .split_once('-')
            .ok_or_else(|| SignalError::InvalidLabel(raw.clone()))?;
        let (b, duplicate) = match rest.rsplit_once('-') {
            Some((b, tag)) if !tag.is_empty() && tag.chars().all(|c| c.is_ascii_digit()) => {
                (b, Some(tag.parse::<u32>().map_err(|_| SignalError::InvalidLabel(raw.clone()))?))
            }
            _ => (rest, None),
        };
        let a = a.trim();
        let b = b.trim();
        if a.is_empty() || b.is_empty() || b.contains('-') {
            return Err(SignalError::InvalidLabel(raw));
        }
        Ok(Self {
            electrode_a: a.to_string(),
            electrode_b: b.to_string(),
            duplicate,
            raw,
        })
    }

    pub fn electrodes(&self) -> [&str; 2] {
        [&self.electrode_a, &self.electrode_b]
    }

    pub fn shares_electrode(&self, other: &ChannelLabel) -> bool {
        self.electrodes()
            .iter()
            .any(|e| other.electrodes().contains(e))
    }
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

/// Multichannel EEG in physical units (microvolts), channels × samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    channels: Vec<ChannelLabel>,
    fs: f64,
    data: Array2<f64>,
}

impl Recording {
    pub fn new(channels: Vec<ChannelLabel>, fs: f64, data: Array2<f64>) -> Result<Self, SignalError> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(SignalError::InvalidSampleRate(fs));
        }
        if channels.len() != data.nrows() {
            return Err(SignalError::ShapeMismatch {
                channels: channels.len(),
                rows: data.nrows(),
            });
        }
        Ok(Self { channels, fs, data })
    }

    pub fn channels(&self) -> &[ChannelLabel] {
        &self.channels
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn n_channels(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.data.ncols()
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.fs
    }

    pub fn into_data(self) -> Array2<f64> {
        self.data
    }

    /// Same channels and rate, new sample matrix of identical shape.
    pub fn with_data(&self, data: Array2<f64>) -> Result<Self, SignalError> {
        if data.dim() != self.data.dim() {
            return Err(SignalError::ShapeMismatch {
                channels: self.channels.len(),
                rows: data.nrows(),
            });
        }
        Ok(Self {
            channels: self.channels.clone(),
            fs: self.fs,
            data,
        })
    }

    /// Reorders and restricts channels to `wanted`, matching on raw labels.
    pub fn select_channels(&self, wanted: &[ChannelLabel]) -> Result<Self, SignalError> {
        let mut missing = Vec::new();
        let mut rows = Vec::with_capacity(wanted.len());
        for w in wanted {
            match self.channels.iter().position(|c| c.raw == w.raw) {
                Some(i) => rows.push(i),
                None => missing.push(w.raw.clone()),
            }
        }
        if !missing.is_empty() {
            return Err(SignalError::MissingChannels(missing));
        }
        let data = self.data.select(ndarray::Axis(0), &rows);
        Ok(Self {
            channels: wanted.to_vec(),
            fs: self.fs,
            data,
        })
    }
}
