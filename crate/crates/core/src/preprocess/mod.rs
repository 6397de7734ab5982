//! Band-pass filtering, fixed-length windowing and ictal labeling.

mod bands;
mod filter;
mod window;

use thiserror::Error;

pub use bands::{BandDefinition, BandName};
pub use filter::{bandpass, Biquad, BandpassFilter, BUTTERWORTH_ORDER};
pub use window::{
    extract_ictal_only, ictal_labels, label_windows, segment, window_len, Segmentation, WindowSegment,
};

/// Window length used throughout, in seconds.
pub const DEFAULT_WINDOW_S: f64 = 6.0;

#[derive(Debug, Error, PartialEq)]
pub enum PreprocessError {
    #[error("band edge {f_hi} Hz is at or above Nyquist for fs = {fs} Hz")]
    Nyquist { f_hi: f64, fs: f64 },
    #[error("band edges must satisfy 0 < f_lo < f_hi, got ({f_lo}, {f_hi})")]
    InvalidBand { f_lo: f64, f_hi: f64 },
    #[error("signal of {samples} samples is too short for filtering (need {needed})")]
    TooShort { samples: usize, needed: usize },
    #[error("window of {window_s} s at {fs} Hz is not a whole number of samples")]
    FractionalWindow { window_s: f64, fs: f64 },
}
