//! Recording ingestion: EDF files, seizure annotation CSVs, and synthetic EEG.

mod annotations;
mod edf;
mod recording;
mod synth;

use thiserror::Error;

pub use annotations::{
    load_annotations, write_annotations, AnnotationError, AnnotationSet, RejectedAnnotation,
    SeizureAnnotation,
};
pub use edf::{parse_edf, write_edf, EdfError};
pub use recording::{ChannelLabel, Recording};
pub use synth::{random_intervals, synthesize_recording, synthetic_labels, SynthError, SynthesisSpec};

#[derive(Debug, Error, PartialEq)]
pub enum SignalError {
    #[error("not a bipolar channel label: {0:?}")]
    InvalidLabel(String),
    #[error("sampling rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),
    #[error("{channels} channel labels for {rows} data rows")]
    ShapeMismatch { channels: usize, rows: usize },
    #[error("recording lacks channels {0:?}")]
    MissingChannels(Vec<String>),
}
