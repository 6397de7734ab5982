//! Frequency-band EEG seizure detection with a graph convolutional network.
//!
//! Recordings are band-pass filtered, cut into 6 s windows, summarized by
//! eleven per-second statistics per channel, and classified by a GCN over the
//! 23-channel bipolar montage.

pub mod balance;
pub mod eval;
pub mod features;
pub mod gcn;
pub mod graphs;
pub mod preprocess;
pub mod signal_io;

use thiserror::Error;

/// Any error raised by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Signal(#[from] signal_io::SignalError),
    #[error(transparent)]
    Edf(#[from] signal_io::EdfError),
    #[error(transparent)]
    Annotation(#[from] signal_io::AnnotationError),
    #[error(transparent)]
    Synth(#[from] signal_io::SynthError),
    #[error(transparent)]
    Preprocess(#[from] preprocess::PreprocessError),
    #[error(transparent)]
    Feature(#[from] features::FeatureError),
    #[error(transparent)]
    Balance(#[from] balance::BalanceError),
    #[error(transparent)]
    Graph(#[from] graphs::GraphError),
    #[error(transparent)]
    Gcn(#[from] gcn::GcnError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
}
