//! Detection metrics, score curves, fold planning and experiment aggregation.

mod curves;
mod cv;
mod metrics;
mod split;

pub use curves::{pr_auc, roc_auc, write_pr_csv, write_roc_csv, PrPoint, RocPoint};
pub use cv::{
    cross_validate, evaluate, repeat_runs, sub_seed, summarize, write_metrics_csv, CvReport, FoldOutcome, GcnLearner, GcnModel, Learner,
    MetricValues, MetricsReport, Prediction, RepeatReport, Scorer, Summary, METRICS_HEADER,
};
pub use metrics::{confusion, metrics, ConfusionMatrix, ThresholdMetrics};
pub use split::{kfold_split, stratified_holdout, CvPlan};

use thiserror::Error;

use crate::balance::BalanceError;
use crate::gcn::GcnError;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("label {0} is not binary")]
    NonBinary(u8),
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("ground truth has a single class")]
    SingleClass,
    #[error("ground truth has no positives")]
    NoPositives,
    #[error("score {0} is not finite")]
    NonFiniteScore(usize),
    #[error("cannot make {k} folds from {n} samples")]
    TooFewSamples { n: usize, k: usize },
    #[error("train fraction {0} outside (0, 1)")]
    InvalidFraction(f64),
    #[error("fold plan covers {plan} samples, dataset has {data}")]
    PlanMismatch { plan: usize, data: usize },
    #[error(transparent)]
    Balance(#[from] BalanceError),
    #[error(transparent)]
    Gcn(#[from] GcnError),
}
