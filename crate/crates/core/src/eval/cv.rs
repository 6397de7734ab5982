//! Cross-validation, repeated runs, and the GCN learner they drive.

use std::io::Write;

use ndarray::ArrayView2;

use super::curves::{pr_auc, roc_auc};
use super::metrics::{confusion, metrics, ConfusionMatrix};
use super::split::CvPlan;
use super::EvalError;
use crate::balance::{smote, FeatureDataset, Provenance};
use crate::features::Standardizer;
use crate::gcn::{label_from_probabilities, predict_proba, train, GcnConfig, GcnParams};
use crate::graphs::EegGraph;
use crate::preprocess::BandName;

/// Independent seed stream `stream` derived from `seed` (SplitMix64 finalizer).
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub labels: Vec<u8>,
    /// Seizure-class score, higher meaning more ictal.
    pub scores: Vec<f64>,
}

pub trait Scorer {
    fn predict(&self, x: ArrayView2<f64>) -> Result<Prediction, EvalError>;
}

pub trait Learner {
    type Model: Scorer;
    fn fit(&self, train: &FeatureDataset, seed: u64) -> Result<Self::Model, EvalError>;
}

/// Standardize on the real training rows, oversample with SMOTE, train.
#[derive(Debug, Clone)]
pub struct GcnLearner {
    pub graph: EegGraph,
    pub config: GcnConfig,
    pub smote_k: usize,
    pub standardize: bool,
}

#[derive(Debug, Clone)]
pub struct GcnModel {
    pub params: GcnParams,
    pub standardizer: Option<Standardizer>,
    pub graph: EegGraph,
    pub config: GcnConfig,
    pub loss_history: Vec<f64>,
}

impl Learner for GcnLearner {
    type Model = GcnModel;

    fn fit(&self, train_set: &FeatureDataset, seed: u64) -> Result<GcnModel, EvalError> {
        let real: Vec<usize> = (0..train_set.len())
            .filter(|&i| train_set.provenance[i] == Provenance::Real)
            .collect();
        let mut data = train_set.clone();
        let standardizer = self.standardize.then(|| {
            let s = Standardizer::fit(train_set.subset(&real).x.view());
            s.transform(&mut data.x);
            s
        });
        let (neg, pos) = data.class_counts();
        let minority = neg.min(pos);
        let balanced = if minority >= 2 && neg != pos {
            let k = self.smote_k.min(minority - 1);
            if k < self.smote_k {
                log::warn!("only {minority} minority rows; SMOTE uses k = {k}");
            }
            smote(&data, k, sub_seed(seed, 1))?
        } else {
            data
        };
        let config = GcnConfig {
            seed: sub_seed(seed, 2),
            ..self.config.clone()
        };
        let model = train(&balanced, &self.graph, &config)?;
        Ok(GcnModel {
            params: model.params,
            standardizer,
            graph: self.graph.clone(),
            config,
            loss_history: model.loss_history,
        })
    }
}

impl Scorer for GcnModel {
    fn predict(&self, x: ArrayView2<f64>) -> Result<Prediction, EvalError> {
        let proba = match &self.standardizer {
            Some(s) => {
                let mut z = x.to_owned();
                s.transform(&mut z);
                predict_proba(&self.params, &self.graph, z.view())?
            }
            None => predict_proba(&self.params, &self.graph, x)?,
        };
        Ok(Prediction {
            labels: proba.rows().into_iter().map(label_from_probabilities).collect(),
            scores: proba.column(1).to_vec(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricValues {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
    /// NaN when the evaluated set has a single class.
    pub roc_auc: f64,
    /// NaN when the evaluated set has no positives.
    pub pr_auc: f64,
}

impl MetricValues {
    pub const NAMES: [&'static str; 7] = ["accuracy", "sensitivity", "specificity", "precision", "f1", "roc_auc", "pr_auc"];

    pub fn to_array(&self) -> [f64; 7] {
        [
            self.accuracy,
            self.sensitivity,
            self.specificity,
            self.precision,
            self.f1,
            self.roc_auc,
            self.pr_auc,
        ]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self {
            accuracy: a[0],
            sensitivity: a[1],
            specificity: a[2],
            precision: a[3],
            f1: a[4],
            roc_auc: a[5],
            pr_auc: a[6],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub band: BandName,
    /// Fold ordinal, or a tag such as `holdout`, `mean`, `std`.
    pub fold: String,
    pub values: MetricValues,
    pub confusion: Option<ConfusionMatrix>,
    pub degenerate: bool,
}

pub fn evaluate(prediction: &Prediction, truth: &[u8], band: BandName, fold: impl Into<String>) -> Result<MetricsReport, EvalError> {
    let cm = confusion(&prediction.labels, truth)?;
    let m = metrics(&cm)?;
    let roc = match roc_auc(&prediction.scores, truth) {
        Ok((_, auc)) => auc,
        Err(EvalError::SingleClass) => f64::NAN,
        Err(e) => return Err(e),
    };
    let pr = match pr_auc(&prediction.scores, truth) {
        Ok((_, ap)) => ap,
        Err(EvalError::NoPositives) => f64::NAN,
        Err(e) => return Err(e),
    };
    Ok(MetricsReport {
        band,
        fold: fold.into(),
        values: MetricValues {
            accuracy: m.accuracy,
            sensitivity: m.sensitivity,
            specificity: m.specificity,
            precision: m.precision,
            f1: m.f1,
            roc_auc: roc,
            pr_auc: pr,
        },
        confusion: Some(cm),
        degenerate: m.degenerate,
    })
}

/// Per-metric statistics over runs or folds; NaN entries are skipped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: MetricValues,
    /// Sample (n − 1) standard deviation.
    pub std: MetricValues,
    pub min: MetricValues,
    pub max: MetricValues,
}

pub fn summarize(values: &[MetricValues]) -> Summary {
    let mut mean = [f64::NAN; 7];
    let mut std = [f64::NAN; 7];
    let mut min = [f64::NAN; 7];
    let mut max = [f64::NAN; 7];
    for m in 0..7 {
        let xs: Vec<f64> = values.iter().map(|v| v.to_array()[m]).filter(|x| x.is_finite()).collect();
        if xs.is_empty() {
            continue;
        }
        let n = xs.len() as f64;
        let rough = xs.iter().sum::<f64>() / n;
        // one refinement pass; makes the mean of equal values exact
        let mu = rough + xs.iter().map(|x| x - rough).sum::<f64>() / n;
        mean[m] = mu;
        std[m] = if xs.len() > 1 {
            (xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        min[m] = xs.iter().copied().fold(f64::INFINITY, f64::min);
        max[m] = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    Summary {
        mean: MetricValues::from_array(mean),
        std: MetricValues::from_array(std),
        min: MetricValues::from_array(min),
        max: MetricValues::from_array(max),
    }
}

#[derive(Debug, Clone)]
pub struct FoldOutcome {
    pub report: MetricsReport,
    pub test_indices: Vec<usize>,
    pub scores: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CvReport {
    pub folds: Vec<FoldOutcome>,
    pub summary: Summary,
}

impl CvReport {
    /// Fold rows followed by `mean` and `std` rows.
    pub fn rows(&self) -> Vec<MetricsReport> {
        let band = self.folds.first().map_or(BandName::Broadband, |f| f.report.band);
        let mut rows: Vec<MetricsReport> = self.folds.iter().map(|f| f.report.clone()).collect();
        for (tag, values) in [("mean", self.summary.mean), ("std", self.summary.std)] {
            rows.push(MetricsReport {
                band,
                fold: tag.into(),
                values,
                confusion: None,
                degenerate: false,
            });
        }
        rows
    }
}

/// Fits on each fold's complement and scores the held-out fold. Fold `f`
/// trains with seed `sub_seed(seed, f)`.
pub fn cross_validate<L: Learner>(learner: &L, data: &FeatureDataset, plan: &CvPlan, band: BandName, seed: u64) -> Result<CvReport, EvalError> {
    if plan.len() != data.len() {
        return Err(EvalError::PlanMismatch {
            plan: plan.len(),
            data: data.len(),
        });
    }
    let mut folds = Vec::with_capacity(plan.k);
    for f in 0..plan.k {
        let (train_idx, test_idx) = plan.split(f);
        let model = learner.fit(&data.subset(&train_idx), sub_seed(seed, f as u64))?;
        let test = data.subset(&test_idx);
        let prediction = model.predict(test.x.view())?;
        let report = evaluate(&prediction, &test.y, band, f.to_string())?;
        log::info!("{band} fold {f}: accuracy {:.4}", report.values.accuracy);
        folds.push(FoldOutcome {
            report,
            test_indices: test_idx,
            scores: prediction.scores,
        });
    }
    let values: Vec<MetricValues> = folds.iter().map(|f| f.report.values).collect();
    Ok(CvReport {
        folds,
        summary: summarize(&values),
    })
}

#[derive(Debug, Clone)]
pub struct RepeatReport {
    pub runs: Vec<(u64, MetricValues)>,
    pub summary: Summary,
}

/// Runs `experiment` with seeds `seed, seed + 1, …`.
pub fn repeat_runs<F>(times: usize, seed: u64, mut experiment: F) -> Result<RepeatReport, EvalError>
where
    F: FnMut(u64) -> Result<MetricValues, EvalError>,
{
    let mut runs = Vec::with_capacity(times);
    for i in 0..times as u64 {
        let s = seed.wrapping_add(i);
        runs.push((s, experiment(s)?));
    }
    let values: Vec<MetricValues> = runs.iter().map(|r| r.1).collect();
    Ok(RepeatReport {
        summary: summarize(&values),
        runs,
    })
}

pub const METRICS_HEADER: &str = "band,fold,accuracy,sensitivity,specificity,precision,f1,roc_auc,pr_auc";

pub fn write_metrics_csv<W: Write>(mut out: W, rows: &[MetricsReport]) -> std::io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for r in rows {
        let values: Vec<String> = r.values.to_array().iter().map(|v| v.to_string()).collect();
        writeln!(out, "{},{},{}", r.band, r.fold, values.join(","))?;
    }
    Ok(())
}
