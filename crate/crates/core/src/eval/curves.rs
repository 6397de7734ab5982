//! ROC and precision-recall curves over distinct score thresholds.

use std::cmp::Ordering;
use std::io::Write;

use super::metrics::check_binary;
use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
}

type Sweep = (Vec<(f64, u64, u64)>, u64, u64);

/// Cumulative (threshold, tp, fp) after admitting every score ≥ threshold,
/// one entry per distinct score, highest first.
fn sweep(scores: &[f64], truth: &[u8]) -> Result<Sweep, EvalError> {
    if scores.len() != truth.len() {
        return Err(EvalError::LengthMismatch(scores.len(), truth.len()));
    }
    check_binary(truth)?;
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore(i));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let pos = truth.iter().filter(|&&t| t == 1).count() as u64;
    let neg = truth.len() as u64 - pos;
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut steps = Vec::new();
    for (rank, &i) in order.iter().enumerate() {
        if truth[i] == 1 {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_tie = order.get(rank + 1).is_none_or(|&j| scores[j] != scores[i]);
        if last_of_tie {
            steps.push((scores[i], tp, fp));
        }
    }
    Ok((steps, pos, neg))
}

/// ROC points from (0, 0) and the trapezoidal area, which equals the
/// pairwise ranking probability with half credit for ties.
pub fn roc_auc(scores: &[f64], truth: &[u8]) -> Result<(Vec<RocPoint>, f64), EvalError> {
    let (steps, pos, neg) = sweep(scores, truth)?;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClass);
    }
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let mut area = 0.0;
    let (mut prev_tp, mut prev_fp) = (0u64, 0u64);
    for (threshold, tp, fp) in steps {
        // trapezoid in count units, scaled once at the end
        area += (fp - prev_fp) as f64 * (tp + prev_tp) as f64 / 2.0;
        points.push(RocPoint {
            threshold,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
        (prev_tp, prev_fp) = (tp, fp);
    }
    Ok((points, area / (pos as f64 * neg as f64)))
}

/// PR points per threshold and average precision under the step rule
/// `Σ (R_k − R_{k−1}) · P_k`.
pub fn pr_auc(scores: &[f64], truth: &[u8]) -> Result<(Vec<PrPoint>, f64), EvalError> {
    let (steps, pos, _) = sweep(scores, truth)?;
    if pos == 0 {
        return Err(EvalError::NoPositives);
    }
    let mut points = Vec::with_capacity(steps.len());
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for (threshold, tp, fp) in steps {
        let recall = tp as f64 / pos as f64;
        let precision = tp as f64 / (tp + fp) as f64;
        area += (recall - prev_recall) * precision;
        prev_recall = recall;
        points.push(PrPoint {
            threshold,
            recall,
            precision,
        });
    }
    Ok((points, area))
}

pub fn write_roc_csv<W: Write>(mut out: W, points: &[RocPoint]) -> std::io::Result<()> {
    writeln!(out, "threshold,fpr,tpr")?;
    for p in points {
        writeln!(out, "{},{},{}", p.threshold, p.fpr, p.tpr)?;
    }
    Ok(())
}

pub fn write_pr_csv<W: Write>(mut out: W, points: &[PrPoint]) -> std::io::Result<()> {
    writeln!(out, "threshold,recall,precision")?;
    for p in points {
        writeln!(out, "{},{},{}", p.threshold, p.recall, p.precision)?;
    }
    Ok(())
}
