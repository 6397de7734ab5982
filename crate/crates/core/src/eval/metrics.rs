//! Confusion counts and the threshold metrics derived from them.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Counts with seizure (label 1) as the positive class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }

    pub fn merge(&self, other: &Self) -> Self {
        Self {
            tp: self.tp + other.tp,
            fn_: self.fn_ + other.fn_,
            fp: self.fp + other.fp,
            tn: self.tn + other.tn,
        }
    }

    /// Rows are truth, columns prediction.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "truth,predicted_0,predicted_1")?;
        writeln!(out, "0,{},{}", self.tn, self.fp)?;
        writeln!(out, "1,{},{}", self.fn_, self.tp)
    }
}

pub(crate) fn check_binary(labels: &[u8]) -> Result<(), EvalError> {
    match labels.iter().find(|&&l| l > 1) {
        Some(&l) => Err(EvalError::NonBinary(l)),
        None => Ok(()),
    }
}

pub fn confusion(predictions: &[u8], truth: &[u8]) -> Result<ConfusionMatrix, EvalError> {
    if predictions.len() != truth.len() {
        return Err(EvalError::LengthMismatch(predictions.len(), truth.len()));
    }
    check_binary(predictions)?;
    check_binary(truth)?;
    let mut cm = ConfusionMatrix::default();
    for (&p, &t) in predictions.iter().zip(truth) {
        match (t, p) {
            (1, 1) => cm.tp += 1,
            (1, _) => cm.fn_ += 1,
            (_, 1) => cm.fp += 1,
            _ => cm.tn += 1,
        }
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdMetrics {
    pub accuracy: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
    pub f1: f64,
    /// Some ratio was 0/0 and reported as 0.
    pub degenerate: bool,
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<ThresholdMetrics, EvalError> {
    if cm.total() == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let mut degenerate = false;
    let mut ratio = |num: u64, den: u64| {
        if den == 0 {
            degenerate = true;
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    let accuracy = ratio(cm.tp + cm.tn, cm.total());
    let sensitivity = ratio(cm.tp, cm.tp + cm.fn_);
    let specificity = ratio(cm.tn, cm.tn + cm.fp);
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    // 2PR / (P + R) with the ratios expanded, so the value is a single
    // rounding of an integer ratio.
    let f1 = ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn_);
    Ok(ThresholdMetrics {
        accuracy,
        sensitivity,
        specificity,
        precision,
        f1,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tallies() {
        let cm = confusion(&[1, 1, 0, 0], &[1, 1, 0, 0]).unwrap();
        assert_eq!(cm, ConfusionMatrix { tp: 2, fn_: 0, fp: 0, tn: 2 });
        let cm = confusion(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap();
        assert_eq!((cm.tp, cm.tn), (0, 0));
        assert_eq!(confusion(&[1], &[1, 0]).unwrap_err(), EvalError::LengthMismatch(1, 2));
        assert_eq!(confusion(&[2], &[1]).unwrap_err(), EvalError::NonBinary(2));
    }

    #[test]
    fn delta_like_row() {
        let m = metrics(&ConfusionMatrix { tp: 986, fn_: 14, fp: 50, tn: 950 }).unwrap();
        assert_eq!(m.sensitivity, 0.986);
        assert_eq!(m.specificity, 0.95);
        assert_eq!(m.accuracy, 0.968);
        assert!(!m.degenerate);
    }

    #[test]
    fn degenerate_and_perfect() {
        let m = metrics(&ConfusionMatrix { tp: 0, fn_: 0, fp: 3, tn: 5 }).unwrap();
        assert_eq!(m.sensitivity, 0.0);
        assert_eq!(m.f1, 0.0);
        assert!(m.degenerate);
        let m = metrics(&ConfusionMatrix { tp: 4, fn_: 0, fp: 0, tn: 9 }).unwrap();
        assert_eq!([m.accuracy, m.sensitivity, m.specificity, m.precision, m.f1], [1.0; 5]);
        assert_eq!(metrics(&ConfusionMatrix::default()).unwrap_err(), EvalError::EmptyMatrix);
    }

    #[test]
    fn confusion_csv() {
        let mut buf = Vec::new();
        ConfusionMatrix { tp: 1, fn_: 2, fp: 3, tn: 4 }.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "truth,predicted_0,predicted_1\n0,4,3\n1,2,1\n");
    }
}
