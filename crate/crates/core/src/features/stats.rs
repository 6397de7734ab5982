//! Per-frame statistics. Variances are population (divide by M).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub std: f64,
    pub variance: f64,
    pub median: f64,
    pub max_amp: f64,
}

pub(crate) fn mean(frame: &[f64]) -> f64 {
    frame.iter().sum::<f64>() / frame.len() as f64
}

pub(crate) fn variance(frame: &[f64]) -> f64 {
    let mu = mean(frame);
    frame.iter().map(|y| (y - mu) * (y - mu)).sum::<f64>() / frame.len() as f64
}

/// Median of `sorted` (ascending).
pub(crate) fn median_sorted(sorted: &[f64]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2]
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) / 2.0
    }
}

pub(crate) fn moments_with(frame: &[f64], sort_buf: &mut Vec<f64>) -> Moments {
    assert!(!frame.is_empty(), "moments of an empty frame");
    let mean = mean(frame);
    let variance = frame.iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / frame.len() as f64;
    sort_buf.clear();
    sort_buf.extend_from_slice(frame);
    sort_buf.sort_unstable_by(f64::total_cmp);
    let median = median_sorted(sort_buf);
    let max_amp = sort_buf[sort_buf.len() - 1];
    Moments {
        mean,
        std: variance.sqrt(),
        variance,
        median,
        max_amp,
    }
}

/// Mean, population std and variance, median, and signed maximum.
pub fn moments(frame: &[f64]) -> Moments {
    moments_with(frame, &mut Vec::with_capacity(frame.len()))
}

/// Third and fourth standardized moments (kurtosis is not excess). A
/// constant frame gives `(0, 0)`.
pub fn shape_stats(frame: &[f64]) -> (f64, f64) {
    assert!(!frame.is_empty(), "shape statistics of an empty frame");
    let mu = mean(frame);
    let sigma = variance(frame).sqrt();
    if sigma == 0.0 {
        return (0.0, 0.0);
    }
    let (mut s3, mut s4) = (0.0, 0.0);
    for y in frame {
        let z = (y - mu) / sigma;
        let z2 = z * z;
        s3 += z2 * z;
        s4 += z2 * z2;
    }
    let m = frame.len() as f64;
    (s3 / m, s4 / m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hjorth {
    pub activity: f64,
    pub mobility: f64,
    pub complexity: f64,
}

fn ratio_sqrt(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        (num / den).sqrt()
    }
}

pub(crate) fn hjorth_with(frame: &[f64], d1: &mut Vec<f64>, d2: &mut Vec<f64>) -> Hjorth {
    assert!(frame.len() >= 3, "Hjorth parameters need at least 3 samples");
    d1.clear();
    d1.extend(frame.windows(2).map(|w| w[1] - w[0]));
    d2.clear();
    d2.extend(d1.windows(2).map(|w| w[1] - w[0]));
    let v0 = variance(frame);
    let v1 = variance(d1);
    let v2 = variance(d2);
    let mobility = ratio_sqrt(v1, v0);
    let mobility_d = ratio_sqrt(v2, v1);
    let complexity = if mobility == 0.0 { 0.0 } else { mobility_d / mobility };
    Hjorth {
        activity: v0,
        mobility,
        complexity,
    }
}

/// Activity (variance), mobility and complexity using first differences as
/// the derivative. Zero-variance denominators give 0.
pub fn hjorth(frame: &[f64]) -> Hjorth {
    hjorth_with(frame, &mut Vec::new(), &mut Vec::new())
}
