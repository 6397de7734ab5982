//! Butterworth band-pass design as second-order sections, applied forward
//! and backward for zero phase.

use std::f64::consts::PI;

use ndarray::Array2;
use rustfft::num_complex::Complex64;

use super::bands::BandDefinition;
use super::PreprocessError;
use crate::signal_io::Recording;

/// Prototype order of the band-pass; the digital filter has twice as many poles.
pub const BUTTERWORTH_ORDER: usize = 4;

/// One biquad in transposed direct form II: `b = [b0, b1, b2]`, `a = [1, a1, a2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, z_inv: Complex64) -> Complex64 {
        let z2 = z_inv * z_inv;
        (self.b[0] + self.b[1] * z_inv + self.b[2] * z2) / (self.a[0] + self.a[1] * z_inv + self.a[2] * z2)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandpassFilter {
    pub sections: Vec<Biquad>,
    pub fs: f64,
}

impl BandpassFilter {
    pub fn design(band: &BandDefinition, fs: f64) -> Result<Self, PreprocessError> {
        if !(band.f_lo > 0.0 && band.f_lo < band.f_hi) {
            return Err(PreprocessError::InvalidBand {
                f_lo: band.f_lo,
                f_hi: band.f_hi,
            });
        }
        if band.f_hi >= fs / 2.0 {
            return Err(PreprocessError::Nyquist { f_hi: band.f_hi, fs });
        }
        let n = BUTTERWORTH_ORDER;
        let k = 2.0 * fs;
        let w1 = k * (PI * band.f_lo / fs).tan();
        let w2 = k * (PI * band.f_hi / fs).tan();
        let bw = w2 - w1;
        let w0_sq = w1 * w2;

        let mut poles = Vec::with_capacity(2 * n);
        for i in 1..=n {
            let theta = PI * (2 * i + n - 1) as f64 / (2 * n) as f64;
            let proto = Complex64::from_polar(1.0, theta);
            let half = proto * (bw / 2.0);
            let disc = (half * half - w0_sq).sqrt();
            for s in [half + disc, half - disc] {
                poles.push((k + s) / (k - s));
            }
        }
        let mut upper: Vec<Complex64> = poles.into_iter().filter(|p| p.im > 0.0).collect();
        assert_eq!(upper.len(), n, "band-pass poles come in conjugate pairs");
        upper.sort_by(|a, b| a.norm().total_cmp(&b.norm()));

        let mut sections: Vec<Biquad> = upper
            .iter()
            .map(|p| Biquad {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -2.0 * p.re, p.norm_sqr()],
            })
            .collect();

        // unit gain at the digital image of the analog centre frequency
        let wc = 2.0 * (w0_sq.sqrt() / k).atan();
        let z_inv = Complex64::from_polar(1.0, -wc);
        let mag: f64 = sections.iter().map(|s| s.response(z_inv)).product::<Complex64>().norm();
        let per_section = mag.powf(-1.0 / n as f64);
        for s in &mut sections {
            for b in &mut s.b {
                *b *= per_section;
            }
        }
        Ok(Self { sections, fs })
    }

    /// Magnitude of the single-pass response at `freq` Hz.
    pub fn magnitude(&self, freq: f64) -> f64 {
        let z_inv = Complex64::from_polar(1.0, -2.0 * PI * freq / self.fs);
        self.sections
            .iter()
            .map(|s| s.response(z_inv))
            .product::<Complex64>()
            .norm()
    }

    /// Edge padding on each side for zero-phase filtering: three times the
    /// filter order.
    pub fn pad_len(&self) -> usize {
        3 * 2 * self.sections.len()
    }

    /// Initial state per section for a unit step already in steady state.
    fn step_state(&self) -> Vec<[f64; 2]> {
        let mut level = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let dc = (s.b[0] + s.b[1] + s.b[2]) / (s.a[0] + s.a[1] + s.a[2]);
                let y = dc * level;
                let zi = [y - s.b[0] * level, s.b[2] * level - s.a[2] * y];
                level = y;
                zi
            })
            .collect()
    }

    fn run(&self, x: &mut [f64], init: &[[f64; 2]], scale: f64) {
        for (s, zi) in self.sections.iter().zip(init) {
            let [b0, b1, b2] = s.b;
            let [_, a1, a2] = s.a;
            let mut z1 = zi[0] * scale;
            let mut z2 = zi[1] * scale;
            for v in x.iter_mut() {
                let input = *v;
                let y = b0 * input + z1;
                z1 = b1 * input - a1 * y + z2;
                z2 = b2 * input - a2 * y;
                *v = y;
            }
        }
    }

    /// Forward-backward filtering of one channel with even-reflection padding.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>, PreprocessError> {
        let pad = self.pad_len();
        let n = x.len();
        if n <= pad {
            return Err(PreprocessError::TooShort { samples: n, needed: pad + 1 });
        }
        let mut ext = Vec::with_capacity(n + 2 * pad);
        ext.extend((1..=pad).rev().map(|i| x[i]));
        ext.extend_from_slice(x);
        ext.extend((n - 1 - pad..n - 1).rev().map(|i| x[i]));

        let zi = self.step_state();
        let first = ext[0];
        self.run(&mut ext, &zi, first);
        ext.reverse();
        let first = ext[0];
        self.run(&mut ext, &zi, first);
        ext.reverse();
        Ok(ext[pad..pad + n].to_vec())
    }
}

/// Zero-phase band-pass of every channel; output has the input's shape.
pub fn bandpass(recording: &Recording, band: &BandDefinition) -> Result<Recording, PreprocessError> {
    let filter = BandpassFilter::design(band, recording.fs())?;
    let mut out = Array2::<f64>::zeros(recording.data().dim());
    for (src, mut dst) in recording.data().rows().into_iter().zip(out.rows_mut()) {
        let x: Vec<f64> = src.to_vec();
        let y = filter.filtfilt(&x)?;
        dst.assign(&ndarray::ArrayView1::from(&y[..]));
    }
    Ok(recording
        .with_data(out)
        .expect("filtered data keeps the recording's shape"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::BandName;

    /// Analytic squared magnitude of an order-N Butterworth band-pass
    /// (bilinear, prewarped): 1 / (1 + Omega^(2N)) per pass.
    fn analytic_gain(band: &BandDefinition, fs: f64, f: f64) -> f64 {
        let warp = |x: f64| 2.0 * fs * (PI * x / fs).tan();
        let (w1, w2, w) = (warp(band.f_lo), warp(band.f_hi), warp(f));
        let omega = (w * w - w1 * w2) / (w * (w2 - w1));
        1.0 / (1.0 + omega.powi(2 * BUTTERWORTH_ORDER as i32))
    }

    fn sine(freq: f64, fs: f64, secs: f64) -> Vec<f64> {
        let n = (fs * secs) as usize;
        (0..n).map(|j| (2.0 * PI * freq * j as f64 / fs).sin()).collect()
    }

    fn steady_amplitude(y: &[f64], skip: usize) -> f64 {
        let mid = &y[skip..y.len() - skip];
        (2.0 * mid.iter().map(|v| v * v).sum::<f64>() / mid.len() as f64).sqrt()
    }

    #[test]
    fn single_pass_matches_analytic_response() {
        for band in BandName::ALL {
            let def = band.definition();
            let f = BandpassFilter::design(&def, 256.0).unwrap();
            for freq in [0.3, 1.0, 2.0, 5.0, 10.0, 17.0, 25.0, 45.0, 90.0] {
                let got = f.magnitude(freq).powi(2);
                let want = analytic_gain(&def, 256.0, freq);
                assert!((got - want).abs() < 1e-9, "{band} {freq}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn alpha_passes_10hz_and_blocks_2hz() {
        let def = BandName::Alpha.definition();
        let f = BandpassFilter::design(&def, 256.0).unwrap();
        let y = f.filtfilt(&sine(10.0, 256.0, 10.0)).unwrap();
        let amp = steady_amplitude(&y, 512);
        let oracle = analytic_gain(&def, 256.0, 10.0);
        assert!((0.9..=1.1).contains(&amp), "{amp}");
        assert!((amp - oracle).abs() < 0.01);
        let y = f.filtfilt(&sine(2.0, 256.0, 10.0)).unwrap();
        assert!(steady_amplitude(&y, 512) < 0.1);
    }

    #[test]
    fn zero_in_zero_out() {
        let f = BandpassFilter::design(&BandName::Delta.definition(), 256.0).unwrap();
        assert!(f.filtfilt(&vec![0.0; 1000]).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn errors() {
        let bad = BandDefinition { name: BandName::Broadband, f_lo: 0.5, f_hi: 128.0 };
        assert!(matches!(BandpassFilter::design(&bad, 256.0), Err(PreprocessError::Nyquist { .. })));
        let bad = BandDefinition { name: BandName::Broadband, f_lo: 5.0, f_hi: 4.0 };
        assert!(BandpassFilter::design(&bad, 256.0).is_err());
        let f = BandpassFilter::design(&BandName::Theta.definition(), 256.0).unwrap();
        assert_eq!(f.pad_len(), 24);
        assert!(matches!(f.filtfilt(&[1.0; 24]), Err(PreprocessError::TooShort { .. })));
        assert!(f.filtfilt(&[1.0; 25]).is_ok());
    }

    #[test]
    fn output_length_matches_input() {
        let f = BandpassFilter::design(&BandName::LowerBeta.definition(), 256.0).unwrap();
        for n in [25, 100, 1537] {
            assert_eq!(f.filtfilt(&vec![1.0; n]).unwrap().len(), n);
        }
    }
}
