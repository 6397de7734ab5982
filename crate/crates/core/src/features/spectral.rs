use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Shannon entropy (bits) of the normalized one-sided periodogram, DC
/// excluded. Bins `1..=N/2`; an all-zero spectrum gives 0.
pub struct SpectralEntropy {
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl SpectralEntropy {
    pub fn new(frame_len: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(frame_len);
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Self {
            fft,
            buf: vec![Complex64::default(); frame_len],
            scratch,
        }
    }

    pub fn frame_len(&self) -> usize {
        self.buf.len()
    }

    pub fn compute(&mut self, frame: &[f64]) -> f64 {
        assert_eq!(frame.len(), self.buf.len(), "frame length differs from plan");
        for (b, &y) in self.buf.iter_mut().zip(frame) {
            *b = Complex64::new(y, 0.0);
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        let bins = &self.buf[1..=frame.len() / 2];
        let total: f64 = bins.iter().map(|c| c.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        -bins
            .iter()
            .map(|c| c.norm_sqr() / total)
            .filter(|&p| p > 0.0)
            .map(|p| p * p.log2())
            .sum::<f64>()
    }
}

/// One-shot convenience; plans an FFT per call.
pub fn spectral_entropy(frame: &[f64]) -> f64 {
    SpectralEntropy::new(frame.len()).compute(frame)
}
