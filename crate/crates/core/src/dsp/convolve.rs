use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Smallest power of two that holds a linear convolution of the given lengths.
pub fn fft_len_for(signal_len: usize, ir_len: usize) -> usize {
    (signal_len + ir_len - 1).next_power_of_two()
}

/// Full linear convolution via one zero-padded FFT product.
///
/// The result has `signal.len() + ir.len() - 1` samples; empty inputs give an
/// empty output.
pub fn fft_convolve(signal: &[f64], ir: &[f64]) -> Vec<f64> {
    if signal.is_empty() || ir.is_empty() {
        return Vec::new();
    }
    let out_len = signal.len() + ir.len() - 1;
    let n = fft_len_for(signal.len(), ir.len());
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);

    let pad = |x: &[f64]| {
        let mut v: Vec<Complex64> = x.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        v.resize(n, Complex64::new(0.0, 0.0));
        v
    };
    let mut a = pad(signal);
    let mut b = pad(ir);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    planner.plan_fft_inverse(n).process(&mut a);
    let scale = 1.0 / n as f64;
    a[..out_len].iter().map(|c| c.re * scale).collect()
}

/// Overlap-save filtering of fixed-size output blocks against IRs of one
/// length.
///
/// Each call consumes a segment of `block + ir_len - 1` input samples (the
/// block plus the `ir_len - 1` samples preceding it) and yields the `block`
/// fully-overlapped output samples. One forward transform of a segment can be
/// reused against several IR spectra.
#[derive(Clone)]
pub struct OverlapSave {
    block: usize,
    ir_len: usize,
    fft_len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl OverlapSave {
    pub fn new(block: usize, ir_len: usize) -> Self {
        assert!(
            block > 0 && ir_len > 0,
            "block and IR length must be positive"
        );
        let fft_len = fft_len_for(block, ir_len);
        let mut planner = FftPlanner::<f64>::new();
        OverlapSave {
            block,
            ir_len,
            fft_len,
            forward: planner.plan_fft_forward(fft_len),
            inverse: planner.plan_fft_inverse(fft_len),
        }
    }

    pub fn block(&self) -> usize {
        self.block
    }

    pub fn segment_len(&self) -> usize {
        self.block + self.ir_len - 1
    }

    fn transform(&self, x: &[f64]) -> Vec<Complex64> {
        let mut v: Vec<Complex64> = x.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        v.resize(self.fft_len, Complex64::new(0.0, 0.0));
        self.forward.process(&mut v);
        v
    }

    /// Spectrum of an impulse response, for use with [`OverlapSave::apply`].
    pub fn ir_spectrum(&self, ir: &[f64]) -> Vec<Complex64> {
        assert_eq!(ir.len(), self.ir_len, "IR length mismatch");
        self.transform(ir)
    }

    /// Spectrum of an input segment of exactly [`OverlapSave::segment_len`] samples.
    pub fn segment_spectrum(&self, segment: &[f64]) -> Vec<Complex64> {
        assert_eq!(segment.len(), self.segment_len(), "segment length mismatch");
        self.transform(segment)
    }

    /// The `block` valid output samples of `segment ⊛ ir`.
    pub fn apply(&self, segment: &[Complex64], ir: &[Complex64]) -> Vec<f64> {
        let mut prod: Vec<Complex64> = segment.iter().zip(ir).map(|(a, b)| a * b).collect();
        self.inverse.process(&mut prod);
        let scale = 1.0 / self.fft_len as f64;
        prod[self.ir_len - 1..self.ir_len - 1 + self.block]
            .iter()
            .map(|c| c.re * scale)
            .collect()
    }
}
