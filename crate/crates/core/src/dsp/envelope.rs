use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Amplitude envelope as the magnitude of the analytic signal.
///
/// Computed over the whole signal at once: forward FFT, zero the negative
/// frequencies, double the positive ones, inverse FFT, take `|.|`.
pub fn envelope(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = signal.iter().map(|&s| Complex64::new(s, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);

    // Bin 0 and (for even n) the Nyquist bin keep unit weight.
    let positive_end = n.div_ceil(2);
    for b in &mut buf[1..positive_end] {
        *b *= 2.0;
    }
    let negative_start = n / 2 + 1;
    for b in &mut buf[negative_start..] {
        *b = Complex64::new(0.0, 0.0);
    }

    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.norm() * scale).collect()
}
