//! Short-time Fourier analysis and weighted overlap-add synthesis.
//!
//! The signal is padded with half a window of zeros on both sides so that
//! frame `m` is centred on original sample `m * hop`, and enough frames are
//! taken to centre one at or past the last sample. Synthesis uses the
//! analysis window again and divides by the summed squared window, which
//! reconstructs exactly even for hop/window pairs that are not
//! constant-overlap-add (such as 160/400 with Hann).

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{par, Error, Result};

const WOLA_FLOOR: f64 = 1e-8;

/// Frame geometry in milliseconds plus the transform size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StftParams {
    pub window_ms: f64,
    pub hop_ms: f64,
    pub fft_size: usize,
}

impl Default for StftParams {
    /// Hann 25 ms window, 10 ms hop, 512-point FFT.
    fn default() -> Self {
        StftParams {
            window_ms: 25.0,
            hop_ms: 10.0,
            fft_size: 512,
        }
    }
}

/// [`StftParams`] resolved to sample counts at a particular rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub window_len: usize,
    pub hop: usize,
    pub fft_size: usize,
}

impl StftParams {
    pub fn layout(&self, sample_rate: u32) -> Result<FrameLayout> {
        let to_samples = |ms: f64| (ms * sample_rate as f64 / 1000.0).round();
        let window = to_samples(self.window_ms);
        let hop = to_samples(self.hop_ms);
        if !(window >= 1.0 && hop >= 1.0) {
            return Err(Error::Config(format!(
                "window {} ms / hop {} ms is under one sample at {sample_rate} Hz",
                self.window_ms, self.hop_ms
            )));
        }
        let layout = FrameLayout {
            window_len: window as usize,
            hop: hop as usize,
            fft_size: self.fft_size,
        };
        layout.validate()?;
        Ok(layout)
    }
}

impl FrameLayout {
    fn validate(&self) -> Result<()> {
        if self.hop == 0 || self.hop > self.window_len {
            return Err(Error::Config(format!(
                "hop {} must be in 1..={}",
                self.hop, self.window_len
            )));
        }
        if self.window_len > self.fft_size {
            return Err(Error::Config(format!(
                "FFT size {} is smaller than the {}-sample window",
                self.fft_size, self.window_len
            )));
        }
        Ok(())
    }

    fn left_pad(&self) -> usize {
        self.window_len / 2
    }

    fn num_frames(&self, signal_len: usize) -> usize {
        signal_len.div_ceil(self.hop) + 1
    }
}

/// Frames that fit entirely inside an unpadded signal: `1 + (len - window) / hop`.
pub fn full_frame_count(signal_len: usize, layout: &FrameLayout) -> usize {
    if signal_len < layout.window_len {
        0
    } else {
        1 + (signal_len - layout.window_len) / layout.hop
    }
}

/// Periodic Hann window of length `n`.
pub fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// Complex spectrogram, frame-major, `fft_size / 2 + 1` bins per frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrogram {
    frames: Vec<Vec<Complex64>>,
    layout: FrameLayout,
    sample_rate: u32,
    signal_len: usize,
}

impl Spectrogram {
    pub fn frames(&self) -> &[Vec<Complex64>] {
        &self.frames
    }

    pub fn frames_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.frames
    }

    pub fn num_frames(&self) -> usize {
        self.frames.len()
    }

    pub fn num_bins(&self) -> usize {
        self.layout.fft_size / 2 + 1
    }

    pub fn layout(&self) -> FrameLayout {
        self.layout
    }

    pub fn fft_size(&self) -> usize {
        self.layout.fft_size
    }

    pub fn hop(&self) -> usize {
        self.layout.hop
    }

    pub fn window_len(&self) -> usize {
        self.layout.window_len
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    /// Length of the analysed signal before padding.
    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn bin_frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.sample_rate as f64 / self.layout.fft_size as f64
    }

    /// Time in seconds of the original sample frame `m` is centred on.
    pub fn frame_center_time(&self, frame: usize) -> f64 {
        (frame * self.layout.hop) as f64 / self.sample_rate as f64
    }

    /// Frobenius norm over all complex entries.
    pub fn norm(&self) -> f64 {
        self.frames
            .iter()
            .flatten()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Frobenius norm of `self - other`. Both must share geometry.
    pub fn distance(&self, other: &Spectrogram) -> Result<f64> {
        if self.layout != other.layout || self.frames.len() != other.frames.len() {
            return Err(Error::Precondition(
                "spectrograms have different geometry".into(),
            ));
        }
        Ok(self
            .frames
            .iter()
            .zip(&other.frames)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()))
            .sum::<f64>()
            .sqrt())
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans(n: usize) -> Plans {
    let mut planner = FftPlanner::<f64>::new();
    Plans {
        forward: planner.plan_fft_forward(n),
        inverse: planner.plan_fft_inverse(n),
    }
}

/// Analyses `signal` at `sample_rate` with `params`.
pub fn stft(signal: &[f64], params: &StftParams, sample_rate: u32) -> Result<Spectrogram> {
    if signal.is_empty() {
        return Err(Error::Precondition("cannot analyse an empty signal".into()));
    }
    let layout = params.layout(sample_rate)?;
    let window = hann_periodic(layout.window_len);
    let left = layout.left_pad();
    let num_frames = layout.num_frames(signal.len());
    let n = layout.fft_size;
    let fft = plans(n).forward;

    let frames = par::map_range(num_frames, |m| {
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let origin = (m * layout.hop) as isize - left as isize;
        for (j, (slot, w)) in buf.iter_mut().zip(&window).enumerate() {
            let idx = origin + j as isize;
            if idx >= 0 && (idx as usize) < signal.len() {
                slot.re = signal[idx as usize] * w;
            }
        }
        fft.process(&mut buf);
        buf.truncate(n / 2 + 1);
        buf
    });

    Ok(Spectrogram {
        frames,
        layout,
        sample_rate,
        signal_len: signal.len(),
    })
}

/// Weighted overlap-add resynthesis of the original-length signal.
pub fn istft(spec: &Spectrogram) -> Result<Vec<f64>> {
    let layout = spec.layout;
    layout.validate()?;
    let n = layout.fft_size;
    let bins = n / 2 + 1;
    if let Some(bad) = spec.frames.iter().position(|f| f.len() != bins) {
        return Err(Error::Format(format!(
            "frame {bad} has {} bins, expected {bins}",
            spec.frames[bad].len()
        )));
    }
    let window = hann_periodic(layout.window_len);
    let ifft = plans(n).inverse;
    let scale = 1.0 / n as f64;

    let segments = par::map_slice(&spec.frames, |frame| {
        let mut full = vec![Complex64::new(0.0, 0.0); n];
        full[..bins].copy_from_slice(frame);
        for k in 1..n.div_ceil(2) {
            full[n - k] = frame[k].conj();
        }
        ifft.process(&mut full);
        full[..layout.window_len]
            .iter()
            .zip(&window)
            .map(|(c, w)| c.re * scale * w)
            .collect::<Vec<f64>>()
    });

    let padded_len = (spec.frames.len().saturating_sub(1)) * layout.hop + layout.window_len;
    let mut out = vec![0.0; padded_len];
    let mut weight = vec![0.0; padded_len];
    let wsq: Vec<f64> = window.iter().map(|w| w * w).collect();
    for (m, seg) in segments.iter().enumerate() {
        let start = m * layout.hop;
        for (j, v) in seg.iter().enumerate() {
            out[start + j] += v;
            weight[start + j] += wsq[j];
        }
    }

    let left = layout.left_pad();
    Ok((0..spec.signal_len)
        .map(|i| {
            let p = i + left;
            match (out.get(p), weight.get(p)) {
                (Some(&v), Some(&w)) if w > WOLA_FLOOR => v / w,
                (Some(&v), _) => v,
                _ => 0.0,
            }
        })
        .collect())
}
