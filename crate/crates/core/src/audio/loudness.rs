//! ITU-R BS.1770-4 integrated loudness.
//!
//! K-weighting is two biquads (high shelf, then high pass) whose analogue
//! prototypes are fitted to the 48 kHz reference response and mapped to the
//! buffer's own rate with the bilinear transform. Gating uses 400 ms blocks
//! with 75 % overlap, an absolute gate at -70 LUFS and a relative gate 10 LU
//! below the absolute-gated mean.

use std::f64::consts::PI;

use super::AudioBuffer;
use crate::{par, Error, Result};

pub const ABSOLUTE_GATE_LUFS: f64 = -70.0;
pub const RELATIVE_GATE_LU: f64 = -10.0;

const BLOCK_SECS: f64 = 0.4;
const STEP_SECS: f64 = 0.1;
const LOUDNESS_OFFSET: f64 = -0.691;

// Left and right weights are both 1.0, so channel weighting is a plain sum.

#[derive(Debug, Clone, Copy)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn high_shelf(rate: f64) -> Self {
        let gain_db = 3.999_843_853_97;
        let q = 0.707_175_236_955_419_3;
        let fc = 1_681.974_450_955_532;
        let k = (PI * fc / rate).tan();
        let vh = 10f64.powf(gain_db / 20.0);
        let vb = vh.powf(0.499_666_774_155);
        let a0 = 1.0 + k / q + k * k;
        Biquad {
            b0: (vh + vb * k / q + k * k) / a0,
            b1: 2.0 * (k * k - vh) / a0,
            b2: (vh - vb * k / q + k * k) / a0,
            a1: 2.0 * (k * k - 1.0) / a0,
            a2: (1.0 - k / q + k * k) / a0,
        }
    }

    fn high_pass(rate: f64) -> Self {
        let q = 0.500_327_037_325_395_3;
        let fc = 38.135_470_876_139_82;
        let k = (PI * fc / rate).tan();
        let a0 = 1.0 + k / q + k * k;
        Biquad {
            b0: 1.0,
            b1: -2.0,
            b2: 1.0,
            a1: 2.0 * (k * k - 1.0) / a0,
            a2: (1.0 - k / q + k * k) / a0,
        }
    }

    fn run(&self, input: &[f64]) -> Vec<f64> {
        let (mut x1, mut x2, mut y1, mut y2) = (0.0, 0.0, 0.0, 0.0);
        input
            .iter()
            .map(|&x0| {
                let y0 = self.b0 * x0 + self.b1 * x1 + self.b2 * x2 - self.a1 * y1 - self.a2 * y2;
                (x2, x1, y2, y1) = (x1, x0, y1, y0);
                y0
            })
            .collect()
    }
}

fn k_weight(channel: &[f64], rate: u32) -> Vec<f64> {
    let rate = rate as f64;
    Biquad::high_pass(rate).run(&Biquad::high_shelf(rate).run(channel))
}

fn block_loudness(power: f64) -> f64 {
    LOUDNESS_OFFSET + 10.0 * power.log10()
}

/// Gated integrated loudness in LUFS.
///
/// Returns `-inf` when every block falls below the absolute gate (for
/// example digital silence). Buffers shorter than one 400 ms block cannot be
/// measured.
pub fn measure_loudness(buffer: &AudioBuffer) -> Result<f64> {
    let rate = buffer.sample_rate();
    let block = (BLOCK_SECS * rate as f64).round() as usize;
    let step = (STEP_SECS * rate as f64).round() as usize;
    if buffer.len() < block || block == 0 {
        return Err(Error::Measurement(format!(
            "{} samples is shorter than one {block}-sample gating block",
            buffer.len()
        )));
    }
    let num_blocks = (buffer.len() - block) / step + 1;

    // Per-channel prefix sums of squared K-weighted samples.
    let prefix: Vec<Vec<f64>> = par::map_slice(buffer.channels(), |ch| {
        let weighted = k_weight(ch, rate);
        let mut acc = Vec::with_capacity(weighted.len() + 1);
        acc.push(0.0);
        let mut sum = 0.0;
        for z in weighted {
            sum += z * z;
            acc.push(sum);
        }
        acc
    });

    let powers: Vec<f64> = (0..num_blocks)
        .map(|j| {
            let start = j * step;
            prefix
                .iter()
                .map(|p| (p[start + block] - p[start]) / block as f64)
                .sum()
        })
        .collect();

    let above_absolute: Vec<f64> = powers
        .iter()
        .copied()
        .filter(|&p| block_loudness(p) > ABSOLUTE_GATE_LUFS)
        .collect();
    if above_absolute.is_empty() {
        return Ok(f64::NEG_INFINITY);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let relative_gate = block_loudness(mean(&above_absolute)) + RELATIVE_GATE_LU;
    let gated: Vec<f64> = above_absolute
        .into_iter()
        .filter(|&p| block_loudness(p) > relative_gate)
        .collect();
    Ok(block_loudness(mean(&gated)))
}

/// Linear gain that moves the buffer's integrated loudness to `target`.
pub fn loudness_gain(buffer: &AudioBuffer, target_lufs: f64) -> Result<f64> {
    let measured = measure_loudness(buffer)?;
    if !measured.is_finite() {
        return Err(Error::Measurement(
            "input is silent or below the absolute gate; cannot normalise".into(),
        ));
    }
    Ok(10f64.powf((target_lufs - measured) / 20.0))
}

/// Scales the buffer by a single gain so that it measures `target_lufs`.
pub fn normalize_loudness(buffer: &AudioBuffer, target_lufs: f64) -> Result<AudioBuffer> {
    Ok(buffer.scaled(loudness_gain(buffer, target_lufs)?))
}
