//! Windowed-sinc polyphase sample-rate conversion.
//!
//! The interpolation kernel is a Kaiser-windowed sinc (β = 8.6) with its
//! cutoff at 0.45 of the lower of the two rates. The kernel spans 64 periods
//! of the lower rate, i.e. 64 taps per output phase when upsampling and
//! proportionally more when downsampling. Phase tables are built once per
//! call when the rate ratio has a manageable number of phases.

use super::AudioBuffer;
use crate::{par, Result};

const KAISER_BETA: f64 = 8.6;
const TAPS_PER_PHASE: usize = 64;
const CUTOFF: f64 = 0.45;
const MAX_TABLE_PHASES: u64 = 4096;
const CHUNK: usize = 1024;

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Zeroth-order modified Bessel function of the first kind (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

struct Kernel {
    /// Cutoff in cycles per input sample.
    cutoff: f64,
    /// Half-width in input samples.
    half_width: f64,
    /// Taps either side of the interpolation point.
    reach: usize,
    i0_beta: f64,
}

impl Kernel {
    fn new(source: u32, target: u32) -> Self {
        let lower = source.min(target) as f64;
        let stretch = source as f64 / lower;
        let half_width = (TAPS_PER_PHASE / 2) as f64 * stretch;
        Kernel {
            cutoff: CUTOFF * lower / source as f64,
            half_width,
            reach: half_width.ceil() as usize,
            i0_beta: bessel_i0(KAISER_BETA),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        let u = t / self.half_width;
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let window = bessel_i0(KAISER_BETA * (1.0 - u * u).sqrt()) / self.i0_beta;
        let arg = 2.0 * self.cutoff * t;
        let sinc = if arg == 0.0 {
            1.0
        } else {
            (std::f64::consts::PI * arg).sin() / (std::f64::consts::PI * arg)
        };
        2.0 * self.cutoff * sinc * window
    }

    /// Taps for input offsets `1 - reach ..= reach` around a point `frac`
    /// samples past an integer input index. Normalised to unit DC gain.
    fn taps(&self, frac: f64) -> Vec<f64> {
        let reach = self.reach as i64;
        let mut taps: Vec<f64> = (1 - reach..=reach)
            .map(|k| self.eval(k as f64 - frac))
            .collect();
        let sum: f64 = taps.iter().sum();
        if sum != 0.0 {
            taps.iter_mut().for_each(|t| *t /= sum);
        }
        taps
    }
}

/// Converts every channel to `target_rate`.
///
/// The output has `round(len * target / source)` frames. Equal rates return
/// an identical copy.
pub fn resample(buffer: &AudioBuffer, target_rate: u32) -> Result<AudioBuffer> {
    let source_rate = buffer.sample_rate();
    if target_rate == 0 {
        return Err(crate::Error::Config(
            "target sample rate must be positive".into(),
        ));
    }
    if target_rate == source_rate {
        return Ok(buffer.clone());
    }

    let g = gcd(source_rate as u64, target_rate as u64);
    let up = target_rate as u64 / g;
    let down = source_rate as u64 / g;
    let in_len = buffer.len() as u64;
    let out_len = ((in_len as u128 * target_rate as u128 + source_rate as u128 / 2)
        / source_rate as u128) as usize;

    let kernel = Kernel::new(source_rate, target_rate);
    let table: Option<Vec<Vec<f64>>> = (up <= MAX_TABLE_PHASES)
        .then(|| par::map_range(up as usize, |p| kernel.taps(p as f64 / up as f64)));

    let channels = buffer
        .channels()
        .iter()
        .map(|input| {
            let mut out = vec![0.0; out_len];
            par::fill_chunks(&mut out, CHUNK, |start, chunk| {
                for (j, y) in chunk.iter_mut().enumerate() {
                    let n = (start + j) as u64;
                    let pos = n * down;
                    let base = (pos / up) as i64;
                    let phase = pos % up;
                    let owned;
                    let taps: &[f64] = match &table {
                        Some(t) => &t[phase as usize],
                        None => {
                            owned = kernel.taps(phase as f64 / up as f64);
                            &owned
                        }
                    };
                    let first = base + 1 - kernel.reach as i64;
                    *y = taps
                        .iter()
                        .enumerate()
                        .filter_map(|(k, &h)| {
                            let idx = first + k as i64;
                            (idx >= 0 && (idx as usize) < input.len())
                                .then(|| h * input[idx as usize])
                        })
                        .sum();
                }
            });
            out
        })
        .collect();

    AudioBuffer::new(target_rate, channels)
}
