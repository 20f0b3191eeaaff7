//! Algorithmic binaural positioning.
//!
//! Three stages, applied in this order:
//!
//! 1. **Left/right**: linear amplitude split `S·(1−x)/2`, `S·(1+x)/2`.
//! 2. **Up/down**: spectral tilt `1 + y·(f/1000)^1.5` applied per STFT frame
//!    to both channels, clamped at zero.
//! 3. **Front/back**: `(s(t) + α·s(t−Δ)) / z` with `Δ = round(z·fs/v)`.
//!
//! Position parameters are held constant over blocks of `RenderConfig::block`
//! samples, sampled at the block centre; the elevation tilt follows the
//! trajectory per STFT frame.

use crate::audio::AudioBuffer;
use crate::config::RenderConfig;
use crate::dsp::{istft, stft, StftParams};
use crate::scene::Trajectory;
use crate::{par, Error, Result};

/// Splits a mono block between left and right by horizontal position `x`.
///
/// The louder side is `S·gain` and the quieter one `S - louder`. With the
/// louder gain at least 1/2 that subtraction is exact, so `left + right`
/// reproduces `S` bit for bit.
pub fn pan_lr(mono: &[f64], x: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("pan position {x} outside [-1, 1]")));
    }
    let split = |gain: f64| -> (Vec<f64>, Vec<f64>) {
        let loud: Vec<f64> = mono.iter().map(|s| s * gain).collect();
        let quiet = mono.iter().zip(&loud).map(|(s, l)| s - l).collect();
        (loud, quiet)
    };
    if x <= 0.0 {
        Ok(split((1.0 - x) / 2.0))
    } else {
        let (right, left) = split((1.0 + x) / 2.0);
        Ok((left, right))
    }
}

/// Frequency-dependent gain curve driven by vertical position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElevationCurve {
    pub pivot_hz: f64,
    pub exponent: f64,
}

impl Default for ElevationCurve {
    fn default() -> Self {
        ElevationCurve {
            pivot_hz: crate::config::DEFAULT_ELEVATION_PIVOT_HZ,
            exponent: crate::config::DEFAULT_ELEVATION_EXPONENT,
        }
    }
}

impl ElevationCurve {
    pub fn from_config(config: &RenderConfig) -> Self {
        ElevationCurve {
            pivot_hz: config.elevation_pivot_hz,
            exponent: config.elevation_exponent,
        }
    }

    /// `max(0, 1 + y·(f/pivot)^exponent)`.
    pub fn gain(&self, freq_hz: f64, y: f64) -> f64 {
        (1.0 + y * (freq_hz / self.pivot_hz).powf(self.exponent)).max(0.0)
    }

    /// Applies the per-frame gain curve to every channel of `audio`.
    ///
    /// `y_at` gives the vertical position at a time in seconds; it is sampled
    /// at each frame centre and the same gains are applied to all channels.
    pub fn apply<F>(&self, audio: &AudioBuffer, y_at: F, params: &StftParams) -> Result<AudioBuffer>
    where
        F: Fn(f64) -> f64,
    {
        if audio.is_empty() {
            return Ok(audio.clone());
        }
        let rate = audio.sample_rate();
        let mut specs: Vec<_> = par::map_slice(audio.channels(), |ch| stft(ch, params, rate))
            .into_iter()
            .collect::<Result<_>>()?;

        let frame_gains: Vec<Vec<f64>> = {
            let reference = &specs[0];
            (0..reference.num_frames())
                .map(|m| {
                    let y = y_at(reference.frame_center_time(m));
                    (0..reference.num_bins())
                        .map(|k| self.gain(reference.bin_frequency(k), y))
                        .collect()
                })
                .collect()
        };

        for spec in &mut specs {
            for (frame, gains) in spec.frames_mut().iter_mut().zip(&frame_gains) {
                for (bin, g) in frame.iter_mut().zip(gains) {
                    *bin *= *g;
                }
            }
        }

        let channels = par::map_slice(&specs, istft)
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        AudioBuffer::new(rate, channels)
    }
}

/// Elevation gain with the default 1 kHz pivot and exponent 1.5.
pub fn elevation_gain(freq_hz: f64, y: f64) -> f64 {
    ElevationCurve::default().gain(freq_hz, y)
}

/// [`ElevationCurve::apply`] with the default curve.
pub fn elevation_filter<F>(
    stereo: &AudioBuffer,
    y_at: F,
    params: &StftParams,
) -> Result<AudioBuffer>
where
    F: Fn(f64) -> f64,
{
    ElevationCurve::default().apply(stereo, y_at, params)
}

/// Streaming distance stage: attenuation by `1/z` plus one echo tap.
///
/// The echo reads up to `max_delay` samples into the past, across block
/// boundaries, from retained input history.
#[derive(Debug, Clone)]
pub struct DistanceEffect {
    alpha: f64,
    sample_rate: u32,
    speed_of_sound: f64,
    max_delay: usize,
    /// The last `max_delay` input samples, oldest first.
    history: Vec<f64>,
}

impl DistanceEffect {
    pub fn new(config: &RenderConfig) -> Self {
        let max_delay = config.max_echo_delay();
        DistanceEffect {
            alpha: config.alpha,
            sample_rate: config.sample_rate,
            speed_of_sound: config.speed_of_sound,
            max_delay,
            history: vec![0.0; max_delay],
        }
    }

    pub fn delay_samples(&self, z: f64) -> usize {
        (z * self.sample_rate as f64 / self.speed_of_sound).round() as usize
    }

    /// Processes one block at distance `z` metres.
    pub fn process(&mut self, block: &[f64], z: f64) -> Result<Vec<f64>> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::Domain(format!("distance {z} m must be positive")));
        }
        let delay = self.delay_samples(z);
        if delay > self.max_delay {
            return Err(Error::Domain(format!(
                "distance {z} m needs a {delay}-sample echo; history holds {}",
                self.max_delay
            )));
        }
        let hist = self.history.len();
        let out = block
            .iter()
            .enumerate()
            .map(|(i, &s)| {
                let delayed = if i >= delay {
                    block[i - delay]
                } else {
                    self.history[hist + i - delay]
                };
                s / z + self.alpha * delayed / z
            })
            .collect();

        if block.len() >= hist {
            self.history.copy_from_slice(&block[block.len() - hist..]);
        } else {
            self.history.drain(..block.len());
            self.history.extend_from_slice(block);
        }
        Ok(out)
    }
}

/// Block-centre positions for a signal of `total` samples.
pub(crate) fn block_positions(
    trajectory: &Trajectory,
    total: usize,
    block: usize,
    sample_rate: u32,
) -> Vec<crate::scene::SpatialSample> {
    (0..total.div_ceil(block))
        .map(|k| {
            let centre = (k * block) as f64 + block as f64 / 2.0;
            trajectory.at(centre / sample_rate as f64)
        })
        .collect()
}

pub(crate) fn check_mono_input(mono: &AudioBuffer, config: &RenderConfig) -> Result<()> {
    if mono.num_channels() != 1 {
        return Err(Error::Config(format!(
            "source must be mono, got {} channels",
            mono.num_channels()
        )));
    }
    if mono.sample_rate() != config.sample_rate {
        return Err(Error::Config(format!(
            "source is at {} Hz, renderer at {} Hz",
            mono.sample_rate(),
            config.sample_rate
        )));
    }
    Ok(())
}

/// Renders a mono source along `trajectory` to stereo.
///
/// The output is `max_echo_delay` samples longer than the input so the echo
/// of the last input sample at the far end of the depth range fits.
pub fn render_source_3d(
    mono: &AudioBuffer,
    trajectory: &Trajectory,
    config: &RenderConfig,
) -> Result<AudioBuffer> {
    config.validate()?;
    check_mono_input(mono, config)?;

    let block = config.block;
    let total = mono.len() + config.max_echo_delay();
    let mut input = mono.channel(0).to_vec();
    input.resize(total, 0.0);
    let positions = block_positions(trajectory, total, block, config.sample_rate);

    let mut left = Vec::with_capacity(total);
    let mut right = Vec::with_capacity(total);
    for (chunk, pos) in input.chunks(block).zip(&positions) {
        let (l, r) = pan_lr(chunk, pos.x.clamp(-1.0, 1.0))?;
        left.extend(l);
        right.extend(r);
    }
    let panned = AudioBuffer::stereo(config.sample_rate, left, right)?;

    let lifted =
        ElevationCurve::from_config(config).apply(&panned, |t| trajectory.at(t).y, &config.stft)?;

    let distance = |channel: &[f64]| -> Result<Vec<f64>> {
        let mut fx = DistanceEffect::new(config);
        let mut out = Vec::with_capacity(total);
        for (chunk, pos) in channel.chunks(block).zip(&positions) {
            out.extend(fx.process(chunk, pos.z)?);
        }
        Ok(out)
    };
    let (l, r) = par::join(
        || distance(lifted.channel(0)),
        || distance(lifted.channel(1)),
    );
    AudioBuffer::stereo(config.sample_rate, l?, r?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn impulse(n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[0] = 1.0;
        v
    }

    #[test]
    fn pan_examples() {
        let s = vec![1.0, -0.5, 0.25];
        let (l, r) = pan_lr(&s, 0.0).unwrap();
        assert_eq!(l, vec![0.5, -0.25, 0.125]);
        assert_eq!(r, l);
        let (l, r) = pan_lr(&s, 1.0).unwrap();
        assert!(l.iter().all(|&v| v == 0.0));
        assert_eq!(r, s);
        let (l, r) = pan_lr(&s, -0.5).unwrap();
        assert_eq!(l, vec![0.75, -0.375, 0.1875]);
        assert_eq!(r, vec![0.25, -0.125, 0.0625]);
        assert!(matches!(pan_lr(&s, 1.5), Err(Error::Domain(_))));
    }

    #[test]
    fn elevation_gain_examples() {
        assert_eq!(elevation_gain(12345.0, 0.0), 1.0);
        assert_eq!(elevation_gain(1000.0, 1.0), 2.0);
        assert_eq!(elevation_gain(4000.0, -0.2), 0.0);
        assert!((elevation_gain(4000.0, 0.1) - 1.8).abs() < 1e-12);
    }

    fn sine(freq: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * PI * freq * i as f64 / 16000.0).sin())
            .collect()
    }

    fn rms(v: &[f64]) -> f64 {
        (v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64).sqrt()
    }

    #[test]
    fn elevation_filter_cases() {
        let p = StftParams::default();
        let s = sine(1000.0, 16000);
        let buf = AudioBuffer::stereo(16000, s.clone(), s.clone()).unwrap();
        let flat = elevation_filter(&buf, |_| 0.0, &p).unwrap();
        let err: Vec<f64> = flat.channel(0).iter().zip(&s).map(|(a, b)| a - b).collect();
        assert!(rms(&err[200..15800]) < 1e-6);

        let up = elevation_filter(&buf, |_| 1.0, &p).unwrap();
        let ratio = rms(&up.channel(0)[400..15600]) / rms(&s[400..15600]);
        assert!((ratio - 2.0).abs() < 0.04, "{ratio}");

        let s4 = sine(4000.0, 16000);
        let buf4 = AudioBuffer::stereo(16000, s4.clone(), s4.clone()).unwrap();
        let down = elevation_filter(&buf4, |_| -1.0, &p).unwrap();
        assert!(rms(&down.channel(1)[400..15600]) < 0.01 * rms(&s4));
    }

    #[test]
    fn distance_impulse_taps() {
        let cfg = RenderConfig::default();
        let mut fx = DistanceEffect::new(&cfg);
        let out = fx.process(&impulse(300), 1.0).unwrap();
        assert_eq!(out[0], 1.0);
        assert!((out[47] - 0.3).abs() < 1e-12);
        assert_eq!(out.iter().filter(|&&v| v != 0.0).count(), 2);

        let mut fx = DistanceEffect::new(&cfg);
        let out = fx.process(&impulse(300), 0.343).unwrap();
        assert!((out[0] - 1.0 / 0.343).abs() < 1e-12);
        assert!((out[16] - 0.3 / 0.343).abs() < 1e-12);

        let mut fx = DistanceEffect::new(&cfg);
        let out = fx.process(&impulse(300), 2.0).unwrap();
        assert_eq!(fx.delay_samples(2.0), 93);
        assert_eq!((out[0], out[93]), (0.5, 0.15));
        assert!(matches!(fx.process(&[1.0], 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn echo_crosses_block_boundaries() {
        let cfg = RenderConfig::default();
        let x = impulse(400);
        let mut whole = DistanceEffect::new(&cfg);
        let reference = whole.process(&x, 2.0).unwrap();
        let mut blocked = DistanceEffect::new(&cfg);
        let mut out = Vec::new();
        for chunk in x.chunks(10) {
            out.extend(blocked.process(chunk, 2.0).unwrap());
        }
        assert_eq!(out, reference);
    }

    #[test]
    fn zero_alpha_is_pure_gain() {
        let cfg = RenderConfig {
            alpha: 0.0,
            ..Default::default()
        };
        let mut fx = DistanceEffect::new(&cfg);
        let x = sine(300.0, 500);
        let out = fx.process(&x, 2.5).unwrap();
        assert!(out.iter().zip(&x).all(|(o, s)| (o - s / 2.5).abs() < 1e-15));
    }

    #[test]
    fn static_centre_impulse() {
        let cfg = RenderConfig::default();
        let mono = AudioBuffer::mono(16000, impulse(1600)).unwrap();
        let out = render_source_3d(&mono, &Trajectory::fixed(0.0, 0.0, 1.0), &cfg).unwrap();
        assert_eq!(out.len(), 1600 + 233);
        for ch in out.channels() {
            assert!((ch[0] - 0.5).abs() < 1e-9);
            assert!((ch[47] - 0.15).abs() < 1e-9);
            let rest = ch
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != 0 && *i != 47)
                .fold(0.0_f64, |m, (_, v)| m.max(v.abs()));
            assert!(rest < 1e-9);
        }
    }

    #[test]
    fn hard_left_has_silent_right() {
        let cfg = RenderConfig::default();
        let mono = AudioBuffer::mono(16000, sine(700.0, 8000)).unwrap();
        let out = render_source_3d(&mono, &Trajectory::fixed(-1.0, 0.0, 1.0), &cfg).unwrap();
        assert!(out.channel(1).iter().all(|v| v.abs() < 1e-9));
        assert!(out.channel(0).iter().any(|v| v.abs() > 0.5));
    }

    #[test]
    fn rejects_stereo_or_wrong_rate() {
        let cfg = RenderConfig::default();
        let traj = Trajectory::fixed(0.0, 0.0, 1.0);
        let st = AudioBuffer::stereo(16000, vec![0.0; 10], vec![0.0; 10]).unwrap();
        assert!(matches!(
            render_source_3d(&st, &traj, &cfg),
            Err(Error::Config(_))
        ));
        let m = AudioBuffer::mono(48000, vec![0.0; 10]).unwrap();
        assert!(matches!(
            render_source_3d(&m, &traj, &cfg),
            Err(Error::Config(_))
        ));
    }
}
