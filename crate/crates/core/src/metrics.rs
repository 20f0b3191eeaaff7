//! Objective distances between a reference and a predicted binaural signal.
//!
//! - STFT distance: `‖X_L − X̃_L‖ + ‖X_R − X̃_R‖` over complex spectrograms
//!   (Frobenius norm).
//! - Envelope distance: `‖E[x_L] − E[x̃_L]‖ + ‖E[x_R] − E[x̃_R]‖` over
//!   analytic-signal envelopes.
//!
//! [`evaluate`] applies the comparison protocol first: resample to 16 kHz,
//! normalise each side to -23 LUFS, upmix mono, trim to the shorter length.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::audio::{normalize_loudness, read_wav_file, resample, AudioBuffer};
use crate::config::EvalConfig;
use crate::dsp::{envelope, stft, StftParams};
use crate::{par, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub loudness_target_lufs: f64,
    pub sample_rate: u32,
    pub trim_length: usize,
    pub reference_channels: usize,
    pub predicted_channels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub stft_distance: f64,
    pub env_distance: f64,
    pub preprocessing: Preprocessing,
}

impl MetricsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialisation is infallible")
    }
}

fn check_pair(reference: &AudioBuffer, predicted: &AudioBuffer) -> Result<()> {
    if reference.num_channels() != 2 || predicted.num_channels() != 2 {
        return Err(Error::Precondition(format!(
            "expected two stereo signals, got {} and {} channels",
            reference.num_channels(),
            predicted.num_channels()
        )));
    }
    if reference.sample_rate() != predicted.sample_rate() {
        return Err(Error::Precondition(format!(
            "sample rates differ: {} vs {} Hz",
            reference.sample_rate(),
            predicted.sample_rate()
        )));
    }
    if reference.len() != predicted.len() {
        return Err(Error::Precondition(format!(
            "lengths differ: {} vs {} samples",
            reference.len(),
            predicted.len()
        )));
    }
    Ok(())
}

/// Sum over both ears of the Frobenius distance between complex spectrograms.
pub fn stft_distance(
    reference: &AudioBuffer,
    predicted: &AudioBuffer,
    params: &StftParams,
) -> Result<f64> {
    check_pair(reference, predicted)?;
    if reference.is_empty() {
        return Ok(0.0);
    }
    let rate = reference.sample_rate();
    let per_ear = par::map_range(2, |ch| -> Result<f64> {
        let (a, b) = par::join(
            || stft(reference.channel(ch), params, rate),
            || stft(predicted.channel(ch), params, rate),
        );
        a?.distance(&b?)
    });
    per_ear.into_iter().sum()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Sum over both ears of the Euclidean distance between envelopes.
pub fn env_distance(reference: &AudioBuffer, predicted: &AudioBuffer) -> Result<f64> {
    check_pair(reference, predicted)?;
    let per_ear = par::map_range(2, |ch| {
        let (a, b) = par::join(
            || envelope(reference.channel(ch)),
            || envelope(predicted.channel(ch)),
        );
        euclidean(&a, &b)
    });
    Ok(per_ear.into_iter().sum())
}

fn prepare(audio: &AudioBuffer, config: &EvalConfig, label: &str) -> Result<AudioBuffer> {
    let at_rate = resample(audio, config.sample_rate)?;
    let normalized =
        normalize_loudness(&at_rate, config.loudness_target_lufs).map_err(|e| e.context(label))?;
    Ok(normalized.to_stereo())
}

/// Runs the preprocessing chain on two in-memory signals and scores them.
pub fn evaluate_buffers(
    reference: &AudioBuffer,
    predicted: &AudioBuffer,
    config: &EvalConfig,
) -> Result<MetricsReport> {
    let (r, p) = par::join(
        || prepare(reference, config, "reference"),
        || prepare(predicted, config, "predicted"),
    );
    let (r, p) = (r?, p?);
    let len = r.len().min(p.len());
    let (r, p) = (r.truncated(len), p.truncated(len));
    let (stft_d, env_d) = par::join(
        || stft_distance(&r, &p, &config.stft),
        || env_distance(&r, &p),
    );
    Ok(MetricsReport {
        stft_distance: stft_d?,
        env_distance: env_d?,
        preprocessing: Preprocessing {
            loudness_target_lufs: config.loudness_target_lufs,
            sample_rate: config.sample_rate,
            trim_length: len,
            reference_channels: reference.num_channels(),
            predicted_channels: predicted.num_channels(),
        },
    })
}

/// Reads two WAV files and scores them with [`evaluate_buffers`].
pub fn evaluate(reference: &Path, predicted: &Path, config: &EvalConfig) -> Result<MetricsReport> {
    let r = read_wav_file(reference)?;
    let p = read_wav_file(predicted)?;
    evaluate_buffers(&r, &p, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sine(amp: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (2.0 * PI * 1000.0 * i as f64 / 16000.0).sin())
            .collect()
    }

    #[test]
    fn identical_inputs_score_zero() {
        let s = sine(0.5, 4000);
        let a = AudioBuffer::stereo(16000, s.clone(), s).unwrap();
        assert_eq!(stft_distance(&a, &a, &StftParams::default()).unwrap(), 0.0);
        assert_eq!(env_distance(&a, &a).unwrap(), 0.0);
        let z = AudioBuffer::silence(16000, 2, 500).unwrap();
        assert_eq!(env_distance(&z, &z).unwrap(), 0.0);
    }

    #[test]
    fn swapped_channels_of_hard_left() {
        let s = sine(0.7, 3000);
        let a = AudioBuffer::stereo(16000, s.clone(), vec![0.0; 3000]).unwrap();
        let b = AudioBuffer::stereo(16000, vec![0.0; 3000], s.clone()).unwrap();
        let p = StftParams::default();
        let left_norm = stft(&s, &p, 16000).unwrap().norm();
        let d = stft_distance(&a, &b, &p).unwrap();
        assert!((d - 2.0 * left_norm).abs() < 1e-9 * d);
    }

    #[test]
    fn half_amplitude_envelope_gap() {
        let a = AudioBuffer::stereo(16000, sine(1.0, 16000), sine(1.0, 16000)).unwrap();
        let b = AudioBuffer::stereo(16000, sine(0.5, 16000), sine(0.5, 16000)).unwrap();
        let d = env_distance(&a, &b).unwrap();
        assert!((d - 126.5).abs() < 2.0, "{d}");
    }

    #[test]
    fn mismatched_inputs() {
        let a = AudioBuffer::silence(16000, 2, 100).unwrap();
        let b = AudioBuffer::silence(16000, 2, 101).unwrap();
        let m = AudioBuffer::silence(16000, 1, 100).unwrap();
        let c = AudioBuffer::silence(8000, 2, 100).unwrap();
        for other in [&b, &m, &c] {
            assert!(matches!(
                env_distance(&a, other),
                Err(Error::Precondition(_))
            ));
            assert!(matches!(
                stft_distance(&a, other, &StftParams::default()),
                Err(Error::Precondition(_))
            ));
        }
    }

    #[test]
    fn evaluate_rejects_silence() {
        let a = AudioBuffer::silence(16000, 2, 16000).unwrap();
        let b = AudioBuffer::stereo(16000, sine(0.5, 16000), sine(0.5, 16000)).unwrap();
        assert!(matches!(
            evaluate_buffers(&a, &b, &EvalConfig::default()),
            Err(Error::Measurement(_))
        ));
    }

    #[test]
    fn evaluate_upmixes_mono_and_trims() {
        let a = AudioBuffer::mono(16000, sine(0.5, 16000)).unwrap();
        let b = AudioBuffer::stereo(16000, sine(0.5, 12000), sine(0.4, 12000)).unwrap();
        let report = evaluate_buffers(&a, &b, &EvalConfig::default()).unwrap();
        assert_eq!(report.preprocessing.trim_length, 12000);
        assert_eq!(report.preprocessing.reference_channels, 1);
        assert!(report.stft_distance.is_finite() && report.env_distance >= 0.0);
    }
}
