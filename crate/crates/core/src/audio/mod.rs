//! Planar audio buffers, WAV I/O, sample-rate conversion and loudness.

mod loudness;
mod resample;
mod wav;

pub use loudness::{
    loudness_gain, measure_loudness, normalize_loudness, ABSOLUTE_GATE_LUFS, RELATIVE_GATE_LU,
};
pub use resample::resample;
pub use wav::{read_wav, read_wav_file, write_wav, SampleFormat};

use crate::{Error, Result};

/// Planar floating-point audio, one `Vec` per channel.
///
/// Holds one or two channels of equal length. Samples are nominally in
/// `[-1, 1]` but intermediate renders may exceed that range.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    sample_rate: u32,
    channels: Vec<Vec<f64>>,
}

impl AudioBuffer {
    pub const MAX_CHANNELS: usize = 2;

    pub fn new(sample_rate: u32, channels: Vec<Vec<f64>>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        if channels.is_empty() || channels.len() > Self::MAX_CHANNELS {
            return Err(Error::Format(format!(
                "{} channels; only mono and stereo are supported",
                channels.len()
            )));
        }
        let len = channels[0].len();
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::Validation("channels differ in length".into()));
        }
        Ok(AudioBuffer {
            sample_rate,
            channels,
        })
    }

    pub fn mono(sample_rate: u32, samples: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate, vec![samples])
    }

    pub fn stereo(sample_rate: u32, left: Vec<f64>, right: Vec<f64>) -> Result<Self> {
        Self::new(sample_rate, vec![left, right])
    }

    /// An all-zero buffer.
    pub fn silence(sample_rate: u32, num_channels: usize, len: usize) -> Result<Self> {
        Self::new(sample_rate, vec![vec![0.0; len]; num_channels])
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Frames per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / self.sample_rate as f64
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Largest absolute sample value over all channels.
    pub fn peak(&self) -> f64 {
        self.channels
            .iter()
            .flatten()
            .fold(0.0_f64, |m, &s| m.max(s.abs()))
    }

    pub fn scaled(&self, gain: f64) -> Self {
        AudioBuffer {
            sample_rate: self.sample_rate,
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|s| s * gain).collect())
                .collect(),
        }
    }

    /// Stereo view of the buffer: mono is duplicated, stereo is returned as is.
    pub fn to_stereo(&self) -> Self {
        match self.channels.len() {
            1 => AudioBuffer {
                sample_rate: self.sample_rate,
                channels: vec![self.channels[0].clone(), self.channels[0].clone()],
            },
            _ => self.clone(),
        }
    }

    /// Mono downmix by channel average.
    pub fn to_mono(&self) -> Self {
        match self.channels.len() {
            1 => self.clone(),
            _ => AudioBuffer {
                sample_rate: self.sample_rate,
                channels: vec![self.channels[0]
                    .iter()
                    .zip(&self.channels[1])
                    .map(|(l, r)| 0.5 * (l + r))
                    .collect()],
            },
        }
    }

    /// Keeps the first `len` frames (no-op when already shorter).
    pub fn truncated(&self, len: usize) -> Self {
        AudioBuffer {
            sample_rate: self.sample_rate,
            channels: self
                .channels
                .iter()
                .map(|c| c[..len.min(c.len())].to_vec())
                .collect(),
        }
    }
}
