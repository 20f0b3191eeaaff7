//! Rendering and evaluation settings.
//!
//! Every default reproduces the reference processing chain: 16 kHz,
//! -23 LUFS, Hann 25 ms / 10 ms / 512-point STFT, echo intensity 0.3,
//! speed of sound 343 m/s and a 0.1 to 5 m depth range.

use serde::{Deserialize, Serialize};

use crate::dsp::StftParams;
use crate::scene::CameraModel;
use crate::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;
pub const DEFAULT_LOUDNESS_TARGET_LUFS: f64 = -23.0;
/// Gain of the single distance echo tap.
pub const DEFAULT_ALPHA: f64 = 0.3;
pub const DEFAULT_SPEED_OF_SOUND: f64 = 343.0;
pub const DEFAULT_ELEVATION_PIVOT_HZ: f64 = 1000.0;
pub const DEFAULT_ELEVATION_EXPONENT: f64 = 1.5;
/// One 10 ms STFT hop at the default rate.
pub const DEFAULT_BLOCK: usize = 160;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenderMethod {
    Algo3d,
    Hrtf,
}

/// What happens when the mixed program exceeds full scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClipPolicy {
    /// Scale the whole mix by `1 / peak` when the peak exceeds 1.
    PeakNormalize,
    /// Clamp each sample to `[-1, 1]`.
    HardClip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub method: RenderMethod,
    pub sample_rate: u32,
    /// Samples per parameter-update block.
    pub block: usize,
    pub alpha: f64,
    pub speed_of_sound: f64,
    pub stft: StftParams,
    pub elevation_pivot_hz: f64,
    pub elevation_exponent: f64,
    pub clip_policy: ClipPolicy,
    /// Field of view and depth range; replaced by the scene's own camera when
    /// rendering a scene.
    pub camera: CameraModel,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            method: RenderMethod::Algo3d,
            sample_rate: DEFAULT_SAMPLE_RATE,
            block: DEFAULT_BLOCK,
            alpha: DEFAULT_ALPHA,
            speed_of_sound: DEFAULT_SPEED_OF_SOUND,
            stft: StftParams::default(),
            elevation_pivot_hz: DEFAULT_ELEVATION_PIVOT_HZ,
            elevation_exponent: DEFAULT_ELEVATION_EXPONENT,
            clip_policy: ClipPolicy::PeakNormalize,
            camera: CameraModel::default(),
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(Error::Config("sample rate must be positive".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!("alpha {} must be >= 0", self.alpha)));
        }
        if !(self.speed_of_sound > 0.0 && self.speed_of_sound.is_finite()) {
            return Err(Error::Config(format!(
                "speed of sound {} must be positive",
                self.speed_of_sound
            )));
        }
        if !(self.elevation_pivot_hz > 0.0 && self.elevation_pivot_hz.is_finite()) {
            return Err(Error::Config("elevation pivot must be positive".into()));
        }
        let layout = self.stft.layout(self.sample_rate)?;
        if self.block == 0 || layout.hop % self.block != 0 {
            return Err(Error::Config(format!(
                "block of {} samples must divide the {}-sample hop",
                self.block, layout.hop
            )));
        }
        self.camera.validate().map_err(|e| match e {
            Error::Validation(m) => Error::Config(m),
            other => other,
        })
    }

    /// Echo delay in whole samples for a source `z` metres away.
    pub fn echo_delay(&self, z: f64) -> usize {
        (z * self.sample_rate as f64 / self.speed_of_sound).round() as usize
    }

    /// Longest echo delay the configured depth range can produce.
    pub fn max_echo_delay(&self) -> usize {
        self.echo_delay(self.camera.d_max)
    }
}

/// Preprocessing applied to both sides before computing distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub sample_rate: u32,
    pub loudness_target_lufs: f64,
    pub stft: StftParams,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            sample_rate: DEFAULT_SAMPLE_RATE,
            loudness_target_lufs: DEFAULT_LOUDNESS_TARGET_LUFS,
            stft: StftParams::default(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RenderConfig::default().validate().unwrap();
        assert_eq!(RenderConfig::default().max_echo_delay(), 233);
    }

    #[test]
    fn block_must_divide_hop() {
        let cfg = RenderConfig {
            block: 100,
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = RenderConfig {
            block: 80,
            ..Default::default()
        };
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_negative_alpha() {
        let cfg = RenderConfig {
            alpha: -0.1,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
