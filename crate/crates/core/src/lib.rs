//! Binaural rendering of mono stems placed by visual trajectories.
//!
//! The crate is organised along the processing chain:
//!
//! - [`scene`]: scene files, image-to-space coordinate mapping and trajectories.
//! - [`audio`]: the planar [`AudioBuffer`], WAV I/O, resampling and BS.1770 loudness.
//! - [`dsp`]: STFT/ISTFT, analytic-signal envelopes and FFT convolution.
//! - [`spatial3d`]: the algorithmic renderer (panning, elevation shelf, distance echo).
//! - [`hrtf`]: HRIR datasets, nearest-direction selection and block convolution.
//! - [`render`]: per-source rendering and mixdown of a whole scene.
//! - [`metrics`]: STFT and envelope distances between binaural renderings.
//!
//! Inner loops (STFT frames, convolution blocks, resampler output, sources)
//! run on rayon when the `parallel` feature is enabled (the default) and
//! sequentially otherwise. Both paths produce bit-identical output.

pub mod audio;
pub mod config;
pub mod dsp;
mod error;
pub mod hrtf;
pub mod metrics;
pub mod par;
pub mod render;
pub mod scene;
pub mod spatial3d;

pub use audio::AudioBuffer;
pub use config::{ClipPolicy, EvalConfig, RenderConfig, RenderMethod};
pub use error::{Error, Result};
