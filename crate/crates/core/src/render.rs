//! Scene rendering: load each stem, spatialise it, mix.

use std::collections::BTreeMap;
use std::path::Path;

use crate::audio::{read_wav_file, resample, AudioBuffer};
use crate::config::{ClipPolicy, RenderConfig, RenderMethod};
use crate::hrtf::{render_source_hrtf, HrirDataset};
use crate::scene::{SceneDescription, Trajectory};
use crate::spatial3d::render_source_3d;
use crate::{par, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RenderResult {
    pub audio: AudioBuffer,
    /// Gain applied at mixdown (1 unless peak normalisation kicked in).
    pub applied_gain: f64,
    pub clipped_samples: usize,
    /// Peak of each source's own rendering, before mixing.
    pub per_source_peak: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixOutput {
    pub audio: AudioBuffer,
    pub applied_gain: f64,
    pub clipped_samples: usize,
}

/// A source ready to render: mono audio at the render rate and its trajectory.
#[derive(Debug, Clone)]
pub struct LoadedSource {
    pub id: String,
    pub audio: AudioBuffer,
    pub trajectory: Trajectory,
}

/// Sums stereo tracks (zero-padding shorter ones at the tail) and applies
/// the clip policy.
pub fn mix_down(tracks: &[AudioBuffer], policy: ClipPolicy) -> Result<MixOutput> {
    let Some(first) = tracks.first() else {
        return Err(Error::Validation("nothing to mix".into()));
    };
    let rate = first.sample_rate();
    if let Some(t) = tracks.iter().find(|t| t.sample_rate() != rate) {
        return Err(Error::Config(format!(
            "track at {} Hz cannot be mixed with {rate} Hz",
            t.sample_rate()
        )));
    }
    if let Some(t) = tracks.iter().find(|t| t.num_channels() != 2) {
        return Err(Error::Config(format!(
            "mixdown expects stereo tracks, got {} channels",
            t.num_channels()
        )));
    }

    let len = tracks.iter().map(AudioBuffer::len).max().unwrap_or(0);
    let mut mix = vec![vec![0.0; len]; 2];
    for track in tracks {
        for (acc, ch) in mix.iter_mut().zip(track.channels()) {
            for (a, s) in acc.iter_mut().zip(ch) {
                *a += s;
            }
        }
    }

    let peak = mix.iter().flatten().fold(0.0_f64, |m, s| m.max(s.abs()));
    let (applied_gain, clipped_samples) = match policy {
        ClipPolicy::PeakNormalize if peak > 1.0 => {
            mix.iter_mut().flatten().for_each(|s| *s /= peak);
            (1.0 / peak, 0)
        }
        ClipPolicy::PeakNormalize => (1.0, 0),
        ClipPolicy::HardClip => {
            let mut clipped = 0;
            for s in mix.iter_mut().flatten() {
                if s.abs() > 1.0 {
                    *s = s.clamp(-1.0, 1.0);
                    clipped += 1;
                }
            }
            (1.0, clipped)
        }
    };

    Ok(MixOutput {
        audio: AudioBuffer::new(rate, mix)?,
        applied_gain,
        clipped_samples,
    })
}

/// Renders one mono source with the configured method.
pub fn render_source(
    mono: &AudioBuffer,
    trajectory: &Trajectory,
    config: &RenderConfig,
    hrir: Option<&HrirDataset>,
) -> Result<AudioBuffer> {
    match (config.method, hrir) {
        (RenderMethod::Algo3d, _) => render_source_3d(mono, trajectory, config),
        (RenderMethod::Hrtf, Some(ds)) => render_source_hrtf(mono, trajectory, ds, config),
        (RenderMethod::Hrtf, None) => {
            Err(Error::Config("HRTF rendering needs an HRIR dataset".into()))
        }
    }
}

/// Reads every stem of `scene` (paths relative to `base_dir`), downmixes
/// stereo stems to mono and resamples to `sample_rate`.
pub fn load_sources(
    scene: &SceneDescription,
    base_dir: &Path,
    sample_rate: u32,
) -> Result<Vec<LoadedSource>> {
    par::map_slice(&scene.sources, |src| {
        let path = src.audio_path(base_dir);
        let audio = read_wav_file(&path).map_err(|e| e.context(format!("source {:?}", src.id)))?;
        if audio.num_channels() > 1 {
            log::info!("source {:?}: downmixing stereo stem to mono", src.id);
        }
        let audio = resample(&audio.to_mono(), sample_rate)?;
        Ok(LoadedSource {
            id: src.id.clone(),
            audio,
            trajectory: src.trajectory.clone(),
        })
    })
    .into_iter()
    .collect()
}

/// Renders each source to its own stereo track, in source order.
pub fn render_tracks(
    sources: &[LoadedSource],
    config: &RenderConfig,
    hrir: Option<&HrirDataset>,
) -> Result<Vec<AudioBuffer>> {
    if sources.is_empty() {
        return Err(Error::Validation("scene has no sources".into()));
    }
    config.validate()?;
    if config.method == RenderMethod::Hrtf && hrir.is_none() {
        return Err(Error::Config("HRTF rendering needs an HRIR dataset".into()));
    }
    par::map_slice(sources, |s| {
        render_source(&s.audio, &s.trajectory, config, hrir)
            .map_err(|e| e.context(format!("source {:?}", s.id)))
    })
    .into_iter()
    .collect()
}

/// Renders already-loaded sources and mixes them.
pub fn render_loaded(
    sources: &[LoadedSource],
    config: &RenderConfig,
    hrir: Option<&HrirDataset>,
) -> Result<RenderResult> {
    let tracks = render_tracks(sources, config, hrir)?;
    let per_source_peak = sources
        .iter()
        .zip(&tracks)
        .map(|(s, t)| (s.id.clone(), t.peak()))
        .collect();
    let mix = mix_down(&tracks, config.clip_policy)?;
    Ok(RenderResult {
        audio: mix.audio,
        applied_gain: mix.applied_gain,
        clipped_samples: mix.clipped_samples,
        per_source_peak,
    })
}

/// Renders a whole scene. The scene's camera replaces `config.camera`.
pub fn render_scene(
    scene: &SceneDescription,
    base_dir: &Path,
    config: &RenderConfig,
    hrir: Option<&HrirDataset>,
) -> Result<RenderResult> {
    scene.validate()?;
    if scene.sources.is_empty() {
        return Err(Error::Validation("scene has no sources".into()));
    }
    let config = RenderConfig {
        camera: scene.camera,
        ..config.clone()
    };
    config.validate()?;
    if config.method == RenderMethod::Hrtf && hrir.is_none() {
        return Err(Error::Config("HRTF rendering needs an HRIR dataset".into()));
    }
    let sources = load_sources(scene, base_dir, config.sample_rate)?;
    render_loaded(&sources, &config, hrir)
}
