//! HRIR datasets and convolution-based binaural rendering.
//!
//! Datasets are described by a JSON manifest listing one mono WAV per ear
//! and direction:
//!
//! ```json
//! {"sample_rate": 48000,
//!  "entries": [{"az_deg": 30, "el_deg": 0, "left": "L/az30_el0.wav", "right": "R/az30_el0.wav"}]}
//! ```
//!
//! Paths are relative to the manifest. Azimuth is positive to the listener's
//! right and is wrapped into `[-180, 180)`; elevation is positive upward.
//!
//! Rendering selects the nearest measured direction per block and filters the
//! block with overlap-save. When the selection changes, the block is filtered
//! with both the outgoing and the incoming pair and the two outputs are
//! crossfaded linearly across the block.

use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::Deserialize;

use crate::audio::{read_wav_file, resample, AudioBuffer};
use crate::config::RenderConfig;
use crate::dsp::{Complex64, OverlapSave};
use crate::scene::{to_direction, Trajectory};
use crate::spatial3d::{block_positions, check_mono_input};
use crate::{par, Error, Result};

/// Directions closer than this (radians) count as equidistant.
const TIE_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct HrirEntry {
    pub azimuth: f64,
    pub elevation: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

fn wrap_azimuth(az: f64) -> f64 {
    let w = (az + 180.0).rem_euclid(360.0) - 180.0;
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

fn unit_vector(azimuth_deg: f64, elevation_deg: f64) -> [f64; 3] {
    let (az, el) = (azimuth_deg.to_radians(), elevation_deg.to_radians());
    [el.cos() * az.sin(), el.sin(), el.cos() * az.cos()]
}

/// Great-circle angle in radians between two unit vectors.
fn angle_between(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    // atan2(|a×b|, a·b) stays accurate near 0 and π where acos does not.
    let cross = [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ];
    let sin = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
    let cos = a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    sin.atan2(cos)
}

/// A validated set of impulse-response pairs at one sample rate.
#[derive(Debug, Clone)]
pub struct HrirDataset {
    sample_rate: u32,
    ir_length: usize,
    entries: Vec<HrirEntry>,
    directions: Vec<[f64; 3]>,
}

impl HrirDataset {
    pub fn new(sample_rate: u32, entries: Vec<HrirEntry>) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Validation(
                "HRIR sample rate must be positive".into(),
            ));
        }
        let Some(first) = entries.first() else {
            return Err(Error::Validation("HRIR dataset has no entries".into()));
        };
        let ir_length = first.left.len();
        if ir_length == 0 {
            return Err(Error::Validation("HRIRs must not be empty".into()));
        }
        let mut entries = entries;
        let mut seen = HashSet::new();
        for e in &mut entries {
            if !(-90.0..=90.0).contains(&e.elevation) || !e.azimuth.is_finite() {
                return Err(Error::Validation(format!(
                    "direction ({}, {}) is out of range",
                    e.azimuth, e.elevation
                )));
            }
            e.azimuth = wrap_azimuth(e.azimuth);
            if e.left.len() != ir_length || e.right.len() != ir_length {
                return Err(Error::Validation(format!(
                    "HRIR at ({}, {}) has lengths {}/{}, expected {ir_length}",
                    e.azimuth,
                    e.elevation,
                    e.left.len(),
                    e.right.len()
                )));
            }
            if !seen.insert((e.azimuth.to_bits(), e.elevation.to_bits())) {
                return Err(Error::Validation(format!(
                    "duplicate HRIR direction ({}, {})",
                    e.azimuth, e.elevation
                )));
            }
        }
        let directions = entries
            .iter()
            .map(|e| unit_vector(e.azimuth, e.elevation))
            .collect();
        Ok(HrirDataset {
            sample_rate,
            ir_length,
            entries,
            directions,
        })
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn ir_length(&self) -> usize {
        self.ir_length
    }

    pub fn entries(&self) -> &[HrirEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index of the entry nearest to the query on the sphere. Ties go to the
    /// smaller azimuth, then the smaller elevation.
    pub fn nearest_index(&self, azimuth_deg: f64, elevation_deg: f64) -> usize {
        let q = unit_vector(azimuth_deg, elevation_deg);
        let mut best = 0;
        let mut best_angle = f64::INFINITY;
        for (i, d) in self.directions.iter().enumerate() {
            let angle = angle_between(&q, d);
            let better = if angle < best_angle - TIE_EPSILON {
                true
            } else if angle <= best_angle + TIE_EPSILON {
                let (e, b) = (&self.entries[i], &self.entries[best]);
                (e.azimuth, e.elevation) < (b.azimuth, b.elevation)
            } else {
                false
            };
            if better {
                best = i;
                best_angle = best_angle.min(angle);
            }
        }
        best
    }

    pub fn nearest(&self, azimuth_deg: f64, elevation_deg: f64) -> &HrirEntry {
        &self.entries[self.nearest_index(azimuth_deg, elevation_deg)]
    }

    /// Resamples every IR to `rate`.
    pub fn resampled(&self, rate: u32) -> Result<Self> {
        if rate == self.sample_rate {
            return Ok(self.clone());
        }
        let entries = par::map_slice(&self.entries, |e| -> Result<HrirEntry> {
            let pair = AudioBuffer::stereo(self.sample_rate, e.left.clone(), e.right.clone())?;
            let mut ch = resample(&pair, rate)?.into_channels();
            let right = ch.pop().expect("stereo");
            let left = ch.pop().expect("stereo");
            Ok(HrirEntry {
                azimuth: e.azimuth,
                elevation: e.elevation,
                left,
                right,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        HrirDataset::new(rate, entries)
    }
}

/// Nearest entry for a direction; see [`HrirDataset::nearest`].
pub fn nearest_hrir(dataset: &HrirDataset, azimuth_deg: f64, elevation_deg: f64) -> &HrirEntry {
    dataset.nearest(azimuth_deg, elevation_deg)
}

#[derive(Debug, Deserialize)]
struct ManifestEntry {
    az_deg: f64,
    el_deg: f64,
    left: String,
    right: String,
}

#[derive(Debug, Deserialize)]
struct Manifest {
    sample_rate: u32,
    entries: Vec<ManifestEntry>,
}

fn read_ir(base: &Path, file: &str, label: &str, expected_rate: u32) -> Result<Vec<f64>> {
    let path = base.join(file);
    let audio = read_wav_file(&path).map_err(|e| e.context(label))?;
    if audio.num_channels() != 1 {
        return Err(Error::Validation(format!(
            "{label}: {} must be mono",
            path.display()
        )));
    }
    if audio.sample_rate() != expected_rate {
        return Err(Error::Validation(format!(
            "{label}: {} is at {} Hz but the manifest says {expected_rate} Hz",
            path.display(),
            audio.sample_rate()
        )));
    }
    Ok(audio.into_channels().pop().expect("mono"))
}

/// Loads a manifest and its IR files. With `target_rate`, IRs are resampled
/// to that rate.
pub fn load_hrir_dataset(
    manifest: &[u8],
    base_dir: &Path,
    target_rate: Option<u32>,
) -> Result<HrirDataset> {
    let manifest: Manifest = serde_json::from_slice(manifest)
        .map_err(|e| Error::Parse(format!("HRIR manifest: {e}")))?;
    if manifest.entries.is_empty() {
        return Err(Error::Validation("HRIR manifest has no entries".into()));
    }

    let mut seen = HashSet::new();
    for e in &manifest.entries {
        let key = (wrap_azimuth(e.az_deg).to_bits(), e.el_deg.to_bits());
        if !seen.insert(key) {
            return Err(Error::Validation(format!(
                "duplicate HRIR direction ({}, {})",
                e.az_deg, e.el_deg
            )));
        }
    }

    let entries = manifest
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let label = format!("HRIR entry {i} (az {}, el {})", e.az_deg, e.el_deg);
            Ok(HrirEntry {
                azimuth: e.az_deg,
                elevation: e.el_deg,
                left: read_ir(base_dir, &e.left, &label, manifest.sample_rate)?,
                right: read_ir(base_dir, &e.right, &label, manifest.sample_rate)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let dataset = HrirDataset::new(manifest.sample_rate, entries)?;
    match target_rate {
        Some(rate) => dataset.resampled(rate),
        None => Ok(dataset),
    }
}

/// Reads a manifest file; IR paths resolve relative to its directory.
pub fn load_hrir_manifest(path: &Path, target_rate: Option<u32>) -> Result<HrirDataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    load_hrir_dataset(&bytes, base, target_rate)
}

/// Renders a mono source along `trajectory` through the nearest HRIR pairs.
///
/// Output length is `input + ir_length - 1`. Each block is scaled by `1/z`
/// for its block-centre distance; no echo is added.
pub fn render_source_hrtf(
    mono: &AudioBuffer,
    trajectory: &Trajectory,
    dataset: &HrirDataset,
    config: &RenderConfig,
) -> Result<AudioBuffer> {
    config.validate()?;
    check_mono_input(mono, config)?;
    if dataset.sample_rate() != config.sample_rate {
        return Err(Error::Config(format!(
            "HRIR dataset is at {} Hz, renderer at {} Hz",
            dataset.sample_rate(),
            config.sample_rate
        )));
    }

    let block = config.block;
    let ir_len = dataset.ir_length();
    let total = mono.len() + ir_len - 1;
    let num_blocks = total.div_ceil(block);
    let positions = block_positions(trajectory, total, block, config.sample_rate);
    let selection: Vec<usize> = positions
        .iter()
        .map(|p| {
            let d = to_direction(p, &config.camera);
            dataset.nearest_index(d.azimuth_deg, d.elevation_deg)
        })
        .collect();

    let engine = OverlapSave::new(block, ir_len);
    let mut used: Vec<usize> = selection.clone();
    used.sort_unstable();
    used.dedup();
    let spectra: HashMap<usize, (Vec<Complex64>, Vec<Complex64>)> = used
        .iter()
        .copied()
        .zip(par::map_slice(&used, |&i| {
            let e = &dataset.entries()[i];
            (engine.ir_spectrum(&e.left), engine.ir_spectrum(&e.right))
        }))
        .collect();

    // Input preceded by ir_len - 1 zeros so block k's segment starts at k * block.
    let mut padded = vec![0.0; ir_len - 1];
    padded.extend_from_slice(mono.channel(0));
    padded.resize(ir_len - 1 + num_blocks * block, 0.0);

    let blocks = par::map_range(num_blocks, |k| {
        let segment = engine.segment_spectrum(&padded[k * block..k * block + engine.segment_len()]);
        let (hl, hr) = &spectra[&selection[k]];
        let mut left = engine.apply(&segment, hl);
        let mut right = engine.apply(&segment, hr);

        if k > 0 && selection[k - 1] != selection[k] {
            let (pl, pr) = &spectra[&selection[k - 1]];
            let old_left = engine.apply(&segment, pl);
            let old_right = engine.apply(&segment, pr);
            for i in 0..block {
                let w = (i + 1) as f64 / (block + 1) as f64;
                left[i] = (1.0 - w) * old_left[i] + w * left[i];
                right[i] = (1.0 - w) * old_right[i] + w * right[i];
            }
        }

        let gain = 1.0 / positions[k].z;
        left.iter_mut()
            .chain(right.iter_mut())
            .for_each(|v| *v *= gain);
        (left, right)
    });

    let mut left = Vec::with_capacity(num_blocks * block);
    let mut right = Vec::with_capacity(num_blocks * block);
    for (l, r) in blocks {
        left.extend(l);
        right.extend(r);
    }
    left.truncate(total);
    right.truncate(total);
    AudioBuffer::stereo(config.sample_rate, left, right)
}
