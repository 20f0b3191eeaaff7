//! Scene descriptions and the image-to-space coordinate mapping.
//!
//! A detection carries the normalised bounding-box centre and the depth-map
//! gray value at that point. Centres map to `x, y ∈ [-1, 1]` with the origin
//! at the frame centre and `y` pointing up; gray values map linearly to a
//! distance in metres, brighter meaning nearer.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Intrinsics and depth range used to place detections in space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub h_fov_deg: f64,
    pub v_fov_deg: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub g_min: f64,
    pub g_max: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        CameraModel {
            h_fov_deg: 90.0,
            v_fov_deg: 60.0,
            d_min: 0.1,
            d_max: 5.0,
            g_min: 0.0,
            g_max: 255.0,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<()> {
        let fov_ok = |f: f64| f > 0.0 && f < 180.0;
        if !fov_ok(self.h_fov_deg) || !fov_ok(self.v_fov_deg) {
            return Err(Error::Validation(format!(
                "field of view {}x{} deg must lie in (0, 180)",
                self.h_fov_deg, self.v_fov_deg
            )));
        }
        if !(self.d_min > 0.0 && self.d_min < self.d_max && self.d_max.is_finite()) {
            return Err(Error::Validation(format!(
                "depth range [{}, {}] must satisfy 0 < d_min < d_max",
                self.d_min, self.d_max
            )));
        }
        if !(self.g_min < self.g_max && self.g_min.is_finite() && self.g_max.is_finite()) {
            return Err(Error::Validation(format!(
                "gray range [{}, {}] is empty",
                self.g_min, self.g_max
            )));
        }
        Ok(())
    }
}

/// One detector hit: frame index, normalised box centre and depth gray value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedDetection {
    pub frame: u64,
    pub x_center: f64,
    pub y_center: f64,
    pub gray: f64,
}

/// A source position at a point in time. `x`, `y` are dimensionless in
/// `[-1, 1]`, `z` is a distance in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialSample {
    #[serde(rename = "t")]
    pub time: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpatialSample {
    pub fn new(time: f64, x: f64, y: f64, z: f64) -> Self {
        SpatialSample { time, x, y, z }
    }

    fn validate(&self, camera: &CameraModel) -> Result<()> {
        let unit = |v: f64| (-1.0..=1.0).contains(&v);
        if !(self.time >= 0.0 && self.time.is_finite()) {
            return Err(Error::Validation(format!(
                "time {} must be >= 0",
                self.time
            )));
        }
        if !unit(self.x) || !unit(self.y) {
            return Err(Error::Validation(format!(
                "position ({}, {}) outside [-1, 1]",
                self.x, self.y
            )));
        }
        if !(camera.d_min..=camera.d_max).contains(&self.z) {
            return Err(Error::Validation(format!(
                "distance {} m outside [{}, {}]",
                self.z, camera.d_min, camera.d_max
            )));
        }
        Ok(())
    }
}

/// Maps a normalised box centre to the frame-centred `[-1, 1]²` square.
/// Image rows grow downward, so `y` flips sign.
pub fn normalize_center(x_center: f64, y_center: f64) -> Result<(f64, f64)> {
    let unit = |v: f64| (0.0..=1.0).contains(&v);
    if !unit(x_center) || !unit(y_center) {
        return Err(Error::Domain(format!(
            "box centre ({x_center}, {y_center}) outside [0, 1]"
        )));
    }
    Ok((2.0 * x_center - 1.0, 1.0 - 2.0 * y_center))
}

/// Linear map from depth-map gray value to metres, `g_max → d_min`,
/// `g_min → d_max`. Out-of-range values are clamped with a warning.
pub fn depth_from_gray(gray: f64, camera: &CameraModel) -> f64 {
    let g = if (camera.g_min..=camera.g_max).contains(&gray) {
        gray
    } else {
        let clamped = gray.clamp(camera.g_min, camera.g_max);
        log::warn!(
            "depth gray value {gray} outside [{}, {}]; clamped to {clamped}",
            camera.g_min,
            camera.g_max
        );
        clamped
    };
    let z = camera.d_max
        - (g - camera.g_min) * (camera.d_max - camera.d_min) / (camera.g_max - camera.g_min);
    // Rounding can land a hair outside the range at the endpoints.
    z.clamp(camera.d_min, camera.d_max)
}

/// Azimuth and elevation in degrees. Azimuth is positive to the viewer's
/// right, elevation positive upward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
}

/// Direction of a sample under a pinhole model: `x`, `y` scale onto the image
/// plane at depth `z` through the half-angle tangents of the field of view.
pub fn to_direction(sample: &SpatialSample, camera: &CameraModel) -> Direction {
    let half_h = (camera.h_fov_deg / 2.0).to_radians().tan();
    let half_v = (camera.v_fov_deg / 2.0).to_radians().tan();
    let px = sample.x * sample.z * half_h;
    let py = sample.y * sample.z * half_v;
    let pz = sample.z;
    Direction {
        azimuth_deg: px.atan2(pz).to_degrees(),
        elevation_deg: py.atan2(px.hypot(pz)).to_degrees(),
    }
}

/// A non-empty, strictly time-ordered sequence of positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    samples: Vec<SpatialSample>,
}

impl Trajectory {
    pub fn new(samples: Vec<SpatialSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Config("trajectory has no samples".into()));
        }
        if let Some(w) = samples
            .windows(2)
            .find(|w| w[1].time.partial_cmp(&w[0].time) != Some(std::cmp::Ordering::Greater))
        {
            return Err(Error::Validation(format!(
                "trajectory times must increase strictly ({} then {})",
                w[0].time, w[1].time
            )));
        }
        Ok(Trajectory { samples })
    }

    /// A source that never moves.
    pub fn fixed(x: f64, y: f64, z: f64) -> Self {
        Trajectory {
            samples: vec![SpatialSample::new(0.0, x, y, z)],
        }
    }

    pub fn samples(&self) -> &[SpatialSample] {
        &self.samples
    }

    /// Position at `t`, linearly interpolated per coordinate and held at the
    /// first/last sample outside the covered time span.
    pub fn at(&self, t: f64) -> SpatialSample {
        let s = &self.samples;
        let idx = s.partition_point(|p| p.time <= t);
        if idx == 0 {
            return s[0];
        }
        if idx == s.len() {
            return s[s.len() - 1];
        }
        let (a, b) = (&s[idx - 1], &s[idx]);
        let f = (t - a.time) / (b.time - a.time);
        let lerp = |u: f64, v: f64| u + f * (v - u);
        SpatialSample {
            time: t,
            x: lerp(a.x, b.x),
            y: lerp(a.y, b.y),
            z: lerp(a.z, b.z),
        }
    }

    fn validate(&self, camera: &CameraModel) -> Result<()> {
        self.samples.iter().try_for_each(|s| s.validate(camera))
    }
}

/// Interpolated position on a raw sample list; see [`Trajectory::at`].
pub fn trajectory_at(samples: &[SpatialSample], t: f64) -> Result<SpatialSample> {
    Ok(Trajectory::new(samples.to_vec())?.at(t))
}

/// Converts detections into a trajectory with `t = frame / fps`.
///
/// Detections are ordered by frame; two detections on the same frame are
/// rejected.
pub fn detections_to_trajectory(
    detections: &[NormalizedDetection],
    fps: f64,
    camera: &CameraModel,
) -> Result<Trajectory> {
    if !(fps > 0.0 && fps.is_finite()) {
        return Err(Error::Validation(format!("fps {fps} must be positive")));
    }
    let mut sorted = detections.to_vec();
    sorted.sort_by_key(|d| d.frame);
    if let Some(w) = sorted.windows(2).find(|w| w[0].frame == w[1].frame) {
        return Err(Error::Validation(format!(
            "two detections on frame {}",
            w[0].frame
        )));
    }
    let samples = sorted
        .iter()
        .map(|d| {
            let (x, y) = normalize_center(d.x_center, d.y_center)
                .map_err(|e| e.context(format!("frame {}", d.frame)))?;
            Ok(SpatialSample::new(
                d.frame as f64 / fps,
                x,
                y,
                depth_from_gray(d.gray, camera),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(samples)
}

/// One audio stem bound to a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub id: String,
    /// Audio path as written in the scene file, relative to the scene's directory.
    pub audio: String,
    pub trajectory: Trajectory,
}

impl SourceSpec {
    pub fn audio_path(&self, base_dir: &Path) -> PathBuf {
        base_dir.join(&self.audio)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneDescription {
    pub fps: f64,
    pub camera: CameraModel,
    pub sources: Vec<SourceSpec>,
}

impl SceneDescription {
    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::Validation(format!(
                "fps {} must be positive",
                self.fps
            )));
        }
        self.camera.validate()?;
        let mut seen = HashSet::new();
        for src in &self.sources {
            if !seen.insert(src.id.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate source id {:?}",
                    src.id
                )));
            }
            if src.audio.trim().is_empty() {
                return Err(Error::Validation(format!(
                    "source {:?} has an empty audio reference",
                    src.id
                )));
            }
            src.trajectory
                .validate(&self.camera)
                .map_err(|e| e.context(format!("source {:?}", src.id)))?;
        }
        Ok(())
    }
}

// Wire format.

#[derive(Debug, Default, Serialize, Deserialize)]
struct CameraDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    h_fov_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    v_fov_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d_min_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    d_max_m: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DetectionDoc {
    frame: u64,
    x_center: f64,
    y_center: f64,
    gray: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SourceDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    audio: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detections: Option<Vec<DetectionDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trajectory: Option<Vec<SpatialSample>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SceneDoc {
    fps: f64,
    #[serde(default)]
    camera: CameraDoc,
    sources: Vec<SourceDoc>,
}

/// Parses and validates a UTF-8 JSON scene file.
///
/// Sources given as detections are converted to trajectories; the returned
/// scene always holds trajectories.
pub fn parse_scene(document: &[u8]) -> Result<SceneDescription> {
    let doc: SceneDoc =
        serde_json::from_slice(document).map_err(|e| Error::Parse(format!("scene: {e}")))?;
    let defaults = CameraModel::default();
    let camera = CameraModel {
        h_fov_deg: doc.camera.h_fov_deg.unwrap_or(defaults.h_fov_deg),
        v_fov_deg: doc.camera.v_fov_deg.unwrap_or(defaults.v_fov_deg),
        d_min: doc.camera.d_min_m.unwrap_or(defaults.d_min),
        d_max: doc.camera.d_max_m.unwrap_or(defaults.d_max),
        ..defaults
    };
    camera.validate()?;

    let sources = doc
        .sources
        .into_iter()
        .enumerate()
        .map(|(i, src)| {
            let label = format!("sources[{i}] ({:?})", src.id);
            let audio = src.audio.ok_or_else(|| {
                Error::Validation(format!("{label}: missing audio file reference"))
            })?;
            let trajectory = match (src.detections, src.trajectory) {
                (Some(_), Some(_)) => {
                    return Err(Error::Validation(format!(
                        "{label}: give either detections or trajectory, not both"
                    )))
                }
                (None, None) => {
                    return Err(Error::Validation(format!(
                        "{label}: needs detections or a trajectory"
                    )))
                }
                (Some(dets), None) => {
                    if dets.is_empty() {
                        return Err(Error::Validation(format!("{label}: no detections")));
                    }
                    let dets: Vec<NormalizedDetection> = dets
                        .into_iter()
                        .map(|d| NormalizedDetection {
                            frame: d.frame,
                            x_center: d.x_center,
                            y_center: d.y_center,
                            gray: d.gray,
                        })
                        .collect();
                    detections_to_trajectory(&dets, doc.fps, &camera)
                        .map_err(|e| validation(e).context(&label))?
                }
                (None, Some(points)) => {
                    if points.is_empty() {
                        return Err(Error::Validation(format!("{label}: empty trajectory")));
                    }
                    Trajectory::new(points).map_err(|e| validation(e).context(&label))?
                }
            };
            Ok(SourceSpec {
                id: src.id,
                audio,
                trajectory,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let scene = SceneDescription {
        fps: doc.fps,
        camera,
        sources,
    };
    scene.validate()?;
    Ok(scene)
}

fn validation(e: Error) -> Error {
    match e {
        Error::Domain(m) | Error::Config(m) => Error::Validation(m),
        other => other,
    }
}

/// Serialises a scene as pretty-printed JSON in trajectory form.
pub fn serialize_scene(scene: &SceneDescription) -> String {
    let doc = SceneDoc {
        fps: scene.fps,
        camera: CameraDoc {
            h_fov_deg: Some(scene.camera.h_fov_deg),
            v_fov_deg: Some(scene.camera.v_fov_deg),
            d_min_m: Some(scene.camera.d_min),
            d_max_m: Some(scene.camera.d_max),
        },
        sources: scene
            .sources
            .iter()
            .map(|s| SourceDoc {
                id: s.id.clone(),
                audio: Some(s.audio.clone()),
                detections: None,
                trajectory: Some(s.trajectory.samples().to_vec()),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("scene serialisation is infallible")
}
