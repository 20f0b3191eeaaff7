//! `scene-build`: detections JSON from the tracker to a scene file.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::Deserialize;

use spataudio::scene::{
    detections_to_trajectory, serialize_scene, CameraModel, NormalizedDetection, SceneDescription,
    SourceSpec,
};

use crate::failure::Failure;
use crate::output::write_atomic;

pub struct BuildArgs {
    pub detections: PathBuf,
    pub map: Vec<String>,
    pub fps: f64,
    pub hfov: f64,
    pub vfov: f64,
    pub dmin: f64,
    pub dmax: f64,
    pub out: PathBuf,
}

/// Track ids are strings in the schema; bare integers are accepted too.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TrackId {
    Text(String),
    Number(u64),
}

impl TrackId {
    fn into_string(self) -> String {
        match self {
            TrackId::Text(s) => s,
            TrackId::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
struct DetectionRecord {
    frame: u64,
    track_id: TrackId,
    x_center: f64,
    y_center: f64,
    gray: f64,
}

#[derive(Debug, Deserialize)]
struct DetectionsFile {
    #[serde(default)]
    fps: Option<f64>,
    #[serde(default)]
    width: Option<u32>,
    #[serde(default)]
    height: Option<u32>,
    detections: Vec<DetectionRecord>,
}

fn parse_map(entries: &[String]) -> Result<BTreeMap<String, String>, Failure> {
    let mut map = BTreeMap::new();
    for entry in entries {
        let (id, path) = entry
            .split_once('=')
            .filter(|(id, path)| !id.is_empty() && !path.is_empty())
            .ok_or_else(|| Failure::usage(format!("--map entry {entry:?} is not id=path")))?;
        if map.insert(id.to_string(), path.to_string()).is_some() {
            return Err(Failure::usage(format!("track id {id:?} mapped twice")));
        }
    }
    Ok(map)
}

/// Groups detections by track and binds each track to its audio file.
fn build_scene(
    file: DetectionsFile,
    map: &BTreeMap<String, String>,
    fps: f64,
    camera: CameraModel,
) -> Result<SceneDescription, Failure> {
    if let Some(file_fps) = file.fps {
        if (file_fps - fps).abs() > 1e-9 {
            log::warn!("detections were recorded at {file_fps} fps; using --fps {fps}");
        }
    }
    log::debug!("frame size {:?}x{:?}", file.width, file.height);

    let mut tracks: BTreeMap<String, Vec<NormalizedDetection>> = BTreeMap::new();
    for d in file.detections {
        tracks
            .entry(d.track_id.into_string())
            .or_default()
            .push(NormalizedDetection {
                frame: d.frame,
                x_center: d.x_center,
                y_center: d.y_center,
                gray: d.gray,
            });
    }
    if tracks.is_empty() {
        return Err(Failure::usage("detections file holds no detections"));
    }

    let unmapped: Vec<&str> = tracks
        .keys()
        .filter(|id| !map.contains_key(*id))
        .map(String::as_str)
        .collect();
    if !unmapped.is_empty() {
        return Err(Failure::usage(format!(
            "no audio mapping for track id(s): {}",
            unmapped.join(", ")
        )));
    }
    let seen: BTreeSet<&String> = tracks.keys().collect();
    for id in map.keys().filter(|id| !seen.contains(id)) {
        log::warn!("--map binds {id:?} but no detections carry that id");
    }

    let sources = tracks
        .into_iter()
        .map(|(id, dets)| {
            let trajectory = detections_to_trajectory(&dets, fps, &camera)
                .map_err(|e| Failure::usage(e.context(format!("track {id:?}"))))?;
            Ok(SourceSpec {
                audio: map[&id].clone(),
                id,
                trajectory,
            })
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let scene = SceneDescription {
        fps,
        camera,
        sources,
    };
    scene.validate()?;
    Ok(scene)
}

pub fn scene_build(args: &BuildArgs) -> Result<(), Failure> {
    let map = parse_map(&args.map)?;
    let camera = CameraModel {
        h_fov_deg: args.hfov,
        v_fov_deg: args.vfov,
        d_min: args.dmin,
        d_max: args.dmax,
        ..CameraModel::default()
    };
    camera.validate()?;
    if !(args.fps > 0.0 && args.fps.is_finite()) {
        return Err(Failure::usage(format!(
            "--fps {} must be positive",
            args.fps
        )));
    }

    let bytes = std::fs::read(&args.detections)
        .map_err(|e| Failure::runtime(format!("reading {}: {e}", args.detections.display())))?;
    let file: DetectionsFile = serde_json::from_slice(&bytes)
        .map_err(|e| Failure::usage(format!("{}: {e}", args.detections.display())))?;

    let scene = build_scene(file, &map, args.fps, camera)?;
    write_atomic(&args.out, (serialize_scene(&scene) + "\n").as_bytes())?;
    println!("sources={} out={}", scene.sources.len(), args.out.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn file(json: &str) -> DetectionsFile {
        serde_json::from_str(json).unwrap()
    }

    fn map(pairs: &[&str]) -> BTreeMap<String, String> {
        parse_map(&pairs.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn centre_and_brightest_gray() {
        let f = file(
            r#"{"fps": 30, "width": 640, "height": 480, "detections": [
                {"frame": 0, "track_id": "a", "x_center": 0.5, "y_center": 0.5, "gray": 255}]}"#,
        );
        let scene = build_scene(f, &map(&["a=a.wav"]), 30.0, CameraModel::default()).unwrap();
        let p = scene.sources[0].trajectory.samples()[0];
        assert_eq!((p.time, p.x, p.y), (0.0, 0.0, 0.0));
        assert!((p.z - 0.1).abs() < 1e-12);
        assert_eq!(scene.sources[0].audio, "a.wav");
    }

    #[test]
    fn unmapped_ids_are_listed() {
        let f = file(
            r#"{"detections": [
                {"frame": 0, "track_id": "a", "x_center": 0.2, "y_center": 0.5, "gray": 10},
                {"frame": 0, "track_id": 7, "x_center": 0.8, "y_center": 0.5, "gray": 10}]}"#,
        );
        let err = build_scene(f, &map(&["a=a.wav"]), 30.0, CameraModel::default()).unwrap_err();
        assert_eq!(err.code(), 2);
        assert!(err.message().contains('7'), "{}", err.message());
    }

    #[test]
    fn bad_map_entries() {
        for bad in ["a", "=x.wav", "a="] {
            assert!(parse_map(&[bad.to_string()]).is_err());
        }
        assert!(parse_map(&["a=1.wav".into(), "a=2.wav".into()]).is_err());
    }

    #[test]
    fn tracks_are_sorted_by_frame() {
        let f = file(
            r#"{"detections": [
                {"frame": 30, "track_id": "a", "x_center": 1.0, "y_center": 0.5, "gray": 0},
                {"frame": 0, "track_id": "a", "x_center": 0.0, "y_center": 0.5, "gray": 0}]}"#,
        );
        let scene = build_scene(f, &map(&["a=a.wav"]), 30.0, CameraModel::default()).unwrap();
        let s = scene.sources[0].trajectory.samples();
        assert_eq!((s[0].x, s[1].x, s[1].time), (-1.0, 1.0, 1.0));
    }
}
