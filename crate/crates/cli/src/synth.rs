//! `scene-synth`: seeded stems and a scene file for golden tests.

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spataudio::audio::{write_wav, AudioBuffer, SampleFormat};
use spataudio::config::DEFAULT_SAMPLE_RATE;
use spataudio::scene::{
    serialize_scene, CameraModel, SceneDescription, SourceSpec, SpatialSample, Trajectory,
};

use crate::failure::Failure;
use crate::output::write_atomic;
use crate::Preset;

pub const SCENE_FILE: &str = "scene.json";
const SCENE_FPS: f64 = 30.0;

pub struct SynthArgs {
    pub sources: usize,
    pub duration: f64,
    pub preset: Preset,
    pub seed: u64,
    pub out_dir: PathBuf,
}

/// A tone plus a little noise; each source gets its own pitch.
fn stem(index: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let freq = 220.0 * 1.5_f64.powi(index as i32);
    let rate = DEFAULT_SAMPLE_RATE as f64;
    (0..len)
        .map(|n| {
            let t = n as f64 / rate;
            0.4 * (2.0 * PI * freq * t).sin() + 0.05 * rng.random_range(-1.0..1.0)
        })
        .collect()
}

fn spread(index: usize, count: usize) -> f64 {
    if count == 1 {
        0.0
    } else {
        -0.8 + 1.6 * index as f64 / (count - 1) as f64
    }
}

fn trajectory(preset: Preset, index: usize, count: usize, duration: f64) -> Trajectory {
    let x = spread(index, count);
    let path = |a: (f64, f64), b: (f64, f64)| {
        Trajectory::new(vec![
            SpatialSample::new(0.0, a.0, 0.0, a.1),
            SpatialSample::new(duration, b.0, 0.0, b.1),
        ])
        .expect("duration is positive")
    };
    match preset {
        Preset::Static => Trajectory::fixed(x, 0.0, 1.0),
        Preset::Sweep => path((-1.0, 1.0), (1.0, 1.0)),
        Preset::Approach => path((x, 4.0), (x, 0.5)),
        Preset::Left => Trajectory::fixed(-1.0, 0.0, 1.0),
        Preset::Right => Trajectory::fixed(1.0, 0.0, 1.0),
    }
}

pub fn scene_synth(args: &SynthArgs) -> Result<(), Failure> {
    if args.sources == 0 {
        return Err(Failure::usage("--sources must be at least 1"));
    }
    if !(args.duration > 0.0 && args.duration.is_finite()) {
        return Err(Failure::usage(format!(
            "--duration {} must be positive",
            args.duration
        )));
    }
    let len = (args.duration * DEFAULT_SAMPLE_RATE as f64).round() as usize;
    if len == 0 {
        return Err(Failure::usage("--duration is shorter than one sample"));
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::runtime(format!("creating {}: {e}", args.out_dir.display())))?;

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut sources = Vec::with_capacity(args.sources);
    for i in 0..args.sources {
        let name = format!("src{i}.wav");
        let audio = AudioBuffer::mono(DEFAULT_SAMPLE_RATE, stem(i, len, &mut rng))?;
        write_atomic(
            &args.out_dir.join(&name),
            &write_wav(&audio, SampleFormat::Pcm16),
        )?;
        sources.push(SourceSpec {
            id: format!("src{i}"),
            audio: name,
            trajectory: trajectory(args.preset, i, args.sources, args.duration),
        });
    }
    let scene = SceneDescription {
        fps: SCENE_FPS,
        camera: CameraModel::default(),
        sources,
    };
    scene.validate()?;
    let path = args.out_dir.join(SCENE_FILE);
    write_atomic(&path, (serialize_scene(&scene) + "\n").as_bytes())?;
    println!("sources={} out={}", args.sources, path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_runs_left_to_right() {
        let t = trajectory(Preset::Sweep, 0, 2, 3.0);
        assert_eq!(t.at(0.0).x, -1.0);
        assert_eq!(t.at(3.0).x, 1.0);
    }

    #[test]
    fn spread_covers_the_frame() {
        assert_eq!(spread(0, 1), 0.0);
        assert_eq!(spread(0, 3), -0.8);
        assert!((spread(2, 3) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn stems_depend_only_on_the_seed() {
        let a = stem(1, 100, &mut ChaCha8Rng::seed_from_u64(3));
        let b = stem(1, 100, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a, b);
        assert!(a.iter().all(|v| v.abs() <= 0.45));
    }
}
