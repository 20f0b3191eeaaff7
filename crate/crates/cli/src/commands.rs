use std::path::{Path, PathBuf};

use spataudio::audio::{write_wav, SampleFormat};
use spataudio::hrtf::load_hrir_manifest;
use spataudio::metrics;
use spataudio::render::render_scene;
use spataudio::scene::parse_scene;
use spataudio::{ClipPolicy, EvalConfig, RenderConfig, RenderMethod};

use crate::failure::Failure;
use crate::output::write_atomic;
use crate::{Clip, Method};

pub struct RenderArgs {
    pub scene: PathBuf,
    pub method: Method,
    pub hrir: Option<PathBuf>,
    pub out: PathBuf,
    pub rate: u32,
    pub clip: Clip,
}

fn render_config(args: &RenderArgs) -> Result<RenderConfig, Failure> {
    let mut config = RenderConfig {
        method: match args.method {
            Method::Algo3d => RenderMethod::Algo3d,
            Method::Hrtf => RenderMethod::Hrtf,
        },
        sample_rate: args.rate,
        clip_policy: match args.clip {
            Clip::Normalize => ClipPolicy::PeakNormalize,
            Clip::Hard => ClipPolicy::HardClip,
        },
        ..RenderConfig::default()
    };
    // The 512-point FFT only covers a 25 ms window up to 20.48 kHz.
    let window = (config.stft.window_ms * args.rate as f64 / 1000.0).round() as usize;
    if window > config.stft.fft_size {
        config.stft.fft_size = window.next_power_of_two();
        log::info!(
            "using a {}-point FFT at {} Hz",
            config.stft.fft_size,
            args.rate
        );
    }
    // One parameter update per STFT hop at whatever rate was asked for.
    config.block = config.stft.layout(args.rate)?.hop;
    config.validate()?;
    Ok(config)
}

pub fn render(args: &RenderArgs) -> Result<(), Failure> {
    match (args.method, &args.hrir) {
        (Method::Hrtf, None) => return Err(Failure::usage("--method hrtf needs --hrir")),
        (Method::Algo3d, Some(_)) => {
            return Err(Failure::usage("--hrir only applies to --method hrtf"))
        }
        _ => {}
    }
    let config = render_config(args)?;

    let doc = std::fs::read(&args.scene)
        .map_err(|e| Failure::runtime(format!("reading {}: {e}", args.scene.display())))?;
    let scene = parse_scene(&doc).map_err(|e| Failure::from(e.context(args.scene.display())))?;
    let base = args.scene.parent().unwrap_or(Path::new("."));
    let hrir = args
        .hrir
        .as_deref()
        .map(|p| load_hrir_manifest(p, Some(config.sample_rate)))
        .transpose()?;

    let result = render_scene(&scene, base, &config, hrir.as_ref())?;
    write_atomic(&args.out, &write_wav(&result.audio, SampleFormat::Pcm16))?;
    println!(
        "duration={:.3}s sources={} applied_gain={:.6} clipped={} out={}",
        result.audio.duration_secs(),
        scene.sources.len(),
        result.applied_gain,
        result.clipped_samples,
        args.out.display()
    );
    Ok(())
}

pub fn evaluate(reference: &Path, predicted: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let report = metrics::evaluate(reference, predicted, &EvalConfig::default())?;
    let json = report.to_json() + "\n";
    if let Some(path) = out {
        write_atomic(path, json.as_bytes())?;
    }
    print!("{json}");
    Ok(())
}
