//! `spataudio`: render scenes to binaural WAV, score renders, and build or
//! synthesise scene files.
//!
//! Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or validation
//! error.

mod build;
mod commands;
mod failure;
mod output;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "spataudio", version, about = "Binaural spatial audio renderer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Algo3d,
    Hrtf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Clip {
    /// Scale the mix down to full scale when it would clip.
    Normalize,
    /// Clamp samples to [-1, 1].
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Sources spread across the frame at 1 m.
    Static,
    /// Every source moves from hard left to hard right.
    Sweep,
    /// Sources spread across the frame, walking from 4 m to 0.5 m.
    Approach,
    /// Hard left at 1 m.
    Left,
    /// Hard right at 1 m.
    Right,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a scene file to a 16-bit stereo WAV.
    Render {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, value_enum, default_value = "algo3d")]
        method: Method,
        /// HRIR manifest; required with `--method hrtf`.
        #[arg(long)]
        hrir: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = spataudio::config::DEFAULT_SAMPLE_RATE)]
        rate: u32,
        #[arg(long, value_enum, default_value = "normalize")]
        clip: Clip,
    },
    /// Compare a predicted render with a reference and print the report as JSON.
    Evaluate {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long = "pred")]
        predicted: PathBuf,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn tracker detections into a scene file.
    ///
    /// Audio paths are written as given and resolve relative to the scene
    /// file's directory.
    SceneBuild {
        #[arg(long)]
        detections: PathBuf,
        /// Track id to audio path bindings: `id=path[,id=path...]`.
        #[arg(long = "map", required = true, value_delimiter = ',')]
        map: Vec<String>,
        #[arg(long)]
        fps: f64,
        #[arg(long, default_value_t = 90.0)]
        hfov: f64,
        #[arg(long, default_value_t = 60.0)]
        vfov: f64,
        #[arg(long, default_value_t = 0.1)]
        dmin: f64,
        #[arg(long, default_value_t = 5.0)]
        dmax: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write seeded test stems and a matching scene file.
    SceneSynth {
        #[arg(long)]
        sources: usize,
        #[arg(long)]
        duration: f64,
        #[arg(long, value_enum)]
        preset: Preset,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Render {
            scene,
            method,
            hrir,
            out,
            rate,
            clip,
        } => commands::render(&commands::RenderArgs {
            scene,
            method,
            hrir,
            out,
            rate,
            clip,
        }),
        Command::Evaluate {
            reference,
            predicted,
            out,
        } => commands::evaluate(&reference, &predicted, out.as_deref()),
        Command::SceneBuild {
            detections,
            map,
            fps,
            hfov,
            vfov,
            dmin,
            dmax,
            out,
        } => build::scene_build(&build::BuildArgs {
            detections,
            map,
            fps,
            hfov,
            vfov,
            dmin,
            dmax,
            out,
        }),
        Command::SceneSynth {
            sources,
            duration,
            preset,
            seed,
            out_dir,
        } => synth::scene_synth(&synth::SynthArgs {
            sources,
            duration,
            preset,
            seed,
            out_dir,
        }),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
