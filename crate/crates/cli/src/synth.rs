use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use magboost::clipio::{save_clip, BitDepth, ClipManifest};
use magboost::synthlab::{make_clip, Motion, Pattern, SynthSpec};

use crate::{default_truth_path, finish, SequenceArgs, StageExt};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PatternArg {
    Plaid,
    Blob,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MotionArg {
    Sine,
    Step,
}

#[derive(Clone, Debug, Args)]
pub struct SynthArgs {
    /// Directory for the rendered frames.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub sequence: SequenceArgs,
    #[arg(long, default_value_t = 64)]
    pub width: usize,
    #[arg(long, default_value_t = 64)]
    pub height: usize,
    #[arg(long, default_value_t = 64)]
    pub frames: usize,
    #[arg(long, value_enum, default_value_t = PatternArg::Plaid)]
    pub shape: PatternArg,
    /// Spatial wavelength in pixels.
    #[arg(long, default_value_t = 16.0)]
    pub wavelength: f64,
    #[arg(long, value_enum, default_value_t = MotionArg::Sine)]
    pub motion: MotionArg,
    /// Sine motion amplitude in pixels.
    #[arg(long, default_value_t = 0.1)]
    pub amplitude: f64,
    /// Sine motion frequency in radians per frame.
    #[arg(long, default_value_t = PI / 4.0)]
    pub omega: f64,
    /// Step motion size in pixels.
    #[arg(long, default_value_t = 0.25)]
    pub step_size: f64,
    /// First (1-based) frame of the step.
    #[arg(long, default_value_t = 1)]
    pub step_at: usize,
    #[arg(long, default_value_t = 0.4)]
    pub contrast: f64,
    /// Sample depth of the written frames (8 or 16).
    #[arg(long, default_value_t = 16, value_parser = parse_bit_depth)]
    pub bit_depth: u8,
    /// Ground-truth CSV path (defaults to ground_truth.csv in the output directory).
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

pub fn run(a: &SynthArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    finish(err, execute(a, out))
}

fn execute(a: &SynthArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let spec = SynthSpec {
        width: a.width,
        height: a.height,
        frames: a.frames,
        pattern: match a.shape {
            PatternArg::Plaid => Pattern::Plaid,
            PatternArg::Blob => Pattern::GaussianBlob,
        },
        wavelength: a.wavelength,
        motion: match a.motion {
            MotionArg::Sine => Motion::Sine {
                amplitude: a.amplitude,
                omega: a.omega,
            },
            MotionArg::Step => Motion::Step {
                size: a.step_size,
                at: a.step_at,
            },
        },
        contrast: a.contrast,
    };
    let (clip, truth) = make_clip::<f64>(&spec).stage("synth")?;
    let depth = if a.bit_depth == 8 {
        BitDepth::Eight
    } else {
        BitDepth::Sixteen
    };
    let manifest = ClipManifest::new(&a.output, &a.sequence.pattern, clip.frames())
        .with_start(a.sequence.start)
        .with_bit_depth(depth);
    save_clip(&clip, &manifest).stage("save")?;
    let truth_path = a
        .truth
        .clone()
        .unwrap_or_else(|| default_truth_path(&a.output));
    truth.save_csv(&truth_path).stage("save")?;
    writeln!(
        out,
        "wrote {} frames to {} and ground truth to {}",
        clip.frames(),
        a.output.display(),
        truth_path.display()
    )?;
    Ok(())
}

fn parse_bit_depth(s: &str) -> Result<u8, String> {
    match s {
        "8" => Ok(8),
        "16" => Ok(16),
        _ => Err(format!("bit depth must be 8 or 16, got {s:?}")),
    }
}
