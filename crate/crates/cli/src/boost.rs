use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use magboost::booster::{boost_clip_cached, BoosterParams, OperatorCache, DEFAULT_MIN_DIM};
use magboost::clipio::{load_clip_with_depth, save_clip, Channels, ClipManifest};

use crate::{finish, MagnifyArgs, SequenceArgs, Stage, StageExt};

#[derive(Clone, Debug, Args)]
pub struct BoostArgs {
    /// Directory holding the input frames.
    #[arg(long)]
    pub input: PathBuf,
    /// Directory for the output frames.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub sequence: SequenceArgs,
    /// Output file pattern (defaults to the input pattern).
    #[arg(long)]
    pub output_pattern: Option<String>,
    /// Output frame count.
    #[arg(long = "frames", default_value_t = 10)]
    pub out_len: usize,
    #[command(flatten)]
    pub magnify: MagnifyArgs,
    /// Pyramid levels including the residual; 1 disables the pyramid.
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    /// Comma-separated per-level magnification ceilings, one per level.
    #[arg(long, value_delimiter = ',')]
    pub alpha_caps: Option<Vec<f64>>,
    /// Smallest side of the coarsest pyramid level.
    #[arg(long, default_value_t = DEFAULT_MIN_DIM)]
    pub min_dim: usize,
    /// Convert RGB input to luminance.
    #[arg(long)]
    pub gray: bool,
    /// Directory of persisted operators, reused across runs.
    #[arg(long)]
    pub lut_cache: Option<PathBuf>,
}

pub fn run(a: &BoostArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    finish(err, execute(a, out))
}

fn execute(a: &BoostArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let magnify = a.magnify.params().stage("params")?;
    let mut params = BoosterParams::new(magnify, a.out_len)
        .with_levels(a.levels)
        .with_min_dim(a.min_dim);
    if let Some(caps) = &a.alpha_caps {
        params = params.with_alpha_caps(caps.clone());
    }
    params.validate().stage("params")?;

    let mut manifest =
        ClipManifest::discover(&a.input, &a.sequence.pattern, a.sequence.start).stage("load")?;
    if manifest.frames == 0 {
        let first = manifest
            .frame_path(0)
            .map(|p| p.display().to_string())
            .unwrap_or_default();
        return Err(anyhow::anyhow!("no frames found (looked for {first})").context(Stage("load")));
    }
    if a.gray {
        manifest = manifest.with_channels(Channels::Gray);
    }
    let (clip, depth) = load_clip_with_depth::<f64>(&manifest).stage("load")?;

    let cache = match &a.lut_cache {
        Some(dir) => OperatorCache::with_lut_dir(dir),
        None => OperatorCache::new(),
    };
    let boosted = boost_clip_cached(&clip, &params, &cache).stage("boost")?;

    let pattern = a
        .output_pattern
        .clone()
        .unwrap_or_else(|| a.sequence.pattern.clone());
    let out_manifest = ClipManifest::new(&a.output, pattern, boosted.frames())
        .with_start(a.sequence.start)
        .with_bit_depth(depth);
    save_clip(&boosted, &out_manifest).stage("save")?;
    writeln!(
        out,
        "boosted {} frames ({}x{}x{}) into {} frames in {}",
        clip.frames(),
        clip.width(),
        clip.height(),
        clip.channels(),
        boosted.frames(),
        a.output.display()
    )?;
    Ok(())
}
