//! `magboost` command line: boost clips, build and inspect operator files,
//! render synthetic clips, run the invariant suites and time the fused
//! pipeline against the two-stage one.

pub mod bench;
mod boost;
mod lut;
mod synth;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "magboost",
    version,
    about = "Fused motion magnification and temporal interpolation"
)]
pub struct Cli {
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Magnify and resample a frame sequence with one fused operator.
    Boost(boost::BoostArgs),
    /// Build or inspect operator (LUT) files.
    #[command(subcommand)]
    Lut(lut::LutCommand),
    /// Render a synthetic clip with known sub-pixel motion.
    Synth(synth::SynthArgs),
    /// Run the randomized invariant suites.
    Verify(verify::VerifyArgs),
    /// Time the fused pipeline against the separate one.
    Bench(bench::BenchArgs),
}

/// Magnification parameters shared by several subcommands.
#[derive(Clone, Debug, Args)]
pub struct MagnifyArgs {
    /// Magnification factor.
    #[arg(long, default_value_t = 16.0)]
    pub alpha: f64,
    /// Weight of the fast smoother.
    #[arg(long, default_value_t = 0.4)]
    pub w1: f64,
    /// Weight of the slow smoother.
    #[arg(long, default_value_t = 0.05)]
    pub w2: f64,
}

impl MagnifyArgs {
    pub fn params(&self) -> magboost::Result<magboost::MagnifyParams> {
        magboost::MagnifyParams::new(self.alpha, self.w1, self.w2)
    }
}

/// A frame sequence on disk.
#[derive(Clone, Debug, Args)]
pub struct SequenceArgs {
    /// printf-style file name pattern inside the directory.
    #[arg(long, default_value = "frame_%04d.png")]
    pub pattern: String,
    /// Index of the first frame file.
    #[arg(long, default_value_t = 1)]
    pub start: usize,
}

/// Parses `args` (including the program name) and runs the command, writing
/// normal output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return EXIT_FAILURE;
        }
    };
    // the sinks need not be Send, so the command writes into buffers inside the pool
    let (code, out_buf, err_buf) = pool.install(|| {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = match cli.command {
            Command::Boost(a) => boost::run(&a, &mut o, &mut e),
            Command::Lut(c) => lut::run(&c, &mut o, &mut e),
            Command::Synth(a) => synth::run(&a, &mut o, &mut e),
            Command::Verify(a) => verify::run(&a, &mut o, &mut e),
            Command::Bench(a) => bench::run(&a, &mut o, &mut e),
        };
        (code, o, e)
    });
    let _ = out.write_all(&out_buf);
    let _ = err.write_all(&err_buf);
    code
}

pub fn run_main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

/// Pipeline stage attached to an error as context; printed as `error [stage]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stage(pub &'static str);

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.0)
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, name: &'static str) -> anyhow::Result<T>;
}

impl<T, E> StageExt<T> for Result<T, E>
where
    E: std::error::Error + Send + Sync + 'static,
{
    fn stage(self, name: &'static str) -> anyhow::Result<T> {
        anyhow::Context::context(self, Stage(name))
    }
}

/// Turns a command result into an exit code, printing a stage-tagged
/// diagnostic on failure.
pub(crate) fn finish(err: &mut dyn Write, result: anyhow::Result<()>) -> i32 {
    let Err(e) = result else { return EXIT_OK };
    match e.downcast_ref::<Stage>() {
        Some(stage) => {
            let detail: Vec<String> = e.chain().skip(1).map(ToString::to_string).collect();
            let _ = writeln!(err, "error [{stage}]: {}", detail.join(": "));
        }
        None => {
            let _ = writeln!(err, "error: {e:#}");
        }
    }
    EXIT_FAILURE
}

pub(crate) fn default_truth_path(dir: &std::path::Path) -> PathBuf {
    dir.join("ground_truth.csv")
}
