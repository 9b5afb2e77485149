use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Subcommand};
use magboost::booster::OperatorMatrix;
use magboost::clipio::{read_lut, write_lut, LUT_VERSION};

use anyhow::Context;

use crate::{finish, MagnifyArgs, Stage, StageExt};

#[derive(Clone, Debug, Subcommand)]
pub enum LutCommand {
    /// Build the fused operator for the given lengths and parameters.
    Build(BuildArgs),
    /// Print the header and column sums of an operator file.
    Dump { path: PathBuf },
}

#[derive(Clone, Debug, Args)]
pub struct BuildArgs {
    /// Input frame count.
    #[arg(long)]
    pub t_in: usize,
    /// Output frame count.
    #[arg(long, default_value_t = 10)]
    pub t_out: usize,
    #[command(flatten)]
    pub magnify: MagnifyArgs,
    /// Destination file.
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(c: &LutCommand, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    finish(err, execute(c, out))
}

fn execute(c: &LutCommand, out: &mut dyn Write) -> anyhow::Result<()> {
    match c {
        LutCommand::Build(a) => {
            let p = a.magnify.params().stage("params")?;
            let w = OperatorMatrix::fused(&p, a.t_in, a.t_out).stage("build")?;
            write_lut(&w, &a.output).stage("write")?;
            writeln!(
                out,
                "wrote {}x{} fused operator to {}",
                a.t_in,
                a.t_out,
                a.output.display()
            )?;
        }
        LutCommand::Dump { path } => {
            let w = read_lut(path)
                .with_context(|| format!("cannot read MEBW operator file {}", path.display()))
                .context(Stage("read"))?;
            writeln!(out, "magic: MEBW")?;
            writeln!(out, "version: {LUT_VERSION}")?;
            writeln!(out, "role: {}", w.role())?;
            writeln!(out, "t_in: {}", w.t_in())?;
            writeln!(out, "t_out: {}", w.t_out())?;
            if let Some(p) = w.magnify_params() {
                writeln!(out, "alpha: {}", p.alpha())?;
                writeln!(out, "w1: {}", p.w1())?;
                writeln!(out, "w2: {}", p.w2())?;
            }
            writeln!(out, "column sums:")?;
            for (j, s) in w.matrix().column_sums().iter().enumerate() {
                writeln!(out, "  {:>4}: {s:.9}", j + 1)?;
            }
        }
    }
    Ok(())
}
