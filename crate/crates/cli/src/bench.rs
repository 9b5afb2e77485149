//! Fused-versus-separate timing harness.
//!
//! The fused path builds `W` once and applies it; the separate path runs the
//! recursive magnification and then the least-squares interpolation, like a
//! two-module pipeline would. Each case reports the median of `reps` timed
//! runs after one warm-up.

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::Args;
use magboost::booster::{apply_operator, OperatorCache};
use magboost::interpolate::oracle_interpolate;
use magboost::magnify::oracle_magnify;
use magboost::numcore::Clip;
use magboost::synthlab::{make_clip, Motion, SynthSpec};
use magboost::MagnifyParams;

use crate::{finish, MagnifyArgs, StageExt};

/// Fewer repetitions than this are flagged as low confidence.
pub const MIN_CONFIDENT_REPS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BenchCase {
    pub width: usize,
    pub height: usize,
    pub t_in: usize,
    pub t_out: usize,
}

impl Default for BenchCase {
    fn default() -> Self {
        Self {
            width: 170,
            height: 140,
            t_in: 100,
            t_out: 10,
        }
    }
}

impl FromStr for BenchCase {
    type Err = String;

    /// `WxHxTxT'`, e.g. `170x140x100x10`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<usize> = s
            .split('x')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("bad case {s:?}: {e}"))?;
        match parts[..] {
            [width, height, t_in, t_out] if width > 0 && height > 0 && t_in >= 2 && t_out >= 1 => {
                Ok(Self {
                    width,
                    height,
                    t_in,
                    t_out,
                })
            }
            _ => Err(format!("case {s:?} must be WxHxTxT' with T >= 2")),
        }
    }
}

impl std::fmt::Display for BenchCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}x{}x{}x{}",
            self.width, self.height, self.t_in, self.t_out
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pipeline {
    Fused,
    Separate,
}

impl Pipeline {
    fn as_str(self) -> &'static str {
        match self {
            Pipeline::Fused => "fused",
            Pipeline::Separate => "separate",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub case: BenchCase,
    pub pipeline: Pipeline,
    pub reps: usize,
    pub median_s: f64,
    /// separate median / fused median for this case.
    pub speedup: f64,
    pub low_confidence: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// CSV with columns `case,w,h,t_in,t_out,pipeline,reps,median_s,speedup`.
    /// Low-confidence rows carry a `(low-confidence)` suffix on the case name.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "case", "w", "h", "t_in", "t_out", "pipeline", "reps", "median_s", "speedup",
        ])?;
        for r in &self.rows {
            let case = if r.low_confidence {
                format!("{} (low-confidence)", r.case)
            } else {
                r.case.to_string()
            };
            w.write_record([
                case,
                r.case.width.to_string(),
                r.case.height.to_string(),
                r.case.t_in.to_string(),
                r.case.t_out.to_string(),
                r.pipeline.as_str().to_string(),
                r.reps.to_string(),
                format!("{:.6e}", r.median_s),
                format!("{:.3}", r.speedup),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

fn time_reps(reps: usize, mut f: impl FnMut()) -> f64 {
    f();
    let times = (0..reps)
        .map(|_| {
            let start = Instant::now();
            f();
            // clocks can report zero for trivial work
            start.elapsed().as_secs_f64().max(1e-9)
        })
        .collect();
    median(times)
}

/// Grayscale moving plaid used as the benchmark input.
pub fn bench_clip(case: &BenchCase) -> Clip<f64> {
    let spec = SynthSpec::plaid(
        case.width,
        case.height,
        case.t_in,
        16.0,
        Motion::Sine {
            amplitude: 0.1,
            omega: std::f64::consts::PI / 4.0,
        },
    );
    make_clip(&spec).expect("bench spec is valid").0
}

pub fn bench_case(
    case: &BenchCase,
    p: &MagnifyParams,
    reps: usize,
) -> magboost::Result<[BenchRow; 2]> {
    let reps = reps.max(1);
    let clip = bench_clip(case);
    // surface any error before timing
    let cache = OperatorCache::new();
    apply_operator(&clip, &*cache.fused(p, case.t_in, case.t_out)?)?;
    oracle_interpolate(&oracle_magnify(&clip, p)?, case.t_out)?;

    let fused = time_reps(reps, || {
        let cache = OperatorCache::new();
        let w = cache
            .fused(p, case.t_in, case.t_out)
            .expect("checked above");
        std::hint::black_box(apply_operator(&clip, &w).expect("checked above"));
    });
    let separate = time_reps(reps, || {
        let m = oracle_magnify(&clip, p).expect("checked above");
        std::hint::black_box(oracle_interpolate(&m, case.t_out).expect("checked above"));
    });
    let speedup = separate / fused;
    let low_confidence = reps < MIN_CONFIDENT_REPS;
    let row = |pipeline, median_s| BenchRow {
        case: *case,
        pipeline,
        reps,
        median_s,
        speedup,
        low_confidence,
    };
    Ok([
        row(Pipeline::Fused, fused),
        row(Pipeline::Separate, separate),
    ])
}

pub fn run_bench(
    cases: &[BenchCase],
    p: &MagnifyParams,
    reps: usize,
) -> magboost::Result<BenchReport> {
    let mut report = BenchReport::default();
    for c in cases {
        report.rows.extend(bench_case(c, p, reps)?);
    }
    Ok(report)
}

#[derive(Clone, Debug, Args)]
pub struct BenchArgs {
    /// Case as WxHxTxT'; repeat for several. Defaults to 170x140x100x10.
    #[arg(long = "case")]
    pub cases: Vec<BenchCase>,
    /// Timed repetitions per pipeline (after one warm-up).
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    #[command(flatten)]
    pub magnify: MagnifyArgs,
    /// Write the CSV report here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = execute(a, out, err);
    finish(err, result)
}

fn execute(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let p = a.magnify.params().stage("params")?;
    let cases = if a.cases.is_empty() {
        vec![BenchCase::default()]
    } else {
        a.cases.clone()
    };
    let report = run_bench(&cases, &p, a.reps).stage("bench")?;
    if a.reps < MIN_CONFIDENT_REPS {
        writeln!(
            err,
            "warning: {} repetition(s) per pipeline; rows are marked low-confidence",
            a.reps
        )?;
    }
    match &a.output {
        Some(path) => {
            let file = std::fs::File::create(path).stage("write")?;
            report.write_csv(file).stage("write")?;
        }
        None => report.write_csv(&mut *out).stage("write")?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cases() {
        assert_eq!(
            "170x140x100x10".parse::<BenchCase>().unwrap(),
            BenchCase::default()
        );
        assert!("1x1x1x3".parse::<BenchCase>().is_err());
        assert!("1x1x3".parse::<BenchCase>().is_err());
        assert!("axbxcxd".parse::<BenchCase>().is_err());
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn trivial_case_has_positive_times() {
        let case: BenchCase = "1x1x3x10".parse().unwrap();
        let rows = bench_case(&case, &MagnifyParams::default(), 1).unwrap();
        for r in &rows {
            assert!(r.median_s > 0.0 && r.speedup > 0.0);
            assert!(r.low_confidence);
            assert_eq!(r.reps, 1);
        }
        let mut buf = Vec::new();
        BenchReport {
            rows: rows.to_vec(),
        }
        .write_csv(&mut buf)
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("case,w,h,t_in,t_out,pipeline,reps,median_s,speedup")
        );
        assert!(lines
            .next()
            .unwrap()
            .starts_with("1x1x3x10 (low-confidence),1,1,3,10,fused,1,"));
    }
}
