//! Synthetic clips with known sub-pixel motion, and a displacement meter.
//!
//! Frames are rendered analytically as `s(x + δ(t))`, so the only error in a
//! measured displacement is whatever the processing introduced.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use crate::booster::{boost_clip, BoosterParams};
use crate::error::{Error, Result};
use crate::magnify::{filter_gain, MagnifyParams};
use crate::numcore::{Cholesky, Clip, Matrix, Scalar};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Pattern {
    /// `cos(2π(x + δ)/λ) + cos(2πy/λ)`, scaled by half the contrast.
    Plaid,
    /// A Gaussian of standard deviation `λ/4` centred in the frame.
    GaussianBlob,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Motion {
    /// `δ(t) = A·sin(ωt)` for 1-based frame `t`.
    Sine { amplitude: f64, omega: f64 },
    /// `δ(t) = size` from 1-based frame `at` onward, zero before.
    Step { size: f64, at: usize },
}

impl Motion {
    pub fn displacement(&self, frame: usize) -> f64 {
        match *self {
            Motion::Sine { amplitude, omega } => amplitude * (omega * frame as f64).sin(),
            Motion::Step { size, at } => {
                if frame >= at {
                    size
                } else {
                    0.0
                }
            }
        }
    }

    fn peak(&self) -> f64 {
        match *self {
            Motion::Sine { amplitude, .. } => amplitude.abs(),
            Motion::Step { size, .. } => size.abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub pattern: Pattern,
    /// Spatial wavelength in pixels.
    pub wavelength: f64,
    pub motion: Motion,
    /// Pattern amplitude around the 0.5 bias, in `[0, 0.5]`.
    pub contrast: f64,
}

impl SynthSpec {
    pub fn plaid(
        width: usize,
        height: usize,
        frames: usize,
        wavelength: f64,
        motion: Motion,
    ) -> Self {
        Self {
            width,
            height,
            frames,
            pattern: Pattern::Plaid,
            wavelength,
            motion,
            contrast: 0.4,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || self.frames == 0 {
            return Err(Error::Validation(format!(
                "empty clip {}x{} with {} frames",
                self.width, self.height, self.frames
            )));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(Error::Validation(format!(
                "wavelength {} must be positive",
                self.wavelength
            )));
        }
        if !(0.0..=0.5).contains(&self.contrast) {
            return Err(Error::Validation(format!(
                "contrast {} not in [0, 0.5]",
                self.contrast
            )));
        }
        match self.motion {
            Motion::Sine { amplitude, omega } => {
                if !(amplitude.is_finite() && amplitude >= 0.0 && omega.is_finite()) {
                    return Err(Error::Validation(format!(
                        "sine motion needs finite amplitude >= 0 and finite omega, got A = {amplitude}, omega = {omega}"
                    )));
                }
            }
            Motion::Step { size, at } => {
                if !size.is_finite() || at == 0 {
                    return Err(Error::Validation(format!(
                        "step motion needs a finite size and 1-based start frame, got {size} at {at}"
                    )));
                }
            }
        }
        if self.pattern == Pattern::Plaid && self.motion.peak() > self.wavelength / 8.0 {
            return Err(Error::Validation(format!(
                "displacement {} exceeds the first-order regime bound wavelength/8 = {}",
                self.motion.peak(),
                self.wavelength / 8.0
            )));
        }
        Ok(())
    }

    fn intensity(&self, x: f64, y: f64, delta: f64) -> f64 {
        let k = 2.0 * PI / self.wavelength;
        match self.pattern {
            Pattern::Plaid => 0.5 + 0.5 * self.contrast * ((k * (x + delta)).cos() + (k * y).cos()),
            Pattern::GaussianBlob => {
                let sigma = self.wavelength / 4.0;
                let dx = x + delta - (self.width as f64 - 1.0) / 2.0;
                let dy = y - (self.height as f64 - 1.0) / 2.0;
                0.5 + self.contrast * (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp()
            }
        }
    }
}

/// Per-frame displacement the generator applied, in pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruth {
    pub displacement: Vec<f64>,
}

impl GroundTruth {
    /// CSV with header `frame,displacement_px`, frames numbered from 1.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::io("writing ground truth", e.into());
        w.write_record(["frame", "displacement_px"]).map_err(io)?;
        for (t, d) in self.displacement.iter().enumerate() {
            w.write_record([(t + 1).to_string(), format!("{d}")])
                .map_err(io)?;
        }
        w.flush().map_err(|e| Error::io("writing ground truth", e))
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path)
            .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        self.write_csv(std::io::BufWriter::new(f))
    }
}

/// Renders a single-channel clip of `spec` and its ground-truth motion.
pub fn make_clip<S: Scalar>(spec: &SynthSpec) -> Result<(Clip<S>, GroundTruth)> {
    spec.validate()?;
    let displacement: Vec<f64> = (1..=spec.frames)
        .map(|t| spec.motion.displacement(t))
        .collect();
    let w = spec.width;
    let clip = Clip::from_fn(w, spec.height, 1, spec.frames, |p, t| {
        let (x, y) = ((p % w) as f64, (p / w) as f64);
        S::lit(spec.intensity(x, y, displacement[t]))
    })?;
    Ok((clip, GroundTruth { displacement }))
}

/// Estimates the horizontal displacement of every frame relative to
/// `reference_frame` (0-based) from the phase of the spatial fundamental at
/// `wavelength`.
///
/// Each frame is fitted by least squares to `{1, cos kx, sin kx, cos ky,
/// sin ky}`, which spans a plaid exactly, so noise-free plaids are measured
/// to rounding error.
pub fn measure_displacement<S: Scalar>(
    clip: &Clip<S>,
    reference_frame: usize,
    wavelength: f64,
) -> Result<Vec<f64>> {
    if reference_frame >= clip.frames() {
        return Err(Error::Range {
            what: "reference frame",
            detail: format!("{reference_frame} with {} frames", clip.frames()),
        });
    }
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::Validation(format!(
            "wavelength {wavelength} must be positive"
        )));
    }
    let k = 2.0 * PI / wavelength;
    let (w, ch) = (clip.width(), clip.channels());
    let n = clip.width() * clip.height();
    let basis: Vec<[f64; 5]> = (0..n)
        .map(|pix| {
            let (x, y) = ((pix % w) as f64, (pix / w) as f64);
            [
                1.0,
                (k * x).cos(),
                (k * x).sin(),
                (k * y).cos(),
                (k * y).sin(),
            ]
        })
        .collect();
    let gram = Matrix::from_fn(5, 5, |i, j| basis.iter().map(|b| b[i] * b[j]).sum::<f64>());
    let factor = Cholesky::factor(&gram)?;

    // projections of every frame onto the basis, one column per frame
    let frames = clip.frames();
    let mut rhs = vec![0.0; 5 * frames];
    for (pix, b) in basis.iter().enumerate() {
        for t in 0..frames {
            let v = (0..ch)
                .map(|c| clip.get(pix * ch + c, t).to_f64_lossy())
                .sum::<f64>()
                / ch as f64;
            for i in 0..5 {
                rhs[i * frames + t] += b[i] * v;
            }
        }
    }
    let coeffs = factor.solve(&Matrix::from_vec(5, frames, rhs)?)?;

    let mut phases = Vec::with_capacity(frames);
    for t in 0..frames {
        let (a, b) = (coeffs.get(1, t), coeffs.get(2, t));
        let amplitude = a.hypot(b);
        if amplitude < 1e-6 {
            return Err(Error::NoSignal {
                frame: t,
                amplitude,
            });
        }
        // cos(k(x + δ)) = cos kx·cos kδ − sin kx·sin kδ
        phases.push((-b).atan2(a));
    }
    unwrap_phases(&mut phases);
    let reference = phases[reference_frame];
    Ok(phases.into_iter().map(|ph| (ph - reference) / k).collect())
}

fn unwrap_phases(phases: &mut [f64]) {
    for t in 1..phases.len() {
        let mut d = phases[t] - phases[t - 1];
        while d > PI {
            d -= 2.0 * PI;
        }
        while d <= -PI {
            d += 2.0 * PI;
        }
        phases[t] = phases[t - 1] + d;
    }
}

/// Least-squares fit of `c + a·sin(ωt) + b·cos(ωt)` over `series[start..]`,
/// with `t` the 1-based frame number. Returns the amplitude `hypot(a, b)`.
pub fn sinusoid_amplitude(series: &[f64], omega: f64, start: usize) -> Result<f64> {
    let rows: Vec<[f64; 3]> = (start..series.len())
        .map(|i| {
            let t = (i + 1) as f64;
            [1.0, (omega * t).sin(), (omega * t).cos()]
        })
        .collect();
    if rows.len() < 3 {
        return Err(Error::DegenerateLength {
            needed: start + 3,
            got: series.len(),
        });
    }
    let gram = Matrix::from_fn(3, 3, |i, j| rows.iter().map(|r| r[i] * r[j]).sum::<f64>());
    let rhs = Matrix::from_fn(3, 1, |i, _| {
        rows.iter()
            .zip(&series[start..])
            .map(|(r, &y)| r[i] * y)
            .sum::<f64>()
    });
    let c = Cholesky::factor(&gram)?.solve(&rhs)?;
    Ok(c.get(1, 0).hypot(c.get(2, 0)))
}

/// Frames discarded before steady-state measurements: `max(20, 4/w₂)`.
pub fn steady_state_skip(p: &MagnifyParams) -> usize {
    20usize.max((4.0 / p.w2()).ceil() as usize)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmplificationReport {
    /// Steady-state amplitude of the measured output displacement.
    pub measured: f64,
    /// `filter_gain(ω) · A`.
    pub expected: f64,
}

impl AmplificationReport {
    pub fn ratio(&self) -> f64 {
        self.measured / self.expected
    }
}

/// Boosts a sinusoidally moving plaid (single level, `T′ = T`) and compares
/// the output motion amplitude with the filter's steady-state gain.
pub fn measure_amplification(spec: &SynthSpec, p: &MagnifyParams) -> Result<AmplificationReport> {
    let Motion::Sine { amplitude, omega } = spec.motion else {
        return Err(Error::Validation(
            "amplification needs sinusoidal motion".into(),
        ));
    };
    if spec.pattern != Pattern::Plaid {
        return Err(Error::Validation(
            "amplification needs a plaid pattern".into(),
        ));
    }
    let (clip, _) = make_clip::<f64>(spec)?;
    let out = boost_clip(&clip, &BoosterParams::new(*p, spec.frames))?;
    let displacement = measure_displacement(&out, 0, spec.wavelength)?;
    let measured = sinusoid_amplitude(&displacement, omega, steady_state_skip(p))?;
    let expected = filter_gain(p, omega)? * amplitude;
    Ok(AmplificationReport { measured, expected })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_motion_frames_identical() {
        let spec = SynthSpec::plaid(
            16,
            16,
            5,
            16.0,
            Motion::Sine {
                amplitude: 0.0,
                omega: 0.3,
            },
        );
        let (clip, gt) = make_clip::<f64>(&spec).unwrap();
        assert!(gt.displacement.iter().all(|&d| d == 0.0));
        for t in 1..5 {
            assert_eq!(clip.frame(t), clip.frame(0));
        }
    }

    #[test]
    fn step_motion() {
        let spec = SynthSpec::plaid(8, 8, 10, 16.0, Motion::Step { size: 0.25, at: 5 });
        let (_, gt) = make_clip::<f64>(&spec).unwrap();
        assert_eq!(
            gt.displacement,
            vec![0.0, 0.0, 0.0, 0.0, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25]
        );
    }

    #[test]
    fn sine_motion_values() {
        let spec = SynthSpec::plaid(
            8,
            8,
            12,
            16.0,
            Motion::Sine {
                amplitude: 0.1,
                omega: PI / 4.0,
            },
        );
        let (_, gt) = make_clip::<f64>(&spec).unwrap();
        for (i, d) in gt.displacement.iter().enumerate() {
            let t = (i + 1) as f64;
            assert_eq!(*d, 0.1 * (PI / 4.0 * t).sin());
        }
    }

    #[test]
    fn validation() {
        let bad = SynthSpec::plaid(
            8,
            8,
            4,
            16.0,
            Motion::Sine {
                amplitude: 2.5,
                omega: 0.1,
            },
        );
        let err = bad.validate().unwrap_err().to_string();
        assert!(err.contains("first-order regime"), "{err}");
        let mut s = SynthSpec::plaid(
            8,
            8,
            4,
            16.0,
            Motion::Sine {
                amplitude: 0.1,
                omega: 0.1,
            },
        );
        s.contrast = 0.7;
        assert!(s.validate().is_err());
        s.contrast = 0.3;
        s.frames = 0;
        assert!(s.validate().is_err());
        // the bound only applies to plaids
        let mut blob = SynthSpec::plaid(8, 8, 4, 16.0, Motion::Step { size: 3.0, at: 2 });
        blob.pattern = Pattern::GaussianBlob;
        assert!(blob.validate().is_ok());
    }

    #[test]
    fn meter_recovers_ground_truth() {
        let spec = SynthSpec::plaid(
            48,
            40,
            30,
            16.0,
            Motion::Sine {
                amplitude: 0.1,
                omega: PI / 4.0,
            },
        );
        let (clip, gt) = make_clip::<f64>(&spec).unwrap();
        let d = measure_displacement(&clip, 0, 16.0).unwrap();
        for (m, g) in d.iter().zip(&gt.displacement) {
            assert!((m - (g - gt.displacement[0])).abs() < 0.01);
        }
    }

    #[test]
    fn meter_known_shift_and_static() {
        let spec = SynthSpec::plaid(32, 32, 4, 16.0, Motion::Step { size: 1.0, at: 3 });
        let (clip, _) = make_clip::<f64>(&spec).unwrap();
        let d = measure_displacement(&clip, 0, 16.0).unwrap();
        assert!(d[0].abs() < 1e-12 && d[1].abs() < 1e-12);
        assert!((d[2] - 1.0).abs() < 0.01 && (d[3] - 1.0).abs() < 0.01);

        let flat = SynthSpec::plaid(
            32,
            32,
            4,
            16.0,
            Motion::Sine {
                amplitude: 0.0,
                omega: 1.0,
            },
        );
        let (clip, _) = make_clip::<f64>(&flat).unwrap();
        assert!(measure_displacement(&clip, 0, 16.0)
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn meter_no_signal() {
        let c = Clip::constant(32, 32, 1, 3, 0.5).unwrap();
        assert!(matches!(
            measure_displacement(&c, 0, 16.0),
            Err(Error::NoSignal { frame: 0, .. })
        ));
    }

    #[test]
    fn csv_layout() {
        let gt = GroundTruth {
            displacement: vec![0.0, 0.25],
        };
        let mut buf = Vec::new();
        gt.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "frame,displacement_px\n1,0\n2,0.25\n"
        );
    }

    #[test]
    fn skip_window() {
        assert_eq!(steady_state_skip(&MagnifyParams::default()), 80);
        assert_eq!(
            steady_state_skip(&MagnifyParams::new(1.0, 0.9, 0.5).unwrap()),
            20
        );
    }
}
