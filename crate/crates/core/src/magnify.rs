//! Eulerian magnification as an upper-triangular `T×T` matrix.
//!
//! Two recursive smoothers `L_k(t) = w_k·I(t) + (1 − w_k)·L_k(t − 1)`, both
//! seeded with the first frame, track the signal at different rates. Their
//! difference `B(t) = L₁(t) − L₂(t)` is the band of recent motion, and each
//! output frame is `I(t) + α·B(t)`. Expanding the recursion gives the
//! coefficient of every input frame in every output frame, which is what
//! [`build_magnification_matrix`] writes out. [`oracle_magnify`] runs the
//! recursion directly and is kept as the reference path.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numcore::{Clip, Matrix, Scalar};

/// Magnification factor and the weights of the two recursive smoothers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagnifyParams {
    alpha: f64,
    w1: f64,
    w2: f64,
}

impl MagnifyParams {
    /// Requires `0 < w2 < w1 < 1` and a finite `alpha ≥ 0`.
    pub fn new(alpha: f64, w1: f64, w2: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        if !(0.0 < w2 && w2 < w1 && w1 < 1.0) {
            return Err(Error::InvalidParams(format!(
                "smoother weights need 0 < w2 < w1 < 1, got w1 = {w1}, w2 = {w2}"
            )));
        }
        Ok(Self { alpha, w1, w2 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn w2(&self) -> f64 {
        self.w2
    }

    /// Same smoothers, different magnification.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(alpha, self.w1, self.w2)
    }
}

impl Default for MagnifyParams {
    fn default() -> Self {
        Self {
            alpha: 16.0,
            w1: 0.4,
            w2: 0.05,
        }
    }
}

/// Builds `W^M` so that `clip · W^M` is the magnified clip.
///
/// With 1-based indices, entry `(i, j)` is zero below the diagonal, `1` at
/// `(1, 1)`, `α(w₁ − w₂) + 1` on the rest of the diagonal, and
/// `α(1 − w₁)^a·w₁^b − α(1 − w₂)^a·w₂^b` above it, where `a = j − i` and
/// `b = min(1, i − 1)`. The first output frame has no history, so its column
/// is `e₁`.
pub fn build_magnification_matrix(p: &MagnifyParams, t_len: usize) -> Result<Matrix<f64>> {
    if t_len == 0 {
        return Err(Error::EmptyClip);
    }
    let MagnifyParams { alpha, w1, w2 } = *p;
    // powers of the decay factors, indexed by column offset a = j − i
    let mut decay1 = Vec::with_capacity(t_len);
    let mut decay2 = Vec::with_capacity(t_len);
    let (mut d1, mut d2) = (1.0, 1.0);
    for _ in 0..t_len {
        decay1.push(d1);
        decay2.push(d2);
        d1 *= 1.0 - w1;
        d2 *= 1.0 - w2;
    }
    let diag = alpha * (w1 - w2) + 1.0;
    Ok(Matrix::from_fn(t_len, t_len, |i, j| {
        if j < i {
            0.0
        } else if j == i {
            if i == 0 {
                1.0
            } else {
                diag
            }
        } else {
            let a = j - i;
            // the first frame seeds both smoothers with weight 1 instead of w_k
            let (g1, g2) = if i == 0 { (1.0, 1.0) } else { (w1, w2) };
            alpha * (decay1[a] * g1) - alpha * (decay2[a] * g2)
        }
    }))
}

/// Runs the two-smoother recursion on every sample's time series.
pub fn oracle_magnify<S: Scalar>(clip: &Clip<S>, p: &MagnifyParams) -> Result<Clip<S>> {
    let t_len = clip.frames();
    if t_len == 0 || clip.pixel_count() == 0 {
        return Err(Error::EmptyClip);
    }
    let alpha = S::lit(p.alpha);
    let (w1, w2) = (S::lit(p.w1), S::lit(p.w2));
    let (k1, k2) = (S::one() - w1, S::one() - w2);
    let mut out = vec![S::zero(); clip.values().len()];
    out.par_chunks_mut(t_len)
        .zip(clip.values().par_chunks(t_len))
        .for_each(|(o, series)| {
            let (mut l1, mut l2) = (series[0], series[0]);
            o[0] = series[0];
            for t in 1..t_len {
                let x = series[t];
                l1 = w1 * x + k1 * l1;
                l2 = w2 * x + k2 * l2;
                o[t] = x + alpha * (l1 - l2);
            }
        });
    clip.with_values(t_len, out)
}

/// Steady-state amplitude gain `|1 + α(H₁(ω) − H₂(ω))|` for a temporal
/// sinusoid of `omega` radians per frame, where
/// `H_k(ω) = w_k / (1 − (1 − w_k)e^{−iω})`.
pub fn filter_gain(p: &MagnifyParams, omega: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&omega) {
        return Err(Error::Range {
            what: "omega",
            detail: format!("{omega} not in [0, pi]"),
        });
    }
    let smoother = |w: f64| -> (f64, f64) {
        // w / (1 − (1−w)cos ω + i(1−w)sin ω); real part kept exact at ω = 0
        let re = w + (1.0 - w) * (1.0 - omega.cos());
        let im = (1.0 - w) * omega.sin();
        let n = re * re + im * im;
        (w * re / n, -w * im / n)
    };
    let (r1, i1) = smoother(p.w1);
    let (r2, i2) = smoother(p.w2);
    let re = 1.0 + p.alpha * (r1 - r2);
    let im = p.alpha * (i1 - i2);
    Ok(re.hypot(im))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64, w1: f64, w2: f64) -> MagnifyParams {
        MagnifyParams::new(alpha, w1, w2).unwrap()
    }

    #[test]
    fn zero_alpha_is_identity() {
        let m = build_magnification_matrix(&params(0.0, 0.4, 0.05), 5).unwrap();
        assert_eq!(m, Matrix::identity(5));
    }

    #[test]
    fn hand_expanded_three_frames() {
        let m = build_magnification_matrix(&params(1.0, 0.5, 0.25), 3).unwrap();
        let expected = Matrix::from_rows(&[
            vec![1.0, -0.25, -0.3125],
            vec![0.0, 1.25, 0.0625],
            vec![0.0, 0.0, 1.25],
        ])
        .unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn coinciding_smoothers_approach_identity() {
        let m = build_magnification_matrix(&params(16.0, 0.4 + 1e-8, 0.4), 20).unwrap();
        assert!(m.max_abs_diff(&Matrix::identity(20)) < 1e-6);
    }

    #[test]
    fn columns_sum_to_one() {
        let m = build_magnification_matrix(&params(32.0, 0.9, 0.01), 60).unwrap();
        for s in m.column_sums() {
            assert!((s - 1.0).abs() <= 1e-12, "{s}");
        }
    }

    #[test]
    fn empty_length_rejected() {
        assert!(matches!(
            build_magnification_matrix(&MagnifyParams::default(), 0),
            Err(Error::EmptyClip)
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(MagnifyParams::new(1.0, 0.3, 0.3).is_err());
        assert!(MagnifyParams::new(1.0, 0.2, 0.3).is_err());
        assert!(MagnifyParams::new(1.0, 1.0, 0.3).is_err());
        assert!(MagnifyParams::new(1.0, 0.3, 0.0).is_err());
        assert!(MagnifyParams::new(-1.0, 0.4, 0.05).is_err());
        assert!(MagnifyParams::new(f64::INFINITY, 0.4, 0.05).is_err());
    }

    #[test]
    fn oracle_hand_run() {
        let clip = Clip::new(1, 1, 1, 3, vec![0.0, 1.0, 1.0]).unwrap();
        let out = oracle_magnify(&clip, &params(1.0, 0.5, 0.25)).unwrap();
        assert_eq!(out.values(), &[0.0, 1.25, 1.3125]);
    }

    #[test]
    fn oracle_constant_and_zero_alpha() {
        let c = Clip::constant(3, 2, 1, 7, 0.37).unwrap();
        let out = oracle_magnify(&c, &MagnifyParams::default()).unwrap();
        assert!(out.max_abs_diff(&c) <= 1e-15);

        let v = Clip::from_fn(2, 2, 3, 6, |p, t| ((p * 7 + t * 3) % 11) as f64 / 11.0).unwrap();
        let out = oracle_magnify(&v, &params(0.0, 0.4, 0.05)).unwrap();
        assert_eq!(out, v);
    }

    #[test]
    fn gain_examples() {
        let p = MagnifyParams::default();
        assert_eq!(filter_gain(&p, 0.0).unwrap(), 1.0);
        let expected = 1.0 + 16.0 * (0.4 / 1.6 - 0.05 / 1.95);
        assert!((filter_gain(&p, PI).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 4.590).abs() < 1e-3);
        assert_eq!(filter_gain(&params(0.0, 0.4, 0.05), 1.3).unwrap(), 1.0);
        assert!(filter_gain(&p, -0.1).is_err());
        assert!(filter_gain(&p, 3.2).is_err());
    }

    #[test]
    fn gain_matches_simulated_sinusoid() {
        let p = MagnifyParams::default();
        for &omega in &[0.05, PI / 8.0, PI / 4.0, 1.0, 2.5] {
            let n = 1200;
            let clip = Clip::from_fn(1, 1, 1, n, |_, t| (omega * t as f64).sin()).unwrap();
            let out = oracle_magnify(&clip, &p).unwrap();
            // least-squares amplitude over the steady-state window
            let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for t in 200..n {
                let (s, c) = (omega * t as f64).sin_cos();
                let y = out.get(0, t);
                ss += s * s;
                sc += s * c;
                cc += c * c;
                ys += y * s;
                yc += y * c;
            }
            let det = ss * cc - sc * sc;
            let a = (ys * cc - yc * sc) / det;
            let b = (yc * ss - ys * sc) / det;
            let measured = a.hypot(b);
            let g = filter_gain(&p, omega).unwrap();
            assert!(
                (measured / g - 1.0).abs() < 0.01,
                "omega {omega}: {measured} vs {g}"
            );
        }
    }
}
