//! Temporal resampling through latent sine curves.
//!
//! Frame `i` of a `T`-frame clip is placed at normalized time `i/T` on `T − 1`
//! sine curves (the path-graph Laplacian eigenvectors written in sine phase).
//! A clip is fitted as `A·Y + mean` and resampled by evaluating the same
//! curves on a `T′`-point grid. Because the fit is linear in the clip, the
//! whole thing collapses to one `T×T′` matrix that depends only on `T` and
//! `T′`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numcore::{matmul, solve_spd, Clip, Matrix, Scalar};

/// Curve `k` (1-based, `1..T`) of the latent family at normalized time `t`:
/// `sin(πkt + π(T − k)/(2T))`.
pub fn latent_curve(k: usize, t: f64, t_len: usize) -> Result<f64> {
    if k == 0 || k >= t_len {
        return Err(Error::Range {
            what: "curve index",
            detail: format!("k = {k} not in 1..={}", t_len.saturating_sub(1)),
        });
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Range {
            what: "latent time",
            detail: format!("t = {t} not in (0, 1]"),
        });
    }
    let (k, tl) = (k as f64, t_len as f64);
    Ok((PI * k * t + PI * (tl - k) / (2.0 * tl)).sin())
}

/// The `(T − 1)×n` sample matrix of all curves on the grid `j/n`, `j = 1..n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveMatrix {
    t_len: usize,
    n_samples: usize,
    samples: Matrix<f64>,
}

impl CurveMatrix {
    pub fn t_len(&self) -> usize {
        self.t_len
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn matrix(&self) -> &Matrix<f64> {
        &self.samples
    }

    /// `Y·Yᵀ`, which is `(T/2)·I` on the source grid.
    pub fn gram(&self) -> Matrix<f64> {
        matmul(&self.samples, &self.samples.transpose()).expect("conforming by construction")
    }
}

pub fn build_curve_matrix(t_len: usize, n_samples: usize) -> Result<CurveMatrix> {
    if t_len < 2 {
        return Err(Error::DegenerateLength {
            needed: 2,
            got: t_len,
        });
    }
    if n_samples == 0 {
        return Err(Error::Range {
            what: "sample count",
            detail: "need at least one sample".into(),
        });
    }
    let n = n_samples as f64;
    let samples = Matrix::from_fn(t_len - 1, n_samples, |k, j| {
        latent_curve(k + 1, (j + 1) as f64 / n, t_len).expect("indices in range")
    });
    Ok(CurveMatrix {
        t_len,
        n_samples,
        samples,
    })
}

/// `W^I = (I − 𝟏/T)·Yᵀ(YYᵀ)⁻¹Y′ + 𝟏/T` with `Y` on the `T`-point grid and
/// `Y′` on the `T′`-point grid.
pub fn build_interpolation_matrix(t_len: usize, out_len: usize) -> Result<Matrix<f64>> {
    if out_len == 0 {
        return Err(Error::Range {
            what: "output length",
            detail: "need at least one output frame".into(),
        });
    }
    let y = build_curve_matrix(t_len, t_len)?;
    let y_out = build_curve_matrix(t_len, out_len)?;
    let inv_t = 1.0 / t_len as f64;
    let coeffs = solve_spd(&y.gram(), y_out.matrix())?;
    let projected = matmul(&y.matrix().transpose(), &coeffs)?;
    let centering = Matrix::identity(t_len).sub(&Matrix::filled(t_len, t_len, inv_t))?;
    matmul(&centering, &projected)?.add(&Matrix::filled(t_len, out_len, inv_t))
}

/// Least-squares reference for [`build_interpolation_matrix`]: fits the
/// curve coefficients of every sample's centered time series through the
/// normal equations, then resamples.
pub fn oracle_interpolate<S: Scalar>(clip: &Clip<S>, out_len: usize) -> Result<Clip<S>> {
    let t_len = clip.frames();
    if t_len < 2 {
        return Err(Error::DegenerateLength {
            needed: 2,
            got: t_len,
        });
    }
    let y = build_curve_matrix(t_len, t_len)?.matrix().cast::<S>();
    let y_out = build_curve_matrix(t_len, out_len)?.matrix().cast::<S>();
    let d = clip.pixel_count();
    let inv_t = S::lit(1.0 / t_len as f64);

    let means: Vec<S> = (0..d)
        .map(|p| clip.series(p).iter().copied().sum::<S>() * inv_t)
        .collect();
    let mut centered = clip.values().to_vec();
    for (series, &m) in centered.chunks_mut(t_len).zip(&means) {
        series.iter_mut().for_each(|v| *v = *v - m);
    }
    let centered = Matrix::from_vec(d, t_len, centered)?;

    // (Y Yᵀ) Aᵀ = Y (V − mean)ᵀ
    let gram = matmul(&y, &y.transpose())?;
    let rhs = matmul(&y, &centered.transpose())?;
    let coeffs = solve_spd(&gram, &rhs)?.transpose();
    let fitted = matmul(&coeffs, &y_out)?;

    let mut out = fitted.into_vec();
    for (series, &m) in out.chunks_mut(out_len).zip(&means) {
        series.iter_mut().for_each(|v| *v = *v + m);
    }
    clip.with_values(out_len, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn curve_values() {
        assert!((latent_curve(1, 0.5, 2).unwrap() - H).abs() < 1e-15);
        assert!((latent_curve(1, 1.0, 2).unwrap() + H).abs() < 1e-15);
        assert!(latent_curve(0, 0.5, 4).is_err());
        assert!(latent_curve(4, 0.5, 4).is_err());
        assert!(latent_curve(1, 0.0, 4).is_err());
        assert!(latent_curve(1, 1.5, 4).is_err());
    }

    #[test]
    fn curve_matrix_small() {
        let y = build_curve_matrix(2, 2).unwrap();
        assert_eq!(y.matrix().shape(), (1, 2));
        assert!((y.matrix().get(0, 0) - H).abs() < 1e-15);
        assert!((y.matrix().get(0, 1) + H).abs() < 1e-15);

        let g = build_curve_matrix(3, 3).unwrap().gram();
        assert!(g.max_abs_diff(&Matrix::identity(2).scale(1.5)) < 1e-12);

        let single = build_curve_matrix(5, 1).unwrap();
        assert_eq!(single.matrix().shape(), (4, 1));
        for k in 0..4 {
            assert_eq!(
                single.matrix().get(k, 0),
                latent_curve(k + 1, 1.0, 5).unwrap()
            );
        }
        assert!(matches!(
            build_curve_matrix(1, 3),
            Err(Error::DegenerateLength { .. })
        ));
    }

    #[test]
    fn rows_are_zero_mean() {
        for t in [2, 3, 10, 37] {
            let y = build_curve_matrix(t, t).unwrap();
            for k in 0..t - 1 {
                let s: f64 = y.matrix().row(k).iter().sum();
                assert!(s.abs() < 1e-9, "T={t} k={k}: {s}");
            }
        }
    }

    #[test]
    fn hand_evaluated_two_to_three() {
        let w = build_interpolation_matrix(2, 3).unwrap();
        let s7 = (7.0 * PI / 12.0).sin();
        let s11 = (11.0 * PI / 12.0).sin();
        // (I − 𝟏/2)Yᵀ = [H, −H]ᵀ and YYᵀ = 1
        let expected = Matrix::from_rows(&[
            vec![H * s7 + 0.5, H * s11 + 0.5, -0.5 + 0.5],
            vec![-H * s7 + 0.5, -H * s11 + 0.5, 0.5 + 0.5],
        ])
        .unwrap();
        assert!(w.max_abs_diff(&expected) < 1e-12);
        let rounded =
            Matrix::from_rows(&[vec![1.18301, 0.68301, 0.0], vec![-0.18301, 0.31699, 1.0]])
                .unwrap();
        assert!(w.max_abs_diff(&rounded) < 1e-5);
    }

    #[test]
    fn same_length_is_identity() {
        for t in 2..=64 {
            let w = build_interpolation_matrix(t, t).unwrap();
            assert!(w.max_abs_diff(&Matrix::identity(t)) < 1e-9, "T = {t}");
        }
    }

    #[test]
    fn rejects_degenerate() {
        assert!(matches!(
            build_interpolation_matrix(1, 4),
            Err(Error::DegenerateLength { needed: 2, got: 1 })
        ));
        assert!(build_interpolation_matrix(4, 0).is_err());
        let one = Clip::constant(2, 2, 1, 1, 0.5).unwrap();
        assert!(matches!(
            oracle_interpolate(&one, 3),
            Err(Error::DegenerateLength { .. })
        ));
    }

    #[test]
    fn oracle_constant_and_identity() {
        let c = Clip::<f64>::constant(3, 3, 1, 6, 0.25).unwrap();
        for out_len in [1, 4, 6, 13] {
            let o = oracle_interpolate(&c, out_len).unwrap();
            assert_eq!(o.frames(), out_len);
            assert!(o.values().iter().all(|v| (v - 0.25).abs() < 1e-12));
        }
        let v = Clip::from_fn(4, 2, 1, 9, |p, t| ((p * 5 + t * t) % 13) as f64 / 13.0).unwrap();
        let o = oracle_interpolate(&v, 9).unwrap();
        assert!(o.max_abs_diff(&v) < 1e-6);
    }

    #[test]
    fn oracle_matches_matrix_path() {
        let v = Clip::from_fn(4, 4, 1, 5, |p, t| ((p * 31 + t * 17) % 23) as f64 / 23.0).unwrap();
        let w = build_interpolation_matrix(5, 9).unwrap();
        let direct = matmul(&v.to_matrix(), &w).unwrap();
        let o = oracle_interpolate(&v, 9).unwrap();
        assert!(o.to_matrix().max_abs_diff(&direct) < 1e-8);
    }
}
