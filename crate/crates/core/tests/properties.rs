//! Invariants of the kernels and operators over randomized inputs.

use magboost::booster::{apply_operator, fuse, OperatorMatrix};
use magboost::interpolate::{build_curve_matrix, build_interpolation_matrix, oracle_interpolate};
use magboost::magnify::{build_magnification_matrix, oracle_magnify, MagnifyParams};
use magboost::numcore::{matmul, solve_spd, Clip, Matrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit() -> impl Strategy<Value = f64> {
    (-1000i32..=1000).prop_map(|x| f64::from(x) / 1000.0)
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<f64>> {
    prop::collection::vec(unit(), rows * cols)
        .prop_map(move |v| Matrix::from_vec(rows, cols, v).unwrap())
}

fn params() -> impl Strategy<Value = MagnifyParams> {
    (0.0..32.0f64, 0.02..0.98f64, 0.01..0.99f64).prop_filter_map("w2 < w1", |(a, w1, frac)| {
        MagnifyParams::new(a, w1, w1 * frac).ok()
    })
}

fn clip(d: usize, frames: usize) -> impl Strategy<Value = Clip<f64>> {
    prop::collection::vec(0.0..1.0f64, d * frames)
        .prop_map(move |v| Clip::new(d, 1, 1, frames, v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_associative(
        (a, b, c) in (1usize..8, 1usize..8, 1usize..8, 1usize..8)
            .prop_flat_map(|(m, k, n, q)| (matrix(m, k), matrix(k, n), matrix(n, q)))
    ) {
        let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
        let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
        let scale = left.max_abs().max(1.0);
        prop_assert!(left.max_abs_diff(&right) <= 1e-10 * scale);
    }

    #[test]
    fn identity_product_is_bit_exact(a in (1usize..10, 1usize..10).prop_flat_map(|(r, c)| matrix(r, c))) {
        prop_assert_eq!(matmul(&Matrix::identity(a.rows()), &a).unwrap(), a.clone());
        prop_assert_eq!(matmul(&a, &Matrix::identity(a.cols())).unwrap(), a);
    }

    #[test]
    fn magnification_structure(p in params(), t in 1usize..50) {
        let m = build_magnification_matrix(&p, t).unwrap();
        for i in 0..t {
            for j in 0..i {
                prop_assert_eq!(m.get(i, j).to_bits(), 0.0f64.to_bits());
            }
            prop_assert_eq!(m.get(i, 0), if i == 0 { 1.0 } else { 0.0 });
        }
        for s in m.column_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn magnification_matches_recursion(
        (p, v) in (params(), 1usize..64, 1usize..40).prop_flat_map(|(p, d, t)| (Just(p), clip(d, t)))
    ) {
        let w = OperatorMatrix::magnification(&p, v.frames()).unwrap();
        let fused = apply_operator(&v, &w).unwrap();
        let oracle = oracle_magnify(&v, &p).unwrap();
        prop_assert!(fused.max_abs_diff(&oracle) <= 1e-9);
        for s in 0..v.pixel_count() {
            prop_assert_eq!(fused.get(s, 0), v.get(s, 0));
        }
    }

    #[test]
    fn interpolation_structure(t in 2usize..40, t_out in 1usize..40) {
        let w = build_interpolation_matrix(t, t_out).unwrap();
        for s in w.column_sums() {
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }
        for i in 0..t {
            let e = if i + 1 == t { 1.0 } else { 0.0 };
            prop_assert!((w.get(i, t_out - 1) - e).abs() <= 1e-9);
        }
    }

    #[test]
    fn interpolation_matches_least_squares(
        (v, t_out) in (1usize..64, 2usize..40, 1usize..40).prop_flat_map(|(d, t, o)| (clip(d, t), Just(o)))
    ) {
        let w = OperatorMatrix::interpolation(v.frames(), t_out).unwrap();
        let direct = apply_operator(&v, &w).unwrap();
        let oracle = oracle_interpolate(&v, t_out).unwrap();
        prop_assert!(direct.max_abs_diff(&oracle) <= 1e-8);
    }

    #[test]
    fn fused_is_associative_on_clips(
        (p, v, t_out) in (params(), 1usize..32, 2usize..30, 1usize..30)
            .prop_flat_map(|(p, d, t, o)| (Just(p), clip(d, t), Just(o)))
    ) {
        let wm = OperatorMatrix::magnification(&p, v.frames()).unwrap();
        let wi = OperatorMatrix::interpolation(v.frames(), t_out).unwrap();
        let staged = apply_operator(&apply_operator(&v, &wm).unwrap(), &wi).unwrap();
        let fused = apply_operator(&v, &fuse(&wm, &wi).unwrap()).unwrap();
        prop_assert!(staged.max_abs_diff(&fused) <= 1e-9);
    }
}

#[test]
fn spd_solve_residual_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=64);
        let m = rng.gen_range(1..=4);
        let g = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        // G·Gᵀ + n·I is comfortably positive definite
        let gg = matmul(&g, &g.transpose()).unwrap();
        let a = Matrix::from_fn(n, n, |i, j| {
            let s = 0.5 * (gg.get(i, j) + gg.get(j, i));
            if i == j {
                s + n as f64
            } else {
                s
            }
        });
        let b = Matrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
        let x = solve_spd(&a, &b).unwrap();
        let r = matmul(&a, &x).unwrap().max_abs_diff(&b);
        assert!(r <= 1e-9 * b.max_abs(), "n = {n}: residual {r}");
    }
}

#[test]
fn curve_gram_is_scaled_identity() {
    for t in 2..=256 {
        let g = build_curve_matrix(t, t).unwrap().gram();
        let expected = Matrix::identity(t - 1).scale(t as f64 / 2.0);
        assert!(g.max_abs_diff(&expected) <= 1e-9, "T = {t}");
    }
}

#[test]
fn single_precision_pipeline_tracks_double() {
    let p = MagnifyParams::default();
    let v = Clip::<f64>::from_fn(4, 4, 1, 12, |s, t| {
        0.5 + 0.2 * ((s + 3 * t) as f64 * 0.3).sin()
    })
    .unwrap();
    let w = OperatorMatrix::fused(&p, 12, 7).unwrap();
    let out64 = apply_operator(&v, &w).unwrap();
    let out32 = apply_operator(&v.cast::<f32>(), &w.cast::<f32>()).unwrap();
    assert!(out32.cast::<f64>().max_abs_diff(&out64) < 1e-4);
}
