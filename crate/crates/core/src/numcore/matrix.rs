use rayon::prelude::*;

use super::Scalar;
use crate::error::{Error, Result};

/// Work size (multiply-adds) above which kernels split output rows across workers.
const PAR_THRESHOLD: usize = 1 << 16;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        check_finite(&data)?;
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    /// Builds a matrix from an entry function. Panics on a zero dimension.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix {rows}x{cols}");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| S::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { S::one() } else { S::zero() })
    }

    /// Matrix with every entry equal to `value`.
    pub fn filled(rows: usize, cols: usize, value: S) -> Self {
        Self::from_fn(rows, cols, |_, _| value)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<S> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&self, k: S) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "cannot add {:?} and {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let data: Vec<S> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| a + b)
            .collect();
        check_finite(&data)?;
        Ok(Self { data, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-S::one()))
    }

    /// Column sums, each accumulated top to bottom.
    pub fn column_sums(&self) -> Vec<S> {
        let mut sums = vec![S::zero(); self.cols];
        for i in 0..self.rows {
            for (s, &x) in sums.iter_mut().zip(self.row(i)) {
                *s = *s + x;
            }
        }
        sums
    }

    pub fn max_abs(&self) -> S {
        self.data.iter().fold(S::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn cast<T: Scalar>(&self) -> Matrix<T> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|&x| T::from_f64(x.to_f64_lossy()).unwrap_or_else(T::nan))
                .collect(),
        }
    }
}

fn check_finite<S: Scalar>(data: &[S]) -> Result<()> {
    match data.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Row-times-matrix product `out = lhs · rhs` for one output row.
///
/// Each output entry is summed over ascending `p`, starting from the `p = 0`
/// product, so the result does not depend on how rows are distributed.
#[inline]
pub(crate) fn row_times<S: Scalar>(lhs: &[S], rhs: &[S], rhs_cols: usize, out: &mut [S]) {
    debug_assert_eq!(out.len(), rhs_cols);
    let first = lhs[0];
    for (o, &b) in out.iter_mut().zip(&rhs[..rhs_cols]) {
        *o = first * b;
    }
    for (p, &a) in lhs.iter().enumerate().skip(1) {
        let brow = &rhs[p * rhs_cols..(p + 1) * rhs_cols];
        for (o, &b) in out.iter_mut().zip(brow) {
            *o = *o + a * b;
        }
    }
}

/// Multiplies a row-major `m×k` block by a `k×n` matrix into `out` (`m×n`).
pub(crate) fn gemm_rows<S: Scalar>(lhs: &[S], k: usize, rhs: &[S], n: usize, out: &mut [S]) {
    let work = lhs.len() * n;
    if work >= PAR_THRESHOLD {
        out.par_chunks_mut(n)
            .zip(lhs.par_chunks(k))
            .for_each(|(o, a)| row_times(a, rhs, n, o));
    } else {
        for (o, a) in out.chunks_mut(n).zip(lhs.chunks(k)) {
            row_times(a, rhs, n, o);
        }
    }
}

pub fn matmul<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut data = vec![S::zero(); a.rows * b.cols];
    gemm_rows(&a.data, a.cols, &b.data, b.cols, &mut data);
    check_finite(&data)?;
    Ok(Matrix {
        rows: a.rows,
        cols: b.cols,
        data,
    })
}

/// Lower-triangular factor `L` with `a = L·Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<S> {
    n: usize,
    lower: Vec<S>,
}

impl<S: Scalar> Cholesky<S> {
    pub fn factor(a: &Matrix<S>) -> Result<Self> {
        let n = a.rows;
        if a.cols != n {
            return Err(Error::Shape(format!(
                "SPD solve needs a square matrix, got {}x{}",
                a.rows, a.cols
            )));
        }
        let scale = a.max_abs();
        let tol = S::tol(1e-12, 4096.0) * scale;
        let mut asym = S::zero();
        for i in 0..n {
            for j in 0..i {
                asym = asym.max((a.get(i, j) - a.get(j, i)).abs());
            }
        }
        if asym > tol {
            return Err(Error::NotSymmetric {
                asym: asym.to_f64_lossy(),
                tol: tol.to_f64_lossy(),
            });
        }
        let pivot_floor = S::tol(1e-14, 16.0) * a.trace().abs();
        let mut lower = vec![S::zero(); n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d = d - lower[j * n + k] * lower[j * n + k];
            }
            if d.is_nan() || d <= pivot_floor {
                return Err(Error::Singular {
                    row: j,
                    pivot: d.to_f64_lossy(),
                });
            }
            let ljj = d.sqrt();
            lower[j * n + j] = ljj;
            for i in j + 1..n {
                // lower triangle of `a` is authoritative
                let mut s = a.get(i, j);
                for k in 0..j {
                    s = s - lower[i * n + k] * lower[j * n + k];
                }
                lower[i * n + j] = s / ljj;
            }
        }
        Ok(Self { n, lower })
    }

    /// Solves `a·X = b` for every column of `b` at once.
    pub fn solve(&self, b: &Matrix<S>) -> Result<Matrix<S>> {
        let n = self.n;
        if b.rows != n {
            return Err(Error::Shape(format!(
                "right-hand side has {} rows, expected {n}",
                b.rows
            )));
        }
        let m = b.cols;
        let l = &self.lower;
        // forward: L·Y = B, row by row across all right-hand sides
        let mut y = b.data.clone();
        for i in 0..n {
            let (done, rest) = y.split_at_mut(i * m);
            let yi = &mut rest[..m];
            for k in 0..i {
                let lik = l[i * n + k];
                for (v, &yk) in yi.iter_mut().zip(&done[k * m..(k + 1) * m]) {
                    *v = *v - lik * yk;
                }
            }
            let d = l[i * n + i];
            yi.iter_mut().for_each(|v| *v = *v / d);
        }
        // backward: Lᵀ·X = Y
        for i in (0..n).rev() {
            let (head, tail) = y.split_at_mut((i + 1) * m);
            let xi = &mut head[i * m..];
            for k in i + 1..n {
                let lki = l[k * n + i];
                let xk = &tail[(k - i - 1) * m..(k - i) * m];
                for (v, &x) in xi.iter_mut().zip(xk) {
                    *v = *v - lki * x;
                }
            }
            let d = l[i * n + i];
            xi.iter_mut().for_each(|v| *v = *v / d);
        }
        check_finite(&y)?;
        Ok(Matrix {
            rows: n,
            cols: m,
            data: y,
        })
    }
}

/// Solves `a·X = b` for symmetric positive definite `a` by Cholesky factorization.
pub fn solve_spd<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    Cholesky::factor(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix<f64> {
        Matrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn identity_times_b_is_b() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random(&mut rng, 3, 5);
        let c = matmul(&Matrix::identity(3), &b).unwrap();
        assert_eq!(c, b);
        let c = matmul(&b, &Matrix::identity(5)).unwrap();
        assert_eq!(c, b);
    }

    #[test]
    fn scalar_product() {
        let a = Matrix::from_rows(&[vec![2.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![3.0]]).unwrap();
        assert_eq!(matmul(&a, &b).unwrap().as_slice(), &[6.0]);
    }

    #[test]
    fn matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random(&mut rng, 5, 4);
        let b = random(&mut rng, 4, 3);
        let c = matmul(&a, &b).unwrap();
        for i in 0..5 {
            for j in 0..3 {
                let mut s = 0.0;
                for p in 0..4 {
                    s += a.get(i, p) * b.get(p, j);
                }
                assert!((c.get(i, j) - s).abs() <= 1e-15, "({i},{j})");
            }
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let a = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(matmul(&a, &a), Err(Error::Shape(_))));
    }

    #[test]
    fn bad_construction() {
        assert!(Matrix::<f64>::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::<f64>::from_vec(0, 2, vec![]).is_err());
        assert!(matches!(
            Matrix::from_vec(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn solve_identity_and_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = random(&mut rng, 4, 2);
        assert_eq!(solve_spd(&Matrix::identity(4), &b).unwrap(), b);
        let a = Matrix::from_rows(&[vec![4.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![2.0]]).unwrap();
        assert_eq!(solve_spd(&a, &b).unwrap().as_slice(), &[0.5]);
    }

    #[test]
    fn solve_perturbed_identity_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let e = random(&mut rng, 3, 3).scale(0.1);
        let a = Matrix::identity(3)
            .scale(2.0)
            .add(&matmul(&e, &e.transpose()).unwrap())
            .unwrap();
        let b = random(&mut rng, 3, 4);
        let x = solve_spd(&a, &b).unwrap();
        let r = matmul(&a, &x).unwrap().max_abs_diff(&b);
        assert!(r <= 1e-9 * b.max_abs());
    }

    #[test]
    fn solve_rejects_bad_input() {
        let ns = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_spd(&ns, &Matrix::identity(2)),
            Err(Error::NotSymmetric { .. })
        ));
        let indefinite = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_spd(&indefinite, &Matrix::identity(2)),
            Err(Error::Singular { row: 1, .. })
        ));
        let singular = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(
            solve_spd(&singular, &Matrix::identity(2)),
            Err(Error::Singular { .. })
        ));
        let rect = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(solve_spd(&rect, &rect), Err(Error::Shape(_))));
    }

    #[test]
    fn parallel_matches_serial_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random(&mut rng, 700, 40);
        let b = random(&mut rng, 40, 30);
        let par = matmul(&a, &b).unwrap();
        let mut serial = vec![0.0; 700 * 30];
        for (o, r) in serial.chunks_mut(30).zip(a.as_slice().chunks(40)) {
            row_times(r, b.as_slice(), 30, o);
        }
        assert_eq!(par.as_slice(), serial.as_slice());
    }

    #[test]
    fn works_in_single_precision() {
        let a = Matrix::<f32>::from_rows(&[vec![4.0, 1.0], vec![1.0, 3.0]]).unwrap();
        let b = Matrix::<f32>::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        let x = solve_spd(&a, &b).unwrap();
        let r = matmul(&a, &x).unwrap().max_abs_diff(&b);
        assert!(r < 1e-5);
    }
}
