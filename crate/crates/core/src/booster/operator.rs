use std::fmt;

use crate::error::{Error, Result};
use crate::interpolate::build_interpolation_matrix;
use crate::magnify::{build_magnification_matrix, MagnifyParams};
use crate::numcore::{gemm_rows, matmul, Clip, Matrix, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorRole {
    Magnify,
    Interpolate,
    Fused,
}

impl OperatorRole {
    pub fn code(self) -> u8 {
        match self {
            OperatorRole::Magnify => 0,
            OperatorRole::Interpolate => 1,
            OperatorRole::Fused => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(OperatorRole::Magnify),
            1 => Some(OperatorRole::Interpolate),
            2 => Some(OperatorRole::Fused),
            _ => None,
        }
    }
}

impl fmt::Display for OperatorRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorRole::Magnify => "magnify",
            OperatorRole::Interpolate => "interpolate",
            OperatorRole::Fused => "fused",
        })
    }
}

/// A `t_in × t_out` temporal operator: `clip · W` maps a `t_in`-frame clip to
/// a `t_out`-frame clip.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix<S> {
    matrix: Matrix<S>,
    role: OperatorRole,
    magnify: Option<MagnifyParams>,
}

impl OperatorMatrix<f64> {
    pub fn magnification(p: &MagnifyParams, t_len: usize) -> Result<Self> {
        Ok(Self {
            matrix: build_magnification_matrix(p, t_len)?,
            role: OperatorRole::Magnify,
            magnify: Some(*p),
        })
    }

    pub fn interpolation(t_len: usize, out_len: usize) -> Result<Self> {
        Ok(Self {
            matrix: build_interpolation_matrix(t_len, out_len)?,
            role: OperatorRole::Interpolate,
            magnify: None,
        })
    }

    /// Builds `W^M · W^I` for the given parameters.
    pub fn fused(p: &MagnifyParams, t_len: usize, out_len: usize) -> Result<Self> {
        fuse(
            &Self::magnification(p, t_len)?,
            &Self::interpolation(t_len, out_len)?,
        )
    }
}

impl<S: Scalar> OperatorMatrix<S> {
    /// Wraps an arbitrary matrix without checking the column-sum property,
    /// so corrupted operators can still be loaded and inspected.
    pub fn from_parts(
        matrix: Matrix<S>,
        role: OperatorRole,
        magnify: Option<MagnifyParams>,
    ) -> Result<Self> {
        if role == OperatorRole::Interpolate && magnify.is_some() {
            return Err(Error::InvalidParams(
                "interpolation operators carry no magnify params".into(),
            ));
        }
        if role != OperatorRole::Interpolate && magnify.is_none() {
            return Err(Error::InvalidParams(format!(
                "{role} operator needs magnify params"
            )));
        }
        if role == OperatorRole::Magnify && matrix.rows() != matrix.cols() {
            return Err(Error::Shape(format!(
                "magnification operator must be square, got {:?}",
                matrix.shape()
            )));
        }
        Ok(Self {
            matrix,
            role,
            magnify,
        })
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.matrix
    }

    pub fn role(&self) -> OperatorRole {
        self.role
    }

    pub fn magnify_params(&self) -> Option<&MagnifyParams> {
        self.magnify.as_ref()
    }

    pub fn t_in(&self) -> usize {
        self.matrix.rows()
    }

    pub fn t_out(&self) -> usize {
        self.matrix.cols()
    }

    /// Largest `|column sum − 1|`.
    pub fn column_sum_error(&self) -> S {
        self.matrix
            .column_sums()
            .into_iter()
            .fold(S::zero(), |m, s| m.max((s - S::one()).abs()))
    }

    pub fn cast<T: Scalar>(&self) -> OperatorMatrix<T> {
        OperatorMatrix {
            matrix: self.matrix.cast(),
            role: self.role,
            magnify: self.magnify,
        }
    }
}

/// Combines a magnification and an interpolation operator into one, with
/// magnification applied first.
pub fn fuse<S: Scalar>(
    wm: &OperatorMatrix<S>,
    wi: &OperatorMatrix<S>,
) -> Result<OperatorMatrix<S>> {
    if wm.role != OperatorRole::Magnify || wi.role != OperatorRole::Interpolate {
        return Err(Error::Shape(format!(
            "fuse expects (magnify, interpolate), got ({}, {})",
            wm.role, wi.role
        )));
    }
    if wm.t_out() != wi.t_in() {
        return Err(Error::Shape(format!(
            "magnification produces {} frames but interpolation expects {}",
            wm.t_out(),
            wi.t_in()
        )));
    }
    Ok(OperatorMatrix {
        matrix: matmul(&wm.matrix, &wi.matrix)?,
        role: OperatorRole::Fused,
        magnify: wm.magnify,
    })
}

/// `clip · W`: output frame `j` of sample `p` is `Σ_i clip[p, i]·W[i, j]`.
/// Values are not clamped.
pub fn apply_operator<S: Scalar>(clip: &Clip<S>, w: &OperatorMatrix<S>) -> Result<Clip<S>> {
    if clip.frames() != w.t_in() {
        return Err(Error::Shape(format!(
            "clip has {} frames, operator expects {}",
            clip.frames(),
            w.t_in()
        )));
    }
    let t_out = w.t_out();
    let mut out = vec![S::zero(); clip.pixel_count() * t_out];
    gemm_rows(
        clip.values(),
        clip.frames(),
        w.matrix.as_slice(),
        t_out,
        &mut out,
    );
    clip.with_values(t_out, out)
}
