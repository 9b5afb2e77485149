//! Dense matrix and clip value types plus the two kernels everything else
//! is built from: a fixed-order matrix product and an SPD solve.

mod clip;
mod matrix;
mod scalar;

pub use clip::Clip;
pub(crate) use matrix::gemm_rows;
pub use matrix::{matmul, solve_spd, Cholesky, Matrix};
pub use scalar::Scalar;
