//! Motion magnification and temporal resampling of short clips through a
//! single precomputed linear operator.
//!
//! A clip with `T` frames is treated as a `d×T` matrix `V`. Eulerian
//! magnification is the upper-triangular `W^M` ([`magnify`]) and resampling to
//! `T′` frames through latent sine curves is `W^I` ([`interpolate`]); both
//! depend only on the frame counts and parameters, so their product is built
//! once and applied as `V · W` ([`booster`]). The recursive and
//! least-squares reference paths stay available for verification.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common double-precision case.

pub mod booster;
pub mod clipio;
mod error;
pub mod interpolate;
pub mod magnify;
pub mod numcore;
pub mod synthlab;

pub use booster::{apply_operator, boost_clip, fuse, BoosterParams, OperatorCache, OperatorRole};
pub use error::{Error, Result};
pub use magnify::MagnifyParams;
pub use numcore::Scalar;

pub type Matrix = numcore::Matrix<f64>;
pub type Clip = numcore::Clip<f64>;
pub type ClipF32 = numcore::Clip<f32>;
pub type OperatorMatrix = booster::OperatorMatrix<f64>;
