//! The fused operator `W = W^M · W^I` and the clip pipeline around it.
//!
//! A clip is processed as `clip · W`. With more than one pyramid level every
//! frame is split into band-pass levels plus a low-pass residual, each level
//! gets its own fused operator (the magnification capped per level, the
//! residual only interpolated), and the resampled levels are collapsed back.

mod cache;
mod operator;
mod pyramid;

use rayon::prelude::*;

pub use cache::OperatorCache;
pub use operator::{apply_operator, fuse, OperatorMatrix, OperatorRole};
pub use pyramid::{build_pyramid, check_depth, collapse_pyramid, level_dims, Plane, PyramidStack};

use crate::error::{Error, Result};
use crate::magnify::MagnifyParams;
use crate::numcore::{Clip, Scalar};

pub const DEFAULT_MIN_DIM: usize = 16;

/// Everything that determines the operators applied to a clip.
#[derive(Clone, Debug, PartialEq)]
pub struct BoosterParams {
    pub magnify: MagnifyParams,
    /// Output frame count `T′`.
    pub out_len: usize,
    /// Pyramid levels including the residual; 1 disables the pyramid.
    pub levels: usize,
    /// Per-level magnification ceilings, one per level.
    pub alpha_caps: Option<Vec<f64>>,
    /// Smallest side allowed for the coarsest pyramid level.
    pub min_dim: usize,
    /// Also magnify the low-pass residual (normally interpolated only).
    pub magnify_residual: bool,
}

impl BoosterParams {
    pub fn new(magnify: MagnifyParams, out_len: usize) -> Self {
        Self {
            magnify,
            out_len,
            levels: 1,
            alpha_caps: None,
            min_dim: DEFAULT_MIN_DIM,
            magnify_residual: false,
        }
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.levels = levels;
        self
    }

    pub fn with_alpha_caps(mut self, caps: Vec<f64>) -> Self {
        self.alpha_caps = Some(caps);
        self
    }

    pub fn with_min_dim(mut self, min_dim: usize) -> Self {
        self.min_dim = min_dim;
        self
    }

    pub fn with_magnified_residual(mut self, on: bool) -> Self {
        self.magnify_residual = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.out_len == 0 {
            return Err(Error::InvalidParams(
                "output length must be at least 1".into(),
            ));
        }
        if self.levels == 0 {
            return Err(Error::InvalidParams(
                "need at least one pyramid level".into(),
            ));
        }
        if let Some(caps) = &self.alpha_caps {
            if caps.len() != self.levels {
                return Err(Error::InvalidParams(format!(
                    "{} alpha caps for {} levels",
                    caps.len(),
                    self.levels
                )));
            }
            if let Some(c) = caps.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
                return Err(Error::InvalidParams(format!(
                    "alpha cap {c} must be finite and >= 0"
                )));
            }
        }
        Ok(())
    }
}

/// Magnification for band-pass level `level` (0 = finest).
///
/// Explicit caps give `min(α, cap)`. Otherwise the cap is `λ/(8δ) − 1` with
/// `δ = 1` px and `λ = 4·2^level` px, clamped at zero. The residual level is
/// never magnified by [`boost_clip`] unless `magnify_residual` is set.
pub fn truncate_alpha(p: &BoosterParams, level: usize) -> Result<f64> {
    if level >= p.levels {
        return Err(Error::Range {
            what: "pyramid level",
            detail: format!("{level} with {} levels", p.levels),
        });
    }
    let alpha = p.magnify.alpha();
    let cap = match &p.alpha_caps {
        Some(caps) => caps[level],
        None => {
            let wavelength = 4.0 * 2f64.powi(level as i32);
            (wavelength / 8.0 - 1.0).max(0.0)
        }
    };
    Ok(alpha.min(cap))
}

/// Fused operator for every pyramid level, finest first.
pub fn level_operators(
    p: &BoosterParams,
    t_in: usize,
    cache: &OperatorCache,
) -> Result<Vec<OperatorMatrix<f64>>> {
    p.validate()?;
    if p.levels == 1 {
        return Ok(vec![(*cache.fused(&p.magnify, t_in, p.out_len)?).clone()]);
    }
    (0..p.levels)
        .map(|s| {
            let residual = s + 1 == p.levels;
            let alpha = if residual && !p.magnify_residual {
                0.0
            } else {
                truncate_alpha(p, s)?
            };
            let w = cache.fused(&p.magnify.with_alpha(alpha)?, t_in, p.out_len)?;
            Ok((*w).clone())
        })
        .collect()
}

pub fn boost_clip<S: Scalar>(clip: &Clip<S>, p: &BoosterParams) -> Result<Clip<S>> {
    boost_clip_cached(clip, p, &OperatorCache::new())
}

pub fn boost_clip_cached<S: Scalar>(
    clip: &Clip<S>,
    p: &BoosterParams,
    cache: &OperatorCache,
) -> Result<Clip<S>> {
    if clip.frames() < 2 {
        return Err(Error::DegenerateLength {
            needed: 2,
            got: clip.frames(),
        });
    }
    p.validate()?;
    if p.levels > 1 {
        check_depth(clip.width(), clip.height(), p.levels, p.min_dim)?;
    }
    let ops: Vec<OperatorMatrix<S>> = level_operators(p, clip.frames(), cache)?
        .iter()
        .map(OperatorMatrix::cast)
        .collect();
    if p.levels == 1 {
        return apply_operator(clip, &ops[0]);
    }
    let (t_in, t_out) = (clip.frames(), p.out_len);
    let ch = clip.channels();
    let dims = level_dims(clip.width(), clip.height(), p.levels);

    // decompose every (frame, channel) plane
    let stacks: Vec<PyramidStack<S>> = (0..t_in * ch)
        .into_par_iter()
        .map(|i| {
            let (t, c) = (i / ch, i % ch);
            let data = (0..clip.width() * clip.height())
                .map(|pix| clip.get(pix * ch + c, t))
                .collect();
            let plane = Plane::new(clip.width(), clip.height(), data)?;
            build_pyramid(&plane, p.levels, p.min_dim)
        })
        .collect::<Result<_>>()?;

    // one clip per level, magnified and resampled in time
    let processed: Vec<Clip<S>> = dims
        .par_iter()
        .enumerate()
        .map(|(s, &(w, h))| {
            let n = w * h;
            let mut values = vec![S::zero(); n * ch * t_in];
            for (i, stack) in stacks.iter().enumerate() {
                let (t, c) = (i / ch, i % ch);
                let plane = stack.bands.get(s).unwrap_or(&stack.residual);
                for (pix, &v) in plane.data.iter().enumerate() {
                    values[(pix * ch + c) * t_in + t] = v;
                }
            }
            let level = Clip::new(w, h, ch, t_in, values)?;
            apply_operator(&level, &ops[s])
        })
        .collect::<Result<_>>()?;

    let planes: Vec<Plane<S>> = (0..t_out * ch)
        .into_par_iter()
        .map(|i| {
            let (t, c) = (i / ch, i % ch);
            let mut levels = processed.iter().zip(&dims).map(|(lc, &(w, h))| Plane {
                width: w,
                height: h,
                data: (0..w * h).map(|pix| lc.get(pix * ch + c, t)).collect(),
            });
            let bands: Vec<Plane<S>> = levels.by_ref().take(p.levels - 1).collect();
            let residual = levels.next().expect("residual level");
            collapse_pyramid(&PyramidStack { bands, residual })
        })
        .collect();

    let n = clip.width() * clip.height();
    let mut out = vec![S::zero(); n * ch * t_out];
    for (i, plane) in planes.iter().enumerate() {
        let (t, c) = (i / ch, i % ch);
        for (pix, &v) in plane.data.iter().enumerate() {
            out[(pix * ch + c) * t_out + t] = v;
        }
    }
    clip.with_values(t_out, out)
}
