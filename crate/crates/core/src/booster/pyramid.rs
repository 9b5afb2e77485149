//! Laplacian pyramid with a 5-tap binomial kernel and half-sample symmetric
//! edges. Band-pass levels are `G_l − expand(G_{l+1})`, so collapsing with the
//! same `expand` reconstructs the input up to rounding.

use crate::error::{Error, Result};
use crate::numcore::Scalar;

/// A single-channel image, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane<S> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Plane<S> {
    pub fn new(width: usize, height: usize, data: Vec<S>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(Error::Shape(format!(
                "plane {width}x{height} with {} samples",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> S {
        self.data[y * self.width + x]
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        self.data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}

/// Band-pass levels, finest first, plus the low-pass residual.
#[derive(Clone, Debug, PartialEq)]
pub struct PyramidStack<S> {
    pub bands: Vec<Plane<S>>,
    pub residual: Plane<S>,
}

impl<S> PyramidStack<S> {
    /// Bands plus the residual.
    pub fn levels(&self) -> usize {
        self.bands.len() + 1
    }
}

/// Dimensions of every level, finest first, halving with ceiling division.
pub fn level_dims(width: usize, height: usize, levels: usize) -> Vec<(usize, usize)> {
    let mut dims = Vec::with_capacity(levels);
    let (mut w, mut h) = (width, height);
    for _ in 0..levels {
        dims.push((w, h));
        w = w.div_ceil(2);
        h = h.div_ceil(2);
    }
    dims
}

/// Checks that a `levels`-deep pyramid keeps its coarsest level at least
/// `min_dim` pixels on each side.
pub fn check_depth(width: usize, height: usize, levels: usize, min_dim: usize) -> Result<()> {
    if levels == 0 {
        return Err(Error::PyramidDepth("need at least one level".into()));
    }
    if levels == 1 {
        return Ok(());
    }
    let (w, h) = *level_dims(width, height, levels)
        .last()
        .expect("levels >= 1");
    if w.min(h) < min_dim {
        return Err(Error::PyramidDepth(format!(
            "{width}x{height} frame with {levels} levels has a {w}x{h} coarsest level, below the {min_dim}px minimum"
        )));
    }
    Ok(())
}

#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

/// Blurs with (1, 4, 6, 4, 1)/16 along both axes and keeps even samples.
fn reduce<S: Scalar>(src: &Plane<S>) -> Plane<S> {
    let k = [1.0, 4.0, 6.0, 4.0, 1.0].map(|v| S::lit(v / 16.0));
    let (w, h) = (src.width, src.height);
    let (nw, nh) = (w.div_ceil(2), h.div_ceil(2));
    // horizontal pass at even columns only
    let mut tmp = vec![S::zero(); nw * h];
    for y in 0..h {
        for nx in 0..nw {
            let x = (2 * nx) as isize;
            let mut acc = S::zero();
            for (t, &kt) in k.iter().enumerate() {
                acc = acc + kt * src.at(reflect(x + t as isize - 2, w), y);
            }
            tmp[y * nw + nx] = acc;
        }
    }
    let mut out = vec![S::zero(); nw * nh];
    for ny in 0..nh {
        let y = (2 * ny) as isize;
        for nx in 0..nw {
            let mut acc = S::zero();
            for (t, &kt) in k.iter().enumerate() {
                acc = acc + kt * tmp[reflect(y + t as isize - 2, h) * nw + nx];
            }
            out[ny * nw + nx] = acc;
        }
    }
    Plane {
        width: nw,
        height: nh,
        data: out,
    }
}

/// One-axis expansion weights: even outputs take (1, 6, 1)/8 of the source
/// neighbourhood, odd outputs (1, 1)/2 of the two straddling samples.
#[inline]
fn expand_1d<S: Scalar>(get: impl Fn(usize) -> S, n_src: usize, x: usize) -> S {
    let m = (x / 2) as isize;
    if x.is_multiple_of(2) {
        let (a, b, c) = (
            get(reflect(m - 1, n_src)),
            get(m as usize),
            get(reflect(m + 1, n_src)),
        );
        (a + S::lit(6.0) * b + c) * S::lit(0.125)
    } else {
        (get(m as usize) + get(reflect(m + 1, n_src))) * S::lit(0.5)
    }
}

fn expand<S: Scalar>(src: &Plane<S>, width: usize, height: usize) -> Plane<S> {
    let (sw, sh) = (src.width, src.height);
    let mut tmp = vec![S::zero(); width * sh];
    for y in 0..sh {
        let row = &src.data[y * sw..(y + 1) * sw];
        for x in 0..width {
            tmp[y * width + x] = expand_1d(|i| row[i], sw, x);
        }
    }
    let mut out = vec![S::zero(); width * height];
    for y in 0..height {
        for x in 0..width {
            out[y * width + x] = expand_1d(|i| tmp[i * width + x], sh, y);
        }
    }
    Plane {
        width,
        height,
        data: out,
    }
}

/// Decomposes `frame` into `levels − 1` band-pass images and a residual.
/// One level returns the frame itself as the residual.
pub fn build_pyramid<S: Scalar>(
    frame: &Plane<S>,
    levels: usize,
    min_dim: usize,
) -> Result<PyramidStack<S>> {
    check_depth(frame.width, frame.height, levels, min_dim)?;
    let mut bands = Vec::with_capacity(levels - 1);
    let mut current = frame.clone();
    for _ in 1..levels {
        let low = reduce(&current);
        let up = expand(&low, current.width, current.height);
        let band: Vec<S> = current
            .data
            .iter()
            .zip(&up.data)
            .map(|(&a, &b)| a - b)
            .collect();
        bands.push(Plane {
            width: current.width,
            height: current.height,
            data: band,
        });
        current = low;
    }
    Ok(PyramidStack {
        bands,
        residual: current,
    })
}

pub fn collapse_pyramid<S: Scalar>(stack: &PyramidStack<S>) -> Plane<S> {
    let mut current = stack.residual.clone();
    for band in stack.bands.iter().rev() {
        let up = expand(&current, band.width, band.height);
        current = Plane {
            width: band.width,
            height: band.height,
            data: band
                .data
                .iter()
                .zip(&up.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        };
    }
    current
}
