use super::{Matrix, Scalar};
use crate::error::{Error, Result};

/// A frame sequence stored pixel-major, so it reads as a `d×T` matrix where
/// `d = width·height·channels` and row `p` is the time series of sample `p`.
///
/// Values are nominally in `[0, 1]` but never clamped here.
#[derive(Clone, Debug, PartialEq)]
pub struct Clip<S> {
    width: usize,
    height: usize,
    channels: usize,
    frames: usize,
    values: Vec<S>,
}

impl<S: Scalar> Clip<S> {
    /// `values[p * frames + t]` is sample `p` of frame `t`; within a frame,
    /// samples are ordered `(y * width + x) * channels + c`.
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        frames: usize,
        values: Vec<S>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || frames == 0 {
            return Err(Error::EmptyClip);
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Shape(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        let d = width * height * channels;
        if values.len() != d * frames {
            return Err(Error::Shape(format!(
                "clip {width}x{height}x{channels} with {frames} frames needs {} values, got {}",
                d * frames,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            width,
            height,
            channels,
            frames,
            values,
        })
    }

    /// Assembles a clip from frame-major buffers (each of length `d`).
    pub fn from_frames(
        width: usize,
        height: usize,
        channels: usize,
        frames: &[Vec<S>],
    ) -> Result<Self> {
        let d = width * height * channels;
        if frames.is_empty() {
            return Err(Error::EmptyClip);
        }
        if let Some(t) = frames.iter().position(|f| f.len() != d) {
            return Err(Error::Shape(format!(
                "frame {t} has {} samples, expected {d}",
                frames[t].len()
            )));
        }
        let n = frames.len();
        let mut values = vec![S::zero(); d * n];
        for (t, f) in frames.iter().enumerate() {
            for (p, &v) in f.iter().enumerate() {
                values[p * n + t] = v;
            }
        }
        Self::new(width, height, channels, n, values)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        frames: usize,
        mut f: impl FnMut(usize, usize) -> S,
    ) -> Result<Self> {
        let d = width * height * channels;
        let mut values = Vec::with_capacity(d * frames);
        for p in 0..d {
            for t in 0..frames {
                values.push(f(p, t));
            }
        }
        Self::new(width, height, channels, frames, values)
    }

    pub fn constant(
        width: usize,
        height: usize,
        channels: usize,
        frames: usize,
        v: S,
    ) -> Result<Self> {
        Self::from_fn(width, height, channels, frames, |_, _| v)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    /// Samples per frame.
    pub fn pixel_count(&self) -> usize {
        self.width * self.height * self.channels
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn series(&self, p: usize) -> &[S] {
        &self.values[p * self.frames..(p + 1) * self.frames]
    }

    pub fn get(&self, p: usize, t: usize) -> S {
        self.values[p * self.frames + t]
    }

    /// Gathers frame `t` as a `d`-length buffer.
    pub fn frame(&self, t: usize) -> Vec<S> {
        (0..self.pixel_count()).map(|p| self.get(p, t)).collect()
    }

    /// Same geometry, different frame count and values.
    pub fn with_values(&self, frames: usize, values: Vec<S>) -> Result<Self> {
        Self::new(self.width, self.height, self.channels, frames, values)
    }

    pub fn to_matrix(&self) -> Matrix<S> {
        Matrix::from_vec(self.pixel_count(), self.frames, self.values.clone())
            .expect("clip invariants imply a valid matrix")
    }

    pub fn from_matrix(width: usize, height: usize, channels: usize, m: Matrix<S>) -> Result<Self> {
        let frames = m.cols();
        Self::new(width, height, channels, frames, m.into_vec())
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        assert_eq!(self.values.len(), other.values.len(), "clip size mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(S::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn cast<T: Scalar>(&self) -> Clip<T> {
        Clip {
            width: self.width,
            height: self.height,
            channels: self.channels,
            frames: self.frames,
            values: self
                .values
                .iter()
                .map(|&v| T::from_f64(v.to_f64_lossy()).unwrap_or_else(T::nan))
                .collect(),
        }
    }
}
