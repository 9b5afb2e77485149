use std::fs;
use std::path::{Path, PathBuf};

use image::{ColorType, DynamicImage, ImageFormat};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numcore::{Clip, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channels {
    Gray,
    Rgb,
}

impl Channels {
    pub fn count(self) -> usize {
        match self {
            Channels::Gray => 1,
            Channels::Rgb => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn max_value(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

/// Where a frame sequence lives and how to read or write it.
///
/// `pattern` holds one printf-style index placeholder (`%d`, `%04d`); frame
/// `i` (0-based) is the file with index `start + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClipManifest {
    pub dir: PathBuf,
    pub pattern: String,
    /// Requested channel layout; `None` keeps what the files contain.
    pub channels: Option<Channels>,
    pub frames: usize,
    pub start: usize,
    pub fps: Option<f64>,
    /// Sample depth used when saving.
    pub bit_depth: BitDepth,
}

impl ClipManifest {
    pub fn new(dir: impl Into<PathBuf>, pattern: impl Into<String>, frames: usize) -> Self {
        Self {
            dir: dir.into(),
            pattern: pattern.into(),
            channels: None,
            frames,
            start: 1,
            fps: None,
            bit_depth: BitDepth::Eight,
        }
    }

    pub fn with_channels(mut self, channels: Channels) -> Self {
        self.channels = Some(channels);
        self
    }

    pub fn with_bit_depth(mut self, depth: BitDepth) -> Self {
        self.bit_depth = depth;
        self
    }

    pub fn with_start(mut self, start: usize) -> Self {
        self.start = start;
        self
    }

    /// Counts consecutive existing frames from `start`.
    pub fn discover(
        dir: impl Into<PathBuf>,
        pattern: impl Into<String>,
        start: usize,
    ) -> Result<Self> {
        let mut m = Self::new(dir, pattern, 0).with_start(start);
        while m.frame_path(m.frames)?.is_file() {
            m.frames += 1;
        }
        Ok(m)
    }

    pub fn frame_path(&self, i: usize) -> Result<PathBuf> {
        Ok(self.dir.join(format_index(&self.pattern, self.start + i)?))
    }
}

/// Substitutes `index` into the single `%d` / `%0Nd` placeholder of `pattern`.
pub fn format_index(pattern: &str, index: usize) -> Result<String> {
    let mut out = String::with_capacity(pattern.len() + 8);
    let mut chars = pattern.chars().peekable();
    let mut placeholders = 0;
    while let Some(c) = chars.next() {
        if c != '%' {
            out.push(c);
            continue;
        }
        if chars.peek() == Some(&'%') {
            chars.next();
            out.push('%');
            continue;
        }
        let mut spec = String::new();
        while let Some(&d) = chars.peek() {
            if d.is_ascii_digit() {
                spec.push(d);
                chars.next();
            } else {
                break;
            }
        }
        if chars.next() != Some('d') {
            return Err(Error::Format(format!(
                "unsupported placeholder in pattern {pattern:?}"
            )));
        }
        let width: usize = if spec.is_empty() {
            0
        } else {
            spec.parse()
                .map_err(|_| Error::Format(format!("bad width in pattern {pattern:?}")))?
        };
        if spec.starts_with('0') {
            out.push_str(&format!("{index:0width$}"));
        } else {
            out.push_str(&format!("{index:width$}"));
        }
        placeholders += 1;
    }
    if placeholders != 1 {
        return Err(Error::Format(format!(
            "pattern {pattern:?} needs exactly one index placeholder, found {placeholders}"
        )));
    }
    Ok(out)
}

struct Decoded {
    width: usize,
    height: usize,
    channels: usize,
    depth: BitDepth,
    /// normalized to [0, 1], interleaved
    samples: Vec<f64>,
}

fn decode(img: DynamicImage) -> Result<Decoded> {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, depth, samples): (usize, BitDepth, Vec<f64>) = match img {
        DynamicImage::ImageLuma8(b) => (
            1,
            BitDepth::Eight,
            b.into_raw().into_iter().map(f64::from).collect(),
        ),
        DynamicImage::ImageLumaA8(_) => {
            let b = img.to_luma8();
            (
                1,
                BitDepth::Eight,
                b.into_raw().into_iter().map(f64::from).collect(),
            )
        }
        DynamicImage::ImageRgb8(b) => (
            3,
            BitDepth::Eight,
            b.into_raw().into_iter().map(f64::from).collect(),
        ),
        DynamicImage::ImageRgba8(_) => {
            let b = img.to_rgb8();
            (
                3,
                BitDepth::Eight,
                b.into_raw().into_iter().map(f64::from).collect(),
            )
        }
        DynamicImage::ImageLuma16(b) => (
            1,
            BitDepth::Sixteen,
            b.into_raw().into_iter().map(f64::from).collect(),
        ),
        DynamicImage::ImageLumaA16(_) => {
            let b = img.to_luma16();
            (
                1,
                BitDepth::Sixteen,
                b.into_raw().into_iter().map(f64::from).collect(),
            )
        }
        DynamicImage::ImageRgb16(b) => (
            3,
            BitDepth::Sixteen,
            b.into_raw().into_iter().map(f64::from).collect(),
        ),
        DynamicImage::ImageRgba16(_) => {
            let b = img.to_rgb16();
            (
                3,
                BitDepth::Sixteen,
                b.into_raw().into_iter().map(f64::from).collect(),
            )
        }
        other => {
            return Err(Error::Format(format!(
                "unsupported sample type {:?}",
                other.color()
            )))
        }
    };
    let max = depth.max_value();
    Ok(Decoded {
        width: w,
        height: h,
        channels,
        depth,
        samples: samples.into_iter().map(|v| v / max).collect(),
    })
}

fn convert(samples: Vec<f64>, from: usize, to: Channels) -> Vec<f64> {
    match (from, to) {
        (3, Channels::Gray) => samples
            .chunks_exact(3)
            .map(|c| 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2])
            .collect(),
        (1, Channels::Rgb) => samples.iter().flat_map(|&v| [v, v, v]).collect(),
        _ => samples,
    }
}

/// Loads every frame of `manifest`, returning the clip and the source bit depth.
pub fn load_clip_with_depth<S: Scalar>(manifest: &ClipManifest) -> Result<(Clip<S>, BitDepth)> {
    if manifest.frames == 0 {
        return Err(Error::EmptyClip);
    }
    let decoded: Vec<Decoded> = (0..manifest.frames)
        .into_par_iter()
        .map(|i| {
            let path = manifest.frame_path(i)?;
            let frame = manifest.start + i;
            let img = image::open(&path).map_err(|e| match e {
                image::ImageError::IoError(source) => Error::Frame {
                    frame,
                    path: path.clone(),
                    source,
                },
                other => Error::Format(format!("frame {frame} ({}): {other}", path.display())),
            })?;
            decode(img)
                .map_err(|e| Error::Format(format!("frame {frame} ({}): {e}", path.display())))
        })
        .collect::<Result<_>>()?;

    let first = &decoded[0];
    for (i, f) in decoded.iter().enumerate().skip(1) {
        if (f.width, f.height, f.channels, f.depth)
            != (first.width, first.height, first.channels, first.depth)
        {
            return Err(Error::Format(format!(
                "frame {} is {}x{}x{} ({:?}), frame {} is {}x{}x{} ({:?})",
                manifest.start + i,
                f.width,
                f.height,
                f.channels,
                f.depth,
                manifest.start,
                first.width,
                first.height,
                first.channels,
                first.depth
            )));
        }
    }
    let (width, height, depth) = (first.width, first.height, first.depth);
    let target = manifest.channels.unwrap_or(if first.channels == 3 {
        Channels::Rgb
    } else {
        Channels::Gray
    });
    let frames: Vec<Vec<S>> = decoded
        .into_iter()
        .map(|f| {
            convert(f.samples, f.channels, target)
                .into_iter()
                .map(S::lit)
                .collect()
        })
        .collect();
    Ok((
        Clip::from_frames(width, height, target.count(), &frames)?,
        depth,
    ))
}

pub fn load_clip<S: Scalar>(manifest: &ClipManifest) -> Result<Clip<S>> {
    load_clip_with_depth(manifest).map(|(c, _)| c)
}

/// Clamps to `[0, 1]` and quantizes to `round(v · max)`. This is the only
/// place in the pipeline where values are clamped.
pub fn quantize(v: f64, depth: BitDepth) -> u16 {
    (v.clamp(0.0, 1.0) * depth.max_value()).round() as u16
}

fn image_format(path: &Path) -> Result<ImageFormat> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    match ext.as_str() {
        "png" => Ok(ImageFormat::Png),
        "pgm" | "ppm" | "pnm" => Ok(ImageFormat::Pnm),
        _ => Err(Error::Format(format!(
            "cannot infer an output format from {}",
            path.display()
        ))),
    }
}

/// Writes `clip` as one file per frame, creating the directory if needed.
pub fn save_clip<S: Scalar>(clip: &Clip<S>, manifest: &ClipManifest) -> Result<()> {
    fs::create_dir_all(&manifest.dir)
        .map_err(|e| Error::io(format!("creating {}", manifest.dir.display()), e))?;
    let (w, h) = (clip.width() as u32, clip.height() as u32);
    let color = match (clip.channels(), manifest.bit_depth) {
        (1, BitDepth::Eight) => ColorType::L8,
        (3, BitDepth::Eight) => ColorType::Rgb8,
        (1, BitDepth::Sixteen) => ColorType::L16,
        _ => ColorType::Rgb16,
    };
    (0..clip.frames()).into_par_iter().try_for_each(|t| {
        let path = manifest.frame_path(t)?;
        let format = image_format(&path)?;
        let samples = clip.frame(t);
        let bytes: Vec<u8> = match manifest.bit_depth {
            BitDepth::Eight => samples
                .iter()
                .map(|v| quantize(v.to_f64_lossy(), BitDepth::Eight) as u8)
                .collect(),
            // image expects native-endian u16 samples as bytes
            BitDepth::Sixteen => samples
                .iter()
                .flat_map(|v| quantize(v.to_f64_lossy(), BitDepth::Sixteen).to_ne_bytes())
                .collect(),
        };
        image::save_buffer_with_format(&path, &bytes, w, h, color, format).map_err(|e| match e {
            image::ImageError::IoError(source) => Error::Frame {
                frame: manifest.start + t,
                path: path.clone(),
                source,
            },
            other => Error::Format(format!(
                "frame {} ({}): {other}",
                manifest.start + t,
                path.display()
            )),
        })
    })
}
