//! Frame-sequence I/O and the operator file format.

mod frames;
mod lut;

pub use frames::{
    format_index, load_clip, load_clip_with_depth, quantize, save_clip, BitDepth, Channels,
    ClipManifest,
};
pub use lut::{
    decode_lut, encode_lut, read_lut, write_lut, LUT_HEADER_LEN, LUT_MAGIC, LUT_VERSION,
};
