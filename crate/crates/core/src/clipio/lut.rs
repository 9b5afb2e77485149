//! Binary operator files ("LUTs"), little-endian:
//!
//! ```text
//! magic "MEBW" | version u32 = 1 | role u8 | t_in u32 | t_out u32
//! alpha f64 | w1 f64 | w2 f64 | t_in·t_out f64 entries, row-major
//! ```
//!
//! Interpolation operators store zeros for the three parameters.

use std::fs;
use std::path::Path;

use crate::booster::{OperatorMatrix, OperatorRole};
use crate::error::{Error, Result};
use crate::magnify::MagnifyParams;
use crate::numcore::{Matrix, Scalar};

pub const LUT_MAGIC: &[u8; 4] = b"MEBW";
pub const LUT_VERSION: u32 = 1;
pub const LUT_HEADER_LEN: usize = 4 + 4 + 1 + 4 + 4 + 3 * 8;

pub fn encode_lut<S: Scalar>(w: &OperatorMatrix<S>) -> Result<Vec<u8>> {
    let m = w.matrix();
    let (t_in, t_out) = (to_u32(m.rows())?, to_u32(m.cols())?);
    let mut buf = Vec::with_capacity(LUT_HEADER_LEN + 8 * m.as_slice().len());
    buf.extend_from_slice(LUT_MAGIC);
    buf.extend_from_slice(&LUT_VERSION.to_le_bytes());
    buf.push(w.role().code());
    buf.extend_from_slice(&t_in.to_le_bytes());
    buf.extend_from_slice(&t_out.to_le_bytes());
    let (alpha, w1, w2) = w
        .magnify_params()
        .map_or((0.0, 0.0, 0.0), |p| (p.alpha(), p.w1(), p.w2()));
    for v in [alpha, w1, w2] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for (i, &x) in m.as_slice().iter().enumerate() {
        let x = x.to_f64_lossy();
        if !x.is_finite() {
            return Err(Error::NonFinite(i));
        }
        buf.extend_from_slice(&x.to_le_bytes());
    }
    Ok(buf)
}

fn to_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Format(format!("dimension {n} does not fit in u32")))
}

fn truncated(what: &str) -> Error {
    Error::io(
        format!("LUT truncated while reading {what}"),
        std::io::ErrorKind::UnexpectedEof.into(),
    )
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        let bytes = self.buf.get(self.pos..end).ok_or_else(|| truncated(what))?;
        self.pos = end;
        Ok(bytes.try_into().expect("slice length N"))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        self.take::<4>(what).map(u32::from_le_bytes)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        self.take::<8>(what).map(f64::from_le_bytes)
    }
}

pub fn decode_lut(buf: &[u8]) -> Result<OperatorMatrix<f64>> {
    let mut r = Reader { buf, pos: 0 };
    let magic = r.take::<4>("magic")?;
    if &magic != LUT_MAGIC {
        return Err(Error::Format(format!(
            "bad LUT magic {:?}, expected \"MEBW\"",
            String::from_utf8_lossy(&magic)
        )));
    }
    let version = r.u32("version")?;
    if version != LUT_VERSION {
        return Err(Error::Format(format!(
            "unsupported MEBW version {version}, expected {LUT_VERSION}"
        )));
    }
    let [code] = r.take::<1>("role")?;
    let role = OperatorRole::from_code(code)
        .ok_or_else(|| Error::Format(format!("unknown MEBW role code {code}")))?;
    let t_in = r.u32("t_in")? as usize;
    let t_out = r.u32("t_out")? as usize;
    let (alpha, w1, w2) = (r.f64("alpha")?, r.f64("w1")?, r.f64("w2")?);
    if t_in == 0 || t_out == 0 {
        return Err(Error::Format(format!(
            "MEBW header declares empty {t_in}x{t_out} operator"
        )));
    }
    let n = t_in
        .checked_mul(t_out)
        .ok_or_else(|| Error::Format("MEBW dimensions overflow".into()))?;
    let payload = &buf[r.pos..];
    if payload.len() < n * 8 {
        return Err(Error::io(
            format!(
                "LUT payload truncated: header declares {t_in}x{t_out} = {n} entries, found {}",
                payload.len() / 8
            ),
            std::io::ErrorKind::UnexpectedEof.into(),
        ));
    }
    if payload.len() > n * 8 {
        return Err(Error::Format(format!(
            "MEBW payload has {} trailing bytes",
            payload.len() - n * 8
        )));
    }
    let data = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    let matrix = Matrix::from_vec(t_in, t_out, data)
        .map_err(|e| Error::Format(format!("MEBW payload: {e}")))?;
    let magnify = match role {
        OperatorRole::Interpolate => None,
        _ => Some(
            MagnifyParams::new(alpha, w1, w2)
                .map_err(|e| Error::Format(format!("MEBW header: {e}")))?,
        ),
    };
    OperatorMatrix::from_parts(matrix, role, magnify)
        .map_err(|e| Error::Format(format!("MEBW: {e}")))
}

pub fn write_lut<S: Scalar>(w: &OperatorMatrix<S>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_lut(w)?;
    fs::write(path, bytes).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_lut(path: impl AsRef<Path>) -> Result<OperatorMatrix<f64>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    decode_lut(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_round_trip() {
        let p = MagnifyParams::new(0.0, 0.4, 0.05).unwrap();
        let w =
            OperatorMatrix::from_parts(Matrix::identity(3), OperatorRole::Fused, Some(p)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("id.mebw");
        write_lut(&w, &path).unwrap();
        assert_eq!(
            fs::metadata(&path).unwrap().len() as usize,
            LUT_HEADER_LEN + 9 * 8
        );
        assert_eq!(read_lut(&path).unwrap(), w);
    }

    #[test]
    fn bad_magic_and_version() {
        let w = OperatorMatrix::interpolation(3, 4).unwrap();
        let mut bytes = encode_lut(&w).unwrap();
        bytes[..4].copy_from_slice(b"XXXX");
        let err = decode_lut(&bytes).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
        assert!(err.to_string().contains("MEBW"));

        let mut bytes = encode_lut(&w).unwrap();
        bytes[4] = 2;
        assert!(matches!(decode_lut(&bytes), Err(Error::Format(_))));
        let mut bytes = encode_lut(&w).unwrap();
        bytes[8] = 9;
        assert!(matches!(decode_lut(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn truncated_payload_is_io_error() {
        let w = OperatorMatrix::fused(&MagnifyParams::default(), 5, 5).unwrap();
        let bytes = encode_lut(&w).unwrap();
        let short = &bytes[..LUT_HEADER_LEN + 24 * 8];
        assert!(matches!(decode_lut(short), Err(Error::Io { .. })));
        assert!(matches!(decode_lut(&bytes[..10]), Err(Error::Io { .. })));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode_lut(&long), Err(Error::Format(_))));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            read_lut("/nonexistent/x.mebw"),
            Err(Error::Io { .. })
        ));
    }
}
