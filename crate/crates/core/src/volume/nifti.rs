//! Minimal NIfTI-1 reader/writer.
//!
//! Reads single-file (`n+1`) and paired (`ni1`, `.hdr` + `.img`) volumes of
//! type uint8, int16, int32, float32 and float64 in either byte order, with
//! transparent gzip. Writes little-endian float32 single-file volumes.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use byteorder::{BigEndian, ByteOrder, LittleEndian, WriteBytesExt};
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{SourceType, Volume};
use crate::error::{Error, Result};

pub const HEADER_SIZE: usize = 348;
pub const VOX_OFFSET: usize = 352;

const DT_UINT8: i16 = 2;
const DT_INT16: i16 = 4;
const DT_INT32: i16 = 8;
const DT_FLOAT32: i16 = 16;
const DT_FLOAT64: i16 = 64;

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(&[0x1F, 0x8B]) {
        let mut out = Vec::new();
        GzDecoder::new(bytes.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::io(path, e))?;
        Ok(out)
    } else {
        Ok(bytes)
    }
}

struct Header {
    dims: [usize; 3],
    spacing: [f64; 3],
    datatype: i16,
    vox_offset: usize,
    slope: f64,
    inter: f64,
    paired: bool,
}

fn parse_header<E: ByteOrder>(h: &[u8]) -> Result<Header> {
    let dim: Vec<i16> = (0..8).map(|k| E::read_i16(&h[40 + 2 * k..])).collect();
    let ndim = dim[0];
    match ndim {
        3 => {}
        4 if dim[4] == 1 => {}
        4 => {
            return Err(Error::MalformedHeader(format!(
                "4D volume with {} frames is not supported",
                dim[4]
            )))
        }
        _ => {
            return Err(Error::MalformedHeader(format!(
                "dim[0] = {ndim}, expected 3 or 4"
            )))
        }
    }
    let mut dims = [0usize; 3];
    for a in 0..3 {
        let d = dim[a + 1];
        if d < 1 {
            return Err(Error::MalformedHeader(format!("dim[{}] = {d}", a + 1)));
        }
        dims[a] = d as usize;
    }
    let mut spacing = [1.0; 3];
    for (a, s) in spacing.iter_mut().enumerate() {
        let p = E::read_f32(&h[76 + 4 * (a + 1)..]).abs() as f64;
        // zero or garbage spacing is common in hand-made files
        if p > 0.0 && p.is_finite() {
            *s = p;
        }
    }
    let magic = &h[344..348];
    let paired = match magic {
        b"n+1\0" => false,
        b"ni1\0" => true,
        _ => return Err(Error::MalformedHeader("bad magic".into())),
    };
    let vox = E::read_f32(&h[108..]);
    let vox_offset = if paired {
        0
    } else {
        (vox.max(0.0) as usize).max(HEADER_SIZE)
    };
    Ok(Header {
        dims,
        spacing,
        datatype: E::read_i16(&h[70..]),
        vox_offset,
        slope: E::read_f32(&h[112..]) as f64,
        inter: E::read_f32(&h[116..]) as f64,
        paired,
    })
}

fn decode<E: ByteOrder>(datatype: i16, payload: &[u8], n: usize) -> Result<(Vec<f64>, SourceType)> {
    let (width, source) = match datatype {
        DT_UINT8 => (1, SourceType::UInt8),
        DT_INT16 => (2, SourceType::Int16),
        DT_INT32 => (4, SourceType::Int32),
        DT_FLOAT32 => (4, SourceType::Float32),
        DT_FLOAT64 => (8, SourceType::Float64),
        other => return Err(Error::UnsupportedDatatype(other)),
    };
    let expected = n * width;
    if payload.len() < expected {
        return Err(Error::PayloadSize {
            expected,
            actual: payload.len(),
        });
    }
    let p = &payload[..expected];
    let data = match source {
        SourceType::UInt8 => p.iter().map(|&b| b as f64).collect(),
        SourceType::Int16 => p.chunks_exact(2).map(|c| E::read_i16(c) as f64).collect(),
        SourceType::Int32 => p.chunks_exact(4).map(|c| E::read_i32(c) as f64).collect(),
        SourceType::Float32 => p.chunks_exact(4).map(|c| E::read_f32(c) as f64).collect(),
        SourceType::Float64 => p.chunks_exact(8).map(E::read_f64).collect(),
    };
    Ok((data, source))
}

fn paired_image_path(hdr: &Path) -> Result<PathBuf> {
    let name = hdr.to_string_lossy();
    let stem = name
        .strip_suffix(".hdr.gz")
        .or_else(|| name.strip_suffix(".hdr"))
        .ok_or_else(|| Error::MalformedHeader("ni1 header without .hdr name".into()))?;
    for ext in [".img", ".img.gz"] {
        let p = PathBuf::from(format!("{stem}{ext}"));
        if p.exists() {
            return Ok(p);
        }
    }
    Err(Error::io(
        format!("{stem}.img"),
        std::io::Error::new(std::io::ErrorKind::NotFound, "image file for ni1 header"),
    ))
}

/// Reads a NIfTI-1 volume. Integer data is returned unnormalized.
pub fn read_nifti(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let bytes = read_maybe_gz(path)?;
    if bytes.len() < HEADER_SIZE {
        return Err(Error::MalformedHeader(format!(
            "{} bytes, need {HEADER_SIZE}",
            bytes.len()
        )));
    }
    let h = &bytes[..HEADER_SIZE];
    let big_endian = match (LittleEndian::read_i32(h), BigEndian::read_i32(h)) {
        (348, _) => false,
        (_, 348) => true,
        _ => return Err(Error::MalformedHeader("sizeof_hdr is not 348".into())),
    };
    let header = if big_endian {
        parse_header::<BigEndian>(h)?
    } else {
        parse_header::<LittleEndian>(h)?
    };
    let n = header.dims.iter().product::<usize>();
    let image;
    let payload: &[u8] = if header.paired {
        image = read_maybe_gz(&paired_image_path(path)?)?;
        &image
    } else {
        if bytes.len() < header.vox_offset {
            return Err(Error::PayloadSize {
                expected: header.vox_offset,
                actual: bytes.len(),
            });
        }
        &bytes[header.vox_offset..]
    };
    let (mut data, source) = if big_endian {
        decode::<BigEndian>(header.datatype, payload, n)?
    } else {
        decode::<LittleEndian>(header.datatype, payload, n)?
    };
    if header.slope != 0.0
        && header.slope.is_finite()
        && (header.slope != 1.0 || header.inter != 0.0)
    {
        let (m, b) = (header.slope, header.inter);
        data.iter_mut().for_each(|x| *x = *x * m + b);
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(Error::Contract("volume contains NaN or Inf".into()));
    }
    Ok(Volume::new(header.dims, header.spacing, data)?.with_source_type(source))
}

/// Header plus payload for a float32 single-file volume.
pub fn encode_nifti(v: &Volume) -> Result<Vec<u8>> {
    let dims = v.dims();
    if dims.iter().any(|&d| d > i16::MAX as usize) {
        return Err(Error::Contract(format!(
            "dims {dims:?} exceed NIfTI-1 limits"
        )));
    }
    let mut h = vec![0u8; VOX_OFFSET];
    LittleEndian::write_i32(&mut h[0..], HEADER_SIZE as i32);
    h[38] = b'r';
    let dim = [
        3,
        dims[0] as i16,
        dims[1] as i16,
        dims[2] as i16,
        1,
        1,
        1,
        1,
    ];
    for (k, d) in dim.iter().enumerate() {
        LittleEndian::write_i16(&mut h[40 + 2 * k..], *d);
    }
    LittleEndian::write_i16(&mut h[70..], DT_FLOAT32);
    LittleEndian::write_i16(&mut h[72..], 32);
    let sp = v.spacing();
    let pixdim = [
        1.0f32,
        sp[0] as f32,
        sp[1] as f32,
        sp[2] as f32,
        1.0,
        1.0,
        1.0,
        1.0,
    ];
    for (k, p) in pixdim.iter().enumerate() {
        LittleEndian::write_f32(&mut h[76 + 4 * k..], *p);
    }
    LittleEndian::write_f32(&mut h[108..], VOX_OFFSET as f32);
    LittleEndian::write_f32(&mut h[112..], 1.0);
    h[123] = 2; // xyzt_units: mm
    h[344..348].copy_from_slice(b"n+1\0");

    let mut out = h;
    out.reserve(v.len() * 4);
    for &x in v.data() {
        out.write_f32::<LittleEndian>(x as f32).expect("vec write");
    }
    Ok(out)
}

/// Writes float32 NIfTI-1; gzip-compressed when the path ends in `.gz`.
pub fn write_nifti(v: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_nifti(v)?;
    let gz = path.extension().is_some_and(|e| e == "gz");
    let io = |e| Error::io(path, e);
    if gz {
        let file = fs::File::create(path).map_err(io)?;
        let mut enc = GzEncoder::new(std::io::BufWriter::new(file), Compression::default());
        enc.write_all(&bytes).map_err(io)?;
        enc.finish().map_err(io)?.flush().map_err(io)?;
    } else {
        fs::write(path, &bytes).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Volume {
        Volume::from_fn([4, 3, 2], [1.0, 0.5, 2.0], |x, y, z| {
            (x as f32 * 0.25 + y as f32 * 0.1 - z as f32) as f64
        })
        .unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = encode_nifti(&sample()).unwrap();
        assert_eq!(bytes.len(), VOX_OFFSET + 24 * 4);
        assert_eq!(LittleEndian::read_i32(&bytes), 348);
        assert_eq!(&bytes[344..348], b"n+1\0");
        assert_eq!(LittleEndian::read_f32(&bytes[108..]), 352.0);
        assert_eq!(LittleEndian::read_i16(&bytes[70..]), DT_FLOAT32);
    }

    #[test]
    fn round_trip_plain_and_gz() {
        let dir = tempfile::tempdir().unwrap();
        let v = sample();
        for name in ["a.nii", "a.nii.gz"] {
            let p = dir.path().join(name);
            write_nifti(&v, &p).unwrap();
            let back = read_nifti(&p).unwrap();
            assert_eq!(back.dims(), v.dims());
            assert_eq!(back.spacing(), v.spacing());
            assert_eq!(back.data(), v.data());
            assert_eq!(back.source_type(), SourceType::Float32);
        }
        let gz = fs::read(dir.path().join("a.nii.gz")).unwrap();
        assert_eq!(&gz[..2], &[0x1F, 0x8B]);
    }

    #[test]
    fn truncated_header_is_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("short.nii");
        fs::write(&p, vec![0u8; 100]).unwrap();
        let err = read_nifti(&p).unwrap_err();
        assert!(err.to_string().contains("malformed header"), "{err}");
    }

    #[test]
    fn short_payload_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("cut.nii");
        let bytes = encode_nifti(&sample()).unwrap();
        fs::write(&p, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(read_nifti(&p), Err(Error::PayloadSize { .. })));
    }

    fn hand_made<E: ByteOrder>(datatype: i16, payload: &[u8], dims: [i16; 4]) -> Vec<u8> {
        let mut h = vec![0u8; VOX_OFFSET];
        E::write_i32(&mut h[0..], 348);
        let ndim = if dims[3] > 0 { 4 } else { 3 };
        E::write_i16(&mut h[40..], ndim);
        for a in 0..4 {
            E::write_i16(&mut h[42 + 2 * a..], dims[a].max(1));
        }
        E::write_i16(&mut h[70..], datatype);
        E::write_f32(&mut h[80..], 1.5);
        E::write_f32(&mut h[84..], 1.5);
        E::write_f32(&mut h[88..], 1.5);
        E::write_f32(&mut h[108..], 352.0);
        h[344..348].copy_from_slice(b"n+1\0");
        h.extend_from_slice(payload);
        h
    }

    #[test]
    fn reads_uint8_and_big_endian_int16() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u8.nii");
        fs::write(
            &p,
            hand_made::<LittleEndian>(DT_UINT8, &[0, 128, 255, 7], [2, 2, 1, 1]),
        )
        .unwrap();
        let v = read_nifti(&p).unwrap();
        assert_eq!(v.dims(), [2, 2, 1]);
        assert_eq!(v.spacing(), [1.5; 3]);
        assert_eq!(v.data(), &[0.0, 128.0, 255.0, 7.0]);
        assert_eq!(v.source_type(), SourceType::UInt8);

        let mut payload = vec![0u8; 4];
        BigEndian::write_i16(&mut payload[0..], -3);
        BigEndian::write_i16(&mut payload[2..], 300);
        let p = dir.path().join("be.nii");
        fs::write(&p, hand_made::<BigEndian>(DT_INT16, &payload, [2, 1, 1, 0])).unwrap();
        let v = read_nifti(&p).unwrap();
        assert_eq!(v.data(), &[-3.0, 300.0]);
    }

    #[test]
    fn rejects_unsupported_datatype_and_4d() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.nii");
        fs::write(&p, hand_made::<LittleEndian>(32, &[0; 16], [1, 1, 1, 0])).unwrap();
        assert!(matches!(
            read_nifti(&p),
            Err(Error::UnsupportedDatatype(32))
        ));
        let p = dir.path().join("t.nii");
        fs::write(
            &p,
            hand_made::<LittleEndian>(DT_UINT8, &[0; 4], [1, 1, 1, 4]),
        )
        .unwrap();
        assert!(matches!(read_nifti(&p), Err(Error::MalformedHeader(_))));
    }

    #[test]
    fn applies_scale_and_offset() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.nii");
        let mut bytes = hand_made::<LittleEndian>(DT_UINT8, &[1, 2], [2, 1, 1, 0]);
        LittleEndian::write_f32(&mut bytes[112..], 2.0);
        LittleEndian::write_f32(&mut bytes[116..], 0.5);
        fs::write(&p, bytes).unwrap();
        assert_eq!(read_nifti(&p).unwrap().data(), &[2.5, 4.5]);
    }

    #[test]
    fn reads_paired_header_and_image() {
        let dir = tempfile::tempdir().unwrap();
        let mut hdr = hand_made::<LittleEndian>(DT_UINT8, &[], [2, 1, 1, 0]);
        hdr.truncate(HEADER_SIZE);
        hdr[344..348].copy_from_slice(b"ni1\0");
        fs::write(dir.path().join("pair.hdr"), hdr).unwrap();
        fs::write(dir.path().join("pair.img"), [9u8, 10]).unwrap();
        let v = read_nifti(dir.path().join("pair.hdr")).unwrap();
        assert_eq!(v.data(), &[9.0, 10.0]);
    }
}
