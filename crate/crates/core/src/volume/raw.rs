//! Raw sidecar format: `<name>.f32raw` holds little-endian float32 voxels in
//! x-fastest order and `<name>.json` holds `{"dims": [..], "spacing": [..]}`.

use std::fs;
use std::path::{Path, PathBuf};

use byteorder::{ByteOrder, LittleEndian};
use serde::{Deserialize, Serialize};

use super::{SourceType, Volume};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    dims: [usize; 3],
    spacing: [f64; 3],
}

fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let meta_path = sidecar_path(path);
    let meta = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let meta: Sidecar = serde_json::from_str(&meta)?;
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let n: usize = meta.dims.iter().product();
    if bytes.len() != n * 4 {
        return Err(Error::PayloadSize {
            expected: n * 4,
            actual: bytes.len(),
        });
    }
    let data = bytes
        .chunks_exact(4)
        .map(|c| LittleEndian::read_f32(c) as f64)
        .collect();
    Ok(Volume::new(meta.dims, meta.spacing, data)?.with_source_type(SourceType::Float32))
}

pub fn write_raw(v: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = vec![0u8; v.len() * 4];
    for (c, &x) in bytes.chunks_exact_mut(4).zip(v.data()) {
        LittleEndian::write_f32(c, x as f32);
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let meta = Sidecar {
        dims: v.dims(),
        spacing: v.spacing(),
    };
    let meta_path = sidecar_path(path);
    fs::write(&meta_path, serde_json::to_string(&meta)?).map_err(|e| Error::io(&meta_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raw_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.f32raw");
        let v = Volume::new([2, 2, 1], [1.0, 2.0, 3.0], vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        write_raw(&v, &p).unwrap();
        assert_eq!(fs::read(&p).unwrap().len(), 16);
        let back = read_raw(&p).unwrap();
        assert_eq!(back.dims(), v.dims());
        assert_eq!(back.spacing(), v.spacing());
        assert_eq!(back.data(), v.data());
    }
}
