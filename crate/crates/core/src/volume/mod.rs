//! 3D intensity volumes, intensity normalization, resampling, padding and
//! file I/O.
//!
//! Voxels are stored x-fastest (`index = x + nx * (y + ny * z)`), matching
//! NIfTI on-disk order. Values are kept in `f64`; files are written as
//! little-endian `float32`.

mod interp;
mod nifti;
mod raw;

use std::path::Path;

use crate::error::{Error, Result};
use crate::par;

pub use interp::{sample_trilinear, AxisTable};
pub use nifti::{read_nifti, write_nifti};
pub use raw::{read_raw, write_raw};

/// Scalar type a volume was loaded from; drives [`normalize_intensity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceType {
    UInt8,
    Int16,
    Int32,
    Float32,
    Float64,
}

impl SourceType {
    /// Largest representable value for integer types.
    pub fn integer_max(self) -> Option<f64> {
        match self {
            SourceType::UInt8 => Some(u8::MAX as f64),
            SourceType::Int16 => Some(i16::MAX as f64),
            SourceType::Int32 => Some(i32::MAX as f64),
            SourceType::Float32 | SourceType::Float64 => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SourceType::UInt8 => "uint8",
            SourceType::Int16 => "int16",
            SourceType::Int32 => "int32",
            SourceType::Float32 => "float32",
            SourceType::Float64 => "float64",
        }
    }
}

/// A 3D scalar grid with voxel spacing in millimetres.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    dims: [usize; 3],
    spacing: [f64; 3],
    data: Vec<f64>,
    source: SourceType,
}

/// Population mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeStats {
    pub mean: f64,
    pub std: f64,
}

impl Volume {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], data: Vec<f64>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Contract(format!(
                "dims must be positive, got {dims:?}"
            )));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Contract(format!(
                "spacing must be positive, got {spacing:?}"
            )));
        }
        let n = dims[0] * dims[1] * dims[2];
        if data.len() != n {
            return Err(Error::Contract(format!(
                "dims {dims:?} need {n} voxels, got {}",
                data.len()
            )));
        }
        Ok(Volume {
            dims,
            spacing,
            data,
            source: SourceType::Float64,
        })
    }

    pub fn zeros(dims: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        let n = dims.iter().product();
        Self::new(dims, spacing, vec![0.0; n])
    }

    /// Builds a volume by evaluating `f(x, y, z)` at every voxel.
    pub fn from_fn<F>(dims: [usize; 3], spacing: [f64; 3], f: F) -> Result<Self>
    where
        F: Fn(usize, usize, usize) -> f64 + Sync + Send,
    {
        let n: usize = dims.iter().product();
        let [nx, ny, _] = dims;
        let data = par::map_indexed(n, |i| f(i % nx, (i / nx) % ny, i / (nx * ny)));
        Self::new(dims, spacing, data)
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn source_type(&self) -> SourceType {
        self.source
    }

    pub fn with_source_type(mut self, source: SourceType) -> Self {
        self.source = source;
        self
    }

    pub fn with_spacing(mut self, spacing: [f64; 3]) -> Self {
        self.spacing = spacing;
        self
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coords(&self, i: usize) -> [usize; 3] {
        let [nx, ny, _] = self.dims;
        [i % nx, (i / nx) % ny, i / (nx * ny)]
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.data[self.index(x, y, z)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, value: f64) {
        let i = self.index(x, y, z);
        self.data[i] = value;
    }

    /// Same geometry with new voxel data.
    pub fn with_data(&self, data: Vec<f64>) -> Volume {
        assert_eq!(data.len(), self.data.len(), "voxel count must match");
        Volume {
            dims: self.dims,
            spacing: self.spacing,
            data,
            source: SourceType::Float64,
        }
    }

    /// Elementwise map, keeping geometry.
    pub fn map<F>(&self, f: F) -> Volume
    where
        F: Fn(f64) -> f64 + Sync + Send,
    {
        self.with_data(par::map_slice(&self.data, |&x| f(x)))
    }

    pub fn min_max(&self) -> (f64, f64) {
        par::min_max_indexed(self.data.len(), |i| self.data[i]).expect("volume is never empty")
    }

    pub fn is_finite(&self) -> bool {
        par::count_indexed(self.data.len(), |i| !self.data[i].is_finite()) == 0
    }

    /// True when every voxel is finite and within `[0, 1]`.
    pub fn in_unit_range(&self) -> bool {
        par::count_indexed(self.data.len(), |i| !(0.0..=1.0).contains(&self.data[i])) == 0
    }

    pub fn clamp_unit(&self) -> Volume {
        self.map(clamp_unit)
    }

    pub fn ensure_same_dims(&self, other: &Volume) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(self.dims, other.dims));
        }
        Ok(())
    }

    pub fn sum(&self) -> f64 {
        par::sum_indexed(self.data.len(), |i| self.data[i])
    }

    pub fn stats(&self) -> VolumeStats {
        stats(self)
    }
}

/// Clamps to `[0, 1]`, mapping NaN to 0.
#[inline]
pub fn clamp_unit(x: f64) -> f64 {
    if x > 0.0 {
        x.min(1.0)
    } else {
        0.0
    }
}

/// Loads a NIfTI-1 (`.nii`, `.nii.gz`, `.hdr`/`.img`) or raw `.f32raw` volume.
pub fn load_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    if is_raw_path(path) {
        read_raw(path)
    } else {
        read_nifti(path)
    }
}

/// Writes float32 NIfTI-1 (gzip when the name ends in `.gz`) or raw `.f32raw`.
pub fn save_volume(v: &Volume, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if is_raw_path(path) {
        write_raw(v, path)
    } else {
        write_nifti(v, path)
    }
}

fn is_raw_path(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "f32raw")
}

/// Maps intensities to `[0, 1]`.
///
/// Integer sources are divided by their type maximum, real sources are
/// min-max rescaled, and constant real volumes become all zeros.
pub fn normalize_intensity(v: &Volume) -> Volume {
    let out = match v.source.integer_max() {
        Some(max) => v.map(|x| clamp_unit(x / max)),
        None => {
            let (lo, hi) = v.min_max();
            let range = hi - lo;
            if range > 0.0 && range.is_finite() {
                v.map(|x| clamp_unit((x - lo) / range))
            } else {
                v.map(|_| 0.0)
            }
        }
    };
    out.with_spacing(v.spacing)
}

/// Trilinear resampling to isotropic `target_spacing` millimetres.
pub fn resample_isotropic(v: &Volume, target_spacing: f64) -> Result<Volume> {
    if !(target_spacing > 0.0 && target_spacing.is_finite()) {
        return Err(Error::param("target_spacing", target_spacing, "(0, inf)"));
    }
    let mut dims = [0usize; 3];
    let mut scale = [0.0; 3];
    for a in 0..3 {
        let extent = v.dims[a] as f64 * v.spacing[a];
        dims[a] = (extent / target_spacing).round() as usize;
        if dims[a] == 0 {
            return Err(Error::Contract(format!(
                "resampling axis {a} to {target_spacing} mm leaves no voxels"
            )));
        }
        scale[a] = target_spacing / v.spacing[a];
    }
    Ok(resample_with_scale(v, dims, scale, [target_spacing; 3]))
}

/// Trilinear resampling to explicit dims, stretching the field of view to fit.
pub fn resample_to_dims(v: &Volume, dims: [usize; 3]) -> Result<Volume> {
    if dims.contains(&0) {
        return Err(Error::Contract(format!(
            "target dims must be positive, got {dims:?}"
        )));
    }
    let mut scale = [0.0; 3];
    let mut spacing = [0.0; 3];
    for a in 0..3 {
        scale[a] = v.dims[a] as f64 / dims[a] as f64;
        spacing[a] = v.spacing[a] * scale[a];
    }
    Ok(resample_with_scale(v, dims, scale, spacing))
}

/// Output voxel `i` samples input coordinate `(i + 0.5) * scale - 0.5` per axis.
fn resample_with_scale(v: &Volume, dims: [usize; 3], scale: [f64; 3], spacing: [f64; 3]) -> Volume {
    if dims == v.dims && scale == [1.0; 3] {
        return v.clone().with_spacing(spacing).with_source_type(v.source);
    }
    let tables: [AxisTable; 3] = std::array::from_fn(|a| {
        AxisTable::new(v.dims[a], dims[a], |i| (i as f64 + 0.5) * scale[a] - 0.5)
    });
    let [nx, ny, _] = dims;
    let n = dims.iter().product();
    let data = par::map_indexed(n, |i| {
        let (x, y, z) = (i % nx, (i / nx) % ny, i / (nx * ny));
        interp::separable_sample(v, &tables, x, y, z)
    });
    Volume {
        dims,
        spacing,
        data,
        source: SourceType::Float64,
    }
}

/// Zero-pads (surplus voxel on the high side) and center-crops to `target` per axis.
pub fn pad_center_crop(v: &Volume, target: usize) -> Result<Volume> {
    if target == 0 {
        return Err(Error::param("target", 0.0, "[1, inf)"));
    }
    if v.dims == [target; 3] {
        return Ok(v.clone());
    }
    // offset[a]: input coordinate = output coordinate + offset[a]
    let offset: [isize; 3] = std::array::from_fn(|a| {
        let n = v.dims[a] as isize;
        let t = target as isize;
        if n < t {
            -((t - n) / 2)
        } else {
            (n - t) / 2
        }
    });
    let out = Volume::from_fn([target; 3], v.spacing, |x, y, z| {
        let src = [
            x as isize + offset[0],
            y as isize + offset[1],
            z as isize + offset[2],
        ];
        if (0..3).all(|a| src[a] >= 0 && (src[a] as usize) < v.dims[a]) {
            v.get(src[0] as usize, src[1] as usize, src[2] as usize)
        } else {
            0.0
        }
    })?;
    Ok(out)
}

/// Population mean and standard deviation (two-pass).
pub fn stats(v: &Volume) -> VolumeStats {
    let n = v.data.len() as f64;
    let mean = par::sum_indexed(v.data.len(), |i| v.data[i]) / n;
    let var = par::sum_indexed(v.data.len(), |i| {
        let d = v.data[i] - mean;
        d * d
    }) / n;
    VolumeStats {
        mean,
        std: var.max(0.0).sqrt(),
    }
}
