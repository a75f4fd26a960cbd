//! Geometric and shape augmentations. None of them change quality targets.
//!
//! [`random_augment`] samples an [`AugmentSpec`] and applies it in the fixed
//! order skull-strip, elastic, rotate, translate, flip.

pub mod morphology;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter;
use crate::par;
use crate::seed::{self, SeededRng};
use crate::volume::{sample_trilinear, Volume};

pub const TRANSLATION_RANGE: (i32, i32) = (-10, 10);
pub const ROTATION_RANGE_DEG: (f64, f64) = (-10.0, 10.0);
pub const ELASTIC_SIGMA_RANGE: (f64, f64) = (20.0, 30.0);
pub const ELASTIC_SCALE_RANGE: (f64, f64) = (200.0, 500.0);
pub const STRIP_RADIUS_RANGE: (usize, usize) = (1, 5);
/// Skull-strip threshold as a fraction of the volume maximum.
pub const STRIP_THRESHOLD_FRACTION: f64 = 0.1;
/// Gaussian truncation for displacement smoothing, in standard deviations.
pub const ELASTIC_TRUNCATE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticSpec {
    pub sigma: f64,
    pub scale: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkullStripSpec {
    pub threshold: f64,
    pub radius: usize,
    pub seed: u64,
}

/// Augmentations applied to one sample; `None` means not applied.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentSpec {
    pub skull_strip: Option<SkullStripSpec>,
    pub elastic: Option<ElasticSpec>,
    pub rotation: Option<[f64; 3]>,
    pub translation: Option<[i32; 3]>,
    pub flip_axes: Vec<usize>,
}

impl AugmentSpec {
    pub fn identity() -> Self {
        AugmentSpec::default()
    }

    pub fn is_identity(&self) -> bool {
        *self == AugmentSpec::default()
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.skull_strip {
            check_strip(s.threshold, s.radius)?;
        }
        if let Some(e) = self.elastic {
            check_elastic(e.sigma, e.scale)?;
        }
        if let Some(r) = self.rotation {
            for a in r {
                if !(ROTATION_RANGE_DEG.0..=ROTATION_RANGE_DEG.1).contains(&a) {
                    return Err(Error::param("rotation", a, "[-10, 10] degrees"));
                }
            }
        }
        if let Some(t) = self.translation {
            for o in t {
                if !(TRANSLATION_RANGE.0..=TRANSLATION_RANGE.1).contains(&o) {
                    return Err(Error::param("translation", o as f64, "[-10, 10]"));
                }
            }
        }
        if let Some(&a) = self.flip_axes.iter().find(|&&a| a > 2) {
            return Err(Error::param("flip_axis", a as f64, "{0, 1, 2}"));
        }
        Ok(())
    }
}

fn check_strip(threshold: f64, radius: usize) -> Result<()> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::param("threshold", threshold, "(0, 1)"));
    }
    if !(STRIP_RADIUS_RANGE.0..=STRIP_RADIUS_RANGE.1).contains(&radius) {
        return Err(Error::param("dilate_radius", radius as f64, "[1, 5]"));
    }
    Ok(())
}

fn check_elastic(sigma: f64, scale: f64) -> Result<()> {
    if !(ELASTIC_SIGMA_RANGE.0..=ELASTIC_SIGMA_RANGE.1).contains(&sigma) {
        return Err(Error::param("sigma", sigma, "[20, 30]"));
    }
    if scale != 0.0 && !(ELASTIC_SCALE_RANGE.0..=ELASTIC_SCALE_RANGE.1).contains(&scale) {
        return Err(Error::param("scale", scale, "[200, 500] or 0"));
    }
    Ok(())
}

/// Integer voxel shift with zero fill: output `p` takes input `p - offset`.
pub fn translate(v: &Volume, offsets: [i32; 3]) -> Volume {
    let dims = v.dims();
    let data = par::map_indexed(v.len(), |i| {
        let p = v.coords(i);
        let mut src = [0usize; 3];
        for a in 0..3 {
            let s = p[a] as i64 - offsets[a] as i64;
            if s < 0 || s >= dims[a] as i64 {
                return 0.0;
            }
            src[a] = s as usize;
        }
        v.get(src[0], src[1], src[2])
    });
    v.with_data(data).with_spacing(v.spacing())
}

fn rotation_matrix(angles_deg: [f64; 3]) -> [[f64; 3]; 3] {
    let [ax, ay, az] = angles_deg.map(f64::to_radians);
    let rx = [
        [1.0, 0.0, 0.0],
        [0.0, ax.cos(), -ax.sin()],
        [0.0, ax.sin(), ax.cos()],
    ];
    let ry = [
        [ay.cos(), 0.0, ay.sin()],
        [0.0, 1.0, 0.0],
        [-ay.sin(), 0.0, ay.cos()],
    ];
    let rz = [
        [az.cos(), -az.sin(), 0.0],
        [az.sin(), az.cos(), 0.0],
        [0.0, 0.0, 1.0],
    ];
    matmul(rz, matmul(ry, rx))
}

fn matmul(a: [[f64; 3]; 3], b: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

/// Rotation about the volume centre, applied about x, then y, then z, with
/// trilinear resampling and zero fill.
pub fn rotate(v: &Volume, angles_deg: [f64; 3]) -> Volume {
    if angles_deg == [0.0; 3] {
        return v.clone();
    }
    let r = rotation_matrix(angles_deg);
    let c = v.dims().map(|n| (n as f64 - 1.0) / 2.0);
    let data = par::map_indexed(v.len(), |i| {
        let p = v.coords(i);
        let d = [p[0] as f64 - c[0], p[1] as f64 - c[1], p[2] as f64 - c[2]];
        // inverse rotation (transpose) maps output to input
        let src: [f64; 3] =
            std::array::from_fn(|a| c[a] + (0..3).map(|k| r[k][a] * d[k]).sum::<f64>());
        sample_trilinear(v, src)
    });
    v.with_data(data).with_spacing(v.spacing())
}

/// Exact index reversal along `axis`.
pub fn flip(v: &Volume, axis: usize) -> Volume {
    assert!(axis < 3, "flip axis must be 0, 1 or 2");
    let n = v.dims()[axis];
    let data = par::map_indexed(v.len(), |i| {
        let mut p = v.coords(i);
        p[axis] = n - 1 - p[axis];
        v.get(p[0], p[1], p[2])
    });
    v.with_data(data).with_spacing(v.spacing())
}

/// Smoothed random displacement field: uniform `[-1, 1]` per voxel and
/// component, Gaussian-smoothed (truncated at 4σ, zero padded) and scaled.
pub fn displacement_field(
    dims: [usize; 3],
    sigma: f64,
    scale: f64,
    rng: &mut SeededRng,
) -> Result<[Vec<f64>; 3]> {
    let n: usize = dims.iter().product();
    let kernel = filter::gaussian_kernel_truncated(sigma, ELASTIC_TRUNCATE)?;
    let raw: [Vec<f64>; 3] =
        std::array::from_fn(|_| (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect());
    Ok(raw.map(|f| {
        let mut s = filter::convolve_same(&f, dims, &kernel);
        s.iter_mut().for_each(|x| *x *= scale);
        s
    }))
}

/// Elastic deformation: sample the input at identity grid + displacement.
pub fn elastic_deform(v: &Volume, sigma: f64, scale: f64, rng: &mut SeededRng) -> Result<Volume> {
    check_elastic(sigma, scale)?;
    let field = displacement_field(v.dims(), sigma, scale, rng)?;
    if scale == 0.0 {
        return Ok(v.clone());
    }
    let data = par::map_indexed(v.len(), |i| {
        let p = v.coords(i);
        let src = [
            p[0] as f64 + field[0][i],
            p[1] as f64 + field[1][i],
            p[2] as f64 + field[2][i],
        ];
        sample_trilinear(v, src)
    });
    Ok(v.with_data(data).with_spacing(v.spacing()))
}

/// Result of [`skull_strip_crop`].
#[derive(Debug, Clone, PartialEq)]
pub struct StripOutcome {
    pub volume: Volume,
    /// False when the mask was empty after opening and the input was returned.
    pub applied: bool,
}

/// Threshold, open, keep the largest component, dilate by `dilate_radius`,
/// then crop to the component's bounding box widened by a random margin of
/// `0..=dilate_radius` voxels per face. Voxels outside are zeroed.
pub fn skull_strip_crop(
    v: &Volume,
    threshold: f64,
    dilate_radius: usize,
    rng: &mut SeededRng,
) -> Result<StripOutcome> {
    check_strip(threshold, dilate_radius)?;
    let dims = v.dims();
    let data = v.data();
    let mask: Vec<bool> = data.iter().map(|&x| x > threshold).collect();
    let opened = morphology::open(&mask, dims);
    let core = morphology::largest_component(&opened, dims);
    let Some((lo, hi)) = morphology::bounding_box(&core, dims) else {
        return Ok(StripOutcome {
            volume: v.clone(),
            applied: false,
        });
    };
    let mut grown = core;
    for _ in 0..dilate_radius {
        grown = morphology::dilate(&grown, dims);
    }
    let mut box_lo = [0usize; 3];
    let mut box_hi = [0usize; 3];
    for a in 0..3 {
        let below = rng.random_range(0..=dilate_radius);
        let above = rng.random_range(0..=dilate_radius);
        box_lo[a] = lo[a].saturating_sub(below);
        box_hi[a] = (hi[a] + above).min(dims[a] - 1);
    }
    let out = par::map_indexed(data.len(), |i| {
        let p = v.coords(i);
        let in_box = (0..3).all(|a| p[a] >= box_lo[a] && p[a] <= box_hi[a]);
        if grown[i] && in_box {
            data[i]
        } else {
            0.0
        }
    });
    Ok(StripOutcome {
        volume: v.with_data(out).with_spacing(v.spacing()),
        applied: true,
    })
}

/// Draws an augmentation spec; each augmentation is included with
/// probability 1/2 and parameters are uniform in their ranges.
pub fn sample_augment(v: &Volume, rng: &mut SeededRng) -> AugmentSpec {
    let mut spec = AugmentSpec::default();
    if rng.random_bool(0.5) {
        let max = v.min_max().1;
        let threshold = STRIP_THRESHOLD_FRACTION * max;
        let radius = rng.random_range(STRIP_RADIUS_RANGE.0..=STRIP_RADIUS_RANGE.1);
        let seed = rng.random();
        if threshold > 0.0 && threshold < 1.0 {
            spec.skull_strip = Some(SkullStripSpec {
                threshold,
                radius,
                seed,
            });
        }
    }
    if rng.random_bool(0.5) {
        spec.elastic = Some(ElasticSpec {
            sigma: rng.random_range(ELASTIC_SIGMA_RANGE.0..=ELASTIC_SIGMA_RANGE.1),
            scale: rng.random_range(ELASTIC_SCALE_RANGE.0..=ELASTIC_SCALE_RANGE.1),
            seed: rng.random(),
        });
    }
    if rng.random_bool(0.5) {
        spec.rotation = Some(std::array::from_fn(|_| {
            rng.random_range(ROTATION_RANGE_DEG.0..=ROTATION_RANGE_DEG.1)
        }));
    }
    if rng.random_bool(0.5) {
        spec.translation = Some(std::array::from_fn(|_| {
            rng.random_range(TRANSLATION_RANGE.0..=TRANSLATION_RANGE.1)
        }));
    }
    if rng.random_bool(0.5) {
        spec.flip_axes = (0..3).filter(|_| rng.random_bool(0.5)).collect();
    }
    spec
}

/// Applies a spec in the fixed order skull-strip, elastic, rotate,
/// translate, flip.
pub fn apply_augment(v: &Volume, spec: &AugmentSpec) -> Result<Volume> {
    spec.validate()?;
    let mut out = v.clone();
    if let Some(s) = spec.skull_strip {
        out = skull_strip_crop(
            &out,
            s.threshold,
            s.radius,
            &mut seed::rng_from_seed(s.seed),
        )?
        .volume;
    }
    if let Some(e) = spec.elastic {
        out = elastic_deform(&out, e.sigma, e.scale, &mut seed::rng_from_seed(e.seed))?;
    }
    if let Some(r) = spec.rotation {
        out = rotate(&out, r);
    }
    if let Some(t) = spec.translation {
        out = translate(&out, t);
    }
    for &axis in &spec.flip_axes {
        out = flip(&out, axis);
    }
    Ok(out.clamp_unit())
}

/// Samples and applies a random augmentation.
pub fn random_augment(v: &Volume, rng: &mut SeededRng) -> Result<(Volume, AugmentSpec)> {
    let spec = sample_augment(v, rng);
    let out = apply_augment(v, &spec)?;
    Ok((out, spec))
}
