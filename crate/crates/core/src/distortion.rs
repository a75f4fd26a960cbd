//! The six artifact simulators. Each returns the distorted volume together
//! with a [`DistortionRecord`] carrying the parameters and the analytic
//! ground-truth score in `[0, 1]`.
//!
//! Inputs must lie in `[0, 1]`; outputs are clipped back into that range.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter;
use crate::fixed;
use crate::metrics;
use crate::par;
use crate::seed;
use crate::spectral;
use crate::volume::{self, clamp_unit, Volume};

/// Edge length of the reference grid the parameter ranges refer to.
pub const REFERENCE_DIM: usize = 224;

pub const GAMMA_RANGE: (f64, f64) = (0.5, 2.0);
pub const BIAS_CENTER_RANGE: (f64, f64) = (1.0, 224.0);
pub const RING_CUTOFF_RANGE: (u32, u32) = (32, 224);
pub const GHOST_ALPHA_RANGE: (f64, f64) = (0.35, 1.0);
pub const NOISE_VARIANCE_RANGE: (f64, f64) = (1e-6, 1e-2);
pub const BLUR_SCALE_RANGE: (f64, f64) = (0.2, 2.0);
pub const BLUR_KERNEL_RANGE: (usize, usize) = (3, 11);
pub const BLUR_SIGMA_RANGE: (f64, f64) = (0.25, 5.0);

/// Artifact kinds in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistortionKind {
    Contrast,
    Bias,
    Ring,
    Ghost,
    Noise,
    Blur,
}

impl DistortionKind {
    pub const ALL: [DistortionKind; 6] = [
        DistortionKind::Contrast,
        DistortionKind::Bias,
        DistortionKind::Ring,
        DistortionKind::Ghost,
        DistortionKind::Noise,
        DistortionKind::Blur,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            DistortionKind::Contrast => "contrast",
            DistortionKind::Bias => "bias",
            DistortionKind::Ring => "ring",
            DistortionKind::Ghost => "ghost",
            DistortionKind::Noise => "noise",
            DistortionKind::Blur => "blur",
        }
    }
}

impl fmt::Display for DistortionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DistortionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DistortionKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Contract(format!("unknown distortion kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlurMode {
    /// Down/up-sample by `scale` and back with trilinear interpolation.
    Resample { scale: f64 },
    /// Separable Gaussian with an odd truncated kernel.
    Gaussian { kernel: usize, sigma: f64 },
}

/// Kind-specific parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistortionParams {
    Contrast {
        gamma: f64,
    },
    /// Field centre in 1-based coordinates of the 224 reference grid.
    Bias {
        center: [f64; 3],
    },
    Ring {
        cutoff: u32,
    },
    Ghost {
        alpha: f64,
        axis: usize,
    },
    /// Gaussian variance per channel; `seed` drives the noise generator.
    Noise {
        variance: f64,
        seed: u64,
    },
    Blur {
        mode: BlurMode,
    },
}

impl DistortionParams {
    pub fn kind(&self) -> DistortionKind {
        match self {
            DistortionParams::Contrast { .. } => DistortionKind::Contrast,
            DistortionParams::Bias { .. } => DistortionKind::Bias,
            DistortionParams::Ring { .. } => DistortionKind::Ring,
            DistortionParams::Ghost { .. } => DistortionKind::Ghost,
            DistortionParams::Noise { .. } => DistortionKind::Noise,
            DistortionParams::Blur { .. } => DistortionKind::Blur,
        }
    }

    /// Checks every parameter against its sampling range.
    pub fn validate(&self) -> Result<()> {
        fn within(
            name: &'static str,
            x: f64,
            (lo, hi): (f64, f64),
            range: &'static str,
        ) -> Result<()> {
            if x >= lo && x <= hi {
                Ok(())
            } else {
                Err(Error::param(name, x, range))
            }
        }
        match *self {
            DistortionParams::Contrast { gamma } => within("gamma", gamma, GAMMA_RANGE, "[0.5, 2]"),
            DistortionParams::Bias { center } => center
                .iter()
                .try_for_each(|&c| within("center", c, BIAS_CENTER_RANGE, "[1, 224]")),
            DistortionParams::Ring { cutoff } => {
                let (lo, hi) = RING_CUTOFF_RANGE;
                within("cutoff", cutoff as f64, (lo as f64, hi as f64), "[32, 224]")
            }
            DistortionParams::Ghost { alpha, axis } => {
                within("alpha", alpha, GHOST_ALPHA_RANGE, "[0.35, 1]")?;
                within("axis", axis as f64, (0.0, 2.0), "{0, 1, 2}")
            }
            DistortionParams::Noise { variance, .. } => {
                within("variance", variance, NOISE_VARIANCE_RANGE, "[1e-6, 1e-2]")
            }
            DistortionParams::Blur { mode } => match mode {
                BlurMode::Resample { scale } => {
                    within("scale", scale, BLUR_SCALE_RANGE, "[0.2, 2]")
                }
                BlurMode::Gaussian { kernel, sigma } => {
                    let (lo, hi) = BLUR_KERNEL_RANGE;
                    if kernel < lo || kernel > hi || kernel % 2 == 0 {
                        return Err(Error::param("kernel", kernel as f64, "odd in [3, 11]"));
                    }
                    within("sigma", sigma, BLUR_SIGMA_RANGE, "[0.25, 5]")
                }
            },
        }
    }
}

/// An applied artifact: what was done and the resulting ground-truth score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionRecord {
    pub params: DistortionParams,
    #[serde(with = "fixed::six")]
    pub score: f64,
}

impl DistortionRecord {
    pub fn kind(&self) -> DistortionKind {
        self.params.kind()
    }
}

fn record(params: DistortionParams, score: f64) -> DistortionRecord {
    DistortionRecord {
        params,
        score: score.clamp(0.0, 1.0),
    }
}

fn require_unit_range(v: &Volume) -> Result<()> {
    if v.in_unit_range() {
        Ok(())
    } else {
        Err(Error::Contract("input volume must lie in [0, 1]".into()))
    }
}

/// Gamma contrast change `J = I^γ`, scored by the standard deviation ratio.
pub fn apply_contrast(v: &Volume, gamma: f64) -> Result<(Volume, DistortionRecord)> {
    let params = DistortionParams::Contrast { gamma };
    params.validate()?;
    require_unit_range(v)?;
    let out = v.map(|x| if x <= 0.0 { 0.0 } else { x.powf(gamma) });
    let score = metrics::sdr_from_std(volume::stats(v).std, volume::stats(&out).std, Some(gamma));
    Ok((out, record(params, score)))
}

/// Multiplicative field `Σ ((p - c) / R)^2` on the 1..=224 grid, `R = 224`.
///
/// Volumes of other sizes map their voxel grid linearly onto 1..=224 per
/// axis, which rescales the radii proportionally.
pub fn bias_field(dims: [usize; 3], center: [f64; 3]) -> Vec<f64> {
    let r = REFERENCE_DIM as f64;
    let axis_terms: [Vec<f64>; 3] = std::array::from_fn(|a| {
        let n = dims[a];
        (0..n)
            .map(|p| {
                let q = if n > 1 {
                    1.0 + p as f64 * (r - 1.0) / (n - 1) as f64
                } else {
                    1.0
                };
                ((q - center[a]) / r).powi(2)
            })
            .collect()
    });
    let [nx, ny, _] = dims;
    par::map_indexed(dims.iter().product(), |i| {
        axis_terms[0][i % nx] + axis_terms[1][(i / nx) % ny] + axis_terms[2][i / (nx * ny)]
    })
}

/// Elliptic bias field, renormalized by its maximum and scored by CVR.
pub fn apply_bias_field(v: &Volume, center: [f64; 3]) -> Result<(Volume, DistortionRecord)> {
    let params = DistortionParams::Bias { center };
    params.validate()?;
    require_unit_range(v)?;
    let field = bias_field(v.dims(), center);
    let src = v.data();
    let biased = par::map_indexed(src.len(), |i| src[i] * field[i]);
    let (_, max) = par::min_max_indexed(biased.len(), |i| biased[i]).expect("non-empty");
    let out = if max > 0.0 {
        v.with_data(par::map_slice(&biased, |&x| clamp_unit(x / max)))
    } else {
        v.with_data(biased)
    };
    let score = metrics::cvr(v, &out)?;
    Ok((out, record(params, score)))
}

/// Side of the retained centered k-space cube for a volume axis of length `n`.
pub fn ring_band_side(cutoff: u32, n: usize) -> usize {
    if n == REFERENCE_DIM {
        return cutoff as usize;
    }
    let s = (cutoff as f64 * n as f64 / REFERENCE_DIM as f64).round() as usize;
    s.clamp(1, n)
}

/// Gibbs ringing: zero k-space outside a centered cube of side `cutoff`
/// (scaled to the volume size when it is not 224). Score `cutoff / 224`.
pub fn apply_gibbs_ringing(v: &Volume, cutoff: u32) -> Result<(Volume, DistortionRecord)> {
    let params = DistortionParams::Ring { cutoff };
    params.validate()?;
    require_unit_range(v)?;
    let dims = v.dims();
    let mut k = spectral::fft3_centered(v);
    let band: [(usize, usize); 3] = std::array::from_fn(|a| {
        let side = ring_band_side(cutoff, dims[a]);
        let lo = dims[a] / 2 - side / 2;
        (lo, lo + side)
    });
    let inside = |p: usize, a: usize| p >= band[a].0 && p < band[a].1;
    k.apply_weights(|x, y, z| {
        if inside(x, 0) && inside(y, 1) && inside(z, 2) {
            1.0
        } else {
            0.0
        }
    });
    let out = spectral::ifft3_centered(&k).clamp_unit();
    Ok((out, record(params, cutoff as f64 / REFERENCE_DIM as f64)))
}

/// Motion ghosting: scale every odd-indexed centered k-space plane
/// perpendicular to `axis` by `alpha`. Score `alpha`.
pub fn apply_motion_ghosting(
    v: &Volume,
    alpha: f64,
    axis: usize,
) -> Result<(Volume, DistortionRecord)> {
    let params = DistortionParams::Ghost { alpha, axis };
    params.validate()?;
    require_unit_range(v)?;
    let mut k = spectral::fft3_centered(v);
    k.apply_weights(|x, y, z| if [x, y, z][axis] % 2 == 1 { alpha } else { 1.0 });
    let out = spectral::ifft3_centered(&k).clamp_unit();
    Ok((out, record(params, alpha)))
}

/// Rician noise `J = sqrt((I + n1)^2 + n2^2)`, with `n1, n2 ~ N(0, variance)`
/// drawn voxel by voxel from `rng`. Scored by PSNR / 100.
pub fn apply_rician_noise<R: Rng + ?Sized>(
    v: &Volume,
    variance: f64,
    rng: &mut R,
) -> Result<(Volume, DistortionRecord)> {
    let std = variance.sqrt();
    apply_rician_noise_with(v, variance, || {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        (a * std, b * std)
    })
}

/// [`apply_rician_noise`] with noise pairs supplied by `noise`, called once
/// per voxel in storage order. The recorded seed is 0.
pub fn apply_rician_noise_with<F>(
    v: &Volume,
    variance: f64,
    mut noise: F,
) -> Result<(Volume, DistortionRecord)>
where
    F: FnMut() -> (f64, f64),
{
    rician(v, variance, 0, &mut noise)
}

fn rician(
    v: &Volume,
    variance: f64,
    seed: u64,
    noise: &mut dyn FnMut() -> (f64, f64),
) -> Result<(Volume, DistortionRecord)> {
    let params = DistortionParams::Noise { variance, seed };
    params.validate()?;
    require_unit_range(v)?;
    let data = v
        .data()
        .iter()
        .map(|&x| {
            let (n1, n2) = noise();
            clamp_unit((x + n1).hypot(n2))
        })
        .collect();
    let out = v.with_data(data);
    let score = metrics::psnr_score(v, &out)?;
    Ok((out, record(params, score)))
}

/// Blur by resampling or Gaussian smoothing, scored by the ratio of
/// significant k-space components.
pub fn apply_blur(v: &Volume, mode: BlurMode) -> Result<(Volume, DistortionRecord)> {
    let params = DistortionParams::Blur { mode };
    params.validate()?;
    require_unit_range(v)?;
    let out = match mode {
        BlurMode::Resample { scale } => {
            let dims = v.dims();
            let small = dims.map(|d| ((d as f64 * scale).round() as usize).max(1));
            let down = volume::resample_to_dims(v, small)?;
            volume::resample_to_dims(&down, dims)?.with_spacing(v.spacing())
        }
        BlurMode::Gaussian { kernel, sigma } => {
            let k = filter::gaussian_kernel(kernel, sigma)?;
            v.with_data(filter::convolve_same(v.data(), v.dims(), &k))
        }
    }
    .clamp_unit();
    let score = if v.data().iter().all(|&x| x == 0.0) {
        1.0
    } else {
        metrics::hf_ratio(v, &out)?
    };
    Ok((out, record(params, score)))
}

/// Applies any parameter set. Noise draws from a generator seeded by its
/// recorded seed.
pub fn apply(v: &Volume, params: &DistortionParams) -> Result<(Volume, DistortionRecord)> {
    match *params {
        DistortionParams::Contrast { gamma } => apply_contrast(v, gamma),
        DistortionParams::Bias { center } => apply_bias_field(v, center),
        DistortionParams::Ring { cutoff } => apply_gibbs_ringing(v, cutoff),
        DistortionParams::Ghost { alpha, axis } => apply_motion_ghosting(v, alpha, axis),
        DistortionParams::Noise { variance, seed } => {
            let mut rng = seed::rng_from_seed(seed);
            let std = variance.sqrt();
            rician(v, variance, seed, &mut || {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                (a * std, b * std)
            })
        }
        DistortionParams::Blur { mode } => apply_blur(v, mode),
    }
}

/// Draws parameters uniformly from the kind's range.
///
/// The noise variance is drawn log-uniformly over its four decades.
pub fn sample_params<R: Rng + ?Sized>(kind: DistortionKind, rng: &mut R) -> DistortionParams {
    match kind {
        DistortionKind::Contrast => DistortionParams::Contrast {
            gamma: rng.random_range(GAMMA_RANGE.0..=GAMMA_RANGE.1),
        },
        DistortionKind::Bias => DistortionParams::Bias {
            center: std::array::from_fn(|_| {
                rng.random_range(BIAS_CENTER_RANGE.0..=BIAS_CENTER_RANGE.1)
            }),
        },
        DistortionKind::Ring => DistortionParams::Ring {
            cutoff: rng.random_range(RING_CUTOFF_RANGE.0..=RING_CUTOFF_RANGE.1),
        },
        DistortionKind::Ghost => DistortionParams::Ghost {
            alpha: rng.random_range(GHOST_ALPHA_RANGE.0..=GHOST_ALPHA_RANGE.1),
            axis: rng.random_range(0..3),
        },
        DistortionKind::Noise => {
            let (lo, hi) = NOISE_VARIANCE_RANGE;
            let e = rng.random_range(lo.log10()..=hi.log10());
            DistortionParams::Noise {
                variance: 10f64.powf(e).clamp(lo, hi),
                seed: rng.random(),
            }
        }
        DistortionKind::Blur => {
            let mode = if rng.random_bool(0.5) {
                BlurMode::Resample {
                    scale: rng.random_range(BLUR_SCALE_RANGE.0..=BLUR_SCALE_RANGE.1),
                }
            } else {
                let (lo, hi) = BLUR_KERNEL_RANGE;
                BlurMode::Gaussian {
                    kernel: lo + 2 * rng.random_range(0..=(hi - lo) / 2),
                    sigma: rng.random_range(BLUR_SIGMA_RANGE.0..=BLUR_SIGMA_RANGE.1),
                }
            };
            DistortionParams::Blur { mode }
        }
    }
}
