//! Reference-based quality scores, baseline SSIM/PSNR, the focal MSE loss
//! and score aggregation.
//!
//! Every ratio score is clipped to `[0, 1]`. Degenerate denominators (a
//! constant reference, zero mean) score 1.

use serde::{Deserialize, Serialize};

use crate::distortion::DistortionKind;
use crate::error::{Error, Result};
use crate::filter;
use crate::fixed;
use crate::par;
use crate::spectral::{self, KSpace};
use crate::volume::{self, Volume};

/// Fraction of the peak k-space magnitude above which a bin counts as a
/// significant frequency component.
pub const HF_THRESHOLD_FRACTION: f64 = 1e-3;

/// Bins below this fraction of the reference peak are ignored when
/// recovering the ghost modulation factor.
pub const GHOST_SIGNIFICANCE: f64 = 1e-9;

/// An even-sided band keeps one coefficient of a conjugate pair at its edge;
/// the real part of the inverse transform leaves a quarter of the energy at
/// both `±k`, so the edge threshold sits below 1/4.
pub const RING_KEEP_FRACTION: f64 = 0.2;
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Six per-artifact quality scores in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityVector {
    #[serde(with = "fixed::six")]
    pub contrast: f64,
    #[serde(with = "fixed::six")]
    pub bias: f64,
    #[serde(with = "fixed::six")]
    pub ring: f64,
    #[serde(with = "fixed::six")]
    pub ghost: f64,
    #[serde(with = "fixed::six")]
    pub noise: f64,
    #[serde(with = "fixed::six")]
    pub blur: f64,
}

impl QualityVector {
    pub const fn ones() -> Self {
        QualityVector::splat(1.0)
    }

    pub const fn splat(x: f64) -> Self {
        QualityVector {
            contrast: x,
            bias: x,
            ring: x,
            ghost: x,
            noise: x,
            blur: x,
        }
    }

    pub fn from_array(a: [f64; 6]) -> Result<Self> {
        let q = QualityVector {
            contrast: a[0],
            bias: a[1],
            ring: a[2],
            ghost: a[3],
            noise: a[4],
            blur: a[5],
        };
        if !q.is_valid() {
            return Err(Error::Contract(format!(
                "quality components must lie in [0, 1]: {a:?}"
            )));
        }
        Ok(q)
    }

    pub fn to_array(self) -> [f64; 6] {
        [
            self.contrast,
            self.bias,
            self.ring,
            self.ghost,
            self.noise,
            self.blur,
        ]
    }

    pub fn get(&self, kind: DistortionKind) -> f64 {
        self.to_array()[kind.index()]
    }

    pub fn set(&mut self, kind: DistortionKind, value: f64) {
        match kind {
            DistortionKind::Contrast => self.contrast = value,
            DistortionKind::Bias => self.bias = value,
            DistortionKind::Ring => self.ring = value,
            DistortionKind::Ghost => self.ghost = value,
            DistortionKind::Noise => self.noise = value,
            DistortionKind::Blur => self.blur = value,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|x| (0.0..=1.0).contains(x))
    }
}

impl Default for QualityVector {
    fn default() -> Self {
        QualityVector::ones()
    }
}

/// JSON shape for reported scores: the six components plus their aggregate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    #[serde(with = "fixed::six")]
    pub contrast: f64,
    #[serde(with = "fixed::six")]
    pub bias: f64,
    #[serde(with = "fixed::six")]
    pub ring: f64,
    #[serde(with = "fixed::six")]
    pub ghost: f64,
    #[serde(with = "fixed::six")]
    pub noise: f64,
    #[serde(with = "fixed::six")]
    pub blur: f64,
    #[serde(with = "fixed::six")]
    pub aggregate: f64,
}

impl From<QualityVector> for ScoreSummary {
    fn from(q: QualityVector) -> Self {
        ScoreSummary {
            contrast: q.contrast,
            bias: q.bias,
            ring: q.ring,
            ghost: q.ghost,
            noise: q.noise,
            blur: q.blur,
            aggregate: aggregate_quality(&q),
        }
    }
}

/// Focal loss parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParams {
    pub alpha: f64,
    pub gamma_exp: f64,
    pub m: usize,
}

impl Default for LossParams {
    fn default() -> Self {
        LossParams {
            alpha: 2.0,
            gamma_exp: 1.0,
            m: 6,
        }
    }
}

#[inline]
fn clip01(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

/// Standard deviation ratio between `img` and `ref_`.
///
/// The ratio is inverted when `gamma_hint > 1`, or, without a hint, when it
/// exceeds 1, so that the score stays in `[0, 1]`.
pub fn contrast_sdr(ref_: &Volume, img: &Volume, gamma_hint: Option<f64>) -> Result<f64> {
    ref_.ensure_same_dims(img)?;
    let s_ref = volume::stats(ref_).std;
    let s_img = volume::stats(img).std;
    Ok(sdr_from_std(s_ref, s_img, gamma_hint))
}

pub(crate) fn sdr_from_std(s_ref: f64, s_img: f64, gamma_hint: Option<f64>) -> f64 {
    if s_ref <= 0.0 {
        return 1.0;
    }
    let ratio = s_img / s_ref;
    let invert = match gamma_hint {
        Some(g) => g > 1.0,
        None => ratio > 1.0,
    };
    let score = if invert {
        if s_img <= 0.0 {
            return 1.0;
        }
        s_ref / s_img
    } else {
        ratio
    };
    clip01(score)
}

/// Coefficient-of-variation ratio `(σ_ref μ_img) / (σ_img μ_ref)`.
pub fn cvr(ref_: &Volume, img: &Volume) -> Result<f64> {
    ref_.ensure_same_dims(img)?;
    let r = volume::stats(ref_);
    let i = volume::stats(img);
    if i.std <= 0.0 || r.mean <= 0.0 {
        return Ok(1.0);
    }
    Ok(clip01((r.std * i.mean) / (i.std * r.mean)))
}

pub fn mse(ref_: &Volume, img: &Volume) -> Result<f64> {
    ref_.ensure_same_dims(img)?;
    let (a, b) = (ref_.data(), img.data());
    Ok(par::sum_indexed(a.len(), |i| {
        let d = a[i] - b[i];
        d * d
    }) / a.len() as f64)
}

/// `10 log10(1 / mse)`; `+inf` for identical inputs.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

/// PSNR in dB scaled by 1/100 and clipped to `[0, 1]`.
pub fn psnr_to_score(psnr: f64) -> f64 {
    if psnr.is_infinite() && psnr > 0.0 {
        1.0
    } else {
        clip01(psnr / 100.0)
    }
}

pub fn psnr(ref_: &Volume, img: &Volume) -> Result<f64> {
    Ok(psnr_from_mse(mse(ref_, img)?))
}

pub fn psnr_score(ref_: &Volume, img: &Volume) -> Result<f64> {
    Ok(psnr_to_score(psnr(ref_, img)?))
}

/// Ratio of significant k-space bin counts, `|F_img > T| / |F_ref > T|`.
pub fn hf_ratio(ref_: &Volume, img: &Volume) -> Result<f64> {
    ref_.ensure_same_dims(img)?;
    hf_ratio_kspace(
        &spectral::fft3_centered(ref_),
        &spectral::fft3_centered(img),
    )
}

pub fn hf_ratio_kspace(k_ref: &KSpace, k_img: &KSpace) -> Result<f64> {
    let n_ref = spectral::high_freq_count(k_ref, HF_THRESHOLD_FRACTION)?;
    if n_ref == 0 {
        return Err(Error::Contract("reference volume is all zeros".into()));
    }
    let n_img = spectral::high_freq_count(k_img, HF_THRESHOLD_FRACTION)?;
    Ok(clip01(n_img as f64 / n_ref as f64))
}

/// Smallest `|F_img| / |F_ref|` over significant reference bins.
pub fn ghost_modulation(ref_: &Volume, img: &Volume) -> Result<f64> {
    ref_.ensure_same_dims(img)?;
    ghost_modulation_kspace(
        &spectral::fft3_centered(ref_),
        &spectral::fft3_centered(img),
    )
}

pub fn ghost_modulation_kspace(k_ref: &KSpace, k_img: &KSpace) -> Result<f64> {
    let (a, b) = (k_ref.data(), k_img.data());
    let max = k_ref.max_magnitude();
    if max <= 0.0 {
        return Err(Error::Contract("reference volume is all zeros".into()));
    }
    let floor = GHOST_SIGNIFICANCE * max;
    let ratios = par::map_indexed(a.len(), |i| {
        let m = a[i].norm();
        if m > floor {
            b[i].norm() / m
        } else {
            f64::INFINITY
        }
    });
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(clip01(min))
}

/// Fraction of the centered k-space band retained in `img`, averaged over
/// axes.
///
/// Along each axis the k-space line through DC is compared coefficient by
/// coefficient, walking outward from DC. A coefficient keeping at least half
/// of the reference energy counts 1. One keeping at least
/// [`RING_KEEP_FRACTION`] is a band edge: it counts 1/2 and ends the walk.
pub fn ringing_cutoff_ratio(ref_: &Volume, img: &Volume) -> Result<f64> {
    ref_.ensure_same_dims(img)?;
    let k_ref = spectral::fft3_centered(ref_);
    let k_img = spectral::fft3_centered(img);
    let mut total = 0.0;
    for (axis, &n) in ref_.dims().iter().enumerate() {
        let e_ref = dc_line_energy(&k_ref, axis);
        let e_img = dc_line_energy(&k_img, axis);
        let weight = |p: usize| {
            if e_ref[p] <= 0.0 || e_ref[p].is_nan() {
                0.0
            } else if e_img[p] >= 0.5 * e_ref[p] {
                1.0
            } else if e_img[p] >= RING_KEEP_FRACTION * e_ref[p] {
                0.5
            } else {
                0.0
            }
        };
        let walk = |positions: &mut dyn Iterator<Item = usize>| {
            let mut sum = 0.0;
            for p in positions {
                let w = weight(p);
                sum += w;
                if w < 1.0 {
                    break;
                }
            }
            sum
        };
        let c = n / 2;
        let band = if weight(c) == 1.0 {
            1.0 + walk(&mut (0..c).rev()) + walk(&mut (c + 1..n))
        } else {
            weight(c)
        };
        total += band / n as f64;
    }
    Ok(clip01(total / 3.0))
}

fn dc_line_energy(k: &KSpace, axis: usize) -> Vec<f64> {
    let dims = k.dims();
    let c = k.center();
    (0..dims[axis])
        .map(|p| {
            let mut q = c;
            q[axis] = p;
            k.data()[k.index(q[0], q[1], q[2])].norm_sqr()
        })
        .collect()
}

/// Mean local SSIM over all positions where an 11-voxel Gaussian window
/// (σ = 1.5) fits, with dynamic range 1.
pub fn ssim3d(ref_: &Volume, img: &Volume) -> Result<f64> {
    ref_.ensure_same_dims(img)?;
    let dims = ref_.dims();
    if dims.iter().any(|&d| d < SSIM_WINDOW) {
        return Err(Error::Contract(format!(
            "SSIM needs at least {SSIM_WINDOW} voxels per axis, got {dims:?}"
        )));
    }
    let w = filter::gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)?;
    let (x, y) = (ref_.data(), img.data());
    let local = |f: &dyn Fn(usize) -> f64| {
        let src: Vec<f64> = (0..x.len()).map(f).collect();
        filter::convolve_valid(&src, dims, &w)
            .expect("dims checked")
            .0
    };
    let mu_x = local(&|i| x[i]);
    let mu_y = local(&|i| y[i]);
    let xx = local(&|i| x[i] * x[i]);
    let yy = local(&|i| y[i] * y[i]);
    let xy = local(&|i| x[i] * y[i]);
    let c1 = (SSIM_K1 * 1.0).powi(2);
    let c2 = (SSIM_K2 * 1.0).powi(2);
    let n = mu_x.len();
    let sum = par::sum_indexed(n, |i| {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let vx = xx[i] - mx * mx;
        let vy = yy[i] - my * my;
        let cov = xy[i] - mx * my;
        ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2))
    });
    Ok(sum / n as f64)
}

/// `(1/M) Σ (1 + α |y - t|^γ) (y - t)^2`.
pub fn focal_mse(y: &QualityVector, t: &QualityVector, p: &LossParams) -> f64 {
    focal_mse_slice(&y.to_array(), &t.to_array(), p)
}

pub fn focal_mse_slice(y: &[f64], t: &[f64], p: &LossParams) -> f64 {
    assert_eq!(y.len(), t.len());
    let m = p.m.max(1) as f64;
    y.iter()
        .zip(t)
        .map(|(a, b)| {
            let d = a - b;
            (1.0 + p.alpha * d.abs().powf(p.gamma_exp)) * d * d
        })
        .sum::<f64>()
        / m
}

/// Unweighted mean of the six components.
pub fn aggregate_quality(q: &QualityVector) -> f64 {
    q.to_array().iter().sum::<f64>() / 6.0
}

/// Componentwise mean of predictions on an image and its flipped copy.
pub fn flip_average(a: &QualityVector, b: &QualityVector) -> QualityVector {
    let (a, b) = (a.to_array(), b.to_array());
    let m: [f64; 6] = std::array::from_fn(|i| 0.5 * (a[i] + b[i]));
    QualityVector {
        contrast: m[0],
        bias: m[1],
        ring: m[2],
        ghost: m[3],
        noise: m[4],
        blur: m[5],
    }
}

/// Reference-based estimate of all six scores for a `(reference, image)` pair.
pub fn pair_quality(ref_: &Volume, img: &Volume) -> Result<QualityVector> {
    ref_.ensure_same_dims(img)?;
    let k_ref = spectral::fft3_centered(ref_);
    let k_img = spectral::fft3_centered(img);
    Ok(QualityVector {
        contrast: contrast_sdr(ref_, img, None)?,
        bias: cvr(ref_, img)?,
        ring: ringing_cutoff_ratio(ref_, img)?,
        ghost: ghost_modulation_kspace(&k_ref, &k_img)?,
        noise: psnr_score(ref_, img)?,
        blur: hf_ratio_kspace(&k_ref, &k_img)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vol(dims: [usize; 3], f: impl Fn(usize, usize, usize) -> f64 + Sync + Send) -> Volume {
        Volume::from_fn(dims, [1.0; 3], f).unwrap()
    }

    fn blob(n: usize) -> Volume {
        let c = (n as f64 - 1.0) / 2.0;
        vol([n; 3], move |x, y, z| {
            let r2 = (x as f64 - c).powi(2) + (y as f64 - c).powi(2) + (z as f64 - c).powi(2);
            0.1 + 0.8 * (-r2 / (n as f64)).exp()
        })
    }

    #[test]
    fn identical_pairs_score_one() {
        let v = blob(12);
        assert_eq!(contrast_sdr(&v, &v, None).unwrap(), 1.0);
        assert_eq!(cvr(&v, &v).unwrap(), 1.0);
        assert_eq!(psnr_score(&v, &v).unwrap(), 1.0);
        assert!(psnr(&v, &v).unwrap().is_infinite());
        assert_eq!(hf_ratio(&v, &v).unwrap(), 1.0);
        assert_eq!(ghost_modulation(&v, &v).unwrap(), 1.0);
        assert_eq!(ringing_cutoff_ratio(&v, &v).unwrap(), 1.0);
        assert!((ssim3d(&v, &v).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(pair_quality(&v, &v).unwrap(), QualityVector::ones());
    }

    #[test]
    fn dimension_mismatch_errors() {
        let a = blob(12);
        let b = blob(11);
        assert!(matches!(
            contrast_sdr(&a, &b, None),
            Err(Error::DimensionMismatch(..))
        ));
        assert!(cvr(&a, &b).is_err());
        assert!(psnr(&a, &b).is_err());
        assert!(hf_ratio(&a, &b).is_err());
        assert!(ghost_modulation(&a, &b).is_err());
        assert!(ssim3d(&a, &b).is_err());
    }

    #[test]
    fn sdr_half_std() {
        let a = vol([2, 1, 1], |x, _, _| x as f64);
        let b = vol([2, 1, 1], |x, _, _| 0.25 + 0.5 * x as f64);
        assert_eq!(contrast_sdr(&a, &b, None).unwrap(), 0.5);
        // more contrast in the image inverts without a hint
        assert_eq!(contrast_sdr(&b, &a, None).unwrap(), 0.5);
        let c = vol([2, 2, 2], |_, _, _| 0.3);
        assert!(contrast_sdr(&c, &a, None).is_err());
        assert_eq!(contrast_sdr(&c, &c, Some(2.0)).unwrap(), 1.0);
    }

    #[test]
    fn sdr_ramp_gamma_two() {
        // oracle: brute-force population std over the discretized ramp
        let n = 1000usize;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let std = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
        };
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let expected = std(&xs) / std(&sq);
        assert!((expected - 0.968).abs() < 1e-3);
        let a = Volume::new([n, 1, 1], [1.0; 3], xs).unwrap();
        let b = Volume::new([n, 1, 1], [1.0; 3], sq).unwrap();
        assert!((contrast_sdr(&a, &b, Some(2.0)).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn cvr_scale_invariance_and_oracle() {
        let a = blob(6);
        let scaled = a.map(|x| 0.4 * x);
        assert!((cvr(&a, &scaled).unwrap() - 1.0).abs() < 1e-12);

        let r = [0.1, 0.9, 0.4, 0.7, 0.2, 0.3, 0.8, 0.5];
        let i = [0.2, 0.3, 0.25, 0.4, 0.1, 0.2, 0.35, 0.3];
        let two_pass = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / 8.0;
            let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 8.0).sqrt();
            (m, s)
        };
        let ((mr, sr), (mi, si)) = (two_pass(&r), two_pass(&i));
        let expected = ((sr * mi) / (si * mr)).min(1.0);
        let a = Volume::new([2, 2, 2], [1.0; 3], r.to_vec()).unwrap();
        let b = Volume::new([2, 2, 2], [1.0; 3], i.to_vec()).unwrap();
        assert!((cvr(&a, &b).unwrap() - expected).abs() < 1e-12);
        let flat = Volume::new([2, 2, 2], [1.0; 3], vec![0.5; 8]).unwrap();
        assert_eq!(cvr(&a, &flat).unwrap(), 1.0);
    }

    #[test]
    fn psnr_analytic_values() {
        assert!((psnr_from_mse(0.01) - 20.0).abs() < 1e-12);
        assert!((psnr_to_score(psnr_from_mse(0.01)) - 0.2).abs() < 1e-12);
        assert_eq!(psnr_to_score(psnr_from_mse(1e-12)), 1.0);
        let a = blob(8);
        let b = a.map(|x| (x * 1.1).min(1.0));
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }

    #[test]
    fn hf_ratio_drops_with_blur() {
        let v = vol([16; 3], |x, y, z| {
            ((x * 7 + y * 13 + z * 29) % 17) as f64 / 16.0
        });
        let blur = |sigma: f64| {
            let k = filter::gaussian_kernel(11, sigma).unwrap();
            v.with_data(filter::convolve_same(v.data(), v.dims(), &k))
        };
        let s1 = hf_ratio(&v, &blur(1.0)).unwrap();
        let s5 = hf_ratio(&v, &blur(5.0)).unwrap();
        assert!(s5 < s1, "{s5} !< {s1}");
        let zero = vol([4; 3], |_, _, _| 0.0);
        assert!(hf_ratio(&zero, &zero).is_err());
    }

    /// Direct sliding-window SSIM with an explicit 3D Gaussian window.
    fn naive_ssim(a: &Volume, b: &Volume) -> f64 {
        let g = filter::gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA).unwrap();
        let [nx, ny, nz] = a.dims();
        let k = SSIM_WINDOW;
        let (c1, c2) = (1e-4, 9e-4);
        let mut total = 0.0;
        let mut count = 0;
        for z0 in 0..=nz - k {
            for y0 in 0..=ny - k {
                for x0 in 0..=nx - k {
                    let (mut mx, mut my, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
                    for dz in 0..k {
                        for dy in 0..k {
                            for dx in 0..k {
                                let w = g[dx] * g[dy] * g[dz];
                                let p = a.get(x0 + dx, y0 + dy, z0 + dz);
                                let q = b.get(x0 + dx, y0 + dy, z0 + dz);
                                mx += w * p;
                                my += w * q;
                                sxx += w * p * p;
                                syy += w * q * q;
                                sxy += w * p * q;
                            }
                        }
                    }
                    let vx = sxx - mx * mx;
                    let vy = syy - my * my;
                    let cov = sxy - mx * my;
                    total += ((2.0 * mx * my + c1) * (2.0 * cov + c2))
                        / ((mx * mx + my * my + c1) * (vx + vy + c2));
                    count += 1;
                }
            }
        }
        total / count as f64
    }

    #[test]
    fn ssim_matches_naive_window() {
        let a = vol([13, 12, 11], |x, y, z| {
            ((x * 7 + y * 13 + z * 29) % 17) as f64 / 16.0
        });
        let b = vol([13, 12, 11], |x, y, z| {
            ((x * 5 + y * 3 + z * 11) % 19) as f64 / 18.0
        });
        let fast = ssim3d(&a, &b).unwrap();
        assert!((fast - naive_ssim(&a, &b)).abs() < 1e-9);
        assert!(fast < 1.0);
        assert!(ssim3d(
            &vol([10, 12, 12], |_, _, _| 0.0),
            &vol([10, 12, 12], |_, _, _| 0.0)
        )
        .is_err());
    }

    #[test]
    fn ssim_inverted_pattern_below_one() {
        let a = vol([12; 3], |x, y, z| ((x + y + z) % 2) as f64);
        let b = a.map(|x| 1.0 - x);
        assert!(ssim3d(&a, &b).unwrap() < 1.0);
    }

    #[test]
    fn focal_loss_values() {
        let p = LossParams::default();
        let t = QualityVector::splat(0.5);
        assert_eq!(focal_mse(&t, &t, &p), 0.0);
        let mut y = t;
        y.ghost = 1.0;
        assert!((focal_mse(&y, &t, &p) - 1.0 / 12.0).abs() < 1e-15);
        let ones = QualityVector::ones();
        let zeros = QualityVector::splat(0.0);
        assert!((focal_mse(&ones, &zeros, &p) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn aggregation_and_flip_average() {
        assert_eq!(aggregate_quality(&QualityVector::ones()), 1.0);
        assert_eq!(aggregate_quality(&QualityVector::splat(0.0)), 0.0);
        let q = QualityVector::from_array([0.6, 0.9, 0.9, 1.0, 0.8, 0.9]).unwrap();
        assert!((aggregate_quality(&q) - 0.85).abs() < 1e-12);
        let avg = flip_average(&QualityVector::splat(0.0), &QualityVector::ones());
        assert_eq!(avg, QualityVector::splat(0.5));
        assert_eq!(flip_average(&q, &q), q);
        assert_eq!(flip_average(&q, &avg), flip_average(&avg, &q));
        assert!(QualityVector::from_array([1.2, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn score_summary_json_fixed_format() {
        let s =
            ScoreSummary::from(QualityVector::from_array([0.5, 1.0, 0.25, 1.0, 1.0, 1.0]).unwrap());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(
            json,
            r#"{"contrast":0.500000,"bias":1.000000,"ring":0.250000,"ghost":1.000000,"noise":1.000000,"blur":1.000000,"aggregate":0.791667}"#
        );
    }
}
