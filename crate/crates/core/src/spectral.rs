//! Centered 3D discrete Fourier transforms.
//!
//! The zero-frequency bin sits at index `floor(n / 2)` on every axis.
//! Transforms are exact-length (rustfft picks mixed-radix or Bluestein
//! plans), so 224 = 2^5 * 7 is handled without padding. Each pass runs
//! independent 1D transforms along the fastest axis, then cyclically
//! rotates the axes; three rotations restore the original layout.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{Error, Result};
use crate::par;
use crate::volume::Volume;

/// Complex spectrum paired with the geometry of its source volume.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpace {
    dims: [usize; 3],
    spacing: [f64; 3],
    data: Vec<Complex64>,
}

impl KSpace {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], data: Vec<Complex64>) -> Result<Self> {
        if dims.contains(&0) || data.len() != dims.iter().product::<usize>() {
            return Err(Error::Contract(format!(
                "k-space dims {dims:?} do not match {} bins",
                data.len()
            )));
        }
        Ok(KSpace {
            dims,
            spacing,
            data,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Index of the zero-frequency bin per axis.
    pub fn center(&self) -> [usize; 3] {
        self.dims.map(|d| d / 2)
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        par::map_slice(&self.data, |c| c.norm())
    }

    pub fn max_magnitude(&self) -> f64 {
        par::min_max_indexed(self.data.len(), |i| self.data[i].norm())
            .map(|(_, hi)| hi)
            .unwrap_or(0.0)
    }

    /// Multiplies bin `(x, y, z)` by `weight(x, y, z)`.
    pub fn apply_weights<F>(&mut self, weight: F)
    where
        F: Fn(usize, usize, usize) -> f64 + Sync + Send,
    {
        let [nx, ny, _] = self.dims;
        par::for_each_chunk_mut(&mut self.data, nx, |row, line| {
            let (y, z) = (row % ny, row / ny);
            for (x, c) in line.iter_mut().enumerate() {
                *c *= weight(x, y, z);
            }
        });
    }
}

/// Forward 3D DFT with the zero-frequency bin moved to the center.
pub fn fft3_centered(v: &Volume) -> KSpace {
    let mut data = par::map_slice(v.data(), |&x| Complex64::new(x, 0.0));
    transform3(&mut data, v.dims(), FftDirection::Forward);
    let data = roll(&data, v.dims(), v.dims().map(|n| n / 2));
    KSpace {
        dims: v.dims(),
        spacing: v.spacing(),
        data,
    }
}

/// Inverse of [`fft3_centered`], keeping the complex result.
pub fn ifft3_centered_complex(k: &KSpace) -> Vec<Complex64> {
    let mut data = roll(&k.data, k.dims, k.dims.map(|n| n - n / 2));
    transform3(&mut data, k.dims, FftDirection::Inverse);
    let scale = 1.0 / data.len() as f64;
    par::for_each_chunk_mut(&mut data, 4096, |_, c| {
        c.iter_mut().for_each(|z| *z *= scale)
    });
    data
}

/// Inverse of [`fft3_centered`]; the imaginary residue is discarded and the
/// result is not clipped.
pub fn ifft3_centered(k: &KSpace) -> Volume {
    let data = ifft3_centered_complex(k);
    let real = par::map_slice(&data, |c| c.re);
    Volume::new(k.dims, k.spacing, real).expect("k-space geometry is valid")
}

/// Number of bins whose magnitude is strictly above `threshold_fraction`
/// times the largest magnitude. An all-zero spectrum counts 0.
pub fn high_freq_count(k: &KSpace, threshold_fraction: f64) -> Result<usize> {
    if !(threshold_fraction > 0.0 && threshold_fraction < 1.0) {
        return Err(Error::param(
            "threshold_fraction",
            threshold_fraction,
            "(0, 1)",
        ));
    }
    let mags = k.magnitudes();
    let max = par::min_max_indexed(mags.len(), |i| mags[i])
        .map(|(_, hi)| hi)
        .unwrap_or(0.0);
    if max <= 0.0 {
        return Ok(0);
    }
    let t = threshold_fraction * max;
    Ok(par::count_indexed(mags.len(), |i| mags[i] > t))
}

/// In-place 3D transform (unnormalized) over x-fastest data.
fn transform3(data: &mut Vec<Complex64>, dims: [usize; 3], direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let mut d = dims;
    for _ in 0..3 {
        let n = d[0];
        let fft = planner.plan_fft(n, direction);
        let scratch_len = fft.get_inplace_scratch_len();
        par::for_each_chunk_mut_init(
            data,
            n,
            || vec![Complex64::default(); scratch_len],
            |scratch, _, line| fft.process_with_scratch(line, scratch),
        );
        *data = rotate_axes(data, d);
        d = [d[1], d[2], d[0]];
    }
}

/// Relayout `(x, y, z)` x-fastest into `(y, z, x)` y-fastest.
fn rotate_axes<T: Copy + Send + Sync + Default>(src: &[T], dims: [usize; 3]) -> Vec<T> {
    let [nx, ny, nz] = dims;
    let mut out = vec![T::default(); src.len()];
    par::for_each_chunk_mut(&mut out, ny, |row, line| {
        let (z, x) = (row % nz, row / nz);
        for (y, o) in line.iter_mut().enumerate() {
            *o = src[x + nx * (y + ny * z)];
        }
    });
    out
}

/// Circular shift: element at `i` moves to `(i + shift) mod n` per axis.
fn roll<T: Copy + Send + Sync + Default>(src: &[T], dims: [usize; 3], shift: [usize; 3]) -> Vec<T> {
    let [nx, ny, nz] = dims;
    let back = |i: usize, s: usize, n: usize| (i + n - s % n) % n;
    let xs: Vec<usize> = (0..nx).map(|x| back(x, shift[0], nx)).collect();
    let mut out = vec![T::default(); src.len()];
    par::for_each_chunk_mut(&mut out, nx, |row, line| {
        let (y, z) = (row % ny, row / ny);
        let base = nx * (back(y, shift[1], ny) + ny * back(z, shift[2], nz));
        for (o, &sx) in line.iter_mut().zip(&xs) {
            *o = src[base + sx];
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn volume(dims: [usize; 3], f: impl Fn(usize, usize, usize) -> f64 + Sync + Send) -> Volume {
        Volume::from_fn(dims, [1.0; 3], f).unwrap()
    }

    #[test]
    fn constant_has_single_center_bin() {
        let v = volume([4, 6, 5], |_, _, _| 0.5);
        let k = fft3_centered(&v);
        let c = k.center();
        let ci = k.index(c[0], c[1], c[2]);
        assert!((k.data()[ci].re - 0.5 * 120.0).abs() < 1e-12);
        for (i, z) in k.data().iter().enumerate() {
            if i != ci {
                assert!(z.norm() < 1e-12);
            }
        }
        assert_eq!(high_freq_count(&k, 1e-3).unwrap(), 1);
    }

    #[test]
    fn zeros_stay_zero() {
        let v = volume([3, 3, 3], |_, _, _| 0.0);
        let k = fft3_centered(&v);
        assert!(k.data().iter().all(|z| z.norm() == 0.0));
        assert_eq!(high_freq_count(&k, 1e-3).unwrap(), 0);
        assert!(ifft3_centered(&k).data().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn center_spike_inverts_to_constant() {
        let dims = [5, 4, 3];
        let mut data = vec![Complex64::default(); 60];
        let k0 = KSpace::new(dims, [1.0; 3], data.clone()).unwrap();
        let c = k0.center();
        data[k0.index(c[0], c[1], c[2])] = Complex64::new(1.0, 0.0);
        let v = ifft3_centered(&KSpace::new(dims, [1.0; 3], data).unwrap());
        for &x in v.data() {
            assert!((x - 1.0 / 60.0).abs() < 1e-15);
        }
    }

    #[test]
    fn roll_round_trip_odd_dims() {
        let src: Vec<u32> = (0..105).collect();
        let dims = [7, 5, 3];
        let fwd = roll(&src, dims, dims.map(|n| n / 2));
        let back = roll(&fwd, dims, dims.map(|n| n - n / 2));
        assert_eq!(back, src);
        assert_eq!(fwd[3 + 7 * (2 + 5)], src[0]);
    }

    #[test]
    fn threshold_fraction_validated() {
        let k = fft3_centered(&volume([2, 2, 2], |x, _, _| x as f64));
        assert!(high_freq_count(&k, 0.0).is_err());
        assert!(high_freq_count(&k, 1.0).is_err());
    }

    #[test]
    fn round_trip_non_power_of_two() {
        let v = volume([7, 14, 6], |x, y, z| {
            ((x * 13 + y * 7 + z * 3) % 11) as f64 / 10.0
        });
        let back = ifft3_centered(&fft3_centered(&v));
        for (a, b) in v.data().iter().zip(back.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
