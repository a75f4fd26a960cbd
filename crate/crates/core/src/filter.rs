//! Separable Gaussian filtering on x-fastest 3D grids.

use crate::error::{Error, Result};
use crate::par;

/// Normalized Gaussian taps of odd length `size`.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Vec<f64>> {
    if size.is_multiple_of(2) {
        return Err(Error::param("kernel_size", size as f64, "odd"));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", sigma, "(0, inf)"));
    }
    let r = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size)
        .map(|i| {
            let d = i as f64 - r;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= s);
    Ok(k)
}

/// Gaussian taps truncated at `truncate * sigma` on each side.
pub fn gaussian_kernel_truncated(sigma: f64, truncate: f64) -> Result<Vec<f64>> {
    let radius = (truncate * sigma).ceil().max(0.0) as usize;
    gaussian_kernel(2 * radius + 1, sigma)
}

/// Same-size separable convolution with zero padding at the borders.
pub fn convolve_same(data: &[f64], dims: [usize; 3], kernel: &[f64]) -> Vec<f64> {
    let mut cur = data.to_vec();
    for axis in 0..3 {
        cur = convolve_axis(&cur, dims, kernel, axis, 0, dims[axis]);
    }
    cur
}

/// Separable correlation keeping only positions where the kernel fits
/// entirely inside the grid. Returns the data and its dims.
pub fn convolve_valid(
    data: &[f64],
    dims: [usize; 3],
    kernel: &[f64],
) -> Option<(Vec<f64>, [usize; 3])> {
    let k = kernel.len();
    if dims.iter().any(|&d| d < k) {
        return None;
    }
    let r = k / 2;
    let mut cur = data.to_vec();
    let mut d = dims;
    for axis in 0..3 {
        let out_len = d[axis] - k + 1;
        cur = convolve_axis(&cur, d, kernel, axis, r, out_len);
        d[axis] = out_len;
    }
    Some((cur, d))
}

/// Output position `j` along `axis` is centred on input position `j + offset`.
fn convolve_axis(
    src: &[f64],
    dims: [usize; 3],
    kernel: &[f64],
    axis: usize,
    offset: usize,
    out_len: usize,
) -> Vec<f64> {
    let [nx, ny, nz] = dims;
    let r = (kernel.len() / 2) as isize;
    let mut out_dims = dims;
    out_dims[axis] = out_len;
    let [ox, oy, _] = out_dims;
    let mut out = vec![0.0; ox * oy * out_dims[2]];
    let n_in = dims[axis] as isize;
    // input index for output j and tap t, if in range
    let tap = |j: usize, t: usize| -> Option<usize> {
        let p = j as isize + offset as isize + t as isize - r;
        (0..n_in).contains(&p).then_some(p as usize)
    };
    par::for_each_chunk_mut(&mut out, ox, |row, line| {
        let (y, z) = (row % oy, row / oy);
        match axis {
            0 => {
                let row_in = &src[nx * (y + ny * z)..][..nx];
                let out_len = line.len() as isize;
                line.fill(0.0);
                for (t, w) in kernel.iter().enumerate() {
                    // outputs x with 0 <= x + offset + t - r < nx
                    let shift = offset as isize + t as isize - r;
                    let x_lo = (-shift).clamp(0, out_len) as usize;
                    let x_hi = (n_in - shift).clamp(0, out_len) as usize;
                    if x_lo >= x_hi {
                        continue;
                    }
                    let p_lo = (x_lo as isize + shift) as usize;
                    let vals = &row_in[p_lo..p_lo + (x_hi - x_lo)];
                    line[x_lo..x_hi]
                        .iter_mut()
                        .zip(vals)
                        .for_each(|(o, v)| *o += w * v);
                }
            }
            1 => {
                for (t, w) in kernel.iter().enumerate() {
                    if let Some(p) = tap(y, t) {
                        let s = &src[nx * (p + ny * z)..][..nx];
                        line.iter_mut().zip(s).for_each(|(o, v)| *o += w * v);
                    }
                }
            }
            _ => {
                debug_assert!(nz > 0);
                for (t, w) in kernel.iter().enumerate() {
                    if let Some(p) = tap(z, t) {
                        let s = &src[nx * (y + ny * p)..][..nx];
                        line.iter_mut().zip(s).for_each(|(o, v)| *o += w * v);
                    }
                }
            }
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_is_normalized_and_symmetric() {
        let k = gaussian_kernel(7, 1.3).unwrap();
        assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..3 {
            assert_eq!(k[i], k[6 - i]);
        }
        assert!(gaussian_kernel(4, 1.0).is_err());
        assert!(gaussian_kernel(3, 0.0).is_err());
        assert_eq!(gaussian_kernel_truncated(2.0, 4.0).unwrap().len(), 17);
    }

    fn direct_same(data: &[f64], dims: [usize; 3], k: &[f64]) -> Vec<f64> {
        let r = (k.len() / 2) as isize;
        let [nx, ny, nz] = dims;
        let at = |x: isize, y: isize, z: isize| {
            if x < 0 || y < 0 || z < 0 || x >= nx as isize || y >= ny as isize || z >= nz as isize {
                0.0
            } else {
                data[x as usize + nx * (y as usize + ny * z as usize)]
            }
        };
        let mut out = vec![0.0; data.len()];
        for z in 0..nz as isize {
            for y in 0..ny as isize {
                for x in 0..nx as isize {
                    let mut acc = 0.0;
                    for (c, wc) in k.iter().enumerate() {
                        for (b, wb) in k.iter().enumerate() {
                            for (a, wa) in k.iter().enumerate() {
                                acc += wa
                                    * wb
                                    * wc
                                    * at(
                                        x + a as isize - r,
                                        y + b as isize - r,
                                        z + c as isize - r,
                                    );
                            }
                        }
                    }
                    out[x as usize + nx * (y as usize + ny * z as usize)] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn separable_matches_direct_triple_sum() {
        let dims = [6, 5, 4];
        let data: Vec<f64> = (0..120).map(|i| ((i * 7919) % 97) as f64 / 97.0).collect();
        let k = gaussian_kernel(5, 0.9).unwrap();
        let fast = convolve_same(&data, dims, &k);
        let slow = direct_same(&data, dims, &k);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn valid_mode_is_interior_of_same_mode() {
        let dims = [8, 7, 9];
        let data: Vec<f64> = (0..504).map(|i| ((i * 31) % 17) as f64).collect();
        let k = gaussian_kernel(3, 1.0).unwrap();
        let same = convolve_same(&data, dims, &k);
        let (valid, vd) = convolve_valid(&data, dims, &k).unwrap();
        assert_eq!(vd, [6, 5, 7]);
        for z in 0..7 {
            for y in 0..5 {
                for x in 0..6 {
                    let a = valid[x + 6 * (y + 5 * z)];
                    let b = same[(x + 1) + 8 * ((y + 1) + 7 * (z + 1))];
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
        assert!(convolve_valid(&data, [2, 7, 9], &k).is_none());
    }
}
