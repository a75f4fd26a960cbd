use super::Volume;

/// Linear interpolation taps along one axis: `(i0, i1, w0, w1)`.
///
/// Coordinates within half a voxel of the grid clamp to the edge voxel;
/// anything further out gets zero weight.
#[inline]
fn taps(n: usize, coord: f64) -> (usize, usize, f64, f64) {
    let hi = n as f64 - 0.5;
    if !(coord >= -0.5 && coord <= hi) {
        return (0, 0, 0.0, 0.0);
    }
    let c = coord.clamp(0.0, (n - 1) as f64);
    let i0 = c.floor() as usize;
    let i1 = (i0 + 1).min(n - 1);
    let t = c - i0 as f64;
    (i0, i1, 1.0 - t, t)
}

/// Trilinear sample at continuous voxel coordinates, zero outside the grid.
pub fn sample_trilinear(v: &Volume, p: [f64; 3]) -> f64 {
    let [nx, ny, nz] = v.dims();
    let (x0, x1, wx0, wx1) = taps(nx, p[0]);
    let (y0, y1, wy0, wy1) = taps(ny, p[1]);
    let (z0, z1, wz0, wz1) = taps(nz, p[2]);
    if wx0 + wx1 == 0.0 || wy0 + wy1 == 0.0 || wz0 + wz1 == 0.0 {
        return 0.0;
    }
    blend(v, [x0, x1, y0, y1, z0, z1], [wx0, wx1, wy0, wy1, wz0, wz1])
}

#[inline]
fn blend(v: &Volume, i: [usize; 6], w: [f64; 6]) -> f64 {
    let d = v.data();
    let [nx, ny, _] = v.dims();
    let at = |x: usize, y: usize, z: usize| d[x + nx * (y + ny * z)];
    let c00 = w[0] * at(i[0], i[2], i[4]) + w[1] * at(i[1], i[2], i[4]);
    let c10 = w[0] * at(i[0], i[3], i[4]) + w[1] * at(i[1], i[3], i[4]);
    let c01 = w[0] * at(i[0], i[2], i[5]) + w[1] * at(i[1], i[2], i[5]);
    let c11 = w[0] * at(i[0], i[3], i[5]) + w[1] * at(i[1], i[3], i[5]);
    let c0 = w[2] * c00 + w[3] * c10;
    let c1 = w[2] * c01 + w[3] * c11;
    w[4] * c0 + w[5] * c1
}

/// Precomputed taps for an axis-aligned resampling along one axis.
#[derive(Debug, Clone)]
pub struct AxisTable {
    taps: Vec<(usize, usize, f64, f64)>,
}

impl AxisTable {
    /// `coord(i)` gives the input coordinate sampled by output index `i`.
    pub fn new(n_in: usize, n_out: usize, coord: impl Fn(usize) -> f64) -> Self {
        AxisTable {
            taps: (0..n_out).map(|i| taps(n_in, coord(i))).collect(),
        }
    }
}

pub(super) fn separable_sample(
    v: &Volume,
    t: &[AxisTable; 3],
    x: usize,
    y: usize,
    z: usize,
) -> f64 {
    let (x0, x1, wx0, wx1) = t[0].taps[x];
    let (y0, y1, wy0, wy1) = t[1].taps[y];
    let (z0, z1, wz0, wz1) = t[2].taps[z];
    if wx0 + wx1 == 0.0 || wy0 + wy1 == 0.0 || wz0 + wz1 == 0.0 {
        return 0.0;
    }
    blend(v, [x0, x1, y0, y1, z0, z1], [wx0, wx1, wy0, wy1, wz0, wz1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_points_are_exact() {
        let v =
            Volume::from_fn([3, 4, 5], [1.0; 3], |x, y, z| (x * 31 + y * 7 + z) as f64).unwrap();
        for (x, y, z) in [(0, 0, 0), (2, 3, 4), (1, 2, 3)] {
            let s = sample_trilinear(&v, [x as f64, y as f64, z as f64]);
            assert_eq!(s, v.get(x, y, z));
        }
    }

    #[test]
    fn linear_function_is_reproduced() {
        let v = Volume::from_fn([4, 4, 4], [1.0; 3], |x, y, z| {
            x as f64 + 2.0 * y as f64 - 0.5 * z as f64
        })
        .unwrap();
        let s = sample_trilinear(&v, [1.25, 2.5, 0.75]);
        assert!((s - (1.25 + 5.0 - 0.375)).abs() < 1e-12);
    }

    #[test]
    fn outside_is_zero_and_edge_clamps() {
        let v = Volume::new([2, 1, 1], [1.0; 3], vec![3.0, 5.0]).unwrap();
        assert_eq!(sample_trilinear(&v, [-0.6, 0.0, 0.0]), 0.0);
        assert_eq!(sample_trilinear(&v, [-0.4, 0.0, 0.0]), 3.0);
        assert_eq!(sample_trilinear(&v, [1.4, 0.0, 0.0]), 5.0);
        assert_eq!(sample_trilinear(&v, [1.6, 0.0, 0.0]), 0.0);
        assert_eq!(sample_trilinear(&v, [f64::NAN, 0.0, 0.0]), 0.0);
    }
}
