//! Binary morphology with the 6-connected unit ball.

use std::collections::VecDeque;

use crate::par;

pub type Mask = Vec<bool>;

const NEIGHBOURS: [[isize; 3]; 6] = [
    [-1, 0, 0],
    [1, 0, 0],
    [0, -1, 0],
    [0, 1, 0],
    [0, 0, -1],
    [0, 0, 1],
];

#[inline]
fn neighbours(i: usize, dims: [usize; 3]) -> impl Iterator<Item = usize> {
    let [nx, ny, nz] = dims;
    let p = [
        (i % nx) as isize,
        ((i / nx) % ny) as isize,
        (i / (nx * ny)) as isize,
    ];
    NEIGHBOURS.into_iter().filter_map(move |d| {
        let q = [p[0] + d[0], p[1] + d[1], p[2] + d[2]];
        let inside = q[0] >= 0
            && q[1] >= 0
            && q[2] >= 0
            && (q[0] as usize) < nx
            && (q[1] as usize) < ny
            && (q[2] as usize) < nz;
        inside.then(|| q[0] as usize + nx * (q[1] as usize + ny * q[2] as usize))
    })
}

/// Voxels whose in-bounds 6-neighbourhood is entirely set.
pub fn erode(mask: &[bool], dims: [usize; 3]) -> Mask {
    par::map_indexed(mask.len(), |i| {
        mask[i] && neighbours(i, dims).all(|j| mask[j])
    })
}

pub fn dilate(mask: &[bool], dims: [usize; 3]) -> Mask {
    par::map_indexed(mask.len(), |i| {
        mask[i] || neighbours(i, dims).any(|j| mask[j])
    })
}

pub fn open(mask: &[bool], dims: [usize; 3]) -> Mask {
    dilate(&erode(mask, dims), dims)
}

/// Largest 6-connected component; ties go to the component found first in
/// storage order.
pub fn largest_component(mask: &[bool], dims: [usize; 3]) -> Mask {
    let mut label = vec![0u32; mask.len()];
    let mut best = (0u32, 0usize);
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..mask.len() {
        if !mask[start] || label[start] != 0 {
            continue;
        }
        next += 1;
        label[start] = next;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            for j in neighbours(i, dims) {
                if mask[j] && label[j] == 0 {
                    label[j] = next;
                    queue.push_back(j);
                }
            }
        }
        if size > best.1 {
            best = (next, size);
        }
    }
    let keep = best.0;
    label.iter().map(|&l| keep != 0 && l == keep).collect()
}

/// Inclusive bounding box of the set voxels, `None` for an empty mask.
pub fn bounding_box(mask: &[bool], dims: [usize; 3]) -> Option<([usize; 3], [usize; 3])> {
    let [nx, ny, _] = dims;
    let mut lo = [usize::MAX; 3];
    let mut hi = [0usize; 3];
    let mut any = false;
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        let p = [i % nx, (i / nx) % ny, i / (nx * ny)];
        for a in 0..3 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
        any = true;
    }
    any.then_some((lo, hi))
}
