//! Occupied-voxel geometry and attributed voxel clouds.

use std::collections::HashMap;

use crate::color;
use crate::error::{CodecError, Result};
use crate::morton;
use crate::ply::RawPointCloud;
use crate::Scalar;

/// A nonempty, strictly increasing list of Morton codes on a `2^depth` grid.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Geometry {
    depth: u32,
    codes: Vec<u64>,
}

impl Geometry {
    pub fn new(depth: u32, codes: Vec<u64>) -> Result<Self> {
        morton::check_depth(depth)?;
        if codes.is_empty() {
            return Err(CodecError::EmptyCloud);
        }
        if let Some(i) = codes.windows(2).position(|w| w[0] >= w[1]) {
            return Err(CodecError::UnsortedGeometry(i + 1));
        }
        let last = *codes.last().expect("nonempty");
        if last >> (3 * depth) != 0 {
            return Err(CodecError::CodeOutOfRange { code: last, depth });
        }
        Ok(Self { depth, codes })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn codes(&self) -> &[u64] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }
}

/// Voxels in Morton order with one YUV triple each.
#[derive(Clone, Debug, PartialEq)]
pub struct VoxelCloud<T> {
    geometry: Geometry,
    attributes: Vec<[T; 3]>,
}

impl<T: Scalar> VoxelCloud<T> {
    pub fn new(geometry: Geometry, attributes: Vec<[T; 3]>) -> Result<Self> {
        if geometry.len() != attributes.len() {
            return Err(CodecError::AttributeCount { voxels: geometry.len(), attributes: attributes.len() });
        }
        Ok(Self { geometry, attributes })
    }

    /// Builds a cloud from per-channel value vectors (Y, U, V).
    pub fn from_channels(geometry: Geometry, channels: [Vec<T>; 3]) -> Result<Self> {
        let [y, u, v] = channels;
        if y.len() != u.len() || y.len() != v.len() {
            return Err(CodecError::AttributeCount {
                voxels: geometry.len(),
                attributes: y.len().min(u.len()).min(v.len()),
            });
        }
        let attributes = y.into_iter().zip(u).zip(v).map(|((y, u), v)| [y, u, v]).collect();
        Self::new(geometry, attributes)
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn depth(&self) -> u32 {
        self.geometry.depth
    }

    pub fn len(&self) -> usize {
        self.geometry.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn attributes(&self) -> &[[T; 3]] {
        &self.attributes
    }

    pub fn channel(&self, c: usize) -> Vec<T> {
        self.attributes.iter().map(|a| a[c]).collect()
    }

    pub fn voxels(&self) -> impl ExactSizeIterator<Item = (u64, [T; 3])> + '_ {
        self.geometry.codes.iter().copied().zip(self.attributes.iter().copied())
    }

    /// Converts the attribute scalar type.
    pub fn cast<U: Scalar>(&self) -> VoxelCloud<U> {
        VoxelCloud {
            geometry: self.geometry.clone(),
            attributes: self.attributes.iter().map(|a| a.map(|v| U::of(v.as_f64()))).collect(),
        }
    }
}

/// Result of [`voxelize`]: the cloud plus the axes whose extent was zero.
#[derive(Clone, Debug)]
pub struct Voxelization<T> {
    pub cloud: VoxelCloud<T>,
    /// Axes (x, y, z) with zero range; every point lands on grid coordinate 0 there.
    pub degenerate_axes: [bool; 3],
}

impl<T> Voxelization<T> {
    pub fn has_degenerate_extent(&self) -> bool {
        self.degenerate_axes.iter().any(|&d| d)
    }
}

/// Maps raw points onto the `2^depth` grid and merges points sharing a cell.
///
/// Inputs whose coordinates are all integers with a per-axis range below
/// `2^depth` are treated as already voxelized and only translated so each
/// axis starts at 0. Anything else is min-max normalized per axis onto
/// `[0, 2^depth)` and floored, the maximum landing in the last cell. Colors of
/// points sharing a cell are averaged in RGB before conversion to YUV.
pub fn voxelize<T: Scalar>(cloud: &RawPointCloud, depth: u32) -> Result<Voxelization<T>> {
    morton::check_depth(depth)?;
    if cloud.is_empty() {
        return Err(CodecError::EmptyCloud);
    }
    let side = 1u64 << depth;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in &cloud.points {
        for a in 0..3 {
            lo[a] = lo[a].min(p.position[a]);
            hi[a] = hi[a].max(p.position[a]);
        }
    }
    let range = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    let degenerate_axes = range.map(|r| r == 0.0);
    let integral = range.iter().all(|&r| r < side as f64)
        && cloud.points.iter().all(|p| p.position.iter().all(|c| c.fract() == 0.0));

    let cell = |c: f64, axis: usize| -> u32 {
        if degenerate_axes[axis] {
            0
        } else if integral {
            (c - lo[axis]) as u32
        } else {
            let t = (c - lo[axis]) / range[axis];
            ((t * side as f64).floor() as u64).min(side - 1) as u32
        }
    };

    // (sum of RGB, count) per occupied cell
    let mut cells: HashMap<u64, ([f64; 3], u32)> = HashMap::with_capacity(cloud.len());
    for p in &cloud.points {
        let code = morton::encode_unchecked(cell(p.position[0], 0), cell(p.position[1], 1), cell(p.position[2], 2));
        let entry = cells.entry(code).or_insert(([0.0; 3], 0));
        for (acc, &c) in entry.0.iter_mut().zip(&p.rgb) {
            *acc += f64::from(c);
        }
        entry.1 += 1;
    }
    let mut merged: Vec<(u64, [f64; 3], u32)> = cells.into_iter().map(|(k, (s, n))| (k, s, n)).collect();
    merged.sort_unstable_by_key(|e| e.0);

    let codes = merged.iter().map(|e| e.0).collect();
    let attributes =
        merged.iter().map(|&(_, sum, n)| color::rgb_to_yuv(sum.map(|s| T::of(s / f64::from(n))))).collect();
    let cloud = VoxelCloud::new(Geometry::new(depth, codes)?, attributes)?;
    Ok(Voxelization { cloud, degenerate_axes })
}
