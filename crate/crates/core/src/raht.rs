//! Region-adaptive hierarchical transform.
//!
//! Each pair step applies the weighted orthonormal butterfly
//!
//! ```text
//! lo = ( sqrt(w1) a + sqrt(w2) b) / sqrt(w1 + w2)
//! hi = (-sqrt(w2) a + sqrt(w1) b) / sqrt(w1 + w2)
//! ```
//!
//! where `a` is the Morton-earlier sibling. `lo` moves up a level with weight
//! `w1 + w2`, `hi` is emitted. Promoted nodes pass through untouched. The
//! surviving root low-pass is the DC.

use crate::error::{CodecError, Result};
use crate::schedule::MergeSchedule;
use crate::voxel::VoxelCloud;
use crate::Scalar;

/// Geometry-derived coefficient metadata; identical for every channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CoeffMeta {
    /// Number of voxels merged into the pair that produced the coefficient.
    pub weight: u64,
    /// Binary merge level of the producing pair, 0 for the DC.
    pub depth: u32,
    /// Position in the root-first, left-to-right scan; the DC is 0.
    pub traversal_index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficient<T> {
    pub value: T,
    pub meta: CoeffMeta,
}

/// Y, U and V coefficients in traversal order over shared metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSet<T> {
    meta: Vec<CoeffMeta>,
    channels: [Vec<T>; 3],
}

impl<T: Scalar> CoefficientSet<T> {
    pub fn new(meta: Vec<CoeffMeta>, channels: [Vec<T>; 3]) -> Result<Self> {
        for ch in &channels {
            if ch.len() != meta.len() {
                return Err(CodecError::LengthMismatch { expected: meta.len(), found: ch.len() });
            }
        }
        Ok(Self { meta, channels })
    }

    pub fn len(&self) -> usize {
        self.meta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meta.is_empty()
    }

    pub fn meta(&self) -> &[CoeffMeta] {
        &self.meta
    }

    pub fn values(&self, channel: usize) -> &[T] {
        &self.channels[channel]
    }

    pub fn channels(&self) -> &[Vec<T>; 3] {
        &self.channels
    }

    pub fn into_channels(self) -> [Vec<T>; 3] {
        self.channels
    }

    pub fn channel(&self, channel: usize) -> impl ExactSizeIterator<Item = Coefficient<T>> + '_ {
        self.meta.iter().zip(&self.channels[channel]).map(|(&meta, &value)| Coefficient { value, meta })
    }
}

#[inline]
fn butterfly_weights<T: Scalar>(w1: u64, w2: u64) -> (T, T) {
    let total = (w1 + w2) as f64;
    // Computed in f64 so the f64 instantiation is bit-reproducible.
    (T::of((w1 as f64 / total).sqrt()), T::of((w2 as f64 / total).sqrt()))
}

/// Forward butterfly on a sibling pair; `a` is the Morton-earlier node.
#[inline]
pub fn butterfly_forward<T: Scalar>(a: T, b: T, w1: u64, w2: u64) -> (T, T) {
    let (c1, c2) = butterfly_weights::<T>(w1, w2);
    (c1 * a + c2 * b, c1 * b - c2 * a)
}

/// Transposed butterfly, the exact inverse of [`butterfly_forward`].
#[inline]
pub fn butterfly_inverse<T: Scalar>(lo: T, hi: T, w1: u64, w2: u64) -> (T, T) {
    let (c1, c2) = butterfly_weights::<T>(w1, w2);
    (c1 * lo - c2 * hi, c2 * lo + c1 * hi)
}

/// Metadata for every coefficient in traversal order.
pub fn coefficient_meta(schedule: &MergeSchedule) -> Vec<CoeffMeta> {
    let n = schedule.n_voxels();
    let mut meta = vec![CoeffMeta { weight: n as u64, depth: 0, traversal_index: 0 }; n];
    for level in schedule.levels() {
        for p in &level.pairs {
            meta[p.traversal] = CoeffMeta { weight: p.w_a + p.w_b, depth: level.level, traversal_index: p.traversal };
        }
    }
    meta
}

/// Transforms one channel; the output is indexed by traversal position.
pub fn forward_channel<T: Scalar>(values: &[T], schedule: &MergeSchedule) -> Result<Vec<T>> {
    if values.len() != schedule.n_voxels() {
        return Err(CodecError::ScheduleMismatch { schedule: schedule.n_voxels(), input: values.len() });
    }
    let mut out = vec![T::zero(); values.len()];
    let mut work = values.to_vec();
    let mut next = Vec::with_capacity(work.len());
    for level in schedule.levels() {
        if level.pairs.is_empty() {
            continue;
        }
        next.clear();
        let mut i = 0;
        for p in &level.pairs {
            next.extend_from_slice(&work[i..p.src]);
            let (lo, hi) = butterfly_forward(work[p.src], work[p.src + 1], p.w_a, p.w_b);
            next.push(lo);
            out[p.traversal] = hi;
            i = p.src + 2;
        }
        next.extend_from_slice(&work[i..]);
        std::mem::swap(&mut work, &mut next);
    }
    debug_assert_eq!(work.len(), 1);
    out[0] = work[0];
    Ok(out)
}

/// Inverts [`forward_channel`].
pub fn inverse_channel<T: Scalar>(coeffs: &[T], schedule: &MergeSchedule) -> Result<Vec<T>> {
    if coeffs.len() != schedule.n_voxels() {
        return Err(CodecError::ScheduleMismatch { schedule: schedule.n_voxels(), input: coeffs.len() });
    }
    let mut work = vec![coeffs[0]];
    let mut prev = Vec::with_capacity(coeffs.len());
    for level in schedule.levels().iter().rev() {
        if level.pairs.is_empty() {
            continue;
        }
        prev.clear();
        // `j` walks the level's outputs, `p.src` the inputs.
        let mut j = 0;
        for p in &level.pairs {
            let promoted = p.src - prev.len();
            prev.extend_from_slice(&work[j..j + promoted]);
            j += promoted;
            let (a, b) = butterfly_inverse(work[j], coeffs[p.traversal], p.w_a, p.w_b);
            prev.push(a);
            prev.push(b);
            j += 1;
        }
        prev.extend_from_slice(&work[j..]);
        std::mem::swap(&mut work, &mut prev);
    }
    debug_assert_eq!(work.len(), coeffs.len());
    Ok(work)
}

/// Transforms all three channels of `cloud`.
pub fn forward<T: Scalar>(cloud: &VoxelCloud<T>, schedule: &MergeSchedule) -> Result<CoefficientSet<T>> {
    if cloud.len() != schedule.n_voxels() {
        return Err(CodecError::ScheduleMismatch { schedule: schedule.n_voxels(), input: cloud.len() });
    }
    let y = forward_channel(&cloud.channel(0), schedule)?;
    let u = forward_channel(&cloud.channel(1), schedule)?;
    let v = forward_channel(&cloud.channel(2), schedule)?;
    CoefficientSet::new(coefficient_meta(schedule), [y, u, v])
}

/// Reconstructs per-voxel (Y, U, V) values in Morton order.
pub fn inverse<T: Scalar>(coeffs: &CoefficientSet<T>, schedule: &MergeSchedule) -> Result<[Vec<T>; 3]> {
    if coeffs.len() != schedule.n_voxels() {
        return Err(CodecError::ScheduleMismatch { schedule: schedule.n_voxels(), input: coeffs.len() });
    }
    Ok([
        inverse_channel(coeffs.values(0), schedule)?,
        inverse_channel(coeffs.values(1), schedule)?,
        inverse_channel(coeffs.values(2), schedule)?,
    ])
}
