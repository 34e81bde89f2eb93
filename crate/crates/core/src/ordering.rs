//! Encode-order permutations of the coefficients.
//!
//! Every ordering is computed from geometry-derived metadata only, so the
//! decoder rebuilds it without side information. The DC always goes first;
//! ties break on traversal index.

use std::fmt;
use std::str::FromStr;

use crate::error::{CodecError, Result};
use crate::raht::CoeffMeta;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum OrderingMode {
    /// Root-first, left-to-right tree scan.
    Traversal,
    /// Coarse levels first (merge level ascending).
    #[default]
    Depth,
    /// Heaviest coefficients first (weight descending).
    Weight,
}

impl OrderingMode {
    pub const ALL: [OrderingMode; 3] = [Self::Traversal, Self::Depth, Self::Weight];

    pub fn code(self) -> u8 {
        match self {
            Self::Traversal => 0,
            Self::Depth => 1,
            Self::Weight => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Self::Traversal),
            1 => Ok(Self::Depth),
            2 => Ok(Self::Weight),
            other => Err(CodecError::UnknownOrderingMode(other)),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Traversal => "traversal",
            Self::Depth => "depth",
            Self::Weight => "weight",
        }
    }
}

impl fmt::Display for OrderingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OrderingMode {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "traversal" => Ok(Self::Traversal),
            "depth" => Ok(Self::Depth),
            "weight" => Ok(Self::Weight),
            other => Err(CodecError::UnknownOrderingName(other.to_owned())),
        }
    }
}

/// `forward[i]` is the traversal index of the coefficient sent at position `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation {
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { forward: (0..n).collect(), inverse: (0..n).collect() }
    }

    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// Traversal order -> encode order: `out[i] = values[forward[i]]`.
    pub fn apply<V: Copy>(&self, values: &[V]) -> Result<Vec<V>> {
        self.check_len(values.len())?;
        Ok(self.forward.iter().map(|&t| values[t]).collect())
    }

    /// Encode order -> traversal order.
    pub fn unapply<V: Copy>(&self, values: &[V]) -> Result<Vec<V>> {
        self.check_len(values.len())?;
        Ok(self.inverse.iter().map(|&p| values[p]).collect())
    }

    fn check_len(&self, found: usize) -> Result<()> {
        if found == self.forward.len() {
            Ok(())
        } else {
            Err(CodecError::LengthMismatch { expected: self.forward.len(), found })
        }
    }
}

/// Builds the encode order for `mode` from per-coefficient metadata.
pub fn make_permutation(mode: OrderingMode, meta: &[CoeffMeta]) -> Result<Permutation> {
    let n = meta.len();
    let mut seen = vec![false; n];
    for m in meta {
        match seen.get_mut(m.traversal_index) {
            Some(s) if !*s => *s = true,
            _ => return Err(CodecError::DuplicateTraversalIndex(m.traversal_index)),
        }
    }
    let dcs: Vec<&CoeffMeta> = meta.iter().filter(|m| m.depth == 0).collect();
    if dcs.len() != 1 {
        return Err(CodecError::DcCount(dcs.len()));
    }

    let mut high: Vec<&CoeffMeta> = meta.iter().filter(|m| m.depth != 0).collect();
    match mode {
        OrderingMode::Traversal => high.sort_unstable_by_key(|m| m.traversal_index),
        OrderingMode::Depth => high.sort_unstable_by_key(|m| (m.depth, m.traversal_index)),
        OrderingMode::Weight => high.sort_unstable_by_key(|m| (std::cmp::Reverse(m.weight), m.traversal_index)),
    }
    let forward: Vec<usize> =
        std::iter::once(dcs[0].traversal_index).chain(high.iter().map(|m| m.traversal_index)).collect();
    let mut inverse = vec![0; n];
    for (pos, &t) in forward.iter().enumerate() {
        inverse[t] = pos;
    }
    Ok(Permutation { forward, inverse })
}
