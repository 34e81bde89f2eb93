//! 3-D Morton (Z-order) codes.
//!
//! Within each octree level the bit triplet is `x y z` with `x` most
//! significant, so `(1, 0, 1)` at depth 1 encodes to `0b101`.

use crate::error::{CodecError, Result};

pub const MAX_DEPTH: u32 = 21;

/// Spreads the low 21 bits of `v` to every third bit.
#[inline]
fn spread(v: u64) -> u64 {
    let mut x = v & 0x1f_ffff;
    x = (x | (x << 32)) & 0x001f_0000_0000_ffff;
    x = (x | (x << 16)) & 0x001f_0000_ff00_00ff;
    x = (x | (x << 8)) & 0x100f_00f0_0f00_f00f;
    x = (x | (x << 4)) & 0x10c3_0c30_c30c_30c3;
    x = (x | (x << 2)) & 0x1249_2492_4924_9249;
    x
}

#[inline]
fn compact(v: u64) -> u64 {
    let mut x = v & 0x1249_2492_4924_9249;
    x = (x | (x >> 2)) & 0x10c3_0c30_c30c_30c3;
    x = (x | (x >> 4)) & 0x100f_00f0_0f00_f00f;
    x = (x | (x >> 8)) & 0x001f_0000_ff00_00ff;
    x = (x | (x >> 16)) & 0x001f_0000_0000_ffff;
    x = (x | (x >> 32)) & 0x1f_ffff;
    x
}

pub(crate) fn check_depth(depth: u32) -> Result<()> {
    if (1..=MAX_DEPTH).contains(&depth) {
        Ok(())
    } else {
        Err(CodecError::DepthOutOfRange(depth))
    }
}

/// Interleaves grid coordinates into a `3 * depth`-bit code.
pub fn encode(x: u32, y: u32, z: u32, depth: u32) -> Result<u64> {
    check_depth(depth)?;
    let side = 1u64 << depth;
    if u64::from(x) >= side || u64::from(y) >= side || u64::from(z) >= side {
        return Err(CodecError::CoordinateOutOfRange { x, y, z, depth });
    }
    Ok(encode_unchecked(x, y, z))
}

#[inline]
pub(crate) fn encode_unchecked(x: u32, y: u32, z: u32) -> u64 {
    (spread(u64::from(x)) << 2) | (spread(u64::from(y)) << 1) | spread(u64::from(z))
}

pub fn decode(code: u64, depth: u32) -> Result<(u32, u32, u32)> {
    check_depth(depth)?;
    if code >> (3 * depth) != 0 {
        return Err(CodecError::CodeOutOfRange { code, depth });
    }
    Ok(decode_unchecked(code))
}

#[inline]
pub(crate) fn decode_unchecked(code: u64) -> (u32, u32, u32) {
    (compact(code >> 2) as u32, compact(code >> 1) as u32, compact(code) as u32)
}
