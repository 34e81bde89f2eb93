//! Uniform midtread quantizer and the zigzag signed -> unsigned map.

use crate::Scalar;

/// `sign(c) * floor(|c| / q + 1/2)`: rounds half away from zero.
#[inline]
pub fn quantize<T: Scalar>(c: T, q: T) -> i64 {
    let r = ((c.abs() / q) + T::of(0.5)).floor();
    let m = r.to_i64().unwrap_or(i64::MAX);
    if c < T::zero() {
        -m
    } else {
        m
    }
}

#[inline]
pub fn dequantize<T: Scalar>(level: i64, q: T) -> T {
    T::of(level as f64) * q
}

/// 0, -1, 1, -2, 2, ... -> 0, 1, 2, 3, 4, ...
#[inline]
pub fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

#[inline]
pub fn unzigzag(u: u64) -> i64 {
    ((u >> 1) as i64) ^ -((u & 1) as i64)
}
