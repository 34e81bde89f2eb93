//! BT.601 full-range RGB <-> YUV.
//!
//! The inverse is the exact algebraic inverse of the forward matrix (computed
//! once in double precision), not the usual rounded 1.402 / 1.772 constants,
//! so a round trip is the identity to within floating-point noise.

use std::sync::LazyLock;

use crate::Scalar;

const FORWARD: [[f64; 3]; 3] = [[0.299, 0.587, 0.114], [-0.168736, -0.331264, 0.5], [0.5, -0.418688, -0.081312]];

const CHROMA_OFFSET: f64 = 128.0;

static INVERSE: LazyLock<[[f64; 3]; 3]> = LazyLock::new(|| invert3(&FORWARD));

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let c00 = cof(1, 2, 1, 2);
    let c01 = -cof(1, 2, 0, 2);
    let c02 = cof(1, 2, 0, 1);
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    let adj = [
        [c00, -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [c01, cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [c02, -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    adj.map(|row| row.map(|v| v / det))
}

fn clamp_channel<T: Scalar>(v: T) -> T {
    let hi = T::of(255.0);
    if v.is_nan() {
        T::zero()
    } else {
        v.max(T::zero()).min(hi)
    }
}

/// Converts RGB (each clamped to `[0, 255]`) to full-range YUV.
pub fn rgb_to_yuv<T: Scalar>(rgb: [T; 3]) -> [T; 3] {
    let rgb = rgb.map(clamp_channel);
    let mut out = [T::zero(); 3];
    for (row, o) in FORWARD.iter().zip(out.iter_mut()) {
        *o = T::of(row[0]) * rgb[0] + T::of(row[1]) * rgb[1] + T::of(row[2]) * rgb[2];
    }
    out[1] += T::of(CHROMA_OFFSET);
    out[2] += T::of(CHROMA_OFFSET);
    out
}

/// Inverts [`rgb_to_yuv`] and clamps the result to `[0, 255]`.
pub fn yuv_to_rgb<T: Scalar>(yuv: [T; 3]) -> [T; 3] {
    yuv_to_rgb_unclamped(yuv).map(clamp_channel)
}

/// The algebraic inverse without clamping.
pub fn yuv_to_rgb_unclamped<T: Scalar>(yuv: [T; 3]) -> [T; 3] {
    let inv = &*INVERSE;
    let centered = [yuv[0], yuv[1] - T::of(CHROMA_OFFSET), yuv[2] - T::of(CHROMA_OFFSET)];
    let mut out = [T::zero(); 3];
    for (row, o) in inv.iter().zip(out.iter_mut()) {
        *o = T::of(row[0]) * centered[0] + T::of(row[1]) * centered[1] + T::of(row[2]) * centered[2];
    }
    out
}

/// Rounds a clamped channel to `u8`, half away from zero.
pub fn to_u8<T: Scalar>(v: T) -> u8 {
    clamp_channel(v).as_f64().round() as u8
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn black_and_white() {
        assert!(close(rgb_to_yuv([0.0, 0.0, 0.0]), [0.0, 128.0, 128.0], 1e-12));
        assert!(close(rgb_to_yuv([255.0, 255.0, 255.0]), [255.0, 128.0, 128.0], 1e-9));
        assert!(close(yuv_to_rgb([0.0, 128.0, 128.0]), [0.0, 0.0, 0.0], 1e-9));
        assert!(close(yuv_to_rgb([255.0, 128.0, 128.0]), [255.0, 255.0, 255.0], 1e-9));
    }

    #[test]
    fn pure_red_matches_direct_formula() {
        let y = 0.299 * 255.0;
        let u = -0.168736 * 255.0 + 128.0;
        let v = 0.5 * 255.0 + 128.0;
        let got = rgb_to_yuv([255.0, 0.0, 0.0]);
        assert!(close(got, [y, u, v], 1e-12));
        assert!((got[0] - 76.245).abs() < 1e-12);
        assert!((got[1] - 84.97232).abs() < 1e-12);
        assert!((got[2] - 255.5).abs() < 1e-12);
        // V above 255 is a legal YUV value; the inverse still lands on red.
        assert!(close(yuv_to_rgb(got), [255.0, 0.0, 0.0], 1e-9));
    }

    #[test]
    fn inputs_clamped() {
        assert_eq!(rgb_to_yuv([-10.0, 300.0, 0.0]), rgb_to_yuv([0.0, 255.0, 0.0]));
        let rgb = yuv_to_rgb([300.0f64, 0.0, 0.0]);
        assert!(rgb.iter().all(|c| (0.0..=255.0).contains(c)));
    }

    #[test]
    fn u8_rounding_is_half_away() {
        assert_eq!(to_u8(127.5f64), 128);
        assert_eq!(to_u8(127.49f64), 127);
        assert_eq!(to_u8(-3.0f64), 0);
        assert_eq!(to_u8(400.0f64), 255);
    }

    #[test]
    fn f32_roundtrip_is_close() {
        let c = [12.0f32, 200.0, 99.0];
        let back = yuv_to_rgb(rgb_to_yuv(c));
        for (a, b) in c.iter().zip(&back) {
            assert!((a - b).abs() < 1e-3);
        }
    }

    proptest! {
        #[test]
        fn roundtrip_identity(r in 0.0f64..=255.0, g in 0.0f64..=255.0, b in 0.0f64..=255.0) {
            let back = yuv_to_rgb_unclamped(rgb_to_yuv([r, g, b]));
            prop_assert!(close(back, [r, g, b], 1e-9), "{:?} vs {:?}", back, [r, g, b]);
        }
    }
}
