//! Seeded synthetic clouds for experiments without external data.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CodecError, Result};
use crate::morton;
use crate::ply::{RawPoint, RawPointCloud};

/// Largest number of voxels the generator will produce.
pub const MAX_VOXELS: u64 = 1 << 25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    /// One color everywhere.
    Constant,
    /// Gray whose luminance rises linearly with `x + y + z`.
    Gradient,
    /// Independent uniform RGB per voxel.
    Noise,
}

impl FromStr for SynthKind {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(Self::Constant),
            "gradient" => Ok(Self::Gradient),
            "noise" => Ok(Self::Noise),
            other => Err(CodecError::Generator(format!("unknown kind {other:?} (constant, gradient, noise)"))),
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Constant => "constant",
            Self::Gradient => "gradient",
            Self::Noise => "noise",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub depth: u32,
    /// Fraction of the `8^depth` cells that are occupied, in `(0, 1]`.
    pub fill: f64,
    pub seed: u64,
}

pub const CONSTANT_RGB: [u8; 3] = [180, 120, 60];

/// Generates a cloud on integer grid coordinates, one point per occupied cell,
/// in Morton order.
pub fn generate(spec: &SynthSpec) -> Result<RawPointCloud> {
    morton::check_depth(spec.depth)?;
    if !(spec.fill > 0.0 && spec.fill <= 1.0) {
        return Err(CodecError::InvalidFill(spec.fill));
    }
    let cells = 1u128 << (3 * spec.depth);
    let count = ((spec.fill * cells as f64).round() as u128).clamp(1, cells);
    if count > u128::from(MAX_VOXELS) {
        return Err(CodecError::Generator(format!("{count} voxels exceeds the limit of {MAX_VOXELS}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut codes: Vec<u64> = if count == cells {
        (0..cells as u64).collect()
    } else {
        rand::seq::index::sample(&mut rng, cells as usize, count as usize).into_iter().map(|i| i as u64).collect()
    };
    codes.sort_unstable();

    let max_sum = 3.0 * ((1u64 << spec.depth) - 1) as f64;
    let points = codes
        .into_iter()
        .map(|code| {
            let (x, y, z) = morton::decode_unchecked(code);
            let rgb = match spec.kind {
                SynthKind::Constant => CONSTANT_RGB,
                SynthKind::Gradient => {
                    let gray = (255.0 * f64::from(x + y + z) / max_sum).round() as u8;
                    [gray; 3]
                }
                SynthKind::Noise => [rng.random(), rng.random(), rng.random()],
            };
            RawPoint { position: [f64::from(x), f64::from(y), f64::from(z)], rgb }
        })
        .collect();
    Ok(RawPointCloud { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_fill_covers_grid() {
        let c = generate(&SynthSpec { kind: SynthKind::Constant, depth: 3, fill: 1.0, seed: 0 }).unwrap();
        assert_eq!(c.len(), 512);
        assert!(c.points.iter().all(|p| p.rgb == CONSTANT_RGB));
    }

    #[test]
    fn seeded_and_deterministic() {
        let spec = SynthSpec { kind: SynthKind::Noise, depth: 5, fill: 0.1, seed: 42 };
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        let other = SynthSpec { seed: 43, ..spec };
        assert_ne!(generate(&spec).unwrap(), generate(&other).unwrap());
        assert_eq!(generate(&spec).unwrap().len(), 3277);
    }

    #[test]
    fn gradient_spans_range() {
        let c = generate(&SynthSpec { kind: SynthKind::Gradient, depth: 2, fill: 1.0, seed: 0 }).unwrap();
        assert_eq!(c.points[0].rgb, [0, 0, 0]);
        assert_eq!(c.points.last().unwrap().rgb, [255, 255, 255]);
        for p in &c.points {
            let s = p.position.iter().sum::<f64>();
            assert_eq!(f64::from(p.rgb[0]), (255.0 * s / 9.0).round());
        }
    }

    #[test]
    fn bad_parameters() {
        for fill in [0.0, -0.5, 1.5, f64::NAN] {
            let spec = SynthSpec { kind: SynthKind::Gradient, depth: 3, fill, seed: 1 };
            assert!(matches!(generate(&spec), Err(CodecError::InvalidFill(_))));
        }
        let huge = SynthSpec { kind: SynthKind::Gradient, depth: 12, fill: 1.0, seed: 1 };
        assert!(matches!(generate(&huge), Err(CodecError::Generator(_))));
        assert!("plaid".parse::<SynthKind>().is_err());
    }
}
