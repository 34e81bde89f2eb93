//! Color attribute compression for voxelized point clouds.
//!
//! The codec walks the octree of a voxelized cloud from the leaves to the
//! root, merging sibling voxels with a weight-adaptive orthonormal butterfly
//! (the region-adaptive hierarchical transform). The high-pass outputs are
//! quantized, reordered and entropy coded with adaptive run-length
//! Golomb-Rice coding.
//!
//! ```text
//! PLY -> voxelize -> merge schedule -> RAHT -> quantize -> reorder -> zigzag -> RLGR -> stream
//! ```
//!
//! Geometry (the Morton set) is side information: the decoder rebuilds the
//! merge schedule and the coefficient ordering from it, so neither is sent.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`). The
//! bitstream, the CLI and the acceptance numbers all use `f64`; the aliases
//! below name the `f64` instantiations.

pub mod bitio;
pub mod color;
pub mod container;
pub mod error;
pub mod metrics;
pub mod morton;
pub mod ordering;
pub mod ply;
pub mod quant;
pub mod raht;
pub mod rlgr;
pub mod scalar;
pub mod schedule;
pub mod synth;
pub mod voxel;

pub use container::{decode, encode, CodecStream, StreamHeader, HEADER_LEN};
pub use error::{CodecError, PlyError, RlgrError};
pub use metrics::{avg_zero_run, psnr_y, rd_sweep, RdPoint};
pub use ordering::{OrderingMode, Permutation};
pub use ply::{parse_ply, write_ply, PlyFormat, RawPoint, RawPointCloud};
pub use raht::{CoeffMeta, Coefficient, CoefficientSet};
pub use scalar::Scalar;
pub use schedule::{build_schedule, MergeSchedule, MergeStep};
pub use voxel::{voxelize, Geometry, VoxelCloud, Voxelization};

/// Double-precision voxel cloud, the type the codec pipeline runs on.
pub type Cloud = VoxelCloud<f64>;
/// Single-precision voxel cloud.
pub type CloudF32 = VoxelCloud<f32>;
/// Double-precision transform coefficients.
pub type Coefficients = CoefficientSet<f64>;
/// Single-precision transform coefficients.
pub type CoefficientsF32 = CoefficientSet<f32>;
