//! Stream layout and the end-to-end encode / decode pipelines.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "RAHT"
//!      4     1  version (1)
//!      5     1  octree depth
//!      6     1  ordering mode (0 traversal, 1 depth, 2 weight)
//!      7     1  flags (bit 0: geometry bundled)
//!      8     8  Q, f64 LE
//!     16     8  voxel count, u64 LE
//!     24    24  Y, U, V payload lengths, u64 LE each
//!     48        [bundled geometry: voxel count x u64 LE Morton codes]
//!               Y payload, U payload, V payload
//! ```

use crate::error::{CodecError, Result, RlgrError};
use crate::ordering::{make_permutation, OrderingMode, Permutation};
use crate::quant::{dequantize, quantize, unzigzag, zigzag};
use crate::raht::{self, CoeffMeta, CoefficientSet};
use crate::rlgr::{rlgr_decode, rlgr_encode};
use crate::schedule::{build_schedule, MergeSchedule};
use crate::voxel::{Geometry, VoxelCloud};
use crate::Scalar;

pub const MAGIC: [u8; 4] = *b"RAHT";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 48;
const FLAG_BUNDLED_GEOMETRY: u8 = 0x01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StreamHeader {
    pub depth: u32,
    pub mode: OrderingMode,
    pub bundled_geometry: bool,
    pub q: f64,
    pub n_voxels: u64,
    pub payload_lens: [u64; 3],
}

impl StreamHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        out[4] = VERSION;
        out[5] = self.depth as u8;
        out[6] = self.mode.code();
        out[7] = if self.bundled_geometry { FLAG_BUNDLED_GEOMETRY } else { 0 };
        out[8..16].copy_from_slice(&self.q.to_le_bytes());
        out[16..24].copy_from_slice(&self.n_voxels.to_le_bytes());
        for (i, len) in self.payload_lens.iter().enumerate() {
            out[24 + 8 * i..32 + 8 * i].copy_from_slice(&len.to_le_bytes());
        }
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(CodecError::TruncatedContainer { needed: HEADER_LEN, have: bytes.len() });
        }
        if bytes[..4] != MAGIC {
            return Err(CodecError::BadMagic);
        }
        if bytes[4] != VERSION {
            return Err(CodecError::UnsupportedVersion(bytes[4]));
        }
        let depth = u32::from(bytes[5]);
        crate::morton::check_depth(depth)?;
        let mode = OrderingMode::from_code(bytes[6])?;
        let flags = bytes[7];
        if flags & !FLAG_BUNDLED_GEOMETRY != 0 {
            return Err(CodecError::UnknownFlags(flags));
        }
        let u64_at = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
        let q = f64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
        check_step(q)?;
        Ok(Self {
            depth,
            mode,
            bundled_geometry: flags & FLAG_BUNDLED_GEOMETRY != 0,
            q,
            n_voxels: u64_at(16),
            payload_lens: [u64_at(24), u64_at(32), u64_at(40)],
        })
    }
}

/// A parsed or freshly encoded stream.
#[derive(Clone, Debug, PartialEq)]
pub struct CodecStream {
    pub header: StreamHeader,
    /// Morton codes, present when the geometry is bundled.
    pub geometry: Option<Vec<u64>>,
    pub payloads: [Vec<u8>; 3],
}

impl CodecStream {
    pub fn to_bytes(&self) -> Vec<u8> {
        let geo_len = self.geometry.as_ref().map_or(0, |g| g.len() * 8);
        let mut out = Vec::with_capacity(HEADER_LEN + geo_len + self.payloads.iter().map(Vec::len).sum::<usize>());
        out.extend_from_slice(&self.header.to_bytes());
        if let Some(codes) = &self.geometry {
            for c in codes {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        for p in &self.payloads {
            out.extend_from_slice(p);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = StreamHeader::parse(bytes)?;
        let too_big = || CodecError::TruncatedContainer { needed: usize::MAX, have: bytes.len() };
        let geo_len = if header.bundled_geometry {
            usize::try_from(header.n_voxels).ok().and_then(|n| n.checked_mul(8)).ok_or_else(too_big)?
        } else {
            0
        };
        let mut needed = HEADER_LEN.checked_add(geo_len).ok_or_else(too_big)?;
        for len in header.payload_lens {
            needed = usize::try_from(len).ok().and_then(|l| needed.checked_add(l)).ok_or_else(too_big)?;
        }
        if bytes.len() < needed {
            return Err(CodecError::TruncatedContainer { needed, have: bytes.len() });
        }
        if bytes.len() > needed {
            return Err(CodecError::TrailingBytes(bytes.len() - needed));
        }
        let mut at = HEADER_LEN;
        let geometry = header.bundled_geometry.then(|| {
            let codes = bytes[at..at + geo_len]
                .chunks_exact(8)
                .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            at += geo_len;
            codes
        });
        let payloads = header.payload_lens.map(|len| {
            let p = bytes[at..at + len as usize].to_vec();
            at += len as usize;
            p
        });
        Ok(Self { header, geometry, payloads })
    }

    /// Bytes counted toward the rate: header plus the three payloads.
    pub fn rate_bytes(&self) -> u64 {
        HEADER_LEN as u64 + self.header.payload_lens.iter().sum::<u64>()
    }

    /// Bits per occupied voxel, bundled geometry excluded.
    pub fn bpv(&self) -> f64 {
        (8 * self.rate_bytes()) as f64 / self.header.n_voxels as f64
    }

    pub fn total_len(&self) -> usize {
        HEADER_LEN
            + self.geometry.as_ref().map_or(0, |g| 8 * g.len())
            + self.payloads.iter().map(Vec::len).sum::<usize>()
    }
}

fn check_step(q: f64) -> Result<()> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(CodecError::InvalidStep(q))
    }
}

/// Quantized coefficients in encode order, one list per channel.
#[derive(Clone, Debug)]
pub struct QuantizedCoefficients {
    pub meta: Vec<CoeffMeta>,
    pub permutation: Permutation,
    /// Y, U, V quantization levels, in encode order.
    pub levels: [Vec<i64>; 3],
}

impl QuantizedCoefficients {
    /// Metadata of the coefficient sent at each position.
    pub fn encode_order_meta(&self) -> impl Iterator<Item = &CoeffMeta> + '_ {
        self.permutation.forward().iter().map(|&t| &self.meta[t])
    }
}

/// Transform, quantize and reorder; everything `encode` does short of entropy coding.
pub fn quantize_coefficients<T: Scalar>(
    cloud: &VoxelCloud<T>,
    schedule: &MergeSchedule,
    q: f64,
    mode: OrderingMode,
) -> Result<QuantizedCoefficients> {
    check_step(q)?;
    let coeffs = raht::forward(cloud, schedule)?;
    let permutation = make_permutation(mode, coeffs.meta())?;
    let step = T::of(q);
    let mut levels: [Vec<i64>; 3] = Default::default();
    for (c, out) in levels.iter_mut().enumerate() {
        let traversal: Vec<i64> = coeffs.values(c).iter().map(|&v| quantize(v, step)).collect();
        *out = permutation.apply(&traversal)?;
    }
    Ok(QuantizedCoefficients { meta: coeffs.meta().to_vec(), permutation, levels })
}

fn to_symbols(levels: &[i64]) -> Result<Vec<u32>> {
    levels
        .iter()
        .map(|&l| {
            let z = zigzag(l);
            u32::try_from(z).map_err(|_| CodecError::Rlgr(RlgrError::SymbolTooLarge(z)))
        })
        .collect()
}

/// Encodes the colors of `cloud` with quantizer step `q`.
pub fn encode<T: Scalar>(
    cloud: &VoxelCloud<T>,
    q: f64,
    mode: OrderingMode,
    bundle_geometry: bool,
) -> Result<CodecStream> {
    let schedule = build_schedule(cloud.geometry());
    let quantized = quantize_coefficients(cloud, &schedule, q, mode)?;
    let mut payloads: [Vec<u8>; 3] = Default::default();
    for (levels, payload) in quantized.levels.iter().zip(payloads.iter_mut()) {
        *payload = rlgr_encode(&to_symbols(levels)?);
    }
    let header = StreamHeader {
        depth: cloud.depth(),
        mode,
        bundled_geometry: bundle_geometry,
        q,
        n_voxels: cloud.len() as u64,
        payload_lens: payloads.each_ref().map(|p| p.len() as u64),
    };
    let geometry = bundle_geometry.then(|| cloud.geometry().codes().to_vec());
    Ok(CodecStream { header, geometry, payloads })
}

fn resolve_geometry(stream: &CodecStream, supplied: Option<&Geometry>) -> Result<Geometry> {
    let header = &stream.header;
    let geometry = match (&stream.geometry, supplied) {
        (Some(codes), supplied) => {
            let bundled = Geometry::new(header.depth, codes.clone())?;
            if let Some(g) = supplied {
                if g != &bundled {
                    return Err(CodecError::GeometryMismatch(
                        "supplied geometry differs from the geometry bundled in the stream".into(),
                    ));
                }
            }
            bundled
        }
        (None, Some(g)) => g.clone(),
        (None, None) => return Err(CodecError::MissingGeometry),
    };
    if geometry.depth() != header.depth {
        return Err(CodecError::GeometryMismatch(format!(
            "stream was encoded at depth {}, geometry has depth {}",
            header.depth,
            geometry.depth()
        )));
    }
    if geometry.len() as u64 != header.n_voxels {
        return Err(CodecError::GeometryMismatch(format!(
            "expected {} voxels, found {}",
            header.n_voxels,
            geometry.len()
        )));
    }
    Ok(geometry)
}

/// Reconstructs the voxel colors. `geometry` is required unless bundled.
pub fn decode<T: Scalar>(stream: &CodecStream, geometry: Option<&Geometry>) -> Result<VoxelCloud<T>> {
    let header = &stream.header;
    check_step(header.q)?;
    let geometry = resolve_geometry(stream, geometry)?;
    let schedule = build_schedule(&geometry);
    let meta = raht::coefficient_meta(&schedule);
    let permutation = make_permutation(header.mode, &meta)?;
    let n = geometry.len();
    let step = T::of(header.q);

    let mut channels: [Vec<T>; 3] = Default::default();
    for (payload, out) in stream.payloads.iter().zip(channels.iter_mut()) {
        let symbols = rlgr_decode(payload, n)?;
        let levels: Vec<i64> = symbols.into_iter().map(|s| unzigzag(u64::from(s))).collect();
        *out = permutation.unapply(&levels)?.into_iter().map(|l| dequantize(l, step)).collect();
    }
    let coeffs = CoefficientSet::new(meta, channels)?;
    let values = raht::inverse(&coeffs, &schedule)?;
    VoxelCloud::from_channels(geometry, values)
}
