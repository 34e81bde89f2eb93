//! Rate, distortion and zero-run statistics.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::container::{decode, encode, quantize_coefficients};
use crate::error::{CodecError, Result};
use crate::ordering::OrderingMode;
use crate::raht::CoeffMeta;
use crate::schedule::build_schedule;
use crate::voxel::VoxelCloud;
use crate::Scalar;

/// Returned by [`psnr_y`] when the luminance matches exactly.
pub const LOSSLESS_PSNR: f64 = f64::INFINITY;

fn same_geometry<T: Scalar>(a: &VoxelCloud<T>, b: &VoxelCloud<T>) -> Result<()> {
    if a.geometry() == b.geometry() {
        Ok(())
    } else {
        Err(CodecError::GeometryMismatch(format!("clouds differ in occupied voxels ({} vs {})", a.len(), b.len())))
    }
}

/// Mean squared error of one channel over the occupied voxels.
pub fn channel_mse<T: Scalar>(a: &VoxelCloud<T>, b: &VoxelCloud<T>, channel: usize) -> Result<f64> {
    same_geometry(a, b)?;
    let sum: f64 = a
        .attributes()
        .iter()
        .zip(b.attributes())
        .map(|(x, y)| {
            let d = x[channel].as_f64() - y[channel].as_f64();
            d * d
        })
        .sum();
    Ok(sum / a.len() as f64)
}

/// Luminance PSNR in dB with a peak of 255, over real-valued Y.
pub fn psnr_y<T: Scalar>(original: &VoxelCloud<T>, reconstructed: &VoxelCloud<T>) -> Result<f64> {
    let mse = channel_mse(original, reconstructed, 0)?;
    if mse == 0.0 {
        return Ok(LOSSLESS_PSNR);
    }
    Ok(10.0 * (255.0 * 255.0 / mse).log10())
}

/// Number of maximal zero runs and the zeros they hold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ZeroRuns {
    pub runs: u64,
    pub zeros: u64,
}

impl ZeroRuns {
    pub fn of(symbols: &[i64]) -> Self {
        let mut out = Self::default();
        let mut in_run = false;
        for &s in symbols {
            if s == 0 {
                out.zeros += 1;
                if !in_run {
                    out.runs += 1;
                }
            }
            in_run = s == 0;
        }
        out
    }

    pub fn merge(self, other: Self) -> Self {
        Self { runs: self.runs + other.runs, zeros: self.zeros + other.zeros }
    }

    pub fn mean(self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.zeros as f64 / self.runs as f64
        }
    }
}

/// Mean length of the maximal zero runs in `symbols` (0 when there are none).
pub fn avg_zero_run(symbols: &[i64]) -> Result<f64> {
    if symbols.is_empty() {
        return Err(CodecError::EmptyStream);
    }
    Ok(ZeroRuns::of(symbols).mean())
}

/// High-pass coefficient count per merge level.
pub fn depth_histogram(meta: &[CoeffMeta]) -> BTreeMap<u32, usize> {
    let mut h = BTreeMap::new();
    for m in meta.iter().filter(|m| m.depth > 0) {
        *h.entry(m.depth).or_insert(0) += 1;
    }
    h
}

/// One rate-distortion measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct RdPoint {
    pub cloud: String,
    pub q: f64,
    pub mode: OrderingMode,
    pub bpv: f64,
    pub psnr_y: f64,
    /// Mean zero-run length pooled over the Y, U and V streams.
    pub avg_zero_run: f64,
}

pub fn rd_point<T: Scalar>(name: &str, cloud: &VoxelCloud<T>, q: f64, mode: OrderingMode) -> Result<RdPoint> {
    let stream = encode(cloud, q, mode, false)?;
    let decoded: VoxelCloud<T> = decode(&stream, Some(cloud.geometry()))?;
    let quantized = quantize_coefficients(cloud, &build_schedule(cloud.geometry()), q, mode)?;
    let runs = quantized.levels.iter().fold(ZeroRuns::default(), |acc, l| acc.merge(ZeroRuns::of(l)));
    Ok(RdPoint {
        cloud: name.to_owned(),
        q,
        mode,
        bpv: stream.bpv(),
        psnr_y: psnr_y(cloud, &decoded)?,
        avg_zero_run: runs.mean(),
    })
}

/// Every (Q, mode) combination, sorted by (mode, Q).
pub fn rd_sweep<T: Scalar>(
    name: &str,
    cloud: &VoxelCloud<T>,
    qs: &[f64],
    modes: &[OrderingMode],
) -> Result<Vec<RdPoint>> {
    let mut jobs: Vec<(OrderingMode, f64)> = modes.iter().flat_map(|&m| qs.iter().map(move |&q| (m, q))).collect();
    jobs.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let results: Vec<Result<RdPoint>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs.iter().map(|&(mode, q)| s.spawn(move || rd_point(name, cloud, q, mode))).collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    results.into_iter().collect()
}

pub const CSV_HEADER: [&str; 6] = ["cloud", "Q", "mode", "bpv", "psnr_y", "avg_zero_run"];

/// Writes `points` as CSV with a header row; floats use shortest round-trip form.
pub fn write_csv<W: Write>(points: &[RdPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| CodecError::Csv(e.to_string());
    w.write_record(CSV_HEADER).map_err(err)?;
    for p in points {
        w.write_record([
            p.cloud.clone(),
            p.q.to_string(),
            p.mode.to_string(),
            p.bpv.to_string(),
            p.psnr_y.to_string(),
            p.avg_zero_run.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| CodecError::Csv(e.to_string()))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<RdPoint>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(|e| CodecError::Csv(e.to_string()))?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(CodecError::Csv(format!("unexpected header {headers:?}")));
    }
    let mut out = Vec::new();
    for record in r.records() {
        let rec = record.map_err(|e| CodecError::Csv(e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| CodecError::Csv(format!("bad number {:?} in column {}", &rec[i], CSV_HEADER[i])))
        };
        out.push(RdPoint {
            cloud: rec[0].to_owned(),
            q: num(1)?,
            mode: rec[2].parse()?,
            bpv: num(3)?,
            psnr_y: num(4)?,
            avg_zero_run: num(5)?,
        });
    }
    Ok(out)
}
