use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use raht_codec::container::quantize_coefficients;
use raht_codec::metrics::{depth_histogram, write_csv, ZeroRuns};
use raht_codec::ply::write_raw_ply;
use raht_codec::synth::{generate, SynthKind, SynthSpec};
use raht_codec::{
    build_schedule, decode, encode, parse_ply, psnr_y, rd_sweep, voxelize, Cloud, CodecError, CodecStream, Geometry,
    OrderingMode, PlyFormat,
};

#[derive(Parser)]
#[command(name = "raht", version, about = "Point cloud color codec (RAHT + RLGR)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compress the colors of a PLY cloud.
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value = "depth")]
        order: OrderingMode,
        /// Store the Morton codes in the stream so it decodes standalone.
        #[arg(long)]
        bundle_geometry: bool,
    },
    /// Reconstruct a PLY cloud from a stream.
    Decode {
        input: PathBuf,
        output: PathBuf,
        /// Cloud whose voxelization supplies the geometry of an unbundled stream.
        #[arg(long)]
        geometry: Option<PathBuf>,
        #[arg(long, default_value = "binary")]
        format: PlyFormat,
    },
    /// Print the luminance PSNR between two clouds with the same occupancy.
    Eval {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        depth: u32,
    },
    /// Rate-distortion sweep over step sizes and orderings, as CSV.
    Sweep {
        input: PathBuf,
        #[arg(long)]
        depth: u32,
        #[arg(long, value_delimiter = ',', required = true)]
        q_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "traversal,depth,weight")]
        orders: Vec<OrderingMode>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Zero-run statistics and the per-level coefficient histogram.
    Stats {
        input: PathBuf,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        q: f64,
        #[arg(long, default_value = "depth")]
        order: OrderingMode,
        /// Write quantized coefficients in encode order as CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Write a seeded synthetic cloud.
    Generate {
        output: PathBuf,
        #[arg(long)]
        kind: SynthKind,
        #[arg(long)]
        depth: u32,
        #[arg(long)]
        fill: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "binary")]
        format: PlyFormat,
    },
}

/// A failure tagged with the stage it happened in.
struct Failure {
    stage: &'static str,
    message: String,
    internal: bool,
}

impl Failure {
    fn input(stage: &'static str, message: impl Display) -> Self {
        Self { stage, message: message.to_string(), internal: false }
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T> Stage<T> for Result<T, CodecError> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|e| {
            // These only arise when the library breaks its own invariants.
            let internal = matches!(
                e,
                CodecError::ScheduleMismatch { .. }
                    | CodecError::AttributeCount { .. }
                    | CodecError::LengthMismatch { .. }
                    | CodecError::DuplicateTraversalIndex(_)
                    | CodecError::DcCount(_)
                    | CodecError::UnsortedGeometry(_)
            );
            Failure { stage, message: e.to_string(), internal }
        })
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::input("read", format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::input("write", format!("{}: {e}", path.display())))
}

fn load_cloud(path: &Path, depth: u32) -> Result<Cloud, Failure> {
    let raw = parse_ply(&read(path)?).map_err(|e| Failure::input("parse", format!("{}: {e}", path.display())))?;
    let v = voxelize::<f64>(&raw, depth).stage("voxelize")?;
    if v.has_degenerate_extent() {
        eprintln!("voxelize: {} has a degenerate axis {:?}", path.display(), v.degenerate_axes);
    }
    Ok(v.cloud)
}

fn check_q(q: f64) -> Result<(), Failure> {
    if q > 0.0 && q.is_finite() {
        Ok(())
    } else {
        Err(Failure::input("arguments", format!("Q must be positive (got {q})")))
    }
}

/// Six significant digits in fixed notation.
fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let decimals = (5 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}

fn format_psnr(p: f64) -> String {
    if p.is_infinite() {
        "inf".to_owned()
    } else {
        format!("{p:.4}")
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Encode { input, output, depth, q, order, bundle_geometry } => {
            check_q(q)?;
            let cloud = load_cloud(&input, depth)?;
            let stream = encode(&cloud, q, order, bundle_geometry).stage("encode")?;
            write(&output, &stream.to_bytes())?;
            let payload: Vec<String> = stream.payloads.iter().map(|p| p.len().to_string()).collect();
            eprintln!(
                "encode: {} voxels, {} symbols per channel, payload bytes Y/U/V {}, bpv {}",
                cloud.len(),
                cloud.len(),
                payload.join("/"),
                sig6(stream.bpv())
            );
        }
        Command::Decode { input, output, geometry, format } => {
            let stream = CodecStream::from_bytes(&read(&input)?).stage("container")?;
            let geometry: Option<Geometry> = match geometry {
                Some(path) => Some(load_cloud(&path, stream.header.depth)?.geometry().clone()),
                None => None,
            };
            let cloud: Cloud = decode(&stream, geometry.as_ref()).stage("decode")?;
            write(&output, &raht_codec::write_ply(&cloud, format))?;
            eprintln!("decode: {} voxels", cloud.len());
        }
        Command::Eval { a, b, depth } => {
            let a = load_cloud(&a, depth)?;
            let b = load_cloud(&b, depth)?;
            let p = psnr_y(&a, &b).stage("eval")?;
            println!("{}", format_psnr(p));
        }
        Command::Sweep { input, depth, q_list, orders, csv } => {
            for &q in &q_list {
                check_q(q)?;
            }
            let cloud = load_cloud(&input, depth)?;
            let name = input.file_stem().map_or_else(|| "cloud".to_owned(), |s| s.to_string_lossy().into_owned());
            let points = rd_sweep(&name, &cloud, &q_list, &orders).stage("sweep")?;
            let mut buf = Vec::new();
            write_csv(&points, &mut buf).stage("csv")?;
            match csv {
                Some(path) => write(&path, &buf)?,
                None => std::io::stdout().write_all(&buf).map_err(|e| Failure::input("write", e))?,
            }
        }
        Command::Stats { input, depth, q, order, dump } => {
            check_q(q)?;
            let cloud = load_cloud(&input, depth)?;
            let quantized =
                quantize_coefficients(&cloud, &build_schedule(cloud.geometry()), q, order).stage("stats")?;
            for (name, levels) in ["Y", "U", "V"].iter().zip(&quantized.levels) {
                println!("avg_zero_run {name} {}", sig6(ZeroRuns::of(levels).mean()));
            }
            println!("level count");
            for (level, count) in depth_histogram(&quantized.meta) {
                println!("{level} {count}");
            }
            if let Some(path) = dump {
                let mut text = String::from("position,depth,weight,abs_y,abs_u,abs_v\n");
                for (i, m) in quantized.encode_order_meta().enumerate() {
                    let [y, u, v] = [0, 1, 2].map(|c| quantized.levels[c][i].unsigned_abs());
                    text += &format!("{i},{},{},{y},{u},{v}\n", m.depth, m.weight);
                }
                write(&path, text.as_bytes())?;
            }
        }
        Command::Generate { output, kind, depth, fill, seed, format } => {
            let cloud = generate(&SynthSpec { kind, depth, fill, seed }).stage("generate")?;
            write(&output, &write_raw_ply(&cloud, format))?;
            eprintln!("generate: {} voxels", cloud.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error in {}: {}", f.stage, f.message);
            ExitCode::from(if f.internal { 3 } else { 2 })
        }
    }
}
