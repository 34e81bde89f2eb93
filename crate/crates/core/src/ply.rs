//! PLY 1.0 vertex clouds: `ascii` and `binary_little_endian`.
//!
//! Reading tolerates any property order and skips unknown properties and
//! elements (including list properties). Writing always emits `float x, y, z`
//! followed by `uchar red, green, blue`.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::color;
use crate::error::PlyError;
use crate::morton;
use crate::voxel::VoxelCloud;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawPoint {
    pub position: [f64; 3],
    pub rgb: [u8; 3],
}

/// Points as read from disk, before voxelization. May contain duplicates.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawPointCloud {
    pub points: Vec<RawPoint>,
}

impl RawPointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PlyFormat {
    Ascii,
    #[default]
    BinaryLittleEndian,
}

impl FromStr for PlyFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ascii" => Ok(Self::Ascii),
            "binary" | "binary_little_endian" => Ok(Self::BinaryLittleEndian),
            other => Err(format!("unknown PLY format {other:?} (expected ascii or binary)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ScalarType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarType {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => f64::from(b[0] as i8),
            Self::U8 => f64::from(b[0]),
            Self::I16 => f64::from(i16::from_le_bytes([b[0], b[1]])),
            Self::U16 => f64::from(u16::from_le_bytes([b[0], b[1]])),
            Self::I32 => f64::from(i32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Self::U32 => f64::from(u32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Self::F32 => f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])),
            Self::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }
}

#[derive(Clone, Debug)]
enum Property {
    Scalar { name: String, ty: ScalarType },
    List { count: ScalarType, item: ScalarType },
}

#[derive(Clone, Debug)]
struct Element {
    name: String,
    count: usize,
    properties: Vec<Property>,
}

struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    body_offset: usize,
}

fn malformed(msg: impl Into<String>) -> PlyError {
    PlyError::MalformedHeader(msg.into())
}

fn parse_header(bytes: &[u8]) -> Result<Header, PlyError> {
    const END: &[u8] = b"end_header";
    let end = bytes.windows(END.len()).position(|w| w == END).ok_or_else(|| malformed("missing end_header"))?;
    let mut body_offset = end + END.len();
    if bytes.get(body_offset) == Some(&b'\r') {
        body_offset += 1;
    }
    if bytes.get(body_offset) == Some(&b'\n') {
        body_offset += 1;
    }
    let text = std::str::from_utf8(&bytes[..end]).map_err(|_| malformed("header is not UTF-8"))?;
    let mut lines = text.lines().map(str::trim);
    if lines.next() != Some("ply") {
        return Err(malformed("missing 'ply' magic"));
    }

    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    for line in lines {
        let mut tok = line.split_whitespace();
        match tok.next() {
            None | Some("comment") | Some("obj_info") => {}
            Some("format") => {
                let fmt = tok.next().ok_or_else(|| malformed("format line without a format"))?;
                format = Some(match fmt {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    "binary_big_endian" => return Err(PlyError::UnsupportedFormat("binary_big_endian".into())),
                    other => return Err(malformed(format!("unknown format {other:?}"))),
                });
            }
            Some("element") => {
                let name = tok.next().ok_or_else(|| malformed("element without a name"))?;
                let count = tok
                    .next()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| malformed(format!("element {name} without a valid count")))?;
                elements.push(Element { name: name.to_owned(), count, properties: Vec::new() });
            }
            Some("property") => {
                let element = elements.last_mut().ok_or_else(|| malformed("property before any element"))?;
                let first = tok.next().ok_or_else(|| malformed("empty property line"))?;
                let ty = |name: Option<&str>| {
                    name.and_then(ScalarType::parse).ok_or_else(|| malformed(format!("bad property line {line:?}")))
                };
                let property = if first == "list" {
                    let count = ty(tok.next())?;
                    let item = ty(tok.next())?;
                    tok.next().ok_or_else(|| malformed("list property without a name"))?;
                    Property::List { count, item }
                } else {
                    let ty = ty(Some(first))?;
                    let name = tok.next().ok_or_else(|| malformed("property without a name"))?;
                    Property::Scalar { name: name.to_owned(), ty }
                };
                element.properties.push(property);
            }
            Some(other) => return Err(malformed(format!("unexpected header keyword {other:?}"))),
        }
    }
    let format = format.ok_or_else(|| malformed("missing format line"))?;
    Ok(Header { format, elements, body_offset })
}

/// Column indices of the properties the codec needs.
struct VertexLayout {
    xyz: [usize; 3],
    rgb: [usize; 3],
}

fn vertex_layout(element: &Element) -> Result<VertexLayout, PlyError> {
    let find = |wanted: &str| {
        element.properties.iter().position(|p| matches!(p, Property::Scalar { name, .. } if name == wanted))
    };
    let mut xyz = [0; 3];
    for (slot, name) in xyz.iter_mut().zip(["x", "y", "z"]) {
        *slot = find(name).ok_or_else(|| malformed(format!("vertex element has no '{name}' property")))?;
    }
    let mut rgb = [0; 3];
    for (slot, name) in rgb.iter_mut().zip(["red", "green", "blue"]) {
        let idx = find(name).ok_or_else(|| PlyError::UnsupportedFormat(format!("missing color property '{name}'")))?;
        if !matches!(element.properties[idx], Property::Scalar { ty: ScalarType::U8, .. }) {
            return Err(PlyError::UnsupportedFormat(format!("color property '{name}' must be uchar")));
        }
        *slot = idx;
    }
    Ok(VertexLayout { xyz, rgb })
}

fn make_point(vertex: usize, values: &[f64], layout: &VertexLayout) -> Result<RawPoint, PlyError> {
    let position = layout.xyz.map(|i| values[i]);
    if position.iter().any(|c| !c.is_finite()) {
        return Err(PlyError::InvalidValue { vertex, detail: format!("non-finite coordinate {position:?}") });
    }
    let mut rgb = [0u8; 3];
    for (slot, &i) in rgb.iter_mut().zip(&layout.rgb) {
        let v = values[i];
        if v.fract() != 0.0 || !(0.0..=255.0).contains(&v) {
            return Err(PlyError::InvalidValue { vertex, detail: format!("color value {v} is not a uint8") });
        }
        *slot = v as u8;
    }
    Ok(RawPoint { position, rgb })
}

/// Parses an `ascii` or `binary_little_endian` PLY byte buffer.
pub fn parse_ply(bytes: &[u8]) -> Result<RawPointCloud, PlyError> {
    let header = parse_header(bytes)?;
    let vertex_pos =
        header.elements.iter().position(|e| e.name == "vertex").ok_or_else(|| malformed("no vertex element"))?;
    let layout = vertex_layout(&header.elements[vertex_pos])?;
    let body = &bytes[header.body_offset..];
    match header.format {
        PlyFormat::Ascii => parse_ascii(body, &header.elements[..=vertex_pos], &layout),
        PlyFormat::BinaryLittleEndian => parse_binary(body, &header.elements[..=vertex_pos], &layout),
    }
}

fn parse_ascii(body: &[u8], elements: &[Element], layout: &VertexLayout) -> Result<RawPointCloud, PlyError> {
    let text = String::from_utf8_lossy(body);
    let mut tokens = text.split_ascii_whitespace();
    let (vertex, skipped) = elements.split_last().expect("vertex element present");
    let truncated = |found| PlyError::TruncatedBody { expected: vertex.count, found };

    for element in skipped {
        for _ in 0..element.count {
            for property in &element.properties {
                let n = match property {
                    Property::Scalar { .. } => 1,
                    Property::List { .. } => {
                        let c = tokens.next().ok_or_else(|| truncated(0))?;
                        c.parse::<usize>().map_err(|_| malformed(format!("bad list count {c:?}")))?
                    }
                };
                for _ in 0..n {
                    tokens.next().ok_or_else(|| truncated(0))?;
                }
            }
        }
    }

    let mut points = Vec::with_capacity(vertex.count.min(1 << 24));
    let mut values = vec![0.0; vertex.properties.len()];
    for v in 0..vertex.count {
        for (slot, property) in values.iter_mut().zip(&vertex.properties) {
            let tok = tokens.next().ok_or_else(|| truncated(v))?;
            match property {
                Property::Scalar { ty, .. } => {
                    let bad =
                        || PlyError::InvalidValue { vertex: v, detail: format!("cannot parse {tok:?} as {ty:?}") };
                    *slot = if *ty == ScalarType::F32 {
                        f64::from(tok.parse::<f32>().map_err(|_| bad())?)
                    } else {
                        tok.parse::<f64>().map_err(|_| bad())?
                    };
                }
                Property::List { .. } => {
                    let n: usize = tok.parse().map_err(|_| malformed(format!("bad list count {tok:?}")))?;
                    for _ in 0..n {
                        tokens.next().ok_or_else(|| truncated(v))?;
                    }
                }
            }
        }
        points.push(make_point(v, &values, layout)?);
    }
    Ok(RawPointCloud { points })
}

fn parse_binary(body: &[u8], elements: &[Element], layout: &VertexLayout) -> Result<RawPointCloud, PlyError> {
    let (vertex, skipped) = elements.split_last().expect("vertex element present");
    let truncated = |found| PlyError::TruncatedBody { expected: vertex.count, found };
    let mut pos = 0usize;
    let mut take = |n: usize| -> Option<&[u8]> {
        let s = body.get(pos..pos + n)?;
        pos += n;
        Some(s)
    };

    for element in skipped {
        for _ in 0..element.count {
            for property in &element.properties {
                match *property {
                    Property::Scalar { ty, .. } => {
                        take(ty.size()).ok_or_else(|| truncated(0))?;
                    }
                    Property::List { count, item } => {
                        let n = count.read_le(take(count.size()).ok_or_else(|| truncated(0))?);
                        take(n as usize * item.size()).ok_or_else(|| truncated(0))?;
                    }
                }
            }
        }
    }

    let mut points = Vec::with_capacity(vertex.count.min(1 << 24));
    let mut values = vec![0.0; vertex.properties.len()];
    for v in 0..vertex.count {
        for (slot, property) in values.iter_mut().zip(&vertex.properties) {
            match *property {
                Property::Scalar { ty, .. } => *slot = ty.read_le(take(ty.size()).ok_or_else(|| truncated(v))?),
                Property::List { count, item } => {
                    let n = count.read_le(take(count.size()).ok_or_else(|| truncated(v))?);
                    take(n as usize * item.size()).ok_or_else(|| truncated(v))?;
                }
            }
        }
        points.push(make_point(v, &values, layout)?);
    }
    Ok(RawPointCloud { points })
}

fn header_text(format: PlyFormat, count: usize) -> String {
    let fmt = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    let mut h = String::new();
    let _ = write!(
        h,
        "ply\nformat {fmt} 1.0\nelement vertex {count}\n\
         property float x\nproperty float y\nproperty float z\n\
         property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n"
    );
    h
}

/// Writes raw points; coordinates are narrowed to `float32`.
pub fn write_raw_ply(cloud: &RawPointCloud, format: PlyFormat) -> Vec<u8> {
    let mut out = header_text(format, cloud.len()).into_bytes();
    match format {
        PlyFormat::Ascii => {
            let mut body = String::with_capacity(cloud.len() * 24);
            for p in &cloud.points {
                let [x, y, z] = p.position.map(|c| c as f32);
                let [r, g, b] = p.rgb;
                let _ = writeln!(body, "{x} {y} {z} {r} {g} {b}");
            }
            out.extend_from_slice(body.as_bytes());
        }
        PlyFormat::BinaryLittleEndian => {
            out.reserve(cloud.len() * 15);
            for p in &cloud.points {
                for c in p.position {
                    out.extend_from_slice(&(c as f32).to_le_bytes());
                }
                out.extend_from_slice(&p.rgb);
            }
        }
    }
    out
}

/// Voxel centers as integer grid coordinates, colors back in RGB, in Morton order.
pub fn voxels_to_raw<T: Scalar>(cloud: &VoxelCloud<T>) -> RawPointCloud {
    let points = cloud
        .voxels()
        .map(|(code, yuv)| {
            let (x, y, z) = morton::decode_unchecked(code);
            RawPoint {
                position: [f64::from(x), f64::from(y), f64::from(z)],
                rgb: color::yuv_to_rgb(yuv).map(color::to_u8),
            }
        })
        .collect();
    RawPointCloud { points }
}

pub fn write_ply<T: Scalar>(cloud: &VoxelCloud<T>, format: PlyFormat) -> Vec<u8> {
    write_raw_ply(&voxels_to_raw(cloud), format)
}
