use thiserror::Error;

/// Failures while reading a PLY file.
#[derive(Debug, Error)]
pub enum PlyError {
    #[error("malformed PLY header: {0}")]
    MalformedHeader(String),
    #[error("truncated PLY body: expected {expected} vertices, read {found}")]
    TruncatedBody { expected: usize, found: usize },
    #[error("unsupported PLY content: {0}")]
    UnsupportedFormat(String),
    #[error("invalid PLY value on vertex {vertex}: {detail}")]
    InvalidValue { vertex: usize, detail: String },
}

/// Failures while decoding an RLGR payload.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RlgrError {
    #[error("RLGR payload ended after {decoded} of {expected} symbols")]
    TruncatedStream { decoded: usize, expected: usize },
    #[error("escape field holds {value}, which needs no escape at kR={k_r}")]
    MalformedEscape { value: u32, k_r: u32 },
    #[error("zero run of {run} overruns the symbol count ({remaining} left)")]
    RunOverrun { run: u64, remaining: usize },
    #[error("symbol {0} does not fit the 32-bit escape field")]
    SymbolTooLarge(u64),
}

#[derive(Debug, Error)]
pub enum CodecError {
    #[error(transparent)]
    Ply(#[from] PlyError),
    #[error(transparent)]
    Rlgr(#[from] RlgrError),
    #[error("octree depth {0} outside [1, 21]")]
    DepthOutOfRange(u32),
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("coordinate ({x}, {y}, {z}) outside the 2^{depth} grid")]
    CoordinateOutOfRange { x: u32, y: u32, z: u32, depth: u32 },
    #[error("Morton code {code} outside the 2^(3*{depth}) range")]
    CodeOutOfRange { code: u64, depth: u32 },
    #[error("Morton codes must be strictly increasing (position {0})")]
    UnsortedGeometry(usize),
    #[error("attribute count {attributes} differs from voxel count {voxels}")]
    AttributeCount { voxels: usize, attributes: usize },
    #[error("schedule covers {schedule} voxels but the input has {input}")]
    ScheduleMismatch { schedule: usize, input: usize },
    #[error("stream has no bundled geometry; the decoder needs the voxel positions")]
    MissingGeometry,
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("duplicate traversal index {0}")]
    DuplicateTraversalIndex(usize),
    #[error("coefficient metadata must hold exactly one DC entry, found {0}")]
    DcCount(usize),
    #[error("length mismatch: permutation has {expected} entries, input has {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("Q must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("fill fraction must lie in (0, 1], got {0}")]
    InvalidFill(f64),
    #[error("not a RAHT stream (bad magic)")]
    BadMagic,
    #[error("unsupported stream version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown ordering mode {0}")]
    UnknownOrderingMode(u8),
    #[error("unknown ordering mode name {0:?} (expected traversal, depth or weight)")]
    UnknownOrderingName(String),
    #[error("unknown header flags {0:#04x}")]
    UnknownFlags(u8),
    #[error("stream truncated: need {needed} bytes, have {have}")]
    TruncatedContainer { needed: usize, have: usize },
    #[error("{0} trailing bytes after the last payload")]
    TrailingBytes(usize),
    #[error("symbol stream is empty")]
    EmptyStream,
    #[error("generator: {0}")]
    Generator(String),
    #[error("CSV: {0}")]
    Csv(String),
}

pub type Result<T, E = CodecError> = std::result::Result<T, E>;
