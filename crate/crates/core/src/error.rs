use std::io;

use thiserror::Error;

use crate::grid::CellCoord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid side {0} is not a power of two >= 2")]
    SideNotPowerOfTwo(u32),
    #[error("cell size must be at least one byte")]
    ZeroCellSize,
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: [u8; 4], found: [u8; 4] },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated input: {0}")]
    Truncated(&'static str),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("region is empty")]
    EmptyRegion,
    #[error("cell {0} lies outside a {1}x{1} grid")]
    OutOfBounds(CellCoord, u32),
    #[error("region is not 4-connected")]
    Disconnected,
    #[error("region spec does not fit the grid: {0}")]
    InfeasibleShape(String),
    #[error("grid dimensions differ: {0}")]
    DimensionMismatch(String),
    #[error("store was built for a different grid: {0}")]
    StoreMismatch(String),
    #[error("store variant mismatch: expected {expected}, found {found}")]
    VariantMismatch {
        expected: &'static str,
        found: &'static str,
    },
    #[error("no signing key available")]
    MissingSigningKey,
    #[error("key material does not match the store mode")]
    KeyModeMismatch,
    #[error("invalid key material: {0}")]
    InvalidKey(String),
    #[error(
        "adaptive tree needs log2(N) to be a triangular number; N={n} does not conform \
         (nearest conforming sizes: N={below} and N={above})"
    )]
    NonConformingAdaptive { n: u64, below: u64, above: u64 },
    #[error("seed cell {0} is not corrupted")]
    SeedNotCorrupted(CellCoord),
    #[error(
        "convexity assumption violated: quadrants of the {side}x{side} block at ({row},{col}) \
         fail but no boundary line holds a corrupted cell"
    )]
    ConvexityViolation { row: u32, col: u32, side: u32 },
    #[error("corrupted cells on line starting at {start} (length {len}) are not one contiguous run")]
    NonContiguousRun { start: CellCoord, len: u32 },
    #[error("missing input: {0}")]
    MissingInput(&'static str),
    #[error("line search called on a clean line")]
    CleanLine,
    #[error("store is internally inconsistent: {0}")]
    InconsistentStore(String),
    #[error("unknown identifier {0:?}")]
    UnknownName(String),
    #[error("empty benchmark sweep: {0}")]
    EmptySweep(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}
