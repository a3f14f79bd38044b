//! The authenticated object: an `m x m` matrix of fixed-size cell payloads.

use std::fmt;
use std::io::{self, Read, Write};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::Region;

pub const GRID_MAGIC: [u8; 4] = *b"G2DG";
pub const GRID_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

/// Row/column address of one cell. Orders row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellCoord {
    pub row: u32,
    pub col: u32,
}

impl CellCoord {
    pub const fn new(row: u32, col: u32) -> Self {
        Self { row, col }
    }

    /// 4-neighbours that stay inside a grid of side `m`.
    pub fn neighbors(self, m: u32) -> impl Iterator<Item = CellCoord> {
        let CellCoord { row, col } = self;
        [
            (row.checked_sub(1), Some(col)),
            (Some(row), col.checked_sub(1)),
            (Some(row), (col + 1 < m).then_some(col + 1)),
            ((row + 1 < m).then_some(row + 1), Some(col)),
        ]
        .into_iter()
        .filter_map(|(r, c)| Some(CellCoord::new(r?, c?)))
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Grid {
    m: u32,
    cell_size: u32,
    cells: Vec<u8>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("m", &self.m)
            .field("cell_size", &self.cell_size)
            .finish_non_exhaustive()
    }
}

fn check_dims(m: u32, cell_size: u32) -> Result<()> {
    if m < 2 || !m.is_power_of_two() {
        return Err(Error::SideNotPowerOfTwo(m));
    }
    if cell_size == 0 {
        return Err(Error::ZeroCellSize);
    }
    Ok(())
}

impl Grid {
    /// Creates a grid whose payload bytes are drawn from a seeded stream.
    pub fn new(m: u32, cell_size: u32, seed: u64) -> Result<Self> {
        check_dims(m, cell_size)?;
        let mut cells = vec![0u8; m as usize * m as usize * cell_size as usize];
        ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut cells);
        Ok(Self { m, cell_size, cells })
    }

    /// Wraps raw row-major payload bytes.
    pub fn from_bytes(m: u32, cell_size: u32, cells: Vec<u8>) -> Result<Self> {
        check_dims(m, cell_size)?;
        let want = m as usize * m as usize * cell_size as usize;
        if cells.len() != want {
            return Err(Error::Malformed(format!(
                "expected {want} payload bytes, got {}",
                cells.len()
            )));
        }
        Ok(Self { m, cell_size, cells })
    }

    pub fn side(&self) -> u32 {
        self.m
    }

    pub fn cell_size(&self) -> u32 {
        self.cell_size
    }

    /// Total number of cells, `N = m * m`.
    pub fn len(&self) -> u64 {
        u64::from(self.m) * u64::from(self.m)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        c.row < self.m && c.col < self.m
    }

    pub fn check_cell(&self, c: CellCoord) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::OutOfBounds(c, self.m))
        }
    }

    fn offset(&self, c: CellCoord) -> usize {
        (c.row as usize * self.m as usize + c.col as usize) * self.cell_size as usize
    }

    /// Payload of one cell. Panics if `c` is outside the grid.
    pub fn cell(&self, c: CellCoord) -> &[u8] {
        assert!(self.contains(c), "cell {c} outside {}x{} grid", self.m, self.m);
        let at = self.offset(c);
        &self.cells[at..at + self.cell_size as usize]
    }

    /// Mutable payload of one cell. Panics if `c` is outside the grid.
    pub fn cell_mut(&mut self, c: CellCoord) -> &mut [u8] {
        assert!(self.contains(c), "cell {c} outside {}x{} grid", self.m, self.m);
        let at = self.offset(c);
        let size = self.cell_size as usize;
        &mut self.cells[at..at + size]
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.cells
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.m == other.m && self.cell_size == other.cell_size
    }

    pub fn coords(&self) -> impl Iterator<Item = CellCoord> {
        let m = self.m;
        (0..m).flat_map(move |row| (0..m).map(move |col| CellCoord::new(row, col)))
    }

    /// Writes the `G2DG` file layout; returns the number of bytes written.
    pub fn save<W: Write>(&self, mut sink: W) -> Result<u64> {
        let mut header = [0u8; HEADER_LEN];
        header[..4].copy_from_slice(&GRID_MAGIC);
        header[4..8].copy_from_slice(&GRID_VERSION.to_le_bytes());
        header[8..12].copy_from_slice(&self.m.to_le_bytes());
        header[12..16].copy_from_slice(&self.cell_size.to_le_bytes());
        sink.write_all(&header)?;
        sink.write_all(&self.cells)?;
        Ok((HEADER_LEN + self.cells.len()) as u64)
    }

    pub fn load<R: Read>(mut source: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        read_exact_or(&mut source, &mut header, "grid header")?;
        let magic: [u8; 4] = header[..4].try_into().unwrap();
        if magic != GRID_MAGIC {
            return Err(Error::BadMagic {
                expected: GRID_MAGIC,
                found: magic,
            });
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != GRID_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let m = u32::from_le_bytes(header[8..12].try_into().unwrap());
        let cell_size = u32::from_le_bytes(header[12..16].try_into().unwrap());
        check_dims(m, cell_size)?;
        let len = (m as usize)
            .checked_mul(m as usize)
            .and_then(|n| n.checked_mul(cell_size as usize))
            .ok_or_else(|| Error::Malformed("grid payload size overflows".into()))?;
        let mut cells = Vec::new();
        source.take(len as u64).read_to_end(&mut cells)?;
        if cells.len() != len {
            return Err(Error::Truncated("grid payload"));
        }
        Ok(Self { m, cell_size, cells })
    }
}

pub(crate) fn read_exact_or<R: Read>(src: &mut R, buf: &mut [u8], what: &'static str) -> Result<()> {
    match src.read_exact(buf) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => Err(Error::Truncated(what)),
        Err(e) => Err(e.into()),
    }
}

/// Returns a copy of `grid` in which every cell of `region` differs from the
/// original in at least one byte and every other cell is untouched.
pub fn inject_corruption(grid: &Grid, region: &Region, seed: u64) -> Result<Grid> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    for &c in region.iter() {
        grid.check_cell(c)?;
    }
    if !region.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut out = grid.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &c in region.iter() {
        flip_cell(&mut out, c, &mut rng);
    }
    Ok(out)
}

/// XORs one randomly chosen byte of the cell with a nonzero mask.
pub fn flip_cell<R: Rng>(grid: &mut Grid, c: CellCoord, rng: &mut R) {
    let size = grid.cell_size() as usize;
    let byte = rng.gen_range(0..size);
    let mask: u8 = rng.gen_range(1..=255);
    grid.cell_mut(c)[byte] ^= mask;
}
