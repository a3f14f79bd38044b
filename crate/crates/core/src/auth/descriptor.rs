use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{read_exact_or, CellCoord, Grid};

const KIND_RECT: u8 = 0;
const KIND_ROW_RUN: u8 = 1;
const KIND_COL_RUN: u8 = 2;
const KIND_CELL_LIST: u8 = 3;

/// Sorted, de-duplicated cell list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellList(Vec<CellCoord>);

impl CellList {
    pub fn new<I: IntoIterator<Item = CellCoord>>(cells: I) -> Self {
        let mut v: Vec<_> = cells.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self(v)
    }

    pub fn as_slice(&self) -> &[CellCoord] {
        &self.0
    }
}

/// Identifies an exact cell set together with the order its payloads are
/// hashed in.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionDescriptor {
    /// Row-major over `rows x cols` starting at `(row0, col0)`.
    Rect {
        row0: u32,
        col0: u32,
        rows: u32,
        cols: u32,
    },
    /// Left to right along `row`.
    RowRun { row: u32, start: u32, len: u32 },
    /// Top to bottom along `col`.
    ColRun { col: u32, start: u32, len: u32 },
    CellList(CellList),
}

impl RegionDescriptor {
    pub fn rect(row0: u32, col0: u32, rows: u32, cols: u32) -> Self {
        Self::Rect {
            row0,
            col0,
            rows,
            cols,
        }
    }

    /// Rectangle spanned by two opposite corners, in either order.
    pub fn rect_from_corners(a: CellCoord, b: CellCoord) -> Self {
        let (r0, r1) = (a.row.min(b.row), a.row.max(b.row));
        let (c0, c1) = (a.col.min(b.col), a.col.max(b.col));
        Self::rect(r0, c0, r1 - r0 + 1, c1 - c0 + 1)
    }

    pub fn cell(c: CellCoord) -> Self {
        Self::CellList(CellList::new([c]))
    }

    pub fn cells<I: IntoIterator<Item = CellCoord>>(cells: I) -> Self {
        Self::CellList(CellList::new(cells))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Rect { .. } => "rect",
            Self::RowRun { .. } => "row-run",
            Self::ColRun { .. } => "col-run",
            Self::CellList(_) => "cell-list",
        }
    }

    pub fn cell_count(&self) -> u64 {
        match self {
            Self::Rect { rows, cols, .. } => u64::from(*rows) * u64::from(*cols),
            Self::RowRun { len, .. } | Self::ColRun { len, .. } => u64::from(*len),
            Self::CellList(l) => l.0.len() as u64,
        }
    }

    /// Cells in canonical traversal order.
    pub fn iter_cells(&self) -> Box<dyn Iterator<Item = CellCoord> + '_> {
        match *self {
            Self::Rect {
                row0,
                col0,
                rows,
                cols,
            } => Box::new(
                (row0..row0 + rows)
                    .flat_map(move |r| (col0..col0 + cols).map(move |c| CellCoord::new(r, c))),
            ),
            Self::RowRun { row, start, len } => {
                Box::new((start..start + len).map(move |c| CellCoord::new(row, c)))
            }
            Self::ColRun { col, start, len } => {
                Box::new((start..start + len).map(move |r| CellCoord::new(r, col)))
            }
            Self::CellList(ref l) => Box::new(l.0.iter().copied()),
        }
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        match *self {
            Self::Rect {
                row0,
                col0,
                rows,
                cols,
            } => (row0..row0 + rows).contains(&c.row) && (col0..col0 + cols).contains(&c.col),
            Self::RowRun { row, start, len } => c.row == row && (start..start + len).contains(&c.col),
            Self::ColRun { col, start, len } => c.col == col && (start..start + len).contains(&c.row),
            Self::CellList(ref l) => l.0.binary_search(&c).is_ok(),
        }
    }

    pub fn check_bounds(&self, m: u32) -> Result<()> {
        let m64 = u64::from(m);
        let end_ok = |start: u32, len: u32| u64::from(start) + u64::from(len) <= m64;
        let ok = match *self {
            Self::Rect {
                row0,
                col0,
                rows,
                cols,
            } => rows > 0 && cols > 0 && end_ok(row0, rows) && end_ok(col0, cols),
            Self::RowRun { row, start, len } | Self::ColRun { col: row, start, len } => {
                len > 0 && row < m && end_ok(start, len)
            }
            Self::CellList(ref l) => {
                if let Some(bad) = l.0.iter().find(|c| c.row >= m || c.col >= m) {
                    return Err(Error::OutOfBounds(*bad, m));
                }
                !l.0.is_empty()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Malformed(format!("descriptor {self:?} outside {m}x{m} grid")))
        }
    }

    /// Little-endian wire form.
    pub fn encode(&self, out: &mut Vec<u8>) {
        fn put(out: &mut Vec<u8>, v: u32) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        match *self {
            Self::Rect {
                row0,
                col0,
                rows,
                cols,
            } => {
                out.push(KIND_RECT);
                for v in [row0, col0, rows, cols] {
                    put(out, v);
                }
            }
            Self::RowRun { row, start, len } => {
                out.push(KIND_ROW_RUN);
                for v in [row, start, len] {
                    put(out, v);
                }
            }
            Self::ColRun { col, start, len } => {
                out.push(KIND_COL_RUN);
                for v in [col, start, len] {
                    put(out, v);
                }
            }
            Self::CellList(ref l) => {
                out.push(KIND_CELL_LIST);
                put(out, l.0.len() as u32);
                for c in &l.0 {
                    put(out, c.row);
                    put(out, c.col);
                }
            }
        }
    }

    pub fn encoded(&self) -> Vec<u8> {
        let mut v = Vec::new();
        self.encode(&mut v);
        v
    }

    pub fn decode<R: Read>(src: &mut R) -> Result<Self> {
        let mut kind = [0u8; 1];
        read_exact_or(src, &mut kind, "descriptor kind")?;
        let mut word = || -> Result<u32> {
            let mut b = [0u8; 4];
            read_exact_or(src, &mut b, "descriptor body")?;
            Ok(u32::from_le_bytes(b))
        };
        Ok(match kind[0] {
            KIND_RECT => Self::rect(word()?, word()?, word()?, word()?),
            KIND_ROW_RUN => Self::RowRun {
                row: word()?,
                start: word()?,
                len: word()?,
            },
            KIND_COL_RUN => Self::ColRun {
                col: word()?,
                start: word()?,
                len: word()?,
            },
            KIND_CELL_LIST => {
                let n = word()?;
                let mut cells = Vec::with_capacity(n.min(1 << 16) as usize);
                for _ in 0..n {
                    cells.push(CellCoord::new(word()?, word()?));
                }
                let list = CellList::new(cells.iter().copied());
                if list.0 != cells {
                    return Err(Error::Malformed("cell list not in canonical order".into()));
                }
                Self::CellList(list)
            }
            k => return Err(Error::Malformed(format!("unknown descriptor kind {k}"))),
        })
    }
}

/// Descriptor encoding followed by the covered payloads in canonical order.
pub fn canonical_bytes(grid: &Grid, descriptor: &RegionDescriptor) -> Result<Vec<u8>> {
    descriptor.check_bounds(grid.side())?;
    let mut out = descriptor.encoded();
    out.reserve(descriptor.cell_count() as usize * grid.cell_size() as usize);
    for c in descriptor.iter_cells() {
        out.extend_from_slice(grid.cell(c));
    }
    Ok(out)
}
