use serde::{Deserialize, Serialize};

use crate::auth::{sign_region, KeyMaterial, RegionDescriptor, SignedDigest};
use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};
use crate::par::{self, Exec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineAxis {
    /// Cells `(row, start..start+len)`.
    Row(u32),
    /// Cells `(start..start+len, col)`.
    Col(u32),
    /// Row-major linear positions `start..start+len` of an `m x m` grid.
    RowMajor { m: u32 },
}

/// An ordered 1-D sequence of grid cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellLine {
    pub axis: LineAxis,
    pub start: u32,
    pub len: u32,
}

impl CellLine {
    pub fn row(row: u32, start: u32, len: u32) -> Self {
        Self {
            axis: LineAxis::Row(row),
            start,
            len,
        }
    }

    pub fn col(col: u32, start: u32, len: u32) -> Self {
        Self {
            axis: LineAxis::Col(col),
            start,
            len,
        }
    }

    /// The whole grid read in row-major order.
    pub fn row_major(m: u32) -> Self {
        Self {
            axis: LineAxis::RowMajor { m },
            start: 0,
            len: m * m,
        }
    }

    /// Cell at position `i` (0-based) along the line.
    pub fn cell(&self, i: u32) -> CellCoord {
        debug_assert!(i < self.len);
        let p = self.start + i;
        match self.axis {
            LineAxis::Row(r) => CellCoord::new(r, p),
            LineAxis::Col(c) => CellCoord::new(p, c),
            LineAxis::RowMajor { m } => CellCoord::new(p / m, p % m),
        }
    }

    /// Descriptor of positions `offset..offset+len` along the line.
    pub fn descriptor(&self, offset: u32, len: u32) -> RegionDescriptor {
        let p = self.start + offset;
        match self.axis {
            LineAxis::Row(row) => RegionDescriptor::RowRun { row, start: p, len },
            LineAxis::Col(col) => RegionDescriptor::ColRun { col, start: p, len },
            LineAxis::RowMajor { m } => linear_descriptor(m, p, len),
        }
    }

    pub fn check_fits(&self, m: u32) -> Result<()> {
        let end = u64::from(self.start) + u64::from(self.len);
        let ok = self.len > 0
            && match self.axis {
                LineAxis::Row(i) | LineAxis::Col(i) => i < m && end <= u64::from(m),
                LineAxis::RowMajor { m: lm } => lm == m && end <= u64::from(m) * u64::from(m),
            };
        if ok {
            Ok(())
        } else {
            Err(Error::StoreMismatch(format!("line {self:?} outside {m}x{m} grid")))
        }
    }
}

/// Contiguous row-major range as the tightest descriptor kind available.
pub(crate) fn linear_descriptor(m: u32, start: u32, len: u32) -> RegionDescriptor {
    let (row, col) = (start / m, start % m);
    if col + len <= m {
        RegionDescriptor::RowRun {
            row,
            start: col,
            len,
        }
    } else if col == 0 && len.is_multiple_of(m) {
        RegionDescriptor::rect(row, 0, len / m, m)
    } else {
        let line = CellLine {
            axis: LineAxis::RowMajor { m },
            start,
            len,
        };
        RegionDescriptor::cells((0..len).map(|i| line.cell(i)))
    }
}

/// Heap-indexed (1-based) dyadic interval: `(offset, len)` along a line of
/// length `line_len`.
pub(crate) fn dyadic_interval(line_len: u32, node: u32) -> (u32, u32) {
    let depth = 31 - node.leading_zeros();
    let len = line_len >> depth;
    ((node - (1 << depth)) * len, len)
}

/// Descriptors of every dyadic sub-interval of `line`, heap order.
pub(crate) fn dyadic_layout(line: &CellLine) -> Vec<RegionDescriptor> {
    (1..2 * line.len)
        .map(|node| {
            let (off, len) = dyadic_interval(line.len, node);
            line.descriptor(off, len)
        })
        .collect()
}

/// Borrowed dyadic tree: `digests[k - 1]` covers heap node `k`.
#[derive(Clone, Copy, Debug)]
pub struct LineTree<'a> {
    pub line: CellLine,
    pub digests: &'a [SignedDigest],
}

impl<'a> LineTree<'a> {
    pub fn node(&self, k: u32) -> &'a SignedDigest {
        &self.digests[k as usize - 1]
    }
}

/// Signed digests for every dyadic sub-interval of one line: `2L - 1`
/// entries for a line of length `L`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicLineTree {
    line: CellLine,
    digests: Vec<SignedDigest>,
}

impl DyadicLineTree {
    pub fn build(grid: &Grid, key: &KeyMaterial, line: CellLine) -> Result<Self> {
        Self::build_with(grid, key, line, Exec::default())
    }

    pub fn build_with(grid: &Grid, key: &KeyMaterial, line: CellLine, exec: Exec) -> Result<Self> {
        line.check_fits(grid.side())?;
        if !line.len.is_power_of_two() {
            return Err(Error::Malformed(format!(
                "line length {} is not a power of two",
                line.len
            )));
        }
        let digests = par::try_map(exec, &dyadic_layout(&line), |d| sign_region(key, grid, d))?;
        Ok(Self { line, digests })
    }

    pub fn line(&self) -> CellLine {
        self.line
    }

    pub fn len(&self) -> usize {
        self.digests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digests.is_empty()
    }

    pub fn view(&self) -> LineTree<'_> {
        LineTree {
            line: self.line,
            digests: &self.digests,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_heap_intervals() {
        assert_eq!(dyadic_interval(8, 1), (0, 8));
        assert_eq!(dyadic_interval(8, 2), (0, 4));
        assert_eq!(dyadic_interval(8, 3), (4, 4));
        assert_eq!(dyadic_interval(8, 15), (7, 1));
    }

    #[test]
    fn tree_has_2l_minus_1_digests() {
        let g = Grid::new(16, 1, 0).unwrap();
        let key = KeyMaterial::mac(vec![1]).unwrap();
        for len in [1, 2, 4, 8, 16] {
            let t = DyadicLineTree::build(&g, &key, CellLine::col(3, 0, len)).unwrap();
            assert_eq!(t.len(), 2 * len as usize - 1);
        }
        assert!(DyadicLineTree::build(&g, &key, CellLine::row(0, 0, 3)).is_err());
        assert!(DyadicLineTree::build(&g, &key, CellLine::row(0, 8, 16)).is_err());
    }

    #[test]
    fn row_major_descriptors() {
        assert_eq!(
            linear_descriptor(8, 16, 8),
            RegionDescriptor::RowRun { row: 2, start: 0, len: 8 }
        );
        assert_eq!(linear_descriptor(8, 16, 16), RegionDescriptor::rect(2, 0, 2, 8));
        assert_eq!(
            linear_descriptor(8, 6, 4).cell_count(),
            4,
            "straddling range falls back to a cell list"
        );
        let line = CellLine::row_major(4);
        assert_eq!(line.cell(5), CellCoord::new(1, 1));
    }
}
