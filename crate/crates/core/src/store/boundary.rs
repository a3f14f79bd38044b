use serde::{Deserialize, Serialize};

use super::line::{dyadic_layout, CellLine, LineTree};
use super::{checked_set, DigestSet, HashStore, Square, StoreVariant};
use crate::auth::{KeyMaterial, RegionDescriptor, SignedDigest};
use crate::error::Result;
use crate::grid::{CellCoord, Grid};
use crate::par::Exec;

/// One of the two centre lines of a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MedianLine {
    /// Last column of the left half, full block height. Separates TL|TR
    /// and BL|BR.
    Vertical,
    /// Last row of the top half, full block width. Separates TL/BL and
    /// TR/BR.
    Horizontal,
}

impl MedianLine {
    pub fn of(self, sq: Square) -> CellLine {
        let mid = sq.side / 2 - 1;
        match self {
            MedianLine::Vertical => CellLine::col(sq.col0 + mid, sq.row0, sq.side),
            MedianLine::Horizontal => CellLine::row(sq.row0 + mid, sq.col0, sq.side),
        }
    }
}

/// Offsets of each internal level's chunk, then of the leaves.
fn offsets(m: u32) -> (Vec<usize>, usize) {
    let levels = m.trailing_zeros();
    let mut at = 0usize;
    let mut out = Vec::with_capacity(levels as usize);
    for d in 0..levels {
        out.push(at);
        let side = (m >> d) as usize;
        let nodes = 1usize << (2 * d);
        at += 4 * nodes + nodes * 2 * (2 * side - 1);
    }
    (out, at)
}

/// Per internal level `d`: the quadrant digests of all depth-`d` blocks
/// (row-major over depth `d+1`), then each block's vertical and horizontal
/// median-line trees (blocks row-major). Then one leaf digest per cell.
pub(super) fn layout(m: u32) -> Vec<RegionDescriptor> {
    let levels = m.trailing_zeros();
    let mut out = Vec::new();
    for d in 0..levels {
        let child = m >> (d + 1);
        let cblocks = 1u32 << (d + 1);
        for br in 0..cblocks {
            for bc in 0..cblocks {
                out.push(RegionDescriptor::rect(br * child, bc * child, child, child));
            }
        }
        let side = m >> d;
        let blocks = 1u32 << d;
        for br in 0..blocks {
            for bc in 0..blocks {
                let sq = Square {
                    row0: br * side,
                    col0: bc * side,
                    side,
                };
                out.extend(dyadic_layout(&MedianLine::Vertical.of(sq)));
                out.extend(dyadic_layout(&MedianLine::Horizontal.of(sq)));
            }
        }
    }
    for r in 0..m {
        for c in 0..m {
            out.push(RegionDescriptor::cell(CellCoord::new(r, c)));
        }
    }
    out
}

/// Quadrant digests (no root) plus, for every block of side >= 2, a full
/// dyadic tree over each of its two median lines. Size follows
/// `s(N) = 2 + 4 sqrt(N) + 4 s(N/4)`, `s(1) = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryStore {
    set: DigestSet,
    level_offsets: Vec<usize>,
    leaf_offset: usize,
}

impl BoundaryStore {
    pub fn build(grid: &Grid, key: &KeyMaterial) -> Result<Self> {
        Self::build_with(grid, key, Exec::default())
    }

    pub fn build_with(grid: &Grid, key: &KeyMaterial, exec: Exec) -> Result<Self> {
        let set = DigestSet::build(grid, key, layout(grid.side()), exec)?;
        Ok(Self::wrap(set))
    }

    fn wrap(set: DigestSet) -> Self {
        let (level_offsets, leaf_offset) = offsets(set.side());
        Self {
            set,
            level_offsets,
            leaf_offset,
        }
    }

    pub fn side(&self) -> u32 {
        self.set.side()
    }

    /// Digest of an aligned block below the whole grid.
    pub fn block(&self, sq: Square) -> &SignedDigest {
        let e = sq.depth(self.side());
        debug_assert!(e >= 1);
        let (br, bc) = sq.block();
        let base = self.level_offsets[e as usize - 1];
        self.set.get(base + (br as usize) * (1usize << e) + bc as usize)
    }

    /// Dyadic tree over one median line of block `sq` (side >= 2).
    pub fn line_tree(&self, sq: Square, which: MedianLine) -> LineTree<'_> {
        let d = sq.depth(self.side());
        let (br, bc) = sq.block();
        let per_tree = 2 * sq.side as usize - 1;
        let node = (br as usize) * (1usize << d) + bc as usize;
        let mut at = self.level_offsets[d as usize] + (4usize << (2 * d)) + node * 2 * per_tree;
        if which == MedianLine::Horizontal {
            at += per_tree;
        }
        LineTree {
            line: which.of(sq),
            digests: &self.set.digests()[at..at + per_tree],
        }
    }

    pub fn leaf(&self, c: CellCoord) -> &SignedDigest {
        self.set
            .get(self.leaf_offset + (c.row * self.side() + c.col) as usize)
    }
}

impl HashStore for BoundaryStore {
    const VARIANT: StoreVariant = StoreVariant::Boundary;

    fn digest_set(&self) -> &DigestSet {
        &self.set
    }

    fn from_digest_set(set: DigestSet) -> Result<Self> {
        Ok(Self::wrap(checked_set(Self::VARIANT, set)?))
    }
}
