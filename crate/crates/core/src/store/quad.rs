use super::{checked_set, DigestSet, HashStore, Square, StoreVariant};
use crate::auth::{KeyMaterial, RegionDescriptor, SignedDigest};
use crate::error::Result;
use crate::grid::{CellCoord, Grid};
use crate::par::Exec;

/// Index of the first block at depth `d >= 1`, counting the root as 0.
fn block_offset(d: u32) -> usize {
    1 + ((1usize << (2 * d)) - 4) / 3
}

/// Root, then every quadrant level (row-major within a level) down to
/// single cells, then one leaf digest per cell.
pub(super) fn layout(m: u32) -> Vec<RegionDescriptor> {
    let levels = m.trailing_zeros();
    let mut out = vec![Square::whole(m).descriptor()];
    for d in 1..=levels {
        let side = m >> d;
        let blocks = 1u32 << d;
        for br in 0..blocks {
            for bc in 0..blocks {
                out.push(RegionDescriptor::rect(br * side, bc * side, side, side));
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

/// Recursive quadrant digests with a root on top.
///
/// Excluding the root the count is `(7N - 4) / 3`: four quadrant digests
/// per internal node plus a standalone digest for every single cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadStore {
    set: DigestSet,
}

impl QuadStore {
    pub fn build(grid: &Grid, key: &KeyMaterial) -> Result<Self> {
        Self::build_with(grid, key, Exec::default())
    }

    pub fn build_with(grid: &Grid, key: &KeyMaterial, exec: Exec) -> Result<Self> {
        let set = DigestSet::build(grid, key, layout(grid.side()), exec)?;
        Ok(Self { set })
    }

    pub fn side(&self) -> u32 {
        self.set.side()
    }

    pub fn root(&self) -> &SignedDigest {
        self.set.get(0)
    }

    /// Digest of an aligned block strictly below the root.
    pub fn block(&self, sq: Square) -> &SignedDigest {
        let d = sq.depth(self.side());
        debug_assert!(d >= 1);
        let (br, bc) = sq.block();
        self.set
            .get(block_offset(d) + (br as usize) * (1usize << d) + bc as usize)
    }

    /// Stand-alone per-cell digest.
    pub fn leaf(&self, c: CellCoord) -> &SignedDigest {
        let m = self.side();
        let base = block_offset(m.trailing_zeros() + 1);
        self.set.get(base + (c.row * m + c.col) as usize)
    }

    /// Digest count without the root, `(7N - 4) / 3`.
    pub fn size_without_root(&self) -> u64 {
        self.store_size() - 1
    }
}

impl HashStore for QuadStore {
    const VARIANT: StoreVariant = StoreVariant::Quad;

    fn digest_set(&self) -> &DigestSet {
        &self.set
    }

    fn from_digest_set(set: DigestSet) -> Result<Self> {
        Ok(Self {
            set: checked_set(Self::VARIANT, set)?,
        })
    }
}
