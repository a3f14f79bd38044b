use super::{checked_set, DigestSet, HashStore, StoreVariant};
use crate::auth::{KeyMaterial, RegionDescriptor, SignedDigest};
use crate::error::Result;
use crate::grid::{CellCoord, Grid};
use crate::par::Exec;

/// Cells row-major, then full columns left to right.
pub(super) fn layout(m: u32) -> Vec<RegionDescriptor> {
    let cells = (0..m).flat_map(|r| (0..m).map(move |c| RegionDescriptor::cell(CellCoord::new(r, c))));
    let cols = (0..m).map(|col| RegionDescriptor::ColRun { col, start: 0, len: m });
    cells.chain(cols).collect()
}

/// One digest per cell and one per column: `N + sqrt(N)` entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiftStore {
    set: DigestSet,
}

impl SiftStore {
    pub fn build(grid: &Grid, key: &KeyMaterial) -> Result<Self> {
        Self::build_with(grid, key, Exec::default())
    }

    pub fn build_with(grid: &Grid, key: &KeyMaterial, exec: Exec) -> Result<Self> {
        Ok(Self {
            set: DigestSet::build(grid, key, layout(grid.side()), exec)?,
        })
    }

    pub fn side(&self) -> u32 {
        self.set.side()
    }

    pub fn cell(&self, c: CellCoord) -> &SignedDigest {
        self.set.get((c.row * self.side() + c.col) as usize)
    }

    pub fn column(&self, col: u32) -> &SignedDigest {
        let m = self.side() as usize;
        self.set.get(m * m + col as usize)
    }
}

impl HashStore for SiftStore {
    const VARIANT: StoreVariant = StoreVariant::Sift;

    fn digest_set(&self) -> &DigestSet {
        &self.set
    }

    fn from_digest_set(set: DigestSet) -> Result<Self> {
        Ok(Self {
            set: checked_set(Self::VARIANT, set)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auth::{verify_region, CostMeter};

    #[test]
    fn counts() {
        assert_eq!(layout(2).len(), 6);
        assert_eq!(layout(64).len(), 4096 + 64);
    }

    #[test]
    fn clean_cells_verify() {
        let g = Grid::new(4, 2, 9).unwrap();
        let key = KeyMaterial::mac(b"s".to_vec()).unwrap();
        let s = SiftStore::build(&g, &key).unwrap();
        let mut meter = CostMeter::new();
        for c in g.coords() {
            assert!(verify_region(&key, &g, s.cell(c), &mut meter).unwrap());
        }
        assert_eq!(s.column(2).descriptor, RegionDescriptor::ColRun { col: 2, start: 0, len: 4 });
        assert_eq!(meter.cells_touched(), 16);
    }
}
