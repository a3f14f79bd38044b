use super::{checked_set, DigestSet, HashStore, StoreVariant};
use crate::auth::{KeyMaterial, RegionDescriptor, SignedDigest};
use crate::error::Result;
use crate::grid::Grid;
use crate::par::Exec;

/// Full rows top to bottom, then full columns left to right.
pub(super) fn layout(m: u32) -> Vec<RegionDescriptor> {
    let rows = (0..m).map(|row| RegionDescriptor::RowRun { row, start: 0, len: m });
    let cols = (0..m).map(|col| RegionDescriptor::ColRun { col, start: 0, len: m });
    rows.chain(cols).collect()
}

/// A horizontal and a vertical layer of line digests: `2 sqrt(N)` entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerSieveStore {
    set: DigestSet,
}

impl LayerSieveStore {
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

    pub fn row(&self, r: u32) -> &SignedDigest {
        self.set.get(r as usize)
    }

    pub fn column(&self, c: u32) -> &SignedDigest {
        self.set.get((self.side() + c) as usize)
    }
}

impl HashStore for LayerSieveStore {
    const VARIANT: StoreVariant = StoreVariant::Sieve;

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
    use crate::grid::CellCoord;

    #[test]
    fn one_cell_fails_exactly_its_row_and_column() {
        let g = Grid::new(8, 1, 1).unwrap();
        let key = KeyMaterial::mac(b"sv".to_vec()).unwrap();
        let s = LayerSieveStore::build(&g, &key).unwrap();
        assert_eq!(s.store_size(), 16);
        let mut meter = CostMeter::new();
        for i in 0..8 {
            assert!(verify_region(&key, &g, s.row(i), &mut meter).unwrap());
            assert!(verify_region(&key, &g, s.column(i), &mut meter).unwrap());
        }
        let mut bad = g.clone();
        bad.cell_mut(CellCoord::new(2, 5))[0] ^= 4;
        for i in 0..8 {
            assert_eq!(!verify_region(&key, &bad, s.row(i), &mut meter).unwrap(), i == 2);
            assert_eq!(!verify_region(&key, &bad, s.column(i), &mut meter).unwrap(), i == 5);
        }
    }
}
