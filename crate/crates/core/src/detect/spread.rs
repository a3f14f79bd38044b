use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::auth::{verify_region, CostMeter, KeyMaterial};
use crate::detect::line::CellDigests;
use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};
use crate::region::Region;

/// Decides whether a single cell is corrupted.
pub trait CellTest {
    fn is_corrupted(&mut self, actual: &Grid, c: CellCoord, meter: &mut CostMeter) -> Result<bool>;
}

/// Direct byte comparison against the original grid.
#[derive(Clone, Copy, Debug)]
pub struct CompareOriginal<'a>(pub &'a Grid);

impl CellTest for CompareOriginal<'_> {
    fn is_corrupted(&mut self, actual: &Grid, c: CellCoord, meter: &mut CostMeter) -> Result<bool> {
        meter.record_cell_reads(1);
        Ok(actual.cell(c) != self.0.cell(c))
    }
}

/// Verification of a per-cell digest.
#[derive(Clone, Copy, Debug)]
pub struct VerifyCell<'a, D: ?Sized> {
    pub key: &'a KeyMaterial,
    pub digests: &'a D,
}

impl<D: CellDigests + ?Sized> CellTest for VerifyCell<'_, D> {
    fn is_corrupted(&mut self, actual: &Grid, c: CellCoord, meter: &mut CostMeter) -> Result<bool> {
        Ok(!verify_region(self.key, actual, self.digests.cell_digest(c), meter)?)
    }
}

/// Breadth-first recovery of the corrupted component around one cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Spread {
    pub region: Region,
    /// Per-cell tests run, the seed included. At most `5t`.
    pub cell_tests: u64,
    /// Tests run on neighbours of region cells. At most `4t`.
    pub neighbor_probes: u64,
}

/// Grows the 4-connected corrupted component containing `seed`. Each cell
/// is tested at most once.
pub fn spread_region<T: CellTest + ?Sized>(
    actual: &Grid,
    test: &mut T,
    seed: CellCoord,
    meter: &mut CostMeter,
) -> Result<Spread> {
    actual.check_cell(seed)?;
    if !test.is_corrupted(actual, seed, meter)? {
        return Err(Error::SeedNotCorrupted(seed));
    }
    let m = actual.side();
    let mut tested: HashMap<CellCoord, bool> = HashMap::from([(seed, true)]);
    let mut region = Region::from_cells([seed]);
    let mut queue = VecDeque::from([seed]);
    let mut probes = 0u64;
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors(m) {
            if tested.contains_key(&n) {
                continue;
            }
            probes += 1;
            let bad = test.is_corrupted(actual, n, meter)?;
            tested.insert(n, bad);
            if bad {
                region.insert(n);
                queue.push_back(n);
            }
        }
    }
    Ok(Spread {
        region,
        cell_tests: probes + 1,
        neighbor_probes: probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inject_corruption;
    use crate::oracle::brute_force_diff;
    use crate::region::{generate_region_in, RegionShapeSpec};
    use crate::store::SiftStore;

    #[test]
    fn single_cell() {
        let g = Grid::new(8, 1, 1).unwrap();
        let c = CellCoord::new(4, 4);
        let bad = inject_corruption(&g, &Region::from_cells([c]), 1).unwrap();
        let mut meter = CostMeter::new();
        let s = spread_region(&bad, &mut CompareOriginal(&g), c, &mut meter).unwrap();
        assert_eq!(s.region, Region::from_cells([c]));
        assert_eq!(s.cell_tests, 5);
        assert_eq!(meter.cells_touched(), 5);
    }

    #[test]
    fn rectangle_every_seed() {
        let g = Grid::new(16, 1, 1).unwrap();
        let rect = generate_region_in(16, &RegionShapeSpec::rectangle(CellCoord::new(3, 5), 4, 4)).unwrap();
        let bad = inject_corruption(&g, &rect, 1).unwrap();
        for &c in rect.iter() {
            let s = spread_region(&bad, &mut CompareOriginal(&g), c, &mut CostMeter::new()).unwrap();
            assert_eq!(s.region, rect);
            assert!(s.cell_tests <= 80 && s.neighbor_probes <= 64);
        }
    }

    #[test]
    fn disc_via_cell_digests() {
        let g = Grid::new(16, 1, 1).unwrap();
        let key = KeyMaterial::mac(b"spread".to_vec()).unwrap();
        let store = SiftStore::build(&g, &key).unwrap();
        let disc = generate_region_in(16, &RegionShapeSpec::disc(CellCoord::new(0, 9), 7)).unwrap();
        let bad = inject_corruption(&g, &disc, 1).unwrap();
        let truth = brute_force_diff(&bad, &g).unwrap();
        for &c in disc.iter() {
            let mut meter = CostMeter::new();
            let mut test = VerifyCell { key: &key, digests: &store };
            let s = spread_region(&bad, &mut test, c, &mut meter).unwrap();
            assert_eq!(Some(&s.region), truth.component_of(c));
            assert_eq!(meter.sig_verifications(), s.cell_tests);
        }
    }

    #[test]
    fn clean_seed_rejected() {
        let g = Grid::new(4, 1, 1).unwrap();
        let r = spread_region(&g, &mut CompareOriginal(&g), CellCoord::new(1, 1), &mut CostMeter::new());
        assert!(matches!(r, Err(Error::SeedNotCorrupted(_))));
    }
}
