use serde::{Deserialize, Serialize};

use crate::auth::{CostMeter, KeyMaterial};
use crate::detect::stepper::Checker;
use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};
use crate::region::Region;
use crate::store::{HashStore, LayerSieveStore};

/// Failing rows times failing columns: a superset of the corrupted cells.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApproxRegion {
    pub rows: Vec<u32>,
    pub cols: Vec<u32>,
}

impl ApproxRegion {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.cols.is_empty()
    }

    pub fn candidate_count(&self) -> u64 {
        self.rows.len() as u64 * self.cols.len() as u64
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        self.rows.binary_search(&c.row).is_ok() && self.cols.binary_search(&c.col).is_ok()
    }

    pub fn candidates(&self) -> Region {
        self.rows
            .iter()
            .flat_map(|&r| self.cols.iter().map(move |&c| CellCoord::new(r, c)))
            .collect()
    }

    /// `(min_row, min_col, max_row, max_col)`.
    pub fn bounds(&self) -> Option<(u32, u32, u32, u32)> {
        Some((
            *self.rows.first()?,
            *self.cols.first()?,
            *self.rows.last()?,
            *self.cols.last()?,
        ))
    }
}

/// Verifies every row and column digest.
pub fn locate_sieve(
    actual: &Grid,
    key: &KeyMaterial,
    store: &LayerSieveStore,
    meter: &mut CostMeter,
) -> Result<ApproxRegion> {
    store.digest_set().check_grid(actual)?;
    store.digest_set().check_key(key)?;
    let check = Checker { key, grid: actual };
    let m = store.side();
    let mut approx = ApproxRegion::default();
    for r in 0..m {
        if check.fails(store.row(r), meter)? {
            approx.rows.push(r);
        }
    }
    for c in 0..m {
        if check.fails(store.column(c), meter)? {
            approx.cols.push(c);
        }
    }
    meter.reach_stage(1);
    if approx.rows.is_empty() != approx.cols.is_empty() {
        return Err(Error::InconsistentStore(format!(
            "{} failing rows but {} failing columns",
            approx.rows.len(),
            approx.cols.len()
        )));
    }
    Ok(approx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inject_corruption;
    use crate::region::{generate_region_in, RegionShapeSpec};

    #[test]
    fn sieve_examples() {
        let g = Grid::new(32, 1, 5).unwrap();
        let key = KeyMaterial::mac(b"sieve".to_vec()).unwrap();
        let store = LayerSieveStore::build(&g, &key).unwrap();

        let mut meter = CostMeter::new();
        assert!(locate_sieve(&g, &key, &store, &mut meter).unwrap().is_empty());
        assert_eq!(meter.sig_verifications(), 64);

        let one = Region::from_cells([CellCoord::new(3, 9)]);
        let bad = inject_corruption(&g, &one, 1).unwrap();
        let a = locate_sieve(&bad, &key, &store, &mut CostMeter::new()).unwrap();
        assert_eq!(a.candidates(), one);

        let rect = generate_region_in(32, &RegionShapeSpec::rectangle(CellCoord::new(8, 8), 4, 4)).unwrap();
        let bad = inject_corruption(&g, &rect, 1).unwrap();
        assert_eq!(locate_sieve(&bad, &key, &store, &mut CostMeter::new()).unwrap().candidates(), rect);

        let disc = generate_region_in(32, &RegionShapeSpec::disc(CellCoord::new(10, 10), 6)).unwrap();
        let bad = inject_corruption(&g, &disc, 1).unwrap();
        let a = locate_sieve(&bad, &key, &store, &mut CostMeter::new()).unwrap();
        assert_eq!(a.candidate_count(), 36);
        assert!(disc.is_subset(&a.candidates()));
        assert_eq!(a.bounds(), Some((10, 10, 15, 15)));
    }
}
