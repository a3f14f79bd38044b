//! Brute-force ground truth. Every detector result is checked against this
//! module, never against another detector.
//!
//! Components are labelled with a two-pass union-find scan rather than a
//! breadth-first walk, so the oracle shares no code path with
//! [`crate::detect::spread_region`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::auth::{verify_region, CostMeter, KeyMaterial};
use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};
use crate::region::Region;
use crate::store::{HashStore, SiftStore};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffReport {
    /// Every corrupted cell.
    pub cells: Region,
    /// 4-neighbour components, ordered by their first cell (row-major).
    pub components: Vec<Region>,
    /// `hv_convex[i]` describes `components[i]`.
    pub hv_convex: Vec<bool>,
}

impl DiffReport {
    fn from_mask(m: u32, mask: &[bool]) -> Self {
        let cells: Region = mask
            .iter()
            .enumerate()
            .filter(|(_, &bad)| bad)
            .map(|(i, _)| CellCoord::new(i as u32 / m, i as u32 % m))
            .collect();
        let components = label_components(m, mask);
        let hv_convex = components.iter().map(Region::is_hv_convex).collect();
        Self {
            cells,
            components,
            hv_convex,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.cells.is_empty()
    }

    /// The component holding `c`, if `c` is corrupted.
    pub fn component_of(&self, c: CellCoord) -> Option<&Region> {
        self.components.iter().find(|r| r.contains(&c))
    }
}

/// Cell-by-cell comparison of two grids of equal shape.
pub fn brute_force_diff(actual: &Grid, original: &Grid) -> Result<DiffReport> {
    if !actual.same_shape(original) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} ({}B cells) vs {}x{} ({}B cells)",
            actual.side(),
            actual.side(),
            actual.cell_size(),
            original.side(),
            original.side(),
            original.cell_size()
        )));
    }
    let mask: Vec<bool> = actual.coords().map(|c| actual.cell(c) != original.cell(c)).collect();
    Ok(DiffReport::from_mask(actual.side(), &mask))
}

/// Verifies all `N` per-cell digests of a sift store.
pub fn brute_force_store_scan(
    actual: &Grid,
    key: &KeyMaterial,
    store: &SiftStore,
    meter: &mut CostMeter,
) -> Result<DiffReport> {
    store.digest_set().check_grid(actual)?;
    store.digest_set().check_key(key)?;
    let mut mask = Vec::with_capacity(actual.len() as usize);
    for c in actual.coords() {
        mask.push(!verify_region(key, actual, store.cell(c), meter)?);
    }
    Ok(DiffReport::from_mask(actual.side(), &mask))
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn label_components(m: u32, mask: &[bool]) -> Vec<Region> {
    let m = m as usize;
    let mut parent: Vec<usize> = (0..mask.len()).collect();
    for i in 0..mask.len() {
        if !mask[i] {
            continue;
        }
        let (r, c) = (i / m, i % m);
        for j in [(c > 0).then(|| i - 1), (r > 0).then(|| i - m)].into_iter().flatten() {
            if mask[j] {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    // roots are the smallest index of their component, so map order is
    // first-cell order
    let mut by_root: BTreeMap<usize, Region> = BTreeMap::new();
    for i in (0..mask.len()).filter(|&i| mask[i]) {
        let root = find(&mut parent, i);
        by_root
            .entry(root)
            .or_default()
            .insert(CellCoord::new((i / m) as u32, (i % m) as u32));
    }
    by_root.into_values().collect()
}
