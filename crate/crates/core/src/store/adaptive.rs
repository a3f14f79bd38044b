use serde::{Deserialize, Serialize};

use super::line::linear_descriptor;
use super::{checked_set, DigestSet, HashStore, StoreVariant};
use crate::auth::{KeyMaterial, RegionDescriptor, SignedDigest};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::par::Exec;

/// Degree schedule of an adaptive tree over `N` linearly ordered cells: a
/// node at depth `d` has `2^(h-d)` children, so `h (h + 1) / 2 = log2 N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdaptiveShape {
    cells: u64,
    height: u32,
}

fn triangular(h: u32) -> u32 {
    h * (h + 1) / 2
}

impl AdaptiveShape {
    pub fn for_cells(n: u64) -> Result<Self> {
        let lg = if n.is_power_of_two() { n.trailing_zeros() } else { 63 - n.leading_zeros().min(63) };
        let mut h = 0;
        while triangular(h + 1) <= lg {
            h += 1;
        }
        if n.is_power_of_two() && h > 0 && triangular(h) == lg {
            return Ok(Self { cells: n, height: h });
        }
        let below = if h == 0 { 1 } else { 1u64 << triangular(h) };
        let above_exp = triangular(h + 1);
        let above = if above_exp < 64 { 1u64 << above_exp } else { u64::MAX };
        Err(Error::NonConformingAdaptive { n, below, above })
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Child count at each internal depth, root first.
    pub fn degrees(&self) -> Vec<u64> {
        (0..self.height).map(|d| 1u64 << (self.height - d)).collect()
    }

    /// Nodes at each depth `0..=h`.
    pub fn level_counts(&self) -> Vec<u64> {
        let mut counts = vec![1u64];
        for deg in self.degrees() {
            counts.push(counts.last().unwrap() * deg);
        }
        counts
    }

    /// Cells under one node at each depth `0..=h`.
    pub fn level_spans(&self) -> Vec<u64> {
        self.level_counts().iter().map(|c| self.cells / c).collect()
    }

    pub fn node_count(&self) -> u64 {
        self.level_counts().iter().sum()
    }
}

pub(super) fn layout(m: u32) -> Result<Vec<RegionDescriptor>> {
    let shape = AdaptiveShape::for_cells(u64::from(m) * u64::from(m))?;
    let mut out = Vec::with_capacity(shape.node_count() as usize);
    for (count, span) in shape.level_counts().into_iter().zip(shape.level_spans()) {
        for i in 0..count {
            out.push(linear_descriptor(m, (i * span) as u32, span as u32));
        }
    }
    Ok(out)
}

/// Signed adaptive tree over the grid read in row-major order. Nodes are
/// stored level by level; each covers a contiguous run of cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdaptiveTree {
    set: DigestSet,
    shape: AdaptiveShape,
    level_offsets: Vec<usize>,
}

/// Position of a node: depth and index within its level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NodeId {
    pub depth: u32,
    pub index: u64,
}

impl AdaptiveTree {
    pub fn build(grid: &Grid, key: &KeyMaterial) -> Result<Self> {
        Self::build_with(grid, key, Exec::default())
    }

    pub fn build_with(grid: &Grid, key: &KeyMaterial, exec: Exec) -> Result<Self> {
        let set = DigestSet::build(grid, key, layout(grid.side())?, exec)?;
        Self::wrap(set)
    }

    fn wrap(set: DigestSet) -> Result<Self> {
        let m = u64::from(set.side());
        let shape = AdaptiveShape::for_cells(m * m)?;
        let mut level_offsets = Vec::new();
        let mut at = 0usize;
        for c in shape.level_counts() {
            level_offsets.push(at);
            at += c as usize;
        }
        Ok(Self {
            set,
            shape,
            level_offsets,
        })
    }

    pub fn shape(&self) -> &AdaptiveShape {
        &self.shape
    }

    pub fn height(&self) -> u32 {
        self.shape.height
    }

    pub fn side(&self) -> u32 {
        self.set.side()
    }

    pub fn node(&self, id: NodeId) -> &SignedDigest {
        self.set.get(self.level_offsets[id.depth as usize] + id.index as usize)
    }

    pub fn children(&self, id: NodeId) -> impl Iterator<Item = NodeId> {
        let deg = if id.depth < self.shape.height {
            1u64 << (self.shape.height - id.depth)
        } else {
            0
        };
        (0..deg).map(move |k| NodeId {
            depth: id.depth + 1,
            index: id.index * deg + k,
        })
    }
}

impl HashStore for AdaptiveTree {
    const VARIANT: StoreVariant = StoreVariant::Adaptive;

    fn digest_set(&self) -> &DigestSet {
        &self.set
    }

    fn from_digest_set(set: DigestSet) -> Result<Self> {
        Self::wrap(checked_set(Self::VARIANT, set)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sixty_four_cells() {
        let s = AdaptiveShape::for_cells(64).unwrap();
        assert_eq!(s.height(), 3);
        assert_eq!(s.degrees(), vec![8, 4, 2]);
        assert_eq!(s.level_counts(), vec![1, 8, 32, 64]);
        assert_eq!(s.node_count(), 105);
        assert_eq!(s.degrees().iter().product::<u64>(), 64);
    }

    #[test]
    fn smallest_and_larger_conforming() {
        let s = AdaptiveShape::for_cells(2).unwrap();
        assert_eq!(s.height(), 1);
        assert_eq!(s.degrees(), vec![2]);
        assert_eq!(s.node_count(), 3);
        let s = AdaptiveShape::for_cells(1024).unwrap();
        assert_eq!(s.degrees(), vec![16, 8, 4, 2]);
        assert_eq!(AdaptiveShape::for_cells(8).unwrap().height(), 2);
    }

    #[test]
    fn non_conforming_names_neighbours() {
        match AdaptiveShape::for_cells(16) {
            Err(Error::NonConformingAdaptive { n: 16, below: 8, above: 64 }) => {}
            other => panic!("{other:?}"),
        }
        match AdaptiveShape::for_cells(256) {
            Err(Error::NonConformingAdaptive { below: 64, above: 1024, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(AdaptiveShape::for_cells(1).is_err());
    }

    #[test]
    fn tree_walk_matches_shape() {
        let g = Grid::new(8, 1, 3).unwrap();
        let key = KeyMaterial::mac(b"a".to_vec()).unwrap();
        let t = AdaptiveTree::build(&g, &key).unwrap();
        assert_eq!(t.store_size(), 105);
        // walk every root-to-leaf path
        let mut stack = vec![(NodeId { depth: 0, index: 0 }, 1u64)];
        let mut leaves = 0;
        while let Some((id, product)) = stack.pop() {
            let kids: Vec<_> = t.children(id).collect();
            if kids.is_empty() {
                assert_eq!(id.depth, 3);
                assert_eq!(product, 64);
                assert_eq!(t.node(id).cell_count(), 1);
                leaves += 1;
            } else {
                let covered: u64 = kids.iter().map(|k| t.node(*k).cell_count()).sum();
                assert_eq!(covered, t.node(id).cell_count());
                stack.extend(kids.iter().map(|k| (*k, product * kids.len() as u64)));
            }
        }
        assert_eq!(leaves, 64);
        assert!(AdaptiveTree::build(&Grid::new(4, 1, 0).unwrap(), &key).is_err());
    }
}
