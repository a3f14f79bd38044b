//! Cell sets, their shape predicates, and deterministic region generators.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};

/// A finite set of cells, iterated in row-major order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    cells: BTreeSet<CellCoord>,
}

impl Region {
    pub fn from_cells<I: IntoIterator<Item = CellCoord>>(cells: I) -> Self {
        Self {
            cells: cells.into_iter().collect(),
        }
    }

    /// Number of cells, `t`.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: &CellCoord) -> bool {
        self.cells.contains(c)
    }

    pub fn insert(&mut self, c: CellCoord) -> bool {
        self.cells.insert(c)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CellCoord> {
        self.cells.iter()
    }

    pub fn cells(&self) -> &BTreeSet<CellCoord> {
        &self.cells
    }

    pub fn is_subset(&self, other: &Region) -> bool {
        self.cells.is_subset(&other.cells)
    }

    /// `(min_row, min_col, max_row, max_col)`, inclusive.
    pub fn bounding_box(&self) -> Option<(u32, u32, u32, u32)> {
        let first = self.cells.first()?;
        let last = self.cells.last()?;
        let min_col = self.cells.iter().map(|c| c.col).min()?;
        let max_col = self.cells.iter().map(|c| c.col).max()?;
        Some((first.row, min_col, last.row, max_col))
    }

    /// Distinct columns touched by the region.
    pub fn column_span(&self) -> u32 {
        self.cells.iter().map(|c| c.col).collect::<BTreeSet<_>>().len() as u32
    }

    /// True iff the cells form a single 4-neighbour component. The empty
    /// region counts as connected.
    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.cells.first() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for n in c.neighbors(u32::MAX) {
                if self.cells.contains(&n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen.len() == self.cells.len()
    }

    /// True iff every row slice and every column slice is one contiguous run.
    pub fn is_hv_convex(&self) -> bool {
        let mut rows: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        let mut cols: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for c in &self.cells {
            rows.entry(c.row).or_default().push(c.col);
            cols.entry(c.col).or_default().push(c.row);
        }
        let contiguous = |v: &Vec<u32>| {
            let lo = v.iter().min().unwrap();
            let hi = v.iter().max().unwrap();
            (hi - lo + 1) as usize == v.len()
        };
        rows.values().all(contiguous) && cols.values().all(contiguous)
    }
}

impl FromIterator<CellCoord> for Region {
    fn from_iter<I: IntoIterator<Item = CellCoord>>(iter: I) -> Self {
        Self::from_cells(iter)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Rectangle,
    Disc,
    RandomConnected,
    HvConvexRandom,
}

impl ShapeKind {
    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Rectangle => "rect",
            ShapeKind::Disc => "disc",
            ShapeKind::RandomConnected => "random",
            ShapeKind::HvConvexRandom => "hvconvex",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "rect" | "rectangle" => Ok(ShapeKind::Rectangle),
            "disc" => Ok(ShapeKind::Disc),
            "random" | "random-connected" => Ok(ShapeKind::RandomConnected),
            "hvconvex" | "hv-convex-random" => Ok(ShapeKind::HvConvexRandom),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

/// Parameters of a generated region.
///
/// `anchor` is the top-left corner for rectangles and discs (the disc is
/// inscribed in a `diameter x diameter` box), the seed cell for random
/// connected growth, and the preferred top-left corner for random
/// hv-convex shapes, which are shifted inward when they would overflow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionShapeSpec {
    pub kind: ShapeKind,
    pub anchor: CellCoord,
    /// `(rows, cols)` for rectangles; `(diameter, diameter)` for discs.
    pub extents: (u32, u32),
    /// Cell count for the random kinds.
    pub target: u64,
    pub seed: u64,
}

impl RegionShapeSpec {
    pub fn rectangle(anchor: CellCoord, rows: u32, cols: u32) -> Self {
        Self {
            kind: ShapeKind::Rectangle,
            anchor,
            extents: (rows, cols),
            target: u64::from(rows) * u64::from(cols),
            seed: 0,
        }
    }

    pub fn disc(anchor: CellCoord, diameter: u32) -> Self {
        Self {
            kind: ShapeKind::Disc,
            anchor,
            extents: (diameter, diameter),
            target: 0,
            seed: 0,
        }
    }

    pub fn random_connected(anchor: CellCoord, target: u64, seed: u64) -> Self {
        Self {
            kind: ShapeKind::RandomConnected,
            anchor,
            extents: (0, 0),
            target,
            seed,
        }
    }

    pub fn hv_convex(anchor: CellCoord, target: u64, seed: u64) -> Self {
        Self {
            kind: ShapeKind::HvConvexRandom,
            anchor,
            extents: (0, 0),
            target,
            seed,
        }
    }
}

pub fn generate_region(grid: &Grid, spec: &RegionShapeSpec) -> Result<Region> {
    generate_region_in(grid.side(), spec)
}

/// Same as [`generate_region`] but only needs the grid side.
pub fn generate_region_in(m: u32, spec: &RegionShapeSpec) -> Result<Region> {
    let n = u64::from(m) * u64::from(m);
    match spec.kind {
        ShapeKind::Rectangle => {
            let (rows, cols) = spec.extents;
            fits_box(m, spec.anchor, rows, cols)?;
            let CellCoord { row, col } = spec.anchor;
            Ok((row..row + rows)
                .flat_map(|r| (col..col + cols).map(move |c| CellCoord::new(r, c)))
                .collect())
        }
        ShapeKind::Disc => {
            let d = spec.extents.0;
            fits_box(m, spec.anchor, d, d)?;
            Ok(disc_cells(spec.anchor, d))
        }
        ShapeKind::RandomConnected => {
            check_target(spec.target, n)?;
            if spec.anchor.row >= m || spec.anchor.col >= m {
                return Err(Error::InfeasibleShape(format!(
                    "anchor {} outside {m}x{m} grid",
                    spec.anchor
                )));
            }
            Ok(grow_connected(m, spec.anchor, spec.target, spec.seed))
        }
        ShapeKind::HvConvexRandom => {
            check_target(spec.target, n)?;
            hv_convex_random(m, spec.anchor, spec.target, spec.seed)
        }
    }
}

fn check_target(target: u64, n: u64) -> Result<()> {
    if target == 0 || target > n {
        return Err(Error::InfeasibleShape(format!(
            "target {target} not in 1..={n}"
        )));
    }
    Ok(())
}

fn fits_box(m: u32, anchor: CellCoord, rows: u32, cols: u32) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::InfeasibleShape("zero extent".into()));
    }
    let fits = u64::from(anchor.row) + u64::from(rows) <= u64::from(m)
        && u64::from(anchor.col) + u64::from(cols) <= u64::from(m);
    if !fits {
        return Err(Error::InfeasibleShape(format!(
            "{rows}x{cols} box at {anchor} exceeds {m}x{m} grid"
        )));
    }
    Ok(())
}

/// Cells whose centres lie within `d/2` of the box centre. Spans exactly
/// `d` rows and `d` columns.
fn disc_cells(anchor: CellCoord, d: u32) -> Region {
    let centre = (f64::from(d) - 1.0) / 2.0;
    let r2 = (f64::from(d) / 2.0).powi(2);
    let mut out = Region::default();
    for r in 0..d {
        for c in 0..d {
            let (dr, dc) = (f64::from(r) - centre, f64::from(c) - centre);
            if dr * dr + dc * dc <= r2 {
                out.insert(CellCoord::new(anchor.row + r, anchor.col + c));
            }
        }
    }
    out
}

fn grow_connected(m: u32, start: CellCoord, target: u64, seed: u64) -> Region {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut region = Region::from_cells([start]);
    let mut frontier: Vec<CellCoord> = start.neighbors(m).collect();
    while (region.len() as u64) < target {
        // frontier cannot run dry before the grid is full
        let pick = frontier.swap_remove(rng.gen_range(0..frontier.len()));
        if region.insert(pick) {
            frontier.extend(pick.neighbors(m).filter(|n| !region.contains(n)));
        }
    }
    region
}

/// Random convex polyomino: a rectangle with four monotone staircases cut
/// from its corners. Falls back to a block with one partial row, which hits
/// the target exactly.
fn hv_convex_random(m: u32, anchor: CellCoord, target: u64, seed: u64) -> Result<Region> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let root = (target as f64).sqrt();
    let lo = target as f64 * 0.9;
    let hi = target as f64 * 1.1;
    for _ in 0..64 {
        let rows = rng
            .gen_range((root / 2.0).ceil().max(1.0)..=(root * 2.0).ceil().max(1.0))
            .min(f64::from(m)) as u32;
        let rows = rows.max(1);
        // leave head-room for the corner cuts
        let slack = rng.gen_range(1.0..1.35);
        let cols = ((target as f64 * slack) / f64::from(rows)).ceil() as u32;
        if cols == 0 || cols > m {
            continue;
        }
        let shape = staircase_cut(rows, cols, &mut rng);
        let count = shape.iter().map(|&(l, r)| u64::from(r - l + 1)).sum::<u64>() as f64;
        if count >= lo && count <= hi {
            return Ok(place(m, anchor, rows, cols, &shape));
        }
    }
    let cols = (root.ceil() as u32).clamp(1, m);
    let full = (target / u64::from(cols)) as u32;
    let rem = (target % u64::from(cols)) as u32;
    let rows = full + u32::from(rem > 0);
    if rows > m {
        return Err(Error::InfeasibleShape(format!(
            "hv-convex target {target} does not fit {m}x{m}"
        )));
    }
    let mut shape = vec![(0, cols - 1); full as usize];
    if rem > 0 {
        shape.push((0, rem - 1));
    }
    Ok(place(m, anchor, rows, cols, &shape))
}

/// Per-row `(left, right)` column bounds inside a `rows x cols` box.
fn staircase_cut<R: Rng>(rows: u32, cols: u32, rng: &mut R) -> Vec<(u32, u32)> {
    let mid = (cols - 1) / 2;
    let max_left = mid;
    let max_right = cols - 1 - mid;
    // indent sequences that shrink away from the corner
    let mut corner = |max: u32| -> Vec<u32> {
        let mut v = Vec::with_capacity(rows as usize);
        let mut cur = if max == 0 { 0 } else { rng.gen_range(0..=max / 2) };
        for _ in 0..rows {
            v.push(cur);
            cur = cur.saturating_sub(rng.gen_range(0..=2));
        }
        v
    };
    let tl = corner(max_left);
    let tr = corner(max_right);
    let bl = corner(max_left);
    let br = corner(max_right);
    (0..rows as usize)
        .map(|r| {
            let back = rows as usize - 1 - r;
            let left = tl[r].max(bl[back]);
            let right = tr[r].max(br[back]);
            (left, cols - 1 - right)
        })
        .collect()
}

fn place(m: u32, anchor: CellCoord, rows: u32, cols: u32, shape: &[(u32, u32)]) -> Region {
    let row0 = anchor.row.min(m - rows);
    let col0 = anchor.col.min(m - cols);
    shape
        .iter()
        .enumerate()
        .flat_map(|(r, &(l, rt))| {
            (l..=rt).map(move |c| CellCoord::new(row0 + r as u32, col0 + c))
        })
        .collect()
}
