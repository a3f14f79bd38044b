use serde::{Deserialize, Serialize};

use crate::auth::{CostMeter, KeyMaterial};
use crate::detect::line::{BinaryLineSearch, MiddlePolicy};
use crate::detect::stepper::{run_search, Checker, Progress, Search};
use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};
use crate::store::{BoundaryStore, HashStore, MedianLine, Square};

/// Shape of the boundary union formed by the failing quadrants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryShape {
    /// All four quadrants fail: both median lines.
    Cross,
    /// Three quadrants fail: both median lines, one of them only half used.
    Tee,
    /// Left and right halves fail: the vertical median line.
    Vertical,
    /// Top and bottom halves fail: the horizontal median line.
    Horizontal,
    /// Two diagonally opposite quadrants fail. Impossible for a connected
    /// region; both lines are searched anyway.
    Diagonal,
}

impl BoundaryShape {
    /// Shape for a failing-quadrant mask (TL, TR, BL, BR), if at least two
    /// fail.
    pub fn classify(f: [bool; 4]) -> Option<Self> {
        let [tl, tr, bl, br] = f;
        let n = f.iter().filter(|&&x| x).count();
        Some(match n {
            0 | 1 => return None,
            4 => Self::Cross,
            3 => Self::Tee,
            _ if (tl && tr) || (bl && br) => Self::Vertical,
            _ if (tl && bl) || (tr && br) => Self::Horizontal,
            _ => Self::Diagonal,
        })
    }

    /// Lines to search, in order.
    pub fn lines(self, f: [bool; 4]) -> Vec<MedianLine> {
        let [tl, tr, bl, br] = f;
        let vertical = (tl && tr) || (bl && br);
        let horizontal = (tl && bl) || (tr && br);
        match self {
            Self::Diagonal => vec![MedianLine::Vertical, MedianLine::Horizontal],
            _ => [(vertical, MedianLine::Vertical), (horizontal, MedianLine::Horizontal)]
                .into_iter()
                .filter_map(|(on, l)| on.then_some(l))
                .collect(),
        }
    }
}

/// Where the improved scheme left quadrant descent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySwitch {
    pub block: Square,
    pub depth: u32,
    pub shape: BoundaryShape,
    pub lines: Vec<MedianLine>,
    /// Lines actually searched before a cell was found.
    pub lines_searched: u32,
}

#[derive(Clone, Debug)]
enum Phase<'a> {
    Quadrants { sq: Square, q: usize, failing: [bool; 4] },
    Lines { line: BinaryLineSearch<'a> },
    Done(Progress),
}

/// Quadrant descent that switches to binary search along median lines once
/// two or more quadrants fail. Assumes the corrupted area is hv-convex.
#[derive(Clone, Debug)]
pub struct ImprovedSearch<'a> {
    check: Checker<'a>,
    store: &'a BoundaryStore,
    phase: Phase<'a>,
    switch: Option<BoundarySwitch>,
}

impl<'a> ImprovedSearch<'a> {
    pub fn new(grid: &'a Grid, key: &'a KeyMaterial, store: &'a BoundaryStore) -> Result<Self> {
        store.digest_set().check_grid(grid)?;
        store.digest_set().check_key(key)?;
        Ok(Self {
            check: Checker { key, grid },
            store,
            phase: Phase::Quadrants {
                sq: Square::whole(store.side()),
                q: 0,
                failing: [false; 4],
            },
            switch: None,
        })
    }

    pub fn switch(&self) -> Option<&BoundarySwitch> {
        self.switch.as_ref()
    }

    fn line_search(&self, sq: Square, which: MedianLine) -> BinaryLineSearch<'a> {
        BinaryLineSearch::new(
            self.check.grid,
            self.check.key,
            self.store.line_tree(sq, which),
            MiddlePolicy::Confirm,
        )
        .without_stage()
    }

    fn violation(sq: Square) -> Error {
        Error::ConvexityViolation {
            row: sq.row0,
            col: sq.col0,
            side: sq.side,
        }
    }

    fn after_quadrants(&mut self, sq: Square, failing: [bool; 4]) -> Result<Progress> {
        let Some(shape) = BoundaryShape::classify(failing) else {
            return Ok(match failing.iter().position(|&f| f) {
                None if sq.side == self.store.side() => Progress::Clean,
                None => {
                    return Err(Error::InconsistentStore(format!(
                        "block {sq:?} fails but none of its quadrants do"
                    )))
                }
                Some(q) => self.descend(sq.quadrant(q)),
            });
        };
        if sq.side == 2 {
            // quadrants are single cells
            let q = failing.iter().position(|&f| f).unwrap_or(0);
            return Ok(Progress::Found(sq.quadrant(q).top_left()));
        }
        let lines = shape.lines(failing);
        let line = self.line_search(sq, lines[0]);
        self.switch = Some(BoundarySwitch {
            block: sq,
            depth: sq.depth(self.store.side()),
            shape,
            lines,
            lines_searched: 1,
        });
        self.phase = Phase::Lines { line };
        Ok(Progress::NeedMoreWork)
    }

    fn descend(&mut self, next: Square) -> Progress {
        if next.side == 1 {
            Progress::Found(next.top_left())
        } else {
            self.phase = Phase::Quadrants {
                sq: next,
                q: 0,
                failing: [false; 4],
            };
            Progress::NeedMoreWork
        }
    }

    fn next_line(&mut self) -> Result<Progress> {
        let sw = self.switch.as_mut().expect("line phase implies a switch");
        let sq = sw.block;
        if sw.lines_searched as usize >= sw.lines.len() {
            return Err(Self::violation(sq));
        }
        let which = sw.lines[sw.lines_searched as usize];
        sw.lines_searched += 1;
        let line = self.line_search(sq, which);
        self.phase = Phase::Lines { line };
        Ok(Progress::NeedMoreWork)
    }
}

impl Search for ImprovedSearch<'_> {
    fn next_cost(&self) -> Option<u64> {
        match &self.phase {
            Phase::Quadrants { sq, .. } => Some(u64::from(sq.side / 2).pow(2)),
            Phase::Lines { line } => line.next_cost(),
            Phase::Done(_) => None,
        }
    }

    fn advance(&mut self, meter: &mut CostMeter) -> Result<Progress> {
        let p = match &mut self.phase {
            Phase::Done(p) => return Ok(*p),
            Phase::Quadrants { sq, q, failing } => {
                let (sq, qi) = (*sq, *q);
                let child = sq.quadrant(qi);
                meter.reach_stage(child.depth(self.store.side()));
                failing[qi] = self.check.fails(self.store.block(child), meter)?;
                if qi < 3 {
                    *q += 1;
                    return Ok(Progress::NeedMoreWork);
                }
                let failing = *failing;
                self.after_quadrants(sq, failing)?
            }
            Phase::Lines { line } => match line.advance(meter) {
                Ok(Progress::Clean) => self.next_line()?,
                Ok(p) => p,
                Err(Error::NonContiguousRun { .. }) => {
                    let sq = self.switch.as_ref().map(|s| s.block).expect("switched");
                    return Err(Self::violation(sq));
                }
                Err(e) => return Err(e),
            },
        };
        if p.is_terminal() {
            self.phase = Phase::Done(p);
        }
        Ok(p)
    }
}

/// Runs the improved scheme to completion.
pub fn locate_improved(
    actual: &Grid,
    key: &KeyMaterial,
    store: &BoundaryStore,
    meter: &mut CostMeter,
) -> Result<(Option<CellCoord>, Option<BoundarySwitch>)> {
    let mut s = ImprovedSearch::new(actual, key, store)?;
    let found = match run_search(&mut s, meter)? {
        Progress::Found(c) => Some(c),
        _ => None,
    };
    Ok((found, s.switch))
}
