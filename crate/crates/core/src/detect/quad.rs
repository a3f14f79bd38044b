use crate::auth::{CostMeter, KeyMaterial};
use crate::detect::stepper::{run_search, Checker, Progress, Search};
use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};
use crate::store::{HashStore, QuadStore, Square};

#[derive(Clone, Copy, Debug)]
enum Phase {
    Root,
    Children { sq: Square, q: usize, first: Option<usize> },
    Done(Progress),
}

/// Quadrant descent over a [`QuadStore`]: root first, then all four
/// children of the current failing block, recursing into the first failing
/// one in row-major order.
#[derive(Clone, Debug)]
pub struct QuadSearch<'a> {
    check: Checker<'a>,
    store: &'a QuadStore,
    phase: Phase,
}

impl<'a> QuadSearch<'a> {
    pub fn new(grid: &'a Grid, key: &'a KeyMaterial, store: &'a QuadStore) -> Result<Self> {
        store.digest_set().check_grid(grid)?;
        store.digest_set().check_key(key)?;
        Ok(Self {
            check: Checker { key, grid },
            store,
            phase: Phase::Root,
        })
    }
}

impl Search for QuadSearch<'_> {
    fn next_cost(&self) -> Option<u64> {
        match self.phase {
            Phase::Root => Some(u64::from(self.store.side()).pow(2)),
            Phase::Children { sq, .. } => Some(u64::from(sq.side / 2).pow(2)),
            Phase::Done(_) => None,
        }
    }

    fn advance(&mut self, meter: &mut CostMeter) -> Result<Progress> {
        let p = match self.phase {
            Phase::Done(p) => return Ok(p),
            Phase::Root => {
                if self.check.fails(self.store.root(), meter)? {
                    self.phase = Phase::Children {
                        sq: Square::whole(self.store.side()),
                        q: 0,
                        first: None,
                    };
                    Progress::NeedMoreWork
                } else {
                    Progress::Clean
                }
            }
            Phase::Children { sq, q, first } => {
                let child = sq.quadrant(q);
                meter.reach_stage(child.depth(self.store.side()));
                let failed = self.check.fails(self.store.block(child), meter)?;
                let first = first.or(failed.then_some(q));
                if q < 3 {
                    self.phase = Phase::Children { sq, q: q + 1, first };
                    return Ok(Progress::NeedMoreWork);
                }
                match first {
                    None => {
                        return Err(Error::InconsistentStore(format!(
                            "block {sq:?} fails but none of its quadrants do"
                        )))
                    }
                    Some(f) => {
                        let next = sq.quadrant(f);
                        if next.side == 1 {
                            Progress::Found(next.top_left())
                        } else {
                            self.phase = Phase::Children { sq: next, q: 0, first: None };
                            Progress::NeedMoreWork
                        }
                    }
                }
            }
        };
        if p.is_terminal() {
            self.phase = Phase::Done(p);
        }
        Ok(p)
    }
}

/// Runs quadrant descent to completion. `None` means the root verified.
pub fn locate_quad(
    actual: &Grid,
    key: &KeyMaterial,
    store: &QuadStore,
    meter: &mut CostMeter,
) -> Result<Option<CellCoord>> {
    let mut s = QuadSearch::new(actual, key, store)?;
    Ok(match run_search(&mut s, meter)? {
        Progress::Found(c) => Some(c),
        _ => None,
    })
}
