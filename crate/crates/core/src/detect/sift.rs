use crate::auth::{CostMeter, KeyMaterial};
use crate::detect::line::{SiftLineSearch, SiftOrder};
use crate::detect::stepper::{run_search, Checker, Progress, Search};
use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};
use crate::store::{CellLine, HashStore, SiftStore};

#[derive(Clone, Debug)]
enum Phase<'a> {
    Columns(u32, u32),
    InColumn(SiftLineSearch<'a, SiftStore>),
    Done(Progress),
}

/// Staged sifting over whole-column digests, then within the first failing
/// column over per-cell digests.
#[derive(Clone, Debug)]
pub struct SiftSearch<'a> {
    check: Checker<'a>,
    store: &'a SiftStore,
    order: SiftOrder,
    phase: Phase<'a>,
    column_checks: u32,
    cell_checks: u64,
}

impl<'a> SiftSearch<'a> {
    pub fn new(grid: &'a Grid, key: &'a KeyMaterial, store: &'a SiftStore) -> Result<Self> {
        store.digest_set().check_grid(grid)?;
        store.digest_set().check_key(key)?;
        let mut order = SiftOrder::new(store.side());
        let (first, stage) = order.next().expect("m >= 2");
        Ok(Self {
            check: Checker { key, grid },
            store,
            order,
            phase: Phase::Columns(first, stage),
            column_checks: 0,
            cell_checks: 0,
        })
    }

    /// Whole-column verifications so far.
    pub fn column_checks(&self) -> u32 {
        self.column_checks
    }

    /// Per-cell verifications inside the failing column so far.
    pub fn cell_checks(&self) -> u64 {
        self.cell_checks
    }
}

impl Search for SiftSearch<'_> {
    fn next_cost(&self) -> Option<u64> {
        match &self.phase {
            Phase::Columns(..) => Some(u64::from(self.store.side())),
            Phase::InColumn(s) => s.next_cost(),
            Phase::Done(_) => None,
        }
    }

    fn advance(&mut self, meter: &mut CostMeter) -> Result<Progress> {
        let p = match &mut self.phase {
            Phase::Done(p) => return Ok(*p),
            Phase::Columns(col, stage) => {
                let col = *col;
                meter.reach_stage(*stage);
                self.column_checks += 1;
                if self.check.fails(self.store.column(col), meter)? {
                    let line = CellLine::col(col, 0, self.store.side());
                    let inner = SiftLineSearch::new(self.check.grid, self.check.key, line, self.store);
                    self.phase = Phase::InColumn(inner.without_stage());
                    Progress::NeedMoreWork
                } else {
                    match self.order.next() {
                        Some((next, stage)) => {
                            self.phase = Phase::Columns(next, stage);
                            Progress::NeedMoreWork
                        }
                        None => Progress::Clean,
                    }
                }
            }
            Phase::InColumn(s) => {
                self.cell_checks += 1;
                match s.advance(meter)? {
                    Progress::Clean => {
                        return Err(Error::InconsistentStore(
                            "column digest fails but every cell digest verifies".into(),
                        ))
                    }
                    p => p,
                }
            }
        };
        if p.is_terminal() {
            self.phase = Phase::Done(p);
        }
        Ok(p)
    }
}

/// Result of a 2-D sift: the found cell plus the work split.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiftRun {
    pub found: Option<CellCoord>,
    pub column_checks: u32,
    pub cell_checks: u64,
}

pub fn locate_sift(
    actual: &Grid,
    key: &KeyMaterial,
    store: &SiftStore,
    meter: &mut CostMeter,
) -> Result<SiftRun> {
    let mut s = SiftSearch::new(actual, key, store)?;
    let found = match run_search(&mut s, meter)? {
        Progress::Found(c) => Some(c),
        _ => None,
    };
    Ok(SiftRun {
        found,
        column_checks: s.column_checks,
        cell_checks: s.cell_checks,
    })
}
