//! One-dimensional searches: dyadic binary search over a signed line tree,
//! and staged sifting over per-cell digests.

use crate::auth::{CostMeter, KeyMaterial, SignedDigest};
use crate::detect::stepper::{run_search, Checker, Progress, Search};
use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};
use crate::store::{dyadic_interval, BoundaryStore, CellLine, LineTree, QuadStore, SiftStore};

/// Anything that can authenticate a single cell on its own.
pub trait CellDigests {
    fn cell_digest(&self, c: CellCoord) -> &SignedDigest;
}

impl CellDigests for SiftStore {
    fn cell_digest(&self, c: CellCoord) -> &SignedDigest {
        self.cell(c)
    }
}

impl CellDigests for QuadStore {
    fn cell_digest(&self, c: CellCoord) -> &SignedDigest {
        self.leaf(c)
    }
}

impl CellDigests for BoundaryStore {
    fn cell_digest(&self, c: CellCoord) -> &SignedDigest {
        self.leaf(c)
    }
}

/// What to do when both halves of an interval fail.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MiddlePolicy {
    /// Report the last cell of the left half. Correct whenever the
    /// corrupted cells on the line form one run.
    #[default]
    Trust,
    /// Check that cell (then the first cell of the right half) against the
    /// tree's leaf digests before reporting it; error if both are clean.
    Confirm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Phase {
    Whole,
    Left,
    Right { left_failed: bool },
    ConfirmMiddle(u32),
    ConfirmNext(u32),
    Done(Progress),
}

/// Binary search for a corrupted cell on a line with a dyadic digest tree.
#[derive(Clone, Debug)]
pub struct BinaryLineSearch<'a> {
    check: Checker<'a>,
    tree: LineTree<'a>,
    policy: MiddlePolicy,
    /// Heap index of the interval being split.
    node: u32,
    phase: Phase,
    iterations: u32,
    record_stage: bool,
}

impl<'a> BinaryLineSearch<'a> {
    pub fn new(grid: &'a Grid, key: &'a KeyMaterial, tree: LineTree<'a>, policy: MiddlePolicy) -> Self {
        let phase = if tree.line.len == 1 { Phase::Whole } else { Phase::Left };
        Self {
            check: Checker { key, grid },
            tree,
            policy,
            node: 1,
            phase,
            iterations: 0,
            record_stage: true,
        }
    }

    pub(crate) fn without_stage(mut self) -> Self {
        self.record_stage = false;
        self
    }

    /// Halving iterations started so far.
    pub fn iterations(&self) -> u32 {
        self.iterations
    }

    pub fn line(&self) -> CellLine {
        self.tree.line
    }

    fn interval(&self, node: u32) -> (u32, u32) {
        dyadic_interval(self.tree.line.len, node)
    }

    fn leaf(&self, pos: u32) -> &'a SignedDigest {
        self.tree.node(self.tree.line.len + pos)
    }

    fn enter(&mut self, child: u32) -> Progress {
        let (off, len) = self.interval(child);
        if len == 1 {
            self.finish(Progress::Found(self.tree.line.cell(off)))
        } else {
            self.node = child;
            self.phase = Phase::Left;
            Progress::NeedMoreWork
        }
    }

    fn finish(&mut self, p: Progress) -> Progress {
        self.phase = Phase::Done(p);
        p
    }
}

impl Search for BinaryLineSearch<'_> {
    fn next_cost(&self) -> Option<u64> {
        let half = |n: u32| u64::from(self.interval(n).1 / 2);
        match self.phase {
            Phase::Whole => Some(u64::from(self.tree.line.len)),
            Phase::Left | Phase::Right { .. } => Some(half(self.node)),
            Phase::ConfirmMiddle(_) | Phase::ConfirmNext(_) => Some(1),
            Phase::Done(_) => None,
        }
    }

    fn advance(&mut self, meter: &mut CostMeter) -> Result<Progress> {
        let p = match self.phase {
            Phase::Done(p) => p,
            Phase::Whole => {
                let p = if self.check.fails(self.tree.node(1), meter)? {
                    Progress::Found(self.tree.line.cell(0))
                } else {
                    Progress::Clean
                };
                self.finish(p)
            }
            Phase::Left => {
                self.iterations += 1;
                let left_failed = self.check.fails(self.tree.node(2 * self.node), meter)?;
                self.phase = Phase::Right { left_failed };
                Progress::NeedMoreWork
            }
            Phase::Right { left_failed } => {
                let right_failed = self.check.fails(self.tree.node(2 * self.node + 1), meter)?;
                match (left_failed, right_failed) {
                    (true, true) => {
                        let (off, len) = self.interval(self.node);
                        let mid = off + len / 2 - 1;
                        match self.policy {
                            MiddlePolicy::Trust => self.finish(Progress::Found(self.tree.line.cell(mid))),
                            MiddlePolicy::Confirm => {
                                self.phase = Phase::ConfirmMiddle(mid);
                                Progress::NeedMoreWork
                            }
                        }
                    }
                    (true, false) => self.enter(2 * self.node),
                    (false, true) => self.enter(2 * self.node + 1),
                    (false, false) if self.node == 1 => self.finish(Progress::Clean),
                    (false, false) => {
                        return Err(Error::InconsistentStore(format!(
                            "interval {:?} failed but neither half does",
                            self.interval(self.node)
                        )))
                    }
                }
            }
            Phase::ConfirmMiddle(pos) => {
                if self.check.fails(self.leaf(pos), meter)? {
                    self.finish(Progress::Found(self.tree.line.cell(pos)))
                } else {
                    self.phase = Phase::ConfirmNext(pos + 1);
                    Progress::NeedMoreWork
                }
            }
            Phase::ConfirmNext(pos) => {
                if self.check.fails(self.leaf(pos), meter)? {
                    self.finish(Progress::Found(self.tree.line.cell(pos)))
                } else {
                    let line = self.tree.line;
                    return Err(Error::NonContiguousRun {
                        start: line.cell(0),
                        len: line.len,
                    });
                }
            }
        };
        if self.record_stage {
            meter.reach_stage(self.iterations);
        }
        Ok(p)
    }
}

/// Finds a corrupted cell on a line whose corrupted cells form one run.
/// Errors with [`Error::CleanLine`] when both top-level halves verify.
pub fn detect_1d_binary(
    actual: &Grid,
    key: &KeyMaterial,
    tree: LineTree<'_>,
    meter: &mut CostMeter,
) -> Result<CellCoord> {
    detect_1d_binary_with(actual, key, tree, MiddlePolicy::Trust, meter)
}

pub fn detect_1d_binary_with(
    actual: &Grid,
    key: &KeyMaterial,
    tree: LineTree<'_>,
    policy: MiddlePolicy,
    meter: &mut CostMeter,
) -> Result<CellCoord> {
    tree.line.check_fits(actual.side())?;
    let mut search = BinaryLineSearch::new(actual, key, tree, policy);
    match run_search(&mut search, meter)? {
        Progress::Found(c) => Ok(c),
        _ => Err(Error::CleanLine),
    }
}

/// Visiting order of the sifting stages over `0..len` (`len` a power of
/// two): stage `k` takes the 1-based positions that are multiples of
/// `len / 2^k` not seen in an earlier stage. Position `p` maps to index
/// `p - 1`. Yields `(index, stage)`.
#[derive(Clone, Debug)]
pub struct SiftOrder {
    len: u32,
    max_stage: u32,
    stage: u32,
    j: u32,
}

impl SiftOrder {
    pub fn new(len: u32) -> Self {
        debug_assert!(len.is_power_of_two());
        Self {
            len,
            max_stage: len.trailing_zeros().max(1),
            stage: 1,
            j: 1,
        }
    }
}

impl Iterator for SiftOrder {
    type Item = (u32, u32);

    fn next(&mut self) -> Option<(u32, u32)> {
        if self.len == 1 {
            let first = self.j == 1;
            self.j = 2;
            return first.then_some((0, 1));
        }
        loop {
            if self.stage > self.max_stage {
                return None;
            }
            if self.j > 1 << self.stage {
                self.stage += 1;
                self.j = 1;
                continue;
            }
            let j = self.j;
            self.j += if self.stage == 1 { 1 } else { 2 };
            return Some((j * (self.len >> self.stage) - 1, self.stage));
        }
    }
}

/// Staged sifting along a line using per-cell digests.
#[derive(Clone, Debug)]
pub struct SiftLineSearch<'a, D: ?Sized> {
    check: Checker<'a>,
    line: CellLine,
    cells: &'a D,
    order: SiftOrder,
    pending: Option<(u32, u32)>,
    done: Option<Progress>,
    record_stage: bool,
    checked: u64,
}

impl<'a, D: CellDigests + ?Sized> SiftLineSearch<'a, D> {
    pub fn new(grid: &'a Grid, key: &'a KeyMaterial, line: CellLine, cells: &'a D) -> Self {
        let mut order = SiftOrder::new(line.len);
        let pending = order.next();
        Self {
            check: Checker { key, grid },
            line,
            cells,
            order,
            pending,
            done: None,
            record_stage: true,
            checked: 0,
        }
    }

    pub(crate) fn without_stage(mut self) -> Self {
        self.record_stage = false;
        self
    }

    /// Cells verified so far.
    pub fn checked(&self) -> u64 {
        self.checked
    }
}

impl<D: CellDigests + ?Sized> Search for SiftLineSearch<'_, D> {
    fn next_cost(&self) -> Option<u64> {
        match self.done {
            Some(_) => None,
            None => Some(1),
        }
    }

    fn advance(&mut self, meter: &mut CostMeter) -> Result<Progress> {
        if let Some(p) = self.done {
            return Ok(p);
        }
        let Some((idx, stage)) = self.pending else {
            self.done = Some(Progress::Clean);
            return Ok(Progress::Clean);
        };
        if self.record_stage {
            meter.reach_stage(stage);
        }
        let cell = self.line.cell(idx);
        self.checked += 1;
        let p = if self.check.fails(self.cells.cell_digest(cell), meter)? {
            Progress::Found(cell)
        } else {
            self.pending = self.order.next();
            if self.pending.is_some() {
                return Ok(Progress::NeedMoreWork);
            }
            Progress::Clean
        };
        self.done = Some(p);
        Ok(p)
    }
}

/// Sifts a line for a corrupted cell; `None` when every cell verifies.
pub fn detect_sift_1d<D: CellDigests + ?Sized>(
    actual: &Grid,
    key: &KeyMaterial,
    line: CellLine,
    cells: &D,
    meter: &mut CostMeter,
) -> Result<Option<CellCoord>> {
    line.check_fits(actual.side())?;
    if !line.len.is_power_of_two() {
        return Err(Error::Malformed(format!("line length {} is not a power of two", line.len)));
    }
    let mut search = SiftLineSearch::new(actual, key, line, cells);
    Ok(match run_search(&mut search, meter)? {
        Progress::Found(c) => Some(c),
        _ => None,
    })
}
