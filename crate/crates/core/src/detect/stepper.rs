use serde::{Deserialize, Serialize};

use crate::auth::{verify_region, CostMeter, KeyMaterial, SignedDigest};
use crate::error::Result;
use crate::grid::{CellCoord, Grid};

/// State of a search after one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Progress {
    NeedMoreWork,
    Found(CellCoord),
    Clean,
}

impl Progress {
    pub fn is_terminal(self) -> bool {
        !matches!(self, Progress::NeedMoreWork)
    }
}

/// A detector written as a state machine. Every [`Search::advance`]
/// performs exactly one digest verification, so a search can be
/// interleaved with another at single-operation granularity.
pub trait Search {
    /// Cells the next verification will touch; `None` once terminal.
    fn next_cost(&self) -> Option<u64>;

    /// Runs the next verification. Terminal states are sticky and cost
    /// nothing.
    fn advance(&mut self, meter: &mut CostMeter) -> Result<Progress>;
}

/// Drives a search straight to its terminal state.
pub fn run_search<S: Search + ?Sized>(search: &mut S, meter: &mut CostMeter) -> Result<Progress> {
    loop {
        let p = search.advance(meter)?;
        if p.is_terminal() {
            return Ok(p);
        }
    }
}

/// Runs a search one cells-touched unit at a time. A verification over `k`
/// cells fires on the `k`-th unit paid towards it.
#[derive(Debug)]
pub struct Stepper<S> {
    search: S,
    meter: CostMeter,
    credit: u64,
    units: u64,
    last: Progress,
}

impl<S: Search> Stepper<S> {
    pub fn new(search: S) -> Self {
        Self {
            search,
            meter: CostMeter::new(),
            credit: 0,
            units: 0,
            last: Progress::NeedMoreWork,
        }
    }

    pub fn step(&mut self) -> Result<Progress> {
        if self.last.is_terminal() {
            return Ok(self.last);
        }
        self.units += 1;
        self.credit += 1;
        let cost = self.search.next_cost().unwrap_or(0);
        if self.credit >= cost {
            self.credit = 0;
            self.last = self.search.advance(&mut self.meter)?;
        }
        Ok(self.last)
    }

    /// Steps until terminal.
    pub fn finish(&mut self) -> Result<Progress> {
        while !self.step()?.is_terminal() {}
        Ok(self.last)
    }

    pub fn progress(&self) -> Progress {
        self.last
    }

    /// Units paid so far, including credit not yet spent.
    pub fn units(&self) -> u64 {
        self.units
    }

    pub fn meter(&self) -> &CostMeter {
        &self.meter
    }

    pub fn search(&self) -> &S {
        &self.search
    }

    pub fn into_parts(self) -> (S, CostMeter) {
        (self.search, self.meter)
    }
}

/// Key and grid every verification runs against.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Checker<'a> {
    pub key: &'a KeyMaterial,
    pub grid: &'a Grid,
}

impl Checker<'_> {
    /// True iff the digest's region is corrupted.
    pub fn fails(&self, digest: &SignedDigest, meter: &mut CostMeter) -> Result<bool> {
        Ok(!verify_region(self.key, self.grid, digest, meter)?)
    }
}
