use std::ops::AddAssign;

use serde::{Deserialize, Serialize};

/// Work counters for one detection run. Counters only ever grow.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostMeter {
    sig_verifications: u64,
    cells_touched: u64,
    hash_computations: u64,
    /// Deepest descent level or sifting stage reached.
    stage: u32,
}

impl CostMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sig_verifications(&self) -> u64 {
        self.sig_verifications
    }

    pub fn cells_touched(&self) -> u64 {
        self.cells_touched
    }

    pub fn hash_computations(&self) -> u64 {
        self.hash_computations
    }

    pub fn stage(&self) -> u32 {
        self.stage
    }

    /// One tag check over a region of `cells` cells.
    pub fn record_verification(&mut self, cells: u64) {
        self.sig_verifications += 1;
        self.hash_computations += 1;
        self.cells_touched += cells;
    }

    /// Direct cell reads that involve no tag (byte comparison).
    pub fn record_cell_reads(&mut self, cells: u64) {
        self.cells_touched += cells;
    }

    pub fn reach_stage(&mut self, stage: u32) {
        self.stage = self.stage.max(stage);
    }
}

impl AddAssign for CostMeter {
    fn add_assign(&mut self, rhs: Self) {
        self.sig_verifications += rhs.sig_verifications;
        self.cells_touched += rhs.cells_touched;
        self.hash_computations += rhs.hash_computations;
        self.stage = self.stage.max(rhs.stage);
    }
}
