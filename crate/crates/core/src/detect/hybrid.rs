use serde::{Deserialize, Serialize};

use crate::auth::{CostMeter, KeyMaterial};
use crate::detect::improved::{BoundarySwitch, ImprovedSearch};
use crate::detect::sift::SiftSearch;
use crate::detect::stepper::{Progress, Stepper};
use crate::error::Result;
use crate::grid::{CellCoord, Grid};
use crate::store::{BoundaryStore, SiftStore};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HybridSide {
    Improved,
    Sift,
}

/// How the alternation went.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HybridReport {
    pub winner: Option<HybridSide>,
    pub improved_units: u64,
    pub sift_units: u64,
    pub improved_meter: CostMeter,
    pub sift_meter: CostMeter,
    /// Set when the improved side gave up (convexity violated); the sift
    /// side then ran alone.
    pub improved_error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct HybridRun {
    pub found: Option<CellCoord>,
    pub switch: Option<BoundarySwitch>,
    pub report: HybridReport,
}

/// Alternates the improved and sift searches one cells-touched unit at a
/// time, improved first, and stops at the first hit. `meter` receives the
/// sum of both sides' work.
pub fn locate_hybrid(
    actual: &Grid,
    key: &KeyMaterial,
    boundary: &BoundaryStore,
    sift: &SiftStore,
    meter: &mut CostMeter,
) -> Result<HybridRun> {
    let mut a = Stepper::new(ImprovedSearch::new(actual, key, boundary)?);
    let mut b = Stepper::new(SiftSearch::new(actual, key, sift)?);
    let mut a_error = None;
    let mut winner = None;
    let mut found = None;
    loop {
        let a_live = a_error.is_none() && !a.progress().is_terminal();
        if a_live {
            match a.step() {
                Ok(Progress::Found(c)) => {
                    winner = Some(HybridSide::Improved);
                    found = Some(c);
                    break;
                }
                Ok(_) => {}
                Err(e) => a_error = Some(e.to_string()),
            }
        }
        let b_live = !b.progress().is_terminal();
        if b_live {
            if let Progress::Found(c) = b.step()? {
                winner = Some(HybridSide::Sift);
                found = Some(c);
                break;
            }
        }
        if !a_live && !b_live {
            break;
        }
    }
    let mut total = *a.meter();
    total += *b.meter();
    *meter += total;
    Ok(HybridRun {
        found,
        switch: a.search().switch().cloned(),
        report: HybridReport {
            winner,
            improved_units: a.units(),
            sift_units: b.units(),
            improved_meter: *a.meter(),
            sift_meter: *b.meter(),
            improved_error: a_error,
        },
    })
}
