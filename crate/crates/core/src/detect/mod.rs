//! Detection schemes. Each digest-based scheme is a [`Search`] state
//! machine so it can be run monolithically or stepped against another.

mod adaptive;
mod hybrid;
mod improved;
mod line;
mod probabilistic;
mod quad;
mod sieve;
mod sift;
mod spread;
mod stepper;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use adaptive::{locate_adaptive, AdaptiveSearch};
pub use hybrid::{locate_hybrid, HybridReport, HybridRun, HybridSide};
pub use improved::{locate_improved, BoundaryShape, BoundarySwitch, ImprovedSearch};
pub use line::{
    detect_1d_binary, detect_1d_binary_with, detect_sift_1d, BinaryLineSearch, CellDigests, MiddlePolicy,
    SiftLineSearch, SiftOrder,
};
pub use probabilistic::{sample_until_mismatch, Sampling};
pub use quad::{locate_quad, QuadSearch};
pub use sieve::{locate_sieve, ApproxRegion};
pub use sift::{locate_sift, SiftRun, SiftSearch};
pub use spread::{spread_region, CellTest, CompareOriginal, Spread, VerifyCell};
pub use stepper::{run_search, Progress, Search, Stepper};

use crate::auth::{CostMeter, KeyMaterial};
use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};
use crate::region::Region;
use crate::store::{AdaptiveTree, BoundaryStore, LayerSieveStore, QuadStore, SiftStore};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[serde(rename = "prob")]
    Probabilistic,
    Quad,
    Improved,
    Sift,
    Hybrid,
    Sieve,
    Adaptive,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::Probabilistic,
        Scheme::Quad,
        Scheme::Improved,
        Scheme::Sift,
        Scheme::Hybrid,
        Scheme::Sieve,
        Scheme::Adaptive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Probabilistic => "prob",
            Scheme::Quad => "quad",
            Scheme::Improved => "improved",
            Scheme::Sift => "sift",
            Scheme::Hybrid => "hybrid",
            Scheme::Sieve => "sieve",
            Scheme::Adaptive => "adaptive",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_owned()))
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Clean,
    Corrupted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpreadStats {
    pub cell_tests: u64,
    pub neighbor_probes: u64,
}

/// Result of one detection run.
///
/// A corrupted verdict always comes with `found_cell`, except for the sieve,
/// which only narrows the damage down to `approx`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionOutcome {
    pub scheme: Scheme,
    pub verdict: Verdict,
    pub found_cell: Option<CellCoord>,
    pub region: Option<Region>,
    pub approx: Option<ApproxRegion>,
    pub trials: Option<u64>,
    pub meter: CostMeter,
    pub spread: Option<SpreadStats>,
    pub switch: Option<BoundarySwitch>,
    pub hybrid: Option<HybridReport>,
}

impl DetectionOutcome {
    fn located(scheme: Scheme, found: Option<CellCoord>, meter: &CostMeter) -> Self {
        Self {
            scheme,
            verdict: if found.is_some() { Verdict::Corrupted } else { Verdict::Clean },
            found_cell: found,
            region: None,
            approx: None,
            trials: None,
            meter: *meter,
            spread: None,
            switch: None,
            hybrid: None,
        }
    }

    pub fn is_clean(&self) -> bool {
        self.verdict == Verdict::Clean
    }
}

pub fn detect_probabilistic(
    actual: &Grid,
    original: &Grid,
    seed: u64,
    meter: &mut CostMeter,
) -> Result<DetectionOutcome> {
    let s = sample_until_mismatch(actual, original, seed, meter)?;
    let mut out = DetectionOutcome::located(Scheme::Probabilistic, s.found, meter);
    out.trials = Some(s.trials);
    Ok(out)
}

pub fn detect_quad(
    actual: &Grid,
    key: &KeyMaterial,
    store: &QuadStore,
    meter: &mut CostMeter,
) -> Result<DetectionOutcome> {
    let found = locate_quad(actual, key, store, meter)?;
    Ok(DetectionOutcome::located(Scheme::Quad, found, meter))
}

pub fn detect_improved(
    actual: &Grid,
    key: &KeyMaterial,
    store: &BoundaryStore,
    meter: &mut CostMeter,
) -> Result<DetectionOutcome> {
    let (found, switch) = locate_improved(actual, key, store, meter)?;
    let mut out = DetectionOutcome::located(Scheme::Improved, found, meter);
    out.switch = switch;
    Ok(out)
}

pub fn detect_sift_2d(
    actual: &Grid,
    key: &KeyMaterial,
    store: &SiftStore,
    meter: &mut CostMeter,
) -> Result<DetectionOutcome> {
    let run = locate_sift(actual, key, store, meter)?;
    Ok(DetectionOutcome::located(Scheme::Sift, run.found, meter))
}

pub fn detect_hybrid(
    actual: &Grid,
    key: &KeyMaterial,
    boundary: &BoundaryStore,
    sift: &SiftStore,
    meter: &mut CostMeter,
) -> Result<DetectionOutcome> {
    let run = locate_hybrid(actual, key, boundary, sift, meter)?;
    let mut out = DetectionOutcome::located(Scheme::Hybrid, run.found, meter);
    out.switch = run.switch;
    out.hybrid = Some(run.report);
    Ok(out)
}

pub fn detect_sieve(
    actual: &Grid,
    key: &KeyMaterial,
    store: &LayerSieveStore,
    meter: &mut CostMeter,
) -> Result<DetectionOutcome> {
    let approx = locate_sieve(actual, key, store, meter)?;
    let mut out = DetectionOutcome::located(Scheme::Sieve, None, meter);
    if !approx.is_empty() {
        out.verdict = Verdict::Corrupted;
        out.approx = Some(approx);
    }
    Ok(out)
}

pub fn detect_adaptive(
    actual: &Grid,
    key: &KeyMaterial,
    tree: &AdaptiveTree,
    meter: &mut CostMeter,
) -> Result<DetectionOutcome> {
    let found = locate_adaptive(actual, key, tree, meter)?;
    Ok(DetectionOutcome::located(Scheme::Adaptive, found, meter))
}

/// Whatever a detection may draw on. Schemes take what they need and fail
/// with [`Error::MissingInput`] if it is absent.
#[derive(Clone, Copy, Debug, Default)]
pub struct Inputs<'a> {
    pub key: Option<&'a KeyMaterial>,
    pub original: Option<&'a Grid>,
    pub quad: Option<&'a QuadStore>,
    pub boundary: Option<&'a BoundaryStore>,
    pub sift: Option<&'a SiftStore>,
    pub sieve: Option<&'a LayerSieveStore>,
    pub adaptive: Option<&'a AdaptiveTree>,
}

fn need<'a, T: ?Sized>(x: Option<&'a T>, what: &'static str) -> Result<&'a T> {
    x.ok_or(Error::MissingInput(what))
}

impl Inputs<'_> {
    /// Runs `scheme` without spreading. `seed` only matters for sampling.
    pub fn detect(&self, actual: &Grid, scheme: Scheme, seed: u64, meter: &mut CostMeter) -> Result<DetectionOutcome> {
        if scheme == Scheme::Probabilistic {
            return detect_probabilistic(actual, need(self.original, "original grid")?, seed, meter);
        }
        let key = need(self.key, "key material")?;
        match scheme {
            Scheme::Probabilistic => unreachable!(),
            Scheme::Quad => detect_quad(actual, key, need(self.quad, "quad store")?, meter),
            Scheme::Improved => detect_improved(actual, key, need(self.boundary, "boundary store")?, meter),
            Scheme::Sift => detect_sift_2d(actual, key, need(self.sift, "sift store")?, meter),
            Scheme::Hybrid => detect_hybrid(
                actual,
                key,
                need(self.boundary, "boundary store")?,
                need(self.sift, "sift store")?,
                meter,
            ),
            Scheme::Sieve => detect_sieve(actual, key, need(self.sieve, "sieve store")?, meter),
            Scheme::Adaptive => detect_adaptive(actual, key, need(self.adaptive, "adaptive tree")?, meter),
        }
    }

    /// The cheapest per-cell test available: byte comparison if the
    /// original is present, otherwise a per-cell digest.
    pub fn cell_test(&self) -> Result<Box<dyn CellTest + '_>> {
        if let Some(g) = self.original {
            return Ok(Box::new(CompareOriginal(g)));
        }
        let key = need(self.key, "key material")?;
        let digests: &dyn CellDigests = if let Some(s) = self.sift {
            s
        } else if let Some(s) = self.quad {
            s
        } else if let Some(s) = self.boundary {
            s
        } else if let Some(s) = self.adaptive {
            s
        } else {
            return Err(Error::MissingInput("per-cell test (original grid or a store with cell digests)"));
        };
        Ok(Box::new(VerifyCell { key, digests }))
    }
}

/// Locates a corrupted cell with `scheme`, then spreads from it to the full
/// component. The sieve returns its approximate region instead.
pub fn locate_and_spread(
    actual: &Grid,
    inputs: &Inputs<'_>,
    scheme: Scheme,
    seed: u64,
    meter: &mut CostMeter,
) -> Result<DetectionOutcome> {
    let mut out = inputs.detect(actual, scheme, seed, meter)?;
    if let Some(c) = out.found_cell {
        let mut test = inputs.cell_test()?;
        let s = spread_region(actual, test.as_mut(), c, meter)?;
        out.region = Some(s.region);
        out.spread = Some(SpreadStats {
            cell_tests: s.cell_tests,
            neighbor_probes: s.neighbor_probes,
        });
        out.meter = *meter;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inject_corruption;
    use crate::oracle::brute_force_diff;
    use crate::region::{generate_region_in, RegionShapeSpec};

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(Scheme::parse(s.name()).unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!(Scheme::parse("bogus").is_err());
    }

    #[test]
    fn every_scheme_recovers_a_rectangle() {
        let g = Grid::new(8, 1, 2).unwrap();
        let key = KeyMaterial::mac(b"all".to_vec()).unwrap();
        let quad = QuadStore::build(&g, &key).unwrap();
        let boundary = BoundaryStore::build(&g, &key).unwrap();
        let sift = SiftStore::build(&g, &key).unwrap();
        let sieve = LayerSieveStore::build(&g, &key).unwrap();
        let adaptive = AdaptiveTree::build(&g, &key).unwrap();
        let rect = generate_region_in(8, &RegionShapeSpec::rectangle(CellCoord::new(2, 3), 2, 3)).unwrap();
        let bad = inject_corruption(&g, &rect, 1).unwrap();
        let truth = brute_force_diff(&bad, &g).unwrap();
        let full = Inputs {
            key: Some(&key),
            original: Some(&g),
            quad: Some(&quad),
            boundary: Some(&boundary),
            sift: Some(&sift),
            sieve: Some(&sieve),
            adaptive: Some(&adaptive),
        };
        for scheme in Scheme::ALL {
            let clean = full.detect(&g, scheme, 0, &mut CostMeter::new()).unwrap();
            assert!(clean.is_clean(), "{scheme}");
            let out = locate_and_spread(&bad, &full, scheme, 0, &mut CostMeter::new()).unwrap();
            assert_eq!(out.verdict, Verdict::Corrupted);
            if scheme == Scheme::Sieve {
                assert_eq!(out.approx.unwrap().candidates(), truth.cells);
            } else {
                assert!(truth.cells.contains(&out.found_cell.unwrap()));
                assert_eq!(out.region.as_ref(), Some(&truth.cells));
            }
            // spreading with nothing but the scheme's own store
            let bare = Inputs {
                key: Some(&key),
                ..Default::default()
            };
            let own = match scheme {
                Scheme::Probabilistic | Scheme::Sieve => continue,
                Scheme::Quad => Inputs { quad: Some(&quad), ..bare },
                Scheme::Improved => Inputs { boundary: Some(&boundary), ..bare },
                Scheme::Sift => Inputs { sift: Some(&sift), ..bare },
                Scheme::Hybrid => Inputs { boundary: Some(&boundary), sift: Some(&sift), ..bare },
                Scheme::Adaptive => Inputs { adaptive: Some(&adaptive), ..bare },
            };
            let out = locate_and_spread(&bad, &own, scheme, 0, &mut CostMeter::new()).unwrap();
            assert_eq!(out.region.as_ref(), Some(&truth.cells), "{scheme}");
        }
    }

    #[test]
    fn missing_inputs() {
        let g = Grid::new(4, 1, 2).unwrap();
        let r = Inputs::default().detect(&g, Scheme::Quad, 0, &mut CostMeter::new());
        assert!(matches!(r, Err(Error::MissingInput(_))));
    }
}
