use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::auth::CostMeter;
use crate::error::{Error, Result};
use crate::grid::{CellCoord, Grid};

/// Outcome of sampling: the first mismatching cell and how many samples it
/// took.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Sampling {
    pub found: Option<CellCoord>,
    pub trials: u64,
}

/// Compares cells of `actual` and `original` in a seeded uniformly random
/// order without replacement until one differs.
pub fn sample_until_mismatch(
    actual: &Grid,
    original: &Grid,
    seed: u64,
    meter: &mut CostMeter,
) -> Result<Sampling> {
    if !actual.same_shape(original) {
        return Err(Error::DimensionMismatch(format!(
            "{0}x{0} vs {1}x{1}",
            actual.side(),
            original.side()
        )));
    }
    let m = actual.side();
    let n = actual.len() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (0..n as u32).collect();
    for i in 0..n {
        // lazy Fisher-Yates: fix position i only when it is needed
        let j = rng.gen_range(i..n);
        order.swap(i, j);
        let c = CellCoord::new(order[i] / m, order[i] % m);
        meter.record_cell_reads(1);
        if actual.cell(c) != original.cell(c) {
            return Ok(Sampling {
                found: Some(c),
                trials: i as u64 + 1,
            });
        }
    }
    Ok(Sampling {
        found: None,
        trials: n as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::inject_corruption;
    use crate::region::{generate_region_in, Region, RegionShapeSpec};

    #[test]
    fn clean_exhausts() {
        let g = Grid::new(8, 1, 0).unwrap();
        let mut meter = CostMeter::new();
        let s = sample_until_mismatch(&g, &g, 3, &mut meter).unwrap();
        assert_eq!(s, Sampling { found: None, trials: 64 });
        assert_eq!(meter.cells_touched(), 64);
    }

    #[test]
    fn fully_corrupted_first_trial() {
        let g = Grid::new(8, 1, 0).unwrap();
        let all: Region = g.coords().collect();
        let bad = inject_corruption(&g, &all, 1).unwrap();
        for seed in 0..20 {
            assert_eq!(sample_until_mismatch(&bad, &g, seed, &mut CostMeter::new()).unwrap().trials, 1);
        }
    }

    #[test]
    fn samples_without_replacement() {
        // with one corrupted cell the trial count is uniform on 1..=N, so
        // every value must be reachable and none may exceed N
        let g = Grid::new(4, 1, 0).unwrap();
        let bad = inject_corruption(&g, &Region::from_cells([CellCoord::new(2, 1)]), 0).unwrap();
        let mut seen = [false; 16];
        for seed in 0..2000 {
            let s = sample_until_mismatch(&bad, &g, seed, &mut CostMeter::new()).unwrap();
            assert_eq!(s.found, Some(CellCoord::new(2, 1)));
            seen[s.trials as usize - 1] = true;
        }
        assert!(seen.iter().all(|&x| x));
    }

    #[test]
    fn mean_close_to_n_over_c() {
        let g = Grid::new(32, 1, 0).unwrap();
        let rect = generate_region_in(32, &RegionShapeSpec::rectangle(CellCoord::new(3, 3), 4, 4)).unwrap();
        let bad = inject_corruption(&g, &rect, 0).unwrap();
        let runs = 2000;
        let total: u64 = (0..runs)
            .map(|s| sample_until_mismatch(&bad, &g, s, &mut CostMeter::new()).unwrap().trials)
            .sum();
        let mean = total as f64 / runs as f64;
        // exact expectation without replacement is (N + 1) / (C + 1)
        assert!((mean - 1025.0 / 17.0).abs() < 0.1 * 64.0, "{mean}");
    }
}
