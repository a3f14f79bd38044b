//! Seeded parameter sweeps producing one cost record per run.

use std::collections::BTreeSet;
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::auth::{CostMeter, KeyMaterial};
use crate::detect::{Inputs, Scheme};
use crate::error::{Error, Result};
use crate::grid::{inject_corruption, CellCoord, Grid};
use crate::par::{self, Exec};
use crate::region::{generate_region_in, Region, RegionShapeSpec, ShapeKind};
use crate::store::{AdaptiveTree, BoundaryStore, LayerSieveStore, QuadStore, SiftStore};

pub const CSV_HEADER: &str =
    "scheme,m,N,shape,C,seed,sig_verifications,cells_touched,hash_computations,trials,wall_ms";

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub m_list: Vec<u32>,
    /// Target corrupted cell counts. Targets above `N` are skipped.
    pub c_list: Vec<u64>,
    pub shapes: Vec<ShapeKind>,
    /// Seeds `0..runs` per instance.
    pub runs: u64,
    pub schemes: Vec<Scheme>,
    pub key: KeyMaterial,
    pub exec: Exec,
    /// Fill `wall_ms`. Off by default so output is reproducible.
    pub timing: bool,
}

/// One detection run. Counts are copied from its meter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub scheme: Scheme,
    pub m: u32,
    pub n: u64,
    pub shape: ShapeKind,
    /// Requested size.
    pub target_c: u64,
    /// Actual corrupted cell count.
    pub c: u64,
    pub seed: u64,
    pub sig_verifications: u64,
    pub cells_touched: u64,
    pub hash_computations: u64,
    pub trials: Option<u64>,
    pub wall_ms: Option<f64>,
    /// Whether the reported cell (or approximate region) is consistent with
    /// the injected region.
    pub correct: bool,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<String>| v.unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.scheme,
            self.m,
            self.n,
            self.shape.name(),
            self.c,
            self.seed,
            self.sig_verifications,
            self.cells_touched,
            self.hash_computations,
            opt(self.trials.map(|t| t.to_string())),
            opt(self.wall_ms.map(|t| format!("{t:.3}"))),
        )
    }
}

/// A run that errored instead of producing a record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchFailure {
    pub scheme: Scheme,
    pub m: u32,
    pub shape: ShapeKind,
    pub target_c: u64,
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, Default)]
pub struct BenchOutput {
    pub records: Vec<BenchRecord>,
    pub failures: Vec<BenchFailure>,
}

impl BenchOutput {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            writeln!(w, "{}", r.csv_row())?;
        }
        Ok(())
    }
}

/// Rectangle dimensions with exactly `c` cells when a factorisation fits,
/// as square as possible.
pub fn rect_dims(c: u64, m: u32) -> (u32, u32) {
    let m64 = u64::from(m);
    let mut rows = (c as f64).sqrt().floor() as u64;
    while rows > 1 && (!c.is_multiple_of(rows) || c / rows > m64) {
        rows -= 1;
    }
    if rows >= 1 && c.is_multiple_of(rows) && c / rows <= m64 && rows <= m64 {
        return (rows as u32, (c / rows) as u32);
    }
    let rows = c.div_ceil(m64).min(m64);
    (rows as u32, c.div_ceil(rows).min(m64) as u32)
}

/// Disc diameter whose area is closest to `c`.
pub fn disc_diameter(c: u64, m: u32) -> u32 {
    let d = (2.0 * (c as f64 / std::f64::consts::PI).sqrt()).round() as u32;
    d.clamp(1, m)
}

/// Region of roughly `c` cells of the given kind, placed at a seeded
/// position.
pub fn instance_region(m: u32, shape: ShapeKind, c: u64, seed: u64) -> Result<Region> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(m) << 40) ^ (c << 8) ^ shape as u64);
    let corner = |rng: &mut ChaCha8Rng, rows: u32, cols: u32| {
        CellCoord::new(rng.gen_range(0..=m - rows), rng.gen_range(0..=m - cols))
    };
    let spec = match shape {
        ShapeKind::Rectangle => {
            let (rows, cols) = rect_dims(c, m);
            RegionShapeSpec::rectangle(corner(&mut rng, rows, cols), rows, cols)
        }
        ShapeKind::Disc => {
            let d = disc_diameter(c, m);
            RegionShapeSpec::disc(corner(&mut rng, d, d), d)
        }
        ShapeKind::RandomConnected => {
            RegionShapeSpec::random_connected(corner(&mut rng, 1, 1), c, rng.gen())
        }
        ShapeKind::HvConvexRandom => RegionShapeSpec::hv_convex(corner(&mut rng, 1, 1), c, rng.gen()),
    };
    generate_region_in(m, &spec)
}

/// Stores for one grid, built only for the schemes that need them.
struct Fixture {
    grid: Grid,
    quad: Option<QuadStore>,
    boundary: Option<BoundaryStore>,
    sift: Option<SiftStore>,
    sieve: Option<LayerSieveStore>,
    adaptive: Option<AdaptiveTree>,
}

impl Fixture {
    fn build(m: u32, schemes: &BTreeSet<Scheme>, key: &KeyMaterial, exec: Exec) -> Result<Self> {
        let grid = Grid::new(m, 1, 0x6772_6964 ^ u64::from(m))?;
        let wants = |s: &[Scheme]| s.iter().any(|x| schemes.contains(x));
        Ok(Self {
            quad: wants(&[Scheme::Quad]).then(|| QuadStore::build_with(&grid, key, exec)).transpose()?,
            boundary: wants(&[Scheme::Improved, Scheme::Hybrid])
                .then(|| BoundaryStore::build_with(&grid, key, exec))
                .transpose()?,
            sift: wants(&[Scheme::Sift, Scheme::Hybrid])
                .then(|| SiftStore::build_with(&grid, key, exec))
                .transpose()?,
            sieve: wants(&[Scheme::Sieve])
                .then(|| LayerSieveStore::build_with(&grid, key, exec))
                .transpose()?,
            adaptive: wants(&[Scheme::Adaptive])
                .then(|| AdaptiveTree::build_with(&grid, key, exec))
                .transpose()?,
            grid,
        })
    }

    fn inputs<'a>(&'a self, key: &'a KeyMaterial) -> Inputs<'a> {
        Inputs {
            key: Some(key),
            original: Some(&self.grid),
            quad: self.quad.as_ref(),
            boundary: self.boundary.as_ref(),
            sift: self.sift.as_ref(),
            sieve: self.sieve.as_ref(),
            adaptive: self.adaptive.as_ref(),
        }
    }
}

#[derive(Clone, Copy)]
struct Task {
    shape: ShapeKind,
    c: u64,
    seed: u64,
}

type TaskResult = Vec<std::result::Result<BenchRecord, BenchFailure>>;

fn run_task(fx: &Fixture, cfg: &BenchConfig, schemes: &[Scheme], t: Task) -> TaskResult {
    let m = fx.grid.side();
    let fail = |scheme, error: String| BenchFailure {
        scheme,
        m,
        shape: t.shape,
        target_c: t.c,
        seed: t.seed,
        error,
    };
    let bad = instance_region(m, t.shape, t.c, t.seed)
        .and_then(|r| inject_corruption(&fx.grid, &r, t.seed).map(|g| (r, g)));
    let (region, bad) = match bad {
        Ok(x) => x,
        Err(e) => return schemes.iter().map(|&s| Err(fail(s, e.to_string()))).collect(),
    };
    let inputs = fx.inputs(&cfg.key);
    schemes
        .iter()
        .map(|&scheme| {
            let mut meter = CostMeter::new();
            let start = Instant::now();
            let out = inputs
                .detect(&bad, scheme, t.seed, &mut meter)
                .map_err(|e| fail(scheme, e.to_string()))?;
            let wall = start.elapsed().as_secs_f64() * 1e3;
            let correct = match (&out.found_cell, &out.approx) {
                (Some(c), _) => region.contains(c),
                (None, Some(a)) => region.iter().all(|&c| a.contains(c)),
                (None, None) => false,
            };
            Ok(BenchRecord {
                scheme,
                m,
                n: fx.grid.len(),
                shape: t.shape,
                target_c: t.c,
                c: region.len() as u64,
                seed: t.seed,
                sig_verifications: meter.sig_verifications(),
                cells_touched: meter.cells_touched(),
                hash_computations: meter.hash_computations(),
                trials: out.trials,
                wall_ms: cfg.timing.then_some(wall),
                correct,
            })
        })
        .collect()
}

/// Runs every (m, C, shape, seed, scheme) combination. Targets larger than
/// the grid are skipped. Records come back sorted by
/// (scheme, m, shape, target C, seed) whatever order they finished in.
pub fn run_sweep(cfg: &BenchConfig) -> Result<BenchOutput> {
    if cfg.m_list.is_empty() {
        return Err(Error::EmptySweep("no grid sizes"));
    }
    if cfg.c_list.is_empty() {
        return Err(Error::EmptySweep("no region sizes"));
    }
    if cfg.shapes.is_empty() {
        return Err(Error::EmptySweep("no shapes"));
    }
    if cfg.schemes.is_empty() {
        return Err(Error::EmptySweep("no schemes"));
    }
    if cfg.runs == 0 {
        return Err(Error::EmptySweep("zero runs"));
    }
    let scheme_set: BTreeSet<Scheme> = cfg.schemes.iter().copied().collect();
    let schemes: Vec<Scheme> = scheme_set.iter().copied().collect();
    let mut out = BenchOutput::default();
    let mut any = false;
    for &m in &cfg.m_list {
        let fx = Fixture::build(m, &scheme_set, &cfg.key, cfg.exec)?;
        let n = fx.grid.len();
        let tasks: Vec<Task> = cfg
            .c_list
            .iter()
            .filter(|&&c| c >= 1 && c <= n)
            .flat_map(|&c| {
                cfg.shapes
                    .iter()
                    .flat_map(move |&shape| (0..cfg.runs).map(move |seed| Task { shape, c, seed }))
            })
            .collect();
        any |= !tasks.is_empty();
        for res in par::map(cfg.exec, &tasks, |&t| run_task(&fx, cfg, &schemes, t))
            .into_iter()
            .flatten()
        {
            match res {
                Ok(r) => out.records.push(r),
                Err(f) => out.failures.push(f),
            }
        }
    }
    if !any {
        return Err(Error::EmptySweep("every region size exceeds its grid"));
    }
    out.records.sort_by(|a, b| {
        (a.scheme, a.m, a.shape.name(), a.target_c, a.seed).cmp(&(b.scheme, b.m, b.shape.name(), b.target_c, b.seed))
    });
    out.failures.sort_by(|a, b| {
        (a.scheme, a.m, a.shape.name(), a.target_c, a.seed).cmp(&(b.scheme, b.m, b.shape.name(), b.target_c, b.seed))
    });
    Ok(out)
}
