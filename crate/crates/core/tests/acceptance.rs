//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use gridguard_core::auth::{CostMeter, KeyMaterial};
use gridguard_core::bench::{instance_region, run_sweep, BenchConfig};
use gridguard_core::detect::{
    detect_1d_binary, detect_probabilistic, detect_sieve, detect_sift_1d, locate_adaptive, locate_hybrid,
    locate_improved, locate_quad, locate_sift, spread_region, CompareOriginal, Inputs, Scheme, VerifyCell,
};
use gridguard_core::grid::{inject_corruption, CellCoord, Grid};
use gridguard_core::oracle::{brute_force_diff, brute_force_store_scan, DiffReport};
use gridguard_core::par::Exec;
use gridguard_core::region::{generate_region_in, RegionShapeSpec, ShapeKind};
use gridguard_core::store::{
    AdaptiveTree, AnyStore, BoundaryStore, CellLine, DyadicLineTree, HashStore, LayerSieveStore, QuadStore,
    SiftStore, StoreVariant,
};

/// Oracle checks gathered while running criteria 2 to 6.
#[derive(Default)]
struct Soundness {
    checks: u64,
    violations: Vec<String>,
}

impl Soundness {
    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.violations.len() < 20 {
            self.violations.push(what());
        }
    }

    fn found_in(&mut self, found: Option<CellCoord>, truth: &DiffReport, ctx: &str) {
        match found {
            Some(c) => self.expect(truth.cells.contains(&c), || format!("{ctx}: {c} not corrupted")),
            None => self.expect(truth.is_clean(), || format!("{ctx}: reported clean on corrupted grid")),
        }
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn key() -> KeyMaterial {
    KeyMaterial::mac(b"acceptance".to_vec()).unwrap()
}

fn flip(grid: &Grid, line: CellLine, start: u32, len: u32) -> Grid {
    let mut bad = grid.clone();
    for i in start..start + len {
        bad.cell_mut(line.cell(i))[0] ^= 0xa5;
    }
    bad
}

fn criterion_1() -> Outcome {
    let key = key();
    let mut bad = Vec::new();
    let mut check = |what: String, got: u64, want: u64| {
        if got != want {
            bad.push(format!("{what}: {got} != {want}"));
        }
    };
    fn boundary_size(n: u64) -> u64 {
        if n == 1 {
            1
        } else {
            2 + 4 * (n as f64).sqrt() as u64 + 4 * boundary_size(n / 4)
        }
    }
    for m in [2u32, 4, 8, 16, 32] {
        let n = u64::from(m * m);
        let g = Grid::new(m, 1, u64::from(m)).unwrap();
        let quad = QuadStore::build(&g, &key).unwrap();
        check(format!("quad N={n}"), quad.store_size(), (7 * n - 4) / 3 + 1);
        check(format!("quad N={n} w/o root"), quad.size_without_root(), (7 * n - 4) / 3);
        let b = BoundaryStore::build(&g, &key).unwrap();
        check(format!("boundary N={n}"), b.store_size(), boundary_size(n));
        check(format!("sift N={n}"), SiftStore::build(&g, &key).unwrap().store_size(), n + u64::from(m));
        check(format!("sieve N={n}"), LayerSieveStore::build(&g, &key).unwrap().store_size(), 2 * u64::from(m));
    }
    for (n, want) in [(4, 14), (16, 74), (64, 330)] {
        check(format!("boundary literal N={n}"), boundary_size(n), want);
    }
    let g = Grid::new(8, 1, 0).unwrap();
    let t = AdaptiveTree::build(&g, &key).unwrap();
    check("adaptive N=64 nodes".into(), t.store_size(), 105);
    check("adaptive N=64 height".into(), u64::from(t.height()), 3);
    if t.shape().degrees() != vec![8, 4, 2] {
        bad.push(format!("adaptive degrees {:?}", t.shape().degrees()));
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "quad 149 at N=64, boundary 14/74/330, sift N+m, sieve 2m, adaptive 105 nodes (8,4,2)".to_string()
        } else {
            bad.join("; ")
        },
    )
}

fn criterion_2(sound: &mut Soundness) -> Outcome {
    let g = Grid::new(64, 1, 2).unwrap();
    let runs = 2000u64;
    let mut instances = Vec::with_capacity(runs as usize);
    for seed in 0..runs {
        let r = instance_region(64, ShapeKind::Rectangle, 64, seed).unwrap();
        let bad = inject_corruption(&g, &r, seed).unwrap();
        let truth = brute_force_diff(&bad, &g).unwrap();
        instances.push((bad, truth));
    }
    let start = Instant::now();
    let mut total = 0u64;
    for (seed, (bad, truth)) in instances.iter().enumerate() {
        let out = detect_probabilistic(bad, &g, seed as u64, &mut CostMeter::new()).unwrap();
        total += out.trials.unwrap();
        sound.found_in(out.found_cell, truth, "prob");
    }
    let secs = start.elapsed().as_secs_f64();
    let clean = detect_probabilistic(&g, &g, 0, &mut CostMeter::new()).unwrap();
    sound.expect(clean.is_clean() && clean.trials == Some(4096), || "prob: clean grid".into());
    let mean = total as f64 / runs as f64;
    let pass = (mean - 64.0).abs() <= 6.4 && secs < 5.0;
    outcome(pass, format!("mean trials {mean:.2} vs N/C = 64 (tolerance 10%), {secs:.2}s for {runs} runs"))
}

fn criterion_3(sound: &mut Soundness) -> Outcome {
    let g = Grid::new(64, 1, 3).unwrap();
    let key = key();
    let store = QuadStore::build(&g, &key).unwrap();
    let mut worst = 0;
    let mut violations = 0;
    for c in g.coords() {
        let mut bad = g.clone();
        bad.cell_mut(c)[0] ^= 1;
        let mut meter = CostMeter::new();
        let found = locate_quad(&bad, &key, &store, &mut meter).unwrap();
        worst = worst.max(meter.sig_verifications());
        if found != Some(c) || meter.sig_verifications() > 13 {
            violations += 1;
        }
        sound.expect(found == Some(c), || format!("quad: single cell {c} reported {found:?}"));
    }
    let mut meter = CostMeter::new();
    let clean = locate_quad(&g, &key, &store, &mut meter).unwrap();
    sound.expect(clean.is_none() && meter.sig_verifications() == 1, || "quad: clean grid".into());
    // quadrant descent checks four children on each of the six levels
    let recurrence = 1 + 4 * 6;
    outcome(
        violations == 0,
        format!(
            "4096 single cells, all found exactly; max {worst} verifications vs bound 13 \
             ({violations} over it; recurrence bound 1+4*log4(N) = {recurrence})"
        ),
    )
}

fn criterion_4(sound: &mut Soundness) -> Outcome {
    let g = Grid::new(32, 1, 4).unwrap();
    let key = key();
    let line = CellLine::row_major(32);
    let tree = DyadicLineTree::build(&g, &key, line).unwrap();
    let mut runs = 0;
    let mut violations = Vec::new();
    for k in 0..10 {
        let c = 1u32 << k;
        let bound: u64 = 2 * (10 - k + 1);
        for off in 0..=1024 - c {
            let bad = flip(&g, line, off, c);
            let mut meter = CostMeter::new();
            let found = detect_1d_binary(&bad, &key, tree.view(), &mut meter).unwrap();
            let idx = found.row * 32 + found.col;
            sound.expect((off..off + c).contains(&idx), || format!("1-D binary: run {off}+{c} gave {idx}"));
            runs += 1;
            if meter.sig_verifications() > bound && violations.len() < 5 {
                violations.push(format!("C={c} offset {off}: {}", meter.sig_verifications()));
            }
        }
    }
    outcome(
        violations.is_empty(),
        format!(
            "{runs} runs over L=1024, verifications <= 2(log2(L/C)+1); {}",
            if violations.is_empty() { "no violations".into() } else { violations.join(", ") }
        ),
    )
}

fn criterion_5(sound: &mut Soundness) -> Outcome {
    let key = key();
    let g = Grid::new(32, 1, 5).unwrap();
    let store = SiftStore::build(&g, &key).unwrap();
    let line = CellLine::row_major(32);
    let mut worst_ratio: f64 = 0.0;
    let mut problems = Vec::new();
    let mut runs = 0;
    for k in 0..10 {
        let c = 1u32 << k;
        for off in 0..=1024 - c {
            let bad = flip(&g, line, off, c);
            let mut meter = CostMeter::new();
            let found = detect_sift_1d(&bad, &key, line, &store, &mut meter).unwrap();
            let idx = found.map(|f| f.row * 32 + f.col);
            sound.expect(idx.is_some_and(|i| (off..off + c).contains(&i)), || {
                format!("sift 1-D: run {off}+{c} gave {idx:?}")
            });
            let checked = meter.sig_verifications();
            let bound = 2 * 1024 / u64::from(c);
            worst_ratio = worst_ratio.max(checked as f64 / bound as f64);
            runs += 1;
            if checked > bound && problems.len() < 5 {
                problems.push(format!("1-D C={c} off {off}: {checked} > {bound}"));
            }
        }
    }
    // 2-D on 64x64
    let g = Grid::new(64, 1, 55).unwrap();
    let store = SiftStore::build(&g, &key).unwrap();
    let mut regions2d = 0;
    for shape in [ShapeKind::Rectangle, ShapeKind::Disc, ShapeKind::HvConvexRandom] {
        for c in [1u64, 4, 16, 64, 256, 1024] {
            for seed in 0..20 {
                let r = instance_region(64, shape, c, seed).unwrap();
                let bad = inject_corruption(&g, &r, seed).unwrap();
                let truth = brute_force_diff(&bad, &g).unwrap();
                let w = truth.cells.column_span();
                let mut meter = CostMeter::new();
                let run = locate_sift(&bad, &key, &store, &mut meter).unwrap();
                sound.found_in(run.found, &truth, "sift 2-D");
                regions2d += 1;
                let col_bound = 2 * 64 / w + 2;
                if run.column_checks > col_bound && problems.len() < 10 {
                    problems.push(format!("2-D {} C={c} seed {seed}: {} columns > {col_bound}", shape.name(), run.column_checks));
                }
                if let Some(f) = run.found {
                    let in_col = truth.cells.iter().filter(|x| x.col == f.col).count() as u64;
                    let cell_bound = 2 * 64 / in_col;
                    if run.cell_checks > cell_bound && problems.len() < 10 {
                        problems.push(format!("2-D {} C={c} seed {seed}: {} cells > {cell_bound}", shape.name(), run.cell_checks));
                    }
                }
            }
        }
    }
    let clean = locate_sift(&g, &key, &store, &mut CostMeter::new()).unwrap();
    sound.expect(clean.found.is_none() && clean.column_checks == 64, || "sift: clean grid".into());
    outcome(
        problems.is_empty(),
        format!(
            "{runs} 1-D runs (worst checked/bound {worst_ratio:.2}), {regions2d} 2-D regions; {}",
            if problems.is_empty() { "no violations".to_string() } else { problems.join(", ") }
        ),
    )
}

/// Returns the argmin bound outcome and the winner-flip outcome.
fn criterion_6(sound: &mut Soundness) -> (Outcome, Outcome) {
    let key = key();
    let g = Grid::new(64, 1, 6).unwrap();
    let boundary = BoundaryStore::build(&g, &key).unwrap();
    let sift = SiftStore::build(&g, &key).unwrap();
    let cs = [1u64, 4, 16, 64, 256, 1024];
    let mut bound_violations = Vec::new();
    let mut instances = 0;
    // per C: (improved wins, sift wins, mean improved, mean sift, improved wins by verifications)
    let mut tallies = Vec::new();
    for &c in &cs {
        let (mut a_wins, mut b_wins, mut a_sum, mut b_sum, mut a_sig_wins) = (0u32, 0u32, 0u64, 0u64, 0u32);
        for shape in [ShapeKind::Rectangle, ShapeKind::Disc] {
            for seed in 0..50 {
                let r = instance_region(64, shape, c, seed).unwrap();
                let bad = inject_corruption(&g, &r, seed).unwrap();
                let truth = brute_force_diff(&bad, &g).unwrap();
                let mut ma = CostMeter::new();
                let (fa, _) = locate_improved(&bad, &key, &boundary, &mut ma).unwrap();
                let mut mb = CostMeter::new();
                let fb = locate_sift(&bad, &key, &sift, &mut mb).unwrap().found;
                let mut mh = CostMeter::new();
                let h = locate_hybrid(&bad, &key, &boundary, &sift, &mut mh).unwrap();
                sound.found_in(fa, &truth, "improved");
                sound.found_in(fb, &truth, "sift 2-D");
                sound.found_in(h.found, &truth, "hybrid");
                let (ca, cb) = (ma.cells_touched(), mb.cells_touched());
                let bound = 2 * ca.min(cb) + 1;
                instances += 1;
                if mh.cells_touched() > bound && bound_violations.len() < 5 {
                    bound_violations.push(format!("C={c} {} seed {seed}: {} > {bound}", shape.name(), mh.cells_touched()));
                }
                a_sum += ca;
                b_sum += cb;
                if ca < cb {
                    a_wins += 1;
                } else {
                    b_wins += 1;
                }
                if ma.sig_verifications() < mb.sig_verifications() {
                    a_sig_wins += 1;
                }
            }
        }
        tallies.push((c, a_wins, b_wins, a_sum / 100, b_sum / 100, a_sig_wins));
    }
    let mut mh = CostMeter::new();
    let clean = locate_hybrid(&g, &key, &boundary, &sift, &mut mh).unwrap();
    sound.expect(clean.found.is_none(), || "hybrid: clean grid".into());

    let bound = outcome(
        bound_violations.is_empty(),
        format!(
            "hybrid cells_touched <= 2*min(improved, sift)+1 on {instances} instances; {}",
            if bound_violations.is_empty() { "no violations".into() } else { bound_violations.join(", ") }
        ),
    );
    let winner = |a: u32, b: u32| if a > b { "improved" } else { "sift" };
    let below_ok = tallies.iter().filter(|t| t.0 < 64).all(|t| t.1 > t.2);
    let above_ok = tallies.iter().filter(|t| t.0 > 64).all(|t| t.2 > t.1);
    let summary: Vec<String> = tallies
        .iter()
        .map(|&(c, a, b, ma, mb, sig)| {
            format!("C={c}: {} (cells {ma} vs {mb}; improved fewer verifications in {sig}/100)", winner(a, b))
        })
        .collect();
    let flip = outcome(below_ok && above_ok, format!("cells-touched winner by C: {}", summary.join("; ")));
    (bound, flip)
}

fn criterion_7(sound: &mut Soundness) -> Outcome {
    // clean totality and sieve checks on top of what criteria 2-6 gathered
    let key = key();
    for m in [8u32, 32] {
        let g = Grid::new(m, 1, 7).unwrap();
        let quad = QuadStore::build(&g, &key).unwrap();
        let boundary = BoundaryStore::build(&g, &key).unwrap();
        let sift = SiftStore::build(&g, &key).unwrap();
        let sieve = LayerSieveStore::build(&g, &key).unwrap();
        let adaptive = AdaptiveTree::build(&g, &key).unwrap();
        let inputs = Inputs {
            key: Some(&key),
            original: Some(&g),
            quad: Some(&quad),
            boundary: Some(&boundary),
            sift: Some(&sift),
            sieve: Some(&sieve),
            adaptive: Some(&adaptive),
        };
        for scheme in Scheme::ALL {
            let out = inputs.detect(&g, scheme, 1, &mut CostMeter::new()).unwrap();
            sound.expect(out.is_clean(), || format!("{scheme} m={m}: clean grid not reported clean"));
        }
        let scan = brute_force_store_scan(&g, &key, &sift, &mut CostMeter::new()).unwrap();
        sound.expect(scan.is_clean(), || "store scan on clean grid".into());
        for shape in [ShapeKind::Rectangle, ShapeKind::Disc, ShapeKind::HvConvexRandom, ShapeKind::RandomConnected] {
            for c in [1u64, 5, 16, 40] {
                for seed in 0..10 {
                    let r = instance_region(m, shape, c, seed).unwrap();
                    let bad = inject_corruption(&g, &r, seed).unwrap();
                    let truth = brute_force_diff(&bad, &g).unwrap();
                    let scan = brute_force_store_scan(&bad, &key, &sift, &mut CostMeter::new()).unwrap();
                    sound.expect(scan == truth, || "store scan disagrees with diff".into());
                    let out = detect_sieve(&bad, &key, &sieve, &mut CostMeter::new()).unwrap();
                    let cand = out.approx.as_ref().map(|a| a.candidates()).unwrap_or_default();
                    sound.expect(truth.cells.is_subset(&cand), || format!("sieve misses cells ({})", shape.name()));
                    if shape == ShapeKind::Rectangle {
                        sound.expect(cand == truth.cells, || "sieve not exact on a rectangle".into());
                    }
                    if m == 32 {
                        let f = locate_adaptive(&bad, &key, &adaptive, &mut CostMeter::new()).unwrap();
                        sound.found_in(f, &truth, "adaptive");
                        let f = locate_quad(&bad, &key, &quad, &mut CostMeter::new()).unwrap();
                        sound.found_in(f, &truth, "quad");
                    }
                    if shape != ShapeKind::RandomConnected {
                        for scheme in [Scheme::Quad, Scheme::Improved, Scheme::Sift, Scheme::Hybrid, Scheme::Adaptive] {
                            let out = gridguard_core::detect::locate_and_spread(
                                &bad,
                                &Inputs { original: None, ..inputs },
                                scheme,
                                seed,
                                &mut CostMeter::new(),
                            )
                            .unwrap();
                            sound.found_in(out.found_cell, &truth, scheme.name());
                            let comp = out.found_cell.and_then(|c| truth.component_of(c));
                            sound.expect(out.region.as_ref() == comp, || format!("{scheme}: spread region differs"));
                        }
                    }
                }
            }
        }
    }
    outcome(
        sound.violations.is_empty(),
        format!(
            "{} oracle checks across criteria 2-7; {}",
            sound.checks,
            if sound.violations.is_empty() { "zero violations".into() } else { sound.violations.join("; ") }
        ),
    )
}

fn criterion_8() -> Outcome {
    let g = Grid::new(32, 1, 8).unwrap();
    let key = key();
    let store = SiftStore::build(&g, &key).unwrap();
    let mut problems = Vec::new();
    let mut runs = 0;
    for t in 1..=200u64 {
        for (i, shape) in [ShapeKind::RandomConnected, ShapeKind::HvConvexRandom].into_iter().enumerate() {
            let anchor = CellCoord::new((t as u32 * 7) % 32, (t as u32 * 13) % 32);
            let spec = match shape {
                ShapeKind::RandomConnected => RegionShapeSpec::random_connected(anchor, t, t),
                _ => RegionShapeSpec::hv_convex(anchor, t, t),
            };
            let r = generate_region_in(32, &spec).unwrap();
            let bad = inject_corruption(&g, &r, t + i as u64).unwrap();
            let truth = brute_force_diff(&bad, &g).unwrap();
            let size = r.len() as u64;
            let seed_cell = *r.iter().nth((t as usize * 31) % r.len()).unwrap();
            let by_bytes = spread_region(&bad, &mut CompareOriginal(&g), seed_cell, &mut CostMeter::new()).unwrap();
            let mut digests = VerifyCell { key: &key, digests: &store };
            let by_digest = spread_region(&bad, &mut digests, seed_cell, &mut CostMeter::new()).unwrap();
            runs += 2;
            for s in [&by_bytes, &by_digest] {
                let exact = Some(&s.region) == truth.component_of(seed_cell);
                if (!exact || s.cell_tests > 5 * size || s.neighbor_probes > 4 * size) && problems.len() < 5 {
                    problems.push(format!(
                        "t={size} {}: exact={exact} tests={} probes={}",
                        shape.name(),
                        s.cell_tests,
                        s.neighbor_probes
                    ));
                }
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{runs} spreads for t in 1..=200, exact with <= 5t tests and <= 4t probes; {}",
            if problems.is_empty() { "no violations".into() } else { problems.join(", ") }
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut problems = Vec::new();
    let cfg = BenchConfig {
        m_list: vec![16, 32],
        c_list: vec![1, 4, 16, 64],
        shapes: vec![ShapeKind::Rectangle, ShapeKind::Disc, ShapeKind::HvConvexRandom],
        runs: 4,
        schemes: Scheme::ALL.into_iter().filter(|s| *s != Scheme::Adaptive).collect(),
        key: key(),
        exec: Exec::Parallel,
        timing: false,
    };
    let csv = |cfg: &BenchConfig| {
        let mut v = Vec::new();
        run_sweep(cfg).unwrap().write_csv(&mut v).unwrap();
        v
    };
    let first = csv(&cfg);
    if first != csv(&cfg) {
        problems.push("repeated parallel sweep differs".to_string());
    }
    if first != csv(&BenchConfig { exec: Exec::Sequential, ..cfg.clone() }) {
        problems.push("sequential sweep differs from parallel".to_string());
    }
    let g = Grid::new(8, 3, 9).unwrap();
    let mut a = Vec::new();
    g.save(&mut a).unwrap();
    let mut b = Vec::new();
    Grid::load(a.as_slice()).unwrap().save(&mut b).unwrap();
    if a != b {
        problems.push("grid file round-trip".into());
    }
    for key in [KeyMaterial::mac(b"nine".to_vec()).unwrap(), KeyMaterial::signature_from_seed([9; 32])] {
        for v in [StoreVariant::Quad, StoreVariant::Boundary, StoreVariant::Sift, StoreVariant::Sieve, StoreVariant::Adaptive] {
            let s = AnyStore::build(v, &g, &key, Exec::Parallel).unwrap();
            let mut a = Vec::new();
            s.save(&mut a).unwrap();
            let mut b = Vec::new();
            AnyStore::load(a.as_slice()).unwrap().save(&mut b).unwrap();
            let seq = AnyStore::build(v, &g, &key, Exec::Sequential).unwrap();
            let mut c = Vec::new();
            seq.save(&mut c).unwrap();
            if a != b || a != c {
                problems.push(format!("{} store round-trip ({:?})", v.name(), key.mode()));
            }
        }
    }
    outcome(
        problems.is_empty(),
        format!(
            "{} CSV bytes identical across 3 runs; grid and 10 store files round-trip; {}",
            first.len(),
            if problems.is_empty() { "no differences".into() } else { problems.join(", ") }
        ),
    )
}

fn main() -> ExitCode {
    let mut sound = Soundness::default();
    let mut results = vec![
        ("1 store sizes", criterion_1()),
        ("2 probabilistic mean", criterion_2(&mut sound)),
        ("3 quad search", criterion_3(&mut sound)),
        ("4 1-D binary bound", criterion_4(&mut sound)),
        ("5 sift bounds", criterion_5(&mut sound)),
    ];
    let (bound, flip) = criterion_6(&mut sound);
    results.push(("6a hybrid argmin bound", bound));
    results.push(("6b hybrid winner flip", flip));
    results.push(("7 soundness/completeness", criterion_7(&mut sound)));
    results.push(("8 spread exactness", criterion_8()));
    results.push(("9 determinism/serialization", criterion_9()));
    let mut failed = 0;
    for (name, o) in &results {
        println!("criterion {name}: {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
