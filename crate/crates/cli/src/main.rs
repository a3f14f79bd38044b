use std::fs::{self, File};
use std::fmt::Write as _;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use gridguard_core::auth::{CostMeter, KeyMaterial, KeyMode};
use gridguard_core::bench::{run_sweep, BenchConfig};
use gridguard_core::detect::{locate_and_spread, DetectionOutcome, Inputs, Scheme};
use gridguard_core::grid::{inject_corruption, CellCoord, Grid};
use gridguard_core::par::Exec;
use gridguard_core::region::{generate_region, RegionShapeSpec, ShapeKind};
use gridguard_core::store::{AnyStore, StoreVariant};

const KEY_ENV: &str = "GRIDGUARD_KEY";

/// Exit status for a grid found to be corrupted.
const EXIT_CORRUPTED: u8 = 3;

#[derive(Parser)]
#[command(name = "gridguard", version, about = "Localize corrupted regions in authenticated 2-D grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded random grid.
    Gen(GenArgs),
    /// Corrupt a region of a grid and write a manifest of the cells.
    Corrupt(CorruptArgs),
    /// Sign a grid into a digest store.
    Build(BuildArgs),
    /// Check a grid against one or more stores.
    Detect(DetectArgs),
    /// Run a seeded cost sweep and write CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Side length, a power of two >= 2.
    #[arg(long)]
    m: u32,
    #[arg(long, default_value_t = 1)]
    cell_size: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Rect,
    Disc,
    Random,
    Hvconvex,
}

impl From<ShapeArg> for ShapeKind {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Rect => ShapeKind::Rectangle,
            ShapeArg::Disc => ShapeKind::Disc,
            ShapeArg::Random => ShapeKind::RandomConnected,
            ShapeArg::Hvconvex => ShapeKind::HvConvexRandom,
        }
    }
}

#[derive(Args)]
struct CorruptArgs {
    /// Grid to corrupt.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    shape: ShapeArg,
    /// Anchor cell `ROW,COL`: top-left corner for rect and disc, start cell
    /// for random, preferred top-left for hvconvex.
    #[arg(long, value_parser = parse_coord)]
    at: CellCoord,
    /// `ROWSxCOLS` for rect, diameter for disc, target cell count otherwise.
    #[arg(long)]
    size: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Manifest path; defaults to the output path with `.json` appended.
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Mac,
    Sig,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, value_parser = parse_variant)]
    store: StoreVariant,
    #[arg(long, value_enum, default_value = "mac")]
    mode: ModeArg,
    /// Hex Ed25519 seed for `--mode sig`; falls back to GRIDGUARD_KEY.
    #[arg(long)]
    signing_seed: Option<String>,
    #[arg(long)]
    out: PathBuf,
    /// Build on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    grid: PathBuf,
    /// Store files; pass several for schemes that need more than one.
    #[arg(long = "store")]
    stores: Vec<PathBuf>,
    /// Original grid, required by `--scheme prob`.
    #[arg(long)]
    original: Option<PathBuf>,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Scheme,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the outcome as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "64")]
    m_list: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "4,64,1024")]
    c_list: Vec<u64>,
    #[arg(long, value_delimiter = ',', value_enum, default_value = "rect")]
    shapes: Vec<ShapeArg>,
    #[arg(long, default_value_t = 10)]
    runs: u64,
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme, default_value = "improved,sift")]
    schemes: Vec<Scheme>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fill the wall_ms column (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    sequential: bool,
}

fn parse_coord(s: &str) -> Result<CellCoord, String> {
    let (r, c) = s.split_once(',').ok_or("expected ROW,COL")?;
    let n = |x: &str| x.trim().parse::<u32>().map_err(|e| format!("{x:?}: {e}"));
    Ok(CellCoord::new(n(r)?, n(c)?))
}

fn parse_variant(s: &str) -> Result<StoreVariant, String> {
    StoreVariant::parse(s).map_err(|e| e.to_string())
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    Scheme::parse(s).map_err(|e| e.to_string())
}

/// Everything needed to re-check a corruption against the detectors.
#[derive(Serialize, Deserialize)]
struct Manifest {
    m: u32,
    cell_size: u32,
    spec: RegionShapeSpec,
    injection_seed: u64,
    count: usize,
    cells: Vec<CellCoord>,
}

fn read_grid(path: &Path) -> Result<Grid> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Grid::load(BufReader::new(f)).with_context(|| format!("reading grid {}", path.display()))
}

fn read_store(path: &Path) -> Result<AnyStore> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    AnyStore::load(BufReader::new(f)).with_context(|| format!("reading store {}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn env_key_bytes() -> Result<Vec<u8>> {
    let hex_key = std::env::var(KEY_ENV).map_err(|_| anyhow!("{KEY_ENV} is not set"))?;
    hex::decode(hex_key.trim()).with_context(|| format!("{KEY_ENV} is not valid hex"))
}

fn mac_key() -> Result<KeyMaterial> {
    Ok(KeyMaterial::mac(env_key_bytes()?)?)
}

fn signing_key(seed_hex: Option<&str>) -> Result<KeyMaterial> {
    let bytes = match seed_hex {
        Some(h) => hex::decode(h.trim()).context("--signing-seed is not valid hex")?,
        None => env_key_bytes()?,
    };
    let seed: [u8; 32] = bytes
        .try_into()
        .map_err(|b: Vec<u8>| anyhow!("signing seed must be 32 bytes, got {}", b.len()))?;
    Ok(KeyMaterial::signature_from_seed(seed))
}

/// Treats a closed stdout as success so output can be piped into `head`.
fn quiet_pipe<E: Into<anyhow::Error>>(r: std::result::Result<(), E>) -> Result<()> {
    match r.map_err(Into::into) {
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => Ok(()),
        r => r,
    }
}

fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    quiet_pipe(out.write_all(text.as_bytes()).and_then(|()| out.flush()))
}

fn cmd_gen(a: GenArgs) -> Result<()> {
    let g = Grid::new(a.m, a.cell_size, a.seed)?;
    let mut w = create(&a.out)?;
    let n = g.save(&mut w)?;
    w.flush()?;
    println!("wrote {}x{} grid ({} cells, {n} bytes) to {}", a.m, a.m, g.len(), a.out.display());
    Ok(())
}

fn shape_spec(a: &CorruptArgs) -> Result<RegionShapeSpec> {
    let num = |s: &str| s.trim().parse::<u64>().with_context(|| format!("bad --size {s:?}"));
    Ok(match a.shape {
        ShapeArg::Rect => {
            let (r, c) = a.size.split_once(['x', 'X']).unwrap_or((&a.size, &a.size));
            RegionShapeSpec::rectangle(a.at, num(r)? as u32, num(c)? as u32)
        }
        ShapeArg::Disc => RegionShapeSpec::disc(a.at, num(&a.size)? as u32),
        ShapeArg::Random => RegionShapeSpec::random_connected(a.at, num(&a.size)?, a.seed),
        ShapeArg::Hvconvex => RegionShapeSpec::hv_convex(a.at, num(&a.size)?, a.seed),
    })
}

fn cmd_corrupt(a: CorruptArgs) -> Result<()> {
    let g = read_grid(&a.input)?;
    let spec = shape_spec(&a)?;
    let region = generate_region(&g, &spec)?;
    let bad = inject_corruption(&g, &region, a.seed)?;
    let mut w = create(&a.out)?;
    bad.save(&mut w)?;
    w.flush()?;
    let manifest = Manifest {
        m: g.side(),
        cell_size: g.cell_size(),
        spec,
        injection_seed: a.seed,
        count: region.len(),
        cells: region.iter().copied().collect(),
    };
    let path = a.manifest.clone().unwrap_or_else(|| {
        let mut p = a.out.clone().into_os_string();
        p.push(".json");
        p.into()
    });
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    println!(
        "corrupted {} cells ({}) -> {}, manifest {}",
        region.len(),
        ShapeKind::from(a.shape).name(),
        a.out.display(),
        path.display()
    );
    Ok(())
}

fn cmd_build(a: BuildArgs) -> Result<()> {
    let g = read_grid(&a.grid)?;
    let key = match a.mode {
        ModeArg::Mac => mac_key()?,
        ModeArg::Sig => signing_key(a.signing_seed.as_deref())?,
    };
    let exec = if a.sequential { Exec::Sequential } else { Exec::Parallel };
    let store = AnyStore::build(a.store, &g, &key, exec)?;
    let mut w = create(&a.out)?;
    store.save(&mut w)?;
    w.flush()?;
    println!("{}", store.store_size());
    eprintln!("{} store for {}x{} grid written to {}", a.store.name(), g.side(), g.side(), a.out.display());
    Ok(())
}

fn render_outcome(out: &DetectionOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scheme: {}", out.scheme);
    match out.verdict {
        gridguard_core::detect::Verdict::Clean => s.push_str("verdict: clean\n"),
        gridguard_core::detect::Verdict::Corrupted => s.push_str("verdict: corrupted\n"),
    }
    if let Some(c) = out.found_cell {
        let _ = writeln!(s, "found cell: {c}");
    }
    if let Some(r) = &out.region {
        match r.bounding_box() {
            Some((r0, c0, r1, c1)) => {
                let _ = writeln!(s, "region: {} cells, rows {r0}..={r1}, cols {c0}..={c1}", r.len());
            }
            None => s.push_str("region: empty\n"),
        }
    }
    if let Some(a) = &out.approx {
        if let Some((r0, c0, r1, c1)) = a.bounds() {
            let _ = writeln!(s, 
                "approximate region: {} rows x {} cols = {} candidate cells, rows {r0}..={r1}, cols {c0}..={c1}",
                a.rows.len(),
                a.cols.len(),
                a.candidate_count()
            );
        }
    }
    if let Some(t) = out.trials {
        let _ = writeln!(s, "trials: {t}");
    }
    if let Some(sw) = &out.switch {
        let _ = writeln!(s, 
            "boundary switch: {:?} at depth {} (block {}x{} at ({},{}))",
            sw.shape, sw.depth, sw.block.side, sw.block.side, sw.block.row0, sw.block.col0
        );
    }
    if let Some(h) = &out.hybrid {
        let w = h.winner.map_or("none".to_string(), |w| format!("{w:?}").to_lowercase());
        let _ = writeln!(s, "hybrid winner: {w} (improved {} units, sift {} units)", h.improved_units, h.sift_units);
    }
    let m = &out.meter;
    let _ = writeln!(s, 
        "cost: {} signature verifications, {} cells touched, {} hash computations",
        m.sig_verifications(),
        m.cells_touched(),
        m.hash_computations()
    );
    if let Some(sp) = &out.spread {
        let _ = writeln!(s, "spread: {} cell tests, {} neighbour probes", sp.cell_tests, sp.neighbor_probes);
    }
    s
}

fn cmd_detect(a: DetectArgs) -> Result<ExitCode> {
    let grid = read_grid(&a.grid)?;
    let original = a.original.as_deref().map(read_grid).transpose()?;
    let stores = a.stores.iter().map(|p| read_store(p)).collect::<Result<Vec<_>>>()?;
    let key = match stores.first().map(|s| s.digest_set()) {
        None => None,
        Some(set) => Some(match set.mode() {
            KeyMode::Mac => mac_key()?,
            KeyMode::Signature => {
                KeyMaterial::verifying(set.public_key().ok_or_else(|| anyhow!("store lacks a public key"))?)?
            }
        }),
    };
    let mut inputs = Inputs {
        key: key.as_ref(),
        original: original.as_ref(),
        ..Default::default()
    };
    for s in &stores {
        match s {
            AnyStore::Quad(s) => inputs.quad = Some(s),
            AnyStore::Boundary(s) => inputs.boundary = Some(s),
            AnyStore::Sift(s) => inputs.sift = Some(s),
            AnyStore::Sieve(s) => inputs.sieve = Some(s),
            AnyStore::Adaptive(s) => inputs.adaptive = Some(s),
        }
    }
    let out = locate_and_spread(&grid, &inputs, a.scheme, a.seed, &mut CostMeter::new())?;
    if a.json {
        emit(&(serde_json::to_string_pretty(&out)? + "\n"))?;
    } else {
        emit(&render_outcome(&out))?;
    }
    Ok(if out.is_clean() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_CORRUPTED) })
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    // the key only affects tag bytes, never the counts
    let key = match std::env::var(KEY_ENV) {
        Ok(_) => mac_key()?,
        Err(_) => KeyMaterial::mac(b"gridguard-bench".to_vec())?,
    };
    if a.shapes.is_empty() {
        bail!("no shapes given");
    }
    let cfg = BenchConfig {
        m_list: a.m_list,
        c_list: a.c_list,
        shapes: a.shapes.into_iter().map(ShapeKind::from).collect(),
        runs: a.runs,
        schemes: a.schemes,
        key,
        exec: if a.sequential { Exec::Sequential } else { Exec::Parallel },
        timing: a.timing,
    };
    let out = run_sweep(&cfg)?;
    for f in &out.failures {
        eprintln!(
            "skipped {} m={} {} C={} seed {}: {}",
            f.scheme,
            f.m,
            f.shape.name(),
            f.target_c,
            f.seed,
            f.error
        );
    }
    match a.out {
        Some(p) => {
            let mut w = create(&p)?;
            out.write_csv(&mut w)?;
            w.flush()?;
        }
        None => quiet_pipe(out.write_csv(io::stdout().lock()))?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen(a) => cmd_gen(a)?,
        Command::Corrupt(a) => cmd_corrupt(a)?,
        Command::Build(a) => cmd_build(a)?,
        Command::Detect(a) => return cmd_detect(a),
        Command::Bench(a) => cmd_bench(a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
