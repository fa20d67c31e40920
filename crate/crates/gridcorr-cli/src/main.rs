//! `gridcorr`: exact autocorrelation tables, reconstruction up to
//! translation, translation checks, and example-family generation.
//!
//! Exit codes: 0 success (or translation-equivalent), 1 verification
//! failure, 2 usage or input errors.

mod files;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gridcorr::families;
use gridcorr::groups::{factorize, Grid};
use gridcorr::moments::{MomentOracle, MomentTable};
use gridcorr::recon::{
    reconstruct_traced, required_order_cap, verify_translation, ReconConfig, ReconTrace,
};
use gridcorr::spectral::RatFn;
use serde::Serialize;

use files::InputFile;

const DEFAULT_BUDGET: u64 = 100_000_000;
const PRECISION_ENV: &str = "GRIDCORR_PRECISION_BITS";

#[derive(Parser)]
#[command(
    name = "gridcorr",
    version,
    about = "Exact autocorrelations and reconstruction on finite abelian grids"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write the exact moment tables of a grid up to an order
    Moments(MomentsArgs),
    /// Recover grid data, up to translation, from its moments
    Reconstruct(ReconstructArgs),
    /// Check whether two grids are translates of each other
    Verify(VerifyArgs),
    /// Write a member or pair from one of the example families
    GenExample(GenExampleArgs),
}

#[derive(Args)]
struct MomentsArgs {
    /// Grid file (JSON or CSV)
    input: PathBuf,
    /// Highest moment order to tabulate
    #[arg(long, value_parser = clap::value_parser!(usize))]
    order: usize,
    /// Output moment file (JSON)
    #[arg(long)]
    output: PathBuf,
    /// Work cap: sum over orders of |G|^order must stay within it
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct ReconstructArgs {
    /// Grid file (hidden-oracle mode) or moment file (table mode)
    input: PathBuf,
    /// Output grid file
    #[arg(long)]
    output: PathBuf,
    /// Query-order cap: "auto" derives 2r+2 or 3r+3 from the grid shape
    #[arg(long, default_value = "auto")]
    cap: String,
    /// Optional JSON report (queries, generators, exponents, timing)
    #[arg(long)]
    report: Option<PathBuf>,
    /// Output format for the reconstructed grid
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
    /// Work cap for table-mode post-verification
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Reference grid file
    a: PathBuf,
    /// Candidate grid file
    b: PathBuf,
}

#[derive(Args)]
struct GenExampleArgs {
    /// Family name
    #[arg(long, value_enum)]
    family: Family,
    /// Conic parameter a (z6)
    #[arg(long)]
    a: Option<i64>,
    /// Conic parameter b (z6)
    #[arg(long)]
    b: Option<i64>,
    /// First odd prime (sharp)
    #[arg(long)]
    p: Option<u64>,
    /// Second odd prime (sharp)
    #[arg(long)]
    q: Option<u64>,
    /// Number of coordinates (threer, sharp)
    #[arg(long)]
    r: Option<usize>,
    /// Grid dimensions, comma separated (delta, divisor)
    #[arg(long)]
    dims: Option<String>,
    /// Common divisor of the dimensions (divisor)
    #[arg(long)]
    d: Option<u64>,
    /// Directory receiving the member files and manifest
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    /// Output format for grid members
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    Z6,
    Threer,
    Sharp,
    Delta,
    Divisor,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Moments(args) => cmd_moments(args),
        Cmd::Reconstruct(args) => cmd_reconstruct(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::GenExample(args) => cmd_gen_example(args),
    }
}

/// Sum over orders 1..=k of |G|^order, saturating; the work and storage
/// estimate for full moment tables.
fn table_work(g: &Grid, k: usize) -> u64 {
    let size = g.order() as u128;
    let mut total: u128 = 0;
    let mut pow: u128 = 1;
    for _ in 1..=k {
        pow = pow.saturating_mul(size);
        total = total.saturating_add(pow);
    }
    total.min(u64::MAX as u128) as u64
}

fn cmd_moments(args: MomentsArgs) -> Result<ExitCode> {
    if args.order < 1 {
        bail!("--order must be at least 1");
    }
    let f = files::read_grid(&args.input)?;
    let work = table_work(f.grid(), args.order);
    if work > args.budget {
        bail!(
            "tables to order {} on this grid cost about {} operations, over the budget {} \
             (raise --budget to force)",
            args.order,
            work,
            args.budget
        );
    }
    let table = MomentTable::compute(&f, args.order);
    files::write_moments(&args.output, &table)?;
    println!("wrote moments to order {} at {}", args.order, args.output.display());
    Ok(ExitCode::SUCCESS)
}

fn parse_cap(s: &str, g: &Grid) -> Result<usize> {
    if s == "auto" {
        return Ok(required_order_cap(g));
    }
    let k: usize = s.parse().with_context(|| format!("invalid --cap {s:?}"))?;
    if k < 1 {
        bail!("--cap must be at least 1");
    }
    Ok(k)
}

fn recon_config() -> Result<ReconConfig> {
    let mut cfg = ReconConfig::default();
    if let Ok(raw) = std::env::var(PRECISION_ENV) {
        let schedule = raw
            .split(',')
            .map(|t| t.trim().parse::<u32>().with_context(|| format!("{PRECISION_ENV}: invalid bit count {t:?}")))
            .collect::<Result<Vec<_>>>()?;
        if schedule.is_empty() || schedule.iter().any(|&b| b < 64) {
            bail!("{PRECISION_ENV} must list precisions of at least 64 bits");
        }
        cfg.precision_schedule = schedule;
    }
    Ok(cfg)
}

#[derive(Serialize)]
struct BlockReport {
    cofactor: u64,
    generators: Vec<Vec<u64>>,
}

#[derive(Serialize)]
struct PowerReport {
    point: Vec<u64>,
    exponent: u64,
}

#[derive(Serialize)]
struct Report {
    mode: &'static str,
    dims: Vec<u64>,
    exponent: u64,
    cap: usize,
    support_size: usize,
    restrictions: usize,
    blocks: Vec<BlockReport>,
    power_exponents: Vec<PowerReport>,
    queries: u64,
    max_order_queried: usize,
    queries_by_order: BTreeMap<usize, u64>,
    scale: String,
    elapsed_ms: u128,
    verified: bool,
}

fn write_report(
    path: &Path,
    mode: &'static str,
    oracle: &MomentOracle,
    cap: usize,
    trace: &ReconTrace,
    elapsed_ms: u128,
    verified: bool,
) -> Result<()> {
    let stats = oracle.stats();
    let report = Report {
        mode,
        dims: oracle.grid().dims().to_vec(),
        exponent: oracle.grid().exponent(),
        cap,
        support_size: trace.support_size,
        restrictions: trace.restrictions,
        blocks: trace
            .blocks
            .iter()
            .map(|(cofactor, generators)| BlockReport {
                cofactor: *cofactor,
                generators: generators.clone(),
            })
            .collect(),
        power_exponents: trace
            .exponents
            .iter()
            .map(|(point, exponent)| PowerReport { point: point.clone(), exponent: *exponent })
            .collect(),
        queries: stats.queries,
        max_order_queried: stats.max_order,
        queries_by_order: stats.per_order.iter().map(|(&k, &v)| (k, v)).collect(),
        scale: oracle.scale().to_string(),
        elapsed_ms,
        verified,
    };
    let mut bytes = serde_json::to_vec_pretty(&report)?;
    bytes.push(b'\n');
    files::write_atomic(path, &bytes)
}

fn cmd_reconstruct(args: ReconstructArgs) -> Result<ExitCode> {
    let cfg = recon_config()?;
    let input = files::read_input(&args.input)?;

    enum Mode {
        Hidden(RatFn),
        Table(MomentTable),
    }
    let (oracle, cap, mode) = match input {
        InputFile::Grid(f) => {
            let cap = parse_cap(&args.cap, f.grid())?;
            (MomentOracle::hidden(&f).with_cap(cap), cap, Mode::Hidden(f))
        }
        InputFile::Moments(table) => {
            let cap = parse_cap(&args.cap, table.grid())?;
            if table.max_order() < cap {
                bail!(
                    "moment file stores orders up to {} but the query cap is {}; \
                     regenerate deeper tables or pass a smaller --cap",
                    table.max_order(),
                    cap
                );
            }
            let oracle = MomentOracle::from_table(table.clone()).with_cap(cap);
            (oracle, cap, Mode::Table(table))
        }
    };
    let mode_name = match mode {
        Mode::Hidden(_) => "hidden",
        Mode::Table(_) => "table",
    };

    let started = Instant::now();
    let (rec, trace) = reconstruct_traced(&oracle, &cfg)
        .with_context(|| format!("reconstruction from {} failed", args.input.display()))?;
    let elapsed_ms = started.elapsed().as_millis();

    // Post-verification. Hidden mode compares against the data we were
    // given; table mode recomputes the reconstruction's own tables and
    // compares them with the input file, order by order up to the cap.
    let verified = match &mode {
        Mode::Hidden(f) => verify_translation(f, &rec).is_some(),
        Mode::Table(table) => {
            let through = cap.min(table.max_order());
            let work = table_work(rec.grid(), through);
            if work > args.budget {
                bail!(
                    "post-verification to order {through} costs about {work} operations, \
                     over the budget {} (raise --budget)",
                    args.budget
                );
            }
            let recomputed = MomentTable::compute(&rec, through);
            files::tables_agree(table, &recomputed, through)?
        }
    };

    match args.format {
        OutFormat::Json => files::write_grid_json(&args.output, &rec)?,
        OutFormat::Csv => files::write_grid_csv(&args.output, &rec)?,
    }
    if let Some(report) = &args.report {
        write_report(report, mode_name, &oracle, cap, &trace, elapsed_ms, verified)?;
    }

    let stats = oracle.stats();
    if !verified {
        eprintln!(
            "reconstruction written to {} but it does not reproduce the input moments",
            args.output.display()
        );
        return Ok(ExitCode::from(1));
    }
    println!(
        "wrote {} ({} queries, max order {}, {} ms)",
        args.output.display(),
        stats.queries,
        stats.max_order,
        elapsed_ms
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let a = files::read_grid(&args.a)?;
    let b = files::read_grid(&args.b)?;
    if a.grid() != b.grid() {
        bail!(
            "dimension mismatch: {:?} versus {:?}",
            a.grid().dims(),
            b.grid().dims()
        );
    }
    match verify_translation(&a, &b) {
        Some(_) => {
            println!("y");
            Ok(ExitCode::SUCCESS)
        }
        None => {
            println!("n");
            Ok(ExitCode::from(1))
        }
    }
}

#[derive(Serialize)]
struct Manifest {
    family: String,
    params: BTreeMap<String, String>,
    dims: Vec<u64>,
    agreement_order: usize,
    files: Vec<String>,
    note: String,
}

fn is_odd_prime(n: u64) -> bool {
    n > 2 && factorize(n) == vec![(n, 1)]
}

fn parse_dims(raw: &Option<String>) -> Result<Vec<u64>> {
    let raw = raw.as_ref().context("this family needs --dims")?;
    raw.split(',')
        .map(|t| t.trim().parse::<u64>().with_context(|| format!("invalid dimension {t:?}")))
        .collect()
}

fn cmd_gen_example(args: GenExampleArgs) -> Result<ExitCode> {
    let dir = &args.output_dir;
    if !dir.is_dir() {
        bail!("output directory {} does not exist", dir.display());
    }
    let grid_name = |stem: &str| match args.format {
        OutFormat::Json => format!("{stem}.json"),
        OutFormat::Csv => format!("{stem}.csv"),
    };
    let write_member = |name: &str, f: &RatFn| -> Result<()> {
        let path = dir.join(name);
        match args.format {
            OutFormat::Json => files::write_grid_json(&path, f),
            OutFormat::Csv => files::write_grid_csv(&path, f),
        }
    };

    let mut params = BTreeMap::new();
    let (family, dims, agreement_order, file_names, note) = match args.family {
        Family::Z6 => {
            let a = args.a.context("z6 needs --a")?;
            let b = args.b.context("z6 needs --b")?;
            params.insert("a".into(), a.to_string());
            params.insert("b".into(), b.to_string());
            params.insert("invariant".into(), (a * a + 3 * b * b).to_string());
            let f = families::family_z6(a, b);
            let name = grid_name("f");
            write_member(&name, &f)?;
            (
                "z6",
                f.grid().dims().to_vec(),
                5,
                vec![name],
                "members with equal a^2 + 3b^2 share all moments through order 5".to_string(),
            )
        }
        Family::Threer => {
            let r = args.r.context("threer needs --r")?;
            if r < 1 {
                bail!("--r must be at least 1");
            }
            params.insert("r".into(), r.to_string());
            let (f, g2) = families::family_threer(r);
            let fname = grid_name("f");
            let gname = grid_name("g");
            write_member(&fname, &f)?;
            write_member(&gname, &g2)?;
            (
                "threer",
                f.grid().dims().to_vec(),
                3 * r,
                vec![fname, gname],
                format!("the pair shares all moments through order {}", 3 * r),
            )
        }
        Family::Sharp => {
            let p = args.p.context("sharp needs --p")?;
            let q = args.q.context("sharp needs --q")?;
            let r = args.r.context("sharp needs --r")?;
            if !is_odd_prime(p) || !is_odd_prime(q) || p == q {
                bail!("sharp needs two distinct odd primes, got p={p} q={q}");
            }
            if r < 1 {
                bail!("--r must be at least 1");
            }
            params.insert("p".into(), p.to_string());
            params.insert("q".into(), q.to_string());
            params.insert("r".into(), r.to_string());
            let (f, g2) = families::family_sharp(p, q, r);
            let fname = grid_name("f");
            let gname = grid_name("g");
            write_member(&fname, &f)?;
            write_member(&gname, &g2)?;
            (
                "sharp",
                f.grid().dims().to_vec(),
                3 * r + 2,
                vec![fname, gname],
                format!("the pair shares all moments through order {}", 3 * r + 2),
            )
        }
        Family::Delta => {
            let dims = parse_dims(&args.dims)?;
            let g = Grid::new(&dims)?;
            params.insert("dims".into(), format!("{dims:?}"));
            let (fhat, ghat) = families::family_delta(&g);
            let order = *dims.last().expect("nonempty dims") as usize - 1;
            files::write_spectrum(&dir.join("f.spectrum.json"), &fhat)?;
            files::write_spectrum(&dir.join("g.spectrum.json"), &ghat)?;
            (
                "delta",
                dims,
                order,
                vec!["f.spectrum.json".into(), "g.spectrum.json".into()],
                "complex-valued witnesses: all moments vanish below the last dimension".to_string(),
            )
        }
        Family::Divisor => {
            let dims = parse_dims(&args.dims)?;
            let d = args.d.context("divisor needs --d")?;
            let g = Grid::new(&dims)?;
            params.insert("dims".into(), format!("{dims:?}"));
            params.insert("d".into(), d.to_string());
            let (fhat, ghat) = families::family_divisor(&g, d)?;
            let order = (dims.iter().sum::<u64>() / d) as usize;
            files::write_spectrum(&dir.join("f.spectrum.json"), &fhat)?;
            files::write_spectrum(&dir.join("g.spectrum.json"), &ghat)?;
            (
                "divisor",
                dims,
                order,
                vec!["f.spectrum.json".into(), "g.spectrum.json".into()],
                "complex-valued witnesses sharing moments through the dimension sum over d"
                    .to_string(),
            )
        }
    };

    let manifest = Manifest {
        family: family.to_string(),
        params,
        dims,
        agreement_order,
        files: file_names,
        note,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    files::write_atomic(&dir.join("manifest.json"), &bytes)?;
    println!("wrote {} example into {}", manifest.family, dir.display());
    Ok(ExitCode::SUCCESS)
}
