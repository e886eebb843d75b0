//! `mvsk`: moment estimation, convexity classification, scalarized solves
//! and grid sweeps for mean-variance-skewness-kurtosis portfolios.

mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mvsk_core::convexity::classify_detailed;
use mvsk_core::report::{self, SweepFile, SweepMeta, SweepSummary};
use mvsk_core::sweep::{non_domination_check, DOMINANCE_MARGIN};
use mvsk_core::synth::{self, SynthConfig};
use mvsk_core::{
    build_grid, build_moment_model, load_returns, run_sweep, scale_values, solve, solve_sparse, superior_set,
    support_histogram, Domain, MomentModel, ReturnsMatrix, SolverOptions, SparseOptions, SweepOptions,
};

use config::{domain_from, parse_lambda, RunConfig};

const DEFAULT_ETA: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "mvsk", version, about = "MVSK portfolio Pareto-front tools")]
struct Cli {
    /// Key-value config file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for sweeps and sparse sub-problems.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the moment model from a returns (or prices) CSV.
    Moments(MomentsArgs),
    /// Classify a hyper-parameter by the convexity conditions.
    Classify(ClassifyArgs),
    /// Solve one scalarization.
    Solve(SolveArgs),
    /// Solve one scalarization under a support constraint.
    SolveSparse(SolveSparseArgs),
    /// Solve every scalarization on a grid over the hyper-parameters.
    Sweep(SweepArgs),
    /// Write seeded synthetic returns.
    Synth(SynthArgs),
    /// Summarize a sweep JSON file and export the trade-off table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct ModelSource {
    /// Moment model JSON written by `moments`.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Returns CSV; used when no model is given.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Treat the data CSV as prices and convert to relative returns.
    #[arg(long)]
    prices: bool,
}

#[derive(Debug, Args)]
struct DomainFlags {
    /// Optimize over the simplex (default).
    #[arg(long, conflicts_with = "cube")]
    simplex: bool,
    /// Optimize over the cube [-B, B]^n.
    #[arg(long, value_name = "B")]
    cube: Option<f64>,
}

#[derive(Debug, Args)]
struct MomentsArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    prices: bool,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    source: ModelSource,
    #[command(flatten)]
    domain: DomainFlags,
    #[arg(long, value_name = "a,b,c,d")]
    lambda: String,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    source: ModelSource,
    #[command(flatten)]
    domain: DomainFlags,
    #[arg(long, value_name = "a,b,c,d")]
    lambda: String,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Record the per-iteration objective values.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct SolveSparseArgs {
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, value_name = "K")]
    max_support: usize,
    #[arg(long)]
    no_support_heuristic: bool,
    #[arg(long, value_name = "N")]
    proximity_count: Option<usize>,
    /// Solve every candidate support.
    #[arg(long)]
    no_proximity: bool,
    /// CSV of index pairs `i,j` (0-based) that may not be held together.
    #[arg(long)]
    forbidden_pairs: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: ModelSource,
    #[command(flatten)]
    domain: DomainFlags,
    #[arg(long)]
    grid_s: Option<u32>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    sparse_k: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Keep grid points with λ₁ = 0.
    #[arg(long)]
    no_lambda1_filter: bool,
    /// Start every solve from the default point instead of a neighbour.
    #[arg(long)]
    cold_start: bool,
    /// Semicolon-separated λ values for the table export; defaults to the
    /// superior set.
    #[arg(long, value_name = "a,b,c,d;...")]
    table_lambdas: Option<String>,
    /// Recorded in the output metadata.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 500)]
    m: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; defaults to `<out-dir>/returns.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[arg(long)]
    sweep: PathBuf,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, value_name = "a,b,c,d;...")]
    table_lambdas: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let jobs = cli.jobs.or(cfg.jobs);
    if jobs == Some(0) {
        bail!("--jobs must be at least 1");
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool.build().context("building worker pool")?;
    pool.install(|| match cli.command {
        Command::Moments(a) => cmd_moments(a, &cfg),
        Command::Classify(a) => cmd_classify(a, &cfg),
        Command::Solve(a) => cmd_solve(a, &cfg),
        Command::SolveSparse(a) => cmd_solve_sparse(a, &cfg),
        Command::Sweep(a) => cmd_sweep(a, &cfg),
        Command::Synth(a) => cmd_synth(a, &cfg),
        Command::Report(a) => cmd_report(a, &cfg),
    })
}

fn read_returns(path: &Path, prices: bool) -> Result<ReturnsMatrix> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let table = load_returns(file).with_context(|| format!("reading {}", path.display()))?;
    if prices {
        ReturnsMatrix::from_prices(&table).with_context(|| format!("converting prices in {}", path.display()))
    } else {
        Ok(table)
    }
}

fn load_model(src: &ModelSource, cfg: &RunConfig) -> Result<MomentModel> {
    if let Some(path) = src.model.as_ref().or(cfg.model.as_ref()) {
        let text = fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
        return MomentModel::from_json(&text).with_context(|| format!("parsing model {}", path.display()));
    }
    if let Some(path) = src.data.as_ref().or(cfg.data.as_ref()) {
        let raw = read_returns(path, src.prices || cfg.prices.unwrap_or(false))?;
        return build_moment_model(&raw).with_context(|| format!("estimating moments from {}", path.display()));
    }
    bail!("either --model or --data is required")
}

fn resolve_domain(flags: &DomainFlags, cfg: &RunConfig) -> Result<Domain> {
    if flags.simplex {
        return Ok(Domain::simplex());
    }
    domain_from(flags.cube.or(cfg.cube))
}

fn solver_options(max_iter: Option<usize>, cfg: &RunConfig, trace: bool) -> SolverOptions {
    SolverOptions {
        max_iterations: max_iter.or(cfg.max_iter).unwrap_or(2000),
        record_trace: trace,
        ..SolverOptions::default()
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer_pretty(&mut lock, value)?;
    writeln!(lock)?;
    Ok(())
}

fn out_dir(flag: Option<&PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    let dir = flag
        .or(cfg.out_dir.as_ref())
        .cloned()
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn cmd_moments(a: MomentsArgs, cfg: &RunConfig) -> Result<u8> {
    let Some(path) = a.data.as_ref().or(cfg.data.as_ref()) else {
        bail!("--data is required");
    };
    let raw = read_returns(path, a.prices || cfg.prices.unwrap_or(false))?;
    let model = build_moment_model(&raw).with_context(|| format!("estimating moments from {}", path.display()))?;
    let dir = out_dir(a.out_dir.as_ref(), cfg)?;
    let target = dir.join("model.json");
    fs::write(&target, model.to_json()?).with_context(|| format!("writing {}", target.display()))?;
    let bounds = model.bounds().expect("models built from data carry bounds");
    print_json(&serde_json::json!({
        "n": model.n(),
        "m": model.m(),
        "model": target,
        "simplex_bounds": bounds.simplex,
        "cube_bounds": bounds.cube_unit,
    }))?;
    Ok(0)
}

fn cmd_classify(a: ClassifyArgs, cfg: &RunConfig) -> Result<u8> {
    let model = load_model(&a.source, cfg)?;
    let domain = resolve_domain(&a.domain, cfg)?;
    let lambda = parse_lambda(&a.lambda)?;
    let Some(bounds) = model.bounds() else {
        bail!("the model carries no domain bounds");
    };
    let bounds = bounds.for_domain(domain.kind);
    let breakdown = classify_detailed(&lambda, bounds);
    let (y, value) = mvsk_core::convexity::psi_minimum(&lambda, bounds);
    print_json(&serde_json::json!({
        "lambda": lambda,
        "bounds": bounds,
        "label": breakdown.label,
        "conditions": {
            "i": breakdown.linear_kurtosis,
            "ii": breakdown.nonpositive_discriminant,
            "iii": breakdown.roots_above,
            "iv": breakdown.roots_below,
        },
        "psi_min": { "y": y, "value": value },
    }))?;
    Ok(0)
}

fn cmd_solve(a: SolveArgs, cfg: &RunConfig) -> Result<u8> {
    let model = load_model(&a.source, cfg)?;
    let domain = resolve_domain(&a.domain, cfg)?;
    let lambda = parse_lambda(&a.lambda)?;
    let opts = solver_options(a.max_iter, cfg, a.trace);
    let result = solve(&model, &lambda, &domain, &opts, None)?;
    print_json(&result)?;
    Ok(0)
}

fn read_pairs(path: &Path) -> Result<Vec<(usize, usize)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut pairs = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("reading {}", path.display()))?;
        if rec.len() != 2 {
            bail!("{}:{}: expected two indices", path.display(), line + 1);
        }
        let parse = |s: &str| {
            s.parse::<usize>()
                .with_context(|| format!("{}:{}: invalid index {s:?}", path.display(), line + 1))
        };
        pairs.push((parse(&rec[0])?, parse(&rec[1])?));
    }
    Ok(pairs)
}

fn cmd_solve_sparse(a: SolveSparseArgs, cfg: &RunConfig) -> Result<u8> {
    let model = load_model(&a.solve.source, cfg)?;
    let domain = resolve_domain(&a.solve.domain, cfg)?;
    let lambda = parse_lambda(&a.solve.lambda)?;
    let opts = solver_options(a.solve.max_iter, cfg, a.solve.trace);
    let mut sparse = SparseOptions::new(a.max_support, model.n());
    sparse.use_support_heuristic = !a.no_support_heuristic;
    if a.no_proximity {
        sparse.proximity_count = None;
    } else if let Some(p) = a.proximity_count {
        sparse.proximity_count = Some(p);
    }
    if let Some(path) = &a.forbidden_pairs {
        sparse.forbidden_pairs = read_pairs(path)?;
    }
    let dense = solve(&model, &lambda, &domain, &opts, None)?;
    let result = solve_sparse(&model, &lambda, &domain, &sparse, &dense, &opts)?;
    print_json(&result)?;
    Ok(0)
}

fn table_selection(
    lambdas: Option<&str>,
    sweep: &mvsk_core::SweepResult,
    superior: &[(usize, f64)],
) -> Result<Vec<usize>> {
    let Some(lambdas) = lambdas else {
        return Ok(superior.iter().map(|(i, _)| *i).collect());
    };
    lambdas
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let target = parse_lambda(s)?.as_array();
            sweep
                .entries
                .iter()
                .position(|e| {
                    e.point
                        .lambda
                        .as_array()
                        .iter()
                        .zip(&target)
                        .all(|(a, b)| (a - b).abs() < 1e-9)
                })
                .with_context(|| format!("lambda {s:?} is not a grid point"))
        })
        .collect()
}

fn create_file(path: &Path) -> Result<File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn write_file(path: &Path, f: impl FnOnce(BufWriter<File>) -> mvsk_core::Result<()>) -> Result<()> {
    let file = create_file(path)?;
    f(BufWriter::new(file)).with_context(|| format!("writing {}", path.display()))
}

fn cmd_sweep(a: SweepArgs, cfg: &RunConfig) -> Result<u8> {
    let model = load_model(&a.source, cfg)?;
    let domain = resolve_domain(&a.domain, cfg)?;
    let s = a.grid_s.or(cfg.grid_s).unwrap_or(40);
    let eta = a.eta.or(cfg.eta).unwrap_or(DEFAULT_ETA);
    if !(eta > 0.0 && eta < 1.0) {
        bail!("--eta must lie in (0, 1), got {eta}");
    }
    let filter = !a.no_lambda1_filter && cfg.lambda1_filter.unwrap_or(true);
    let sparse_k = a.sparse_k.or(cfg.sparse_k);

    let grid = build_grid(s, filter)?;
    let opts = SweepOptions {
        solver: solver_options(a.max_iter, cfg, false),
        sparse: sparse_k.map(|k| SparseOptions::new(k, model.n())),
        warm_start: !a.cold_start,
        bounds: None,
    };
    let sweep = scale_values(run_sweep(&model, &domain, &grid, &opts)?);
    let superior = superior_set(&sweep, eta)?;
    let histogram = support_histogram(&sweep);
    let violations = non_domination_check(&sweep, None, DOMINANCE_MARGIN);

    let dir = out_dir(a.out_dir.as_ref(), cfg)?;
    let meta = SweepMeta {
        s,
        domain: domain.clone(),
        sparse_k,
        eta: Some(eta),
        data_fingerprint: report::data_fingerprint(&model)?,
        require_positive_mean_weight: filter,
        seed: a.seed.or(cfg.seed),
    };
    let file = report::sweep_file(&sweep, meta);
    write_file(&dir.join("sweep.json"), |w| report::write_sweep_json(w, &file))?;
    write_file(&dir.join("sweep.csv"), |w| report::write_results_csv(w, &sweep))?;
    write_file(&dir.join("support_histogram.csv"), |w| {
        report::write_histogram_csv(w, &histogram)
    })?;
    let selection = table_selection(a.table_lambdas.as_deref(), &sweep, &superior)?;
    write_file(&dir.join("table.csv"), |w| {
        report::write_table_csv(w, &sweep, &selection)
    })?;

    let summary = SweepSummary {
        grid_points: grid.len(),
        failures: sweep.failures(),
        max_aggregate: sweep.aggregate.iter().flatten().copied().reduce(f64::max),
        eta,
        superior,
        support_histogram: histogram,
        violations,
    };
    write_file(&dir.join("summary.json"), |w| {
        Ok(serde_json::to_writer_pretty(w, &summary)?)
    })?;
    println!(
        "grid points: {}, failures: {}, max aggregate: {}, superior: {}, violations: {}",
        summary.grid_points,
        summary.failures,
        summary.max_aggregate.map_or("n/a".into(), |v| format!("{v:.6}")),
        summary.superior.len(),
        summary.violations.len(),
    );
    if summary.failures > 0 {
        for (i, e) in sweep.entries.iter().enumerate() {
            if let Err(msg) = &e.outcome {
                eprintln!("lambda #{i} {:?}: {msg}", e.point.lambda.as_array());
            }
        }
        return Ok(2);
    }
    Ok(0)
}

fn cmd_synth(a: SynthArgs, cfg: &RunConfig) -> Result<u8> {
    let seed = a.seed.or(cfg.seed).unwrap_or(0);
    let table = synth::generate(&SynthConfig { n: a.n, m: a.m, seed })?;
    let path = match a.out {
        Some(p) => p,
        None => out_dir(a.out_dir.as_ref(), cfg)?.join("returns.csv"),
    };
    write_file(&path, |w| table.write_csv(w))?;
    println!(
        "wrote {} ({} assets x {} samples, seed {seed})",
        path.display(),
        table.n(),
        table.m()
    );
    Ok(0)
}

fn cmd_report(a: ReportArgs, cfg: &RunConfig) -> Result<u8> {
    let text = fs::read_to_string(&a.sweep).with_context(|| format!("reading {}", a.sweep.display()))?;
    let file: SweepFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", a.sweep.display()))?;
    let eta = a.eta.or(cfg.eta).or(file.meta.eta).unwrap_or(DEFAULT_ETA);
    if !(eta > 0.0 && eta < 1.0) {
        bail!("eta must lie in (0, 1), got {eta}");
    }
    let max = file.results.iter().filter_map(|r| r.aggregate).reduce(f64::max);
    let superior: Vec<usize> = match max {
        Some(max) => file
            .results
            .iter()
            .enumerate()
            .filter(|(_, r)| r.aggregate.is_some_and(|v| v >= (1.0 - eta) * max))
            .map(|(i, _)| i)
            .collect(),
        None => Vec::new(),
    };
    let selection: Vec<usize> = match &a.table_lambdas {
        None => superior.clone(),
        Some(lambdas) => lambdas
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                let target = parse_lambda(s)?.as_array();
                file.results
                    .iter()
                    .position(|r| r.lambda.iter().zip(&target).all(|(x, y)| (x - y).abs() < 1e-9))
                    .with_context(|| format!("lambda {s:?} is not in the sweep"))
            })
            .collect::<Result<_>>()?,
    };

    let out: Box<dyn Write> = match &a.out {
        Some(p) => Box::new(create_file(p)?),
        None => Box::new(std::io::stdout()),
    };
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record([
        "lambda",
        "f1_scaled",
        "f2_scaled",
        "f3_scaled",
        "f4_scaled",
        "support_size",
    ])?;
    for i in selection {
        let r = &file.results[i];
        let (Some(scaled), Some(support)) = (r.scaled, r.support_size) else {
            continue;
        };
        let lambda = r
            .lambda
            .iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join(", ");
        let mut row = vec![format!("[{lambda}]")];
        row.extend(scaled.iter().map(|x| format!("{x:.3}")));
        row.push(support.to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    eprintln!(
        "{} results, max aggregate {}, {} within eta = {eta}",
        file.results.len(),
        max.map_or("n/a".into(), |v| format!("{v:.6}")),
        superior.len()
    );
    Ok(0)
}
