//! The `geochrome` command line.
//!
//! Exit codes: 0 on success, 1 on internal errors, 2 on invalid usage or
//! input, 3 when a verification command finds violations.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::coloring::{GreedyOrder, Solver, DEFAULT_COMPONENT_CAP};
use crate::error::{Error, Result};
use crate::experiments::{
    self, BatteryConfig, BinomialStudy, ExperimentConfig, Executor, Model,
};
use crate::output::{write_json, write_table, Format, Metadata};
use crate::point_process::{sample_binomial, sample_poisson, PointSet, SeedSpec};
use crate::theory::{self, TheoryReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "geochrome", version, about = "Maximum k-colorable subgraphs of random geometric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a point set (Poisson with --lambda/--t, binomial with --n)
    Gen(GenArgs),
    /// Color a point set read from a JSON file
    Solve(SolveArgs),
    /// Closed forms and bounds for the limiting coloring ratio
    Theory(TheoryArgs),
    /// Monte Carlo estimate of the coloring ratio
    Estimate(EstimateArgs),
    /// Normalized variance of the colored count over cube sides
    VarianceScan(ScanArgs),
    /// Mean coloring ratio over cube sides against theory
    ConvergenceScan(ScanArgs),
    /// Structural property battery against the exact solver
    Battery(BatteryArgs),
    /// Run the verification suites
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Exact,
    Sweep1d,
    Greedy,
    Anchor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    Index,
    Random,
    #[value(name = "degree_asc")]
    DegreeAsc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    All,
    Battery,
    SweepVsExact,
    EfronStein,
    Concentration,
    Sandwich,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Output file (default: stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolverArgs {
    /// Solver
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Largest piece the exact solver accepts
    #[arg(long, default_value_t = DEFAULT_COMPONENT_CAP)]
    cap: usize,
    /// Vertex order for the greedy solver
    #[arg(long, value_enum, default_value = "index")]
    order: OrderArg,
    /// Anchor covering radius (default: the best value for the lower bound)
    #[arg(long)]
    s: Option<f64>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Dimension of the cube
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Poisson intensity
    #[arg(long)]
    lambda: Option<f64>,
    /// Cube side for the Poisson model
    #[arg(long)]
    t: Option<f64>,
    /// Point count for the binomial model
    #[arg(long)]
    n: Option<usize>,
    /// Master seed (default: drawn from system entropy)
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Point set JSON file
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
    /// Coloring radius
    #[arg(long)]
    r: f64,
    /// Number of colors
    #[arg(long)]
    k: u32,
    #[command(flatten)]
    solver: SolverArgs,
    /// Seed for --order random
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct TheoryArgs {
    /// Dimension of the cube
    #[arg(long)]
    dim: usize,
    /// Poisson intensity
    #[arg(long)]
    lambda: f64,
    /// Number of colors
    #[arg(long)]
    k: u32,
    /// Comma-separated anchor radii (default: 64 geometric values in [0.05, 5])
    #[arg(long, value_delimiter = ',')]
    s_grid: Option<Vec<f64>>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Dimension of the cube
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Poisson intensity
    #[arg(long)]
    lambda: Option<f64>,
    /// Cube side for the Poisson model
    #[arg(long)]
    t: Option<f64>,
    /// Point count (selects the binomial model)
    #[arg(long)]
    n: Option<usize>,
    /// Expected degree parameter of the binomial model
    #[arg(long)]
    nu: Option<f64>,
    /// Number of colors
    #[arg(long)]
    k: u32,
    /// Independent trials
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Master seed (default: drawn from system entropy)
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ScanArgs {
    /// Dimension of the cube
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Poisson intensity
    #[arg(long)]
    lambda: f64,
    /// Number of colors
    #[arg(long)]
    k: u32,
    /// Comma-separated cube sides
    #[arg(long, value_delimiter = ',', required = true)]
    t_grid: Vec<f64>,
    /// Independent trials
    #[arg(long, default_value_t = 400)]
    trials: usize,
    /// Master seed (default: drawn from system entropy)
    #[arg(long)]
    seed: Option<u64>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BatteryArgs {
    /// Dimension of the cube
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Random instances
    #[arg(long, default_value_t = 1000)]
    cases: usize,
    /// Master seed (default: drawn from system entropy)
    #[arg(long)]
    seed: Option<u64>,
    /// Largest piece the exact solver accepts
    #[arg(long, default_value_t = DEFAULT_COMPONENT_CAP)]
    cap: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Which suite to run
    #[arg(long, value_enum, default_value = "all")]
    suite: Suite,
    /// Battery cases on the line (the plane gets half as many)
    #[arg(long, default_value_t = 1000)]
    cases: usize,
    /// Master seed (default: drawn from system entropy)
    #[arg(long)]
    seed: Option<u64>,
    /// Dimension for the variance and concentration suites
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Expected degree parameter of the binomial model
    #[arg(long, default_value_t = 2.0)]
    nu: f64,
    /// Number of colors
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Point count for the concentration suite
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Point counts for the variance suite
    #[arg(long, value_delimiter = ',', default_value = "50,100")]
    n_grid: Vec<usize>,
    /// Deviations for the concentration suite
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.2")]
    delta_grid: Vec<f64>,
    /// Trials for the variance and concentration suites (default 2000 and 5000)
    #[arg(long)]
    trials: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{text}");
            } else {
                let _ = write!(stdout, "{text}");
            }
            return e.exit_code();
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter { .. }
        | Error::CountCapExceeded { .. }
        | Error::IndexOutOfRange { .. }
        | Error::PointOutsideCube { .. }
        | Error::DimensionMismatch { .. }
        | Error::LengthMismatch { .. }
        | Error::ComponentTooLarge { .. }
        | Error::TooManyFailedTrials { .. }
        | Error::Json(_) => EXIT_USAGE,
        _ => EXIT_INTERNAL,
    }
}

fn resolve_seed(seed: Option<u64>, stderr: &mut dyn Write) -> u64 {
    let seed = seed.unwrap_or_else(rand::random);
    let _ = writeln!(stderr, "master_seed={seed}");
    seed
}

fn with_output(args: &OutputArgs, stdout: &mut dyn Write, f: impl FnOnce(&mut dyn Write, Format) -> Result<()>) -> Result<()> {
    let format = match args.format {
        FormatArg::Json => Format::Json,
        FormatArg::Csv => Format::Csv,
    };
    match &args.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            f(&mut w, format)?;
            w.flush()?;
            Ok(())
        }
        None => f(stdout, format),
    }
}

fn meta(command: &str, master_seed: u64, config: impl Serialize) -> Result<Metadata> {
    Ok(Metadata {
        command: command.to_string(),
        master_seed,
        config: serde_json::to_value(config)?,
    })
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Gen(a) => gen(a, stdout, stderr),
        Command::Solve(a) => solve(a, stdout, stderr),
        Command::Theory(a) => theory_cmd(a, stdout),
        Command::Estimate(a) => estimate(a, stdout, stderr),
        Command::VarianceScan(a) => variance_scan(a, stdout, stderr),
        Command::ConvergenceScan(a) => convergence_scan(a, stdout, stderr),
        Command::Battery(a) => battery(a, stdout, stderr),
        Command::Verify(a) => verify(a, stdout, stderr),
    }
}

fn gen(a: GenArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let seed = resolve_seed(a.seed, stderr);
    let spec = SeedSpec::new(seed, 0);
    let ps = match (a.n, a.lambda, a.t) {
        (Some(n), None, None) => sample_binomial(a.dim, n, spec)?,
        (None, Some(lambda), Some(t)) => sample_poisson(a.dim, lambda, t, spec)?,
        _ => {
            return Err(Error::invalid(
                "gen",
                "give either --n (binomial) or both --lambda and --t (Poisson)",
            ))
        }
    };
    with_output(&a.output, stdout, |w, format| match format {
        Format::Json => write_json(w, &ps),
        Format::Csv => {
            #[derive(Serialize)]
            struct Config {
                dim: usize,
                side: f64,
            }
            let rows: Vec<Vec<f64>> = ps.iter().map(<[f64]>::to_vec).collect();
            writeln!(w, "# {}", serde_json::to_string(&meta("gen", seed, Config { dim: ps.dim(), side: ps.side() })?)?)?;
            let mut cw = csv::WriterBuilder::new().has_headers(false).from_writer(&mut *w);
            cw.write_record((0..ps.dim()).map(|i| format!("x{i}")))?;
            for row in rows {
                cw.serialize(row)?;
            }
            cw.flush()?;
            Ok(())
        }
    })?;
    Ok(EXIT_OK)
}

fn greedy_order(order: OrderArg, seed: u64) -> GreedyOrder {
    match order {
        OrderArg::Index => GreedyOrder::Index,
        OrderArg::Random => GreedyOrder::Random(seed),
        OrderArg::DegreeAsc => GreedyOrder::DegreeAsc,
    }
}

/// Builds the solver; `default_s` supplies the anchor radius when --s is absent.
fn build_solver(
    args: &SolverArgs,
    default: MethodArg,
    seed: u64,
    default_s: impl FnOnce() -> Result<f64>,
) -> Result<Solver> {
    Ok(match args.method.unwrap_or(default) {
        MethodArg::Exact => Solver::Exact { cap: args.cap },
        MethodArg::Sweep1d => Solver::Sweep1d,
        MethodArg::Greedy => Solver::Greedy {
            order: greedy_order(args.order, seed),
        },
        MethodArg::Anchor => Solver::Anchor {
            s: match args.s {
                Some(s) => s,
                None => default_s()?,
            },
        },
    })
}

fn best_s(dim: usize, lambda: f64, k: u32) -> Result<f64> {
    Ok(theory::a_lower_bound(dim, lambda, k, &theory::default_s_grid())?.best_s)
}

fn solve(a: SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(&a.input)?;
    let ps: PointSet = serde_json::from_str(&text)?;
    let seed = match (a.solver.method, a.solver.order) {
        (Some(MethodArg::Greedy), OrderArg::Random) => resolve_seed(a.seed, stderr),
        _ => a.seed.unwrap_or(0),
    };
    let solver = build_solver(&a.solver, MethodArg::Exact, seed, || {
        Err(Error::invalid("s", "--method anchor needs --s"))
    })?;
    let coloring = solver.solve(&ps, a.r, a.k)?;
    if let Some(w) = &coloring.warning {
        let _ = writeln!(stderr, "warning: {w}");
    }
    with_output(&a.output, stdout, |w, format| match format {
        Format::Json => write_json(w, &coloring),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                index: usize,
                color: u32,
            }
            let rows: Vec<Row> = coloring
                .assignment
                .iter()
                .enumerate()
                .map(|(index, &color)| Row { index, color })
                .collect();
            let m = meta(
                "solve",
                seed,
                serde_json::json!({"r": a.r, "k": a.k, "method": coloring.method,
                    "colored_count": coloring.colored_count}),
            )?;
            write_table(w, format, &m, &rows)
        }
    })?;
    Ok(EXIT_OK)
}

fn theory_cmd(a: TheoryArgs, stdout: &mut dyn Write) -> Result<i32> {
    let grid = a.s_grid.unwrap_or_else(theory::default_s_grid);
    let report = TheoryReport::compute(a.dim, a.lambda, a.k, &grid)?;
    with_output(&a.output, stdout, |w, format| match format {
        Format::Json => write_json(w, &report),
        Format::Csv => write_table(w, format, &meta("theory", 0, &grid)?, std::slice::from_ref(&report)),
    })?;
    Ok(EXIT_OK)
}

fn estimate_config(a: &EstimateArgs, seed: u64) -> Result<ExperimentConfig> {
    let model = match (a.n, a.nu, a.lambda, a.t) {
        (Some(n), Some(nu), None, None) => Model::Binomial { dim: a.dim, n, nu },
        (None, None, Some(lambda), Some(t)) => Model::Poisson { dim: a.dim, lambda, t },
        _ => {
            return Err(Error::invalid(
                "model",
                "give either --n and --nu (binomial) or --lambda and --t (Poisson)",
            ))
        }
    };
    let default = if a.dim == 1 { MethodArg::Sweep1d } else { MethodArg::Exact };
    let solver = build_solver(&a.solver, default, seed, || best_s(a.dim, model.intensity(), a.k))?;
    Ok(ExperimentConfig {
        model,
        k: a.k,
        trials: a.trials,
        master_seed: seed,
        solver,
    })
}

fn estimate(a: EstimateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let seed = resolve_seed(a.seed, stderr);
    let cfg = estimate_config(&a, seed)?;
    let summary = experiments::estimate_ratio(&cfg)?;
    with_output(&a.output, stdout, |w, format| match format {
        Format::Json => write_json(w, &summary),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                mean_ratio: f64,
                se_ratio: f64,
                ci_lo: f64,
                ci_hi: f64,
                var_count: f64,
                realized_ratio: f64,
                trials: usize,
                failed: usize,
                wall_time_secs: f64,
            }
            let row = Row {
                mean_ratio: summary.mean_ratio,
                se_ratio: summary.se_ratio,
                ci_lo: summary.ci95_ratio[0],
                ci_hi: summary.ci95_ratio[1],
                var_count: summary.var_count,
                realized_ratio: summary.realized_ratio,
                trials: cfg.trials,
                failed: summary.failed,
                wall_time_secs: summary.wall_time_secs,
            };
            write_table(w, format, &meta("estimate", seed, cfg)?, &[row])
        }
    })?;
    Ok(EXIT_OK)
}

fn scan_config(a: &ScanArgs, seed: u64) -> Result<ExperimentConfig> {
    let t0 = a.t_grid.first().copied().unwrap_or(1.0);
    let default = if a.dim == 1 { MethodArg::Sweep1d } else { MethodArg::Exact };
    let solver = build_solver(&a.solver, default, seed, || best_s(a.dim, a.lambda, a.k))?;
    Ok(ExperimentConfig {
        model: Model::Poisson {
            dim: a.dim,
            lambda: a.lambda,
            t: t0,
        },
        k: a.k,
        trials: a.trials,
        master_seed: seed,
        solver,
    })
}

fn variance_scan(a: ScanArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let seed = resolve_seed(a.seed, stderr);
    let cfg = scan_config(&a, seed)?;
    let rows = experiments::variance_scan(&cfg, &a.t_grid, &Executor::from_env())?;
    let m = meta("variance-scan", seed, serde_json::json!({"base": cfg, "t_grid": a.t_grid}))?;
    with_output(&a.output, stdout, |w, format| write_table(w, format, &m, &rows))?;
    Ok(EXIT_OK)
}

fn convergence_scan(a: ScanArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let seed = resolve_seed(a.seed, stderr);
    let cfg = scan_config(&a, seed)?;
    // Without --method the plane gets all three solvers side by side.
    let solvers = if a.solver.method.is_none() && a.dim >= 2 {
        let mut list = vec![
            Solver::Exact { cap: a.solver.cap },
            Solver::Greedy {
                order: greedy_order(a.solver.order, seed),
            },
        ];
        if a.dim == 2 {
            let s = match a.solver.s {
                Some(s) => s,
                None => best_s(a.dim, a.lambda, a.k)?,
            };
            list.push(Solver::Anchor { s });
        }
        list
    } else {
        vec![cfg.solver]
    };
    let rows = experiments::convergence_scan(&cfg, &a.t_grid, &solvers, &Executor::from_env())?;
    let m = meta("convergence-scan", seed, serde_json::json!({"base": cfg, "t_grid": a.t_grid}))?;
    with_output(&a.output, stdout, |w, format| write_table(w, format, &m, &rows))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct PropertyRow {
    property: String,
    checks: usize,
    violations: usize,
}

fn property_rows(report: &experiments::BatteryReport) -> Vec<PropertyRow> {
    report
        .checks
        .iter()
        .map(|(name, &checks)| PropertyRow {
            property: name.clone(),
            checks,
            violations: report
                .violations
                .iter()
                .filter(|v| v.property == *name || v.property.starts_with(&format!("{name}_")))
                .count(),
        })
        .collect()
}

fn battery(a: BatteryArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let seed = resolve_seed(a.seed, stderr);
    let mut cfg = BatteryConfig::new(a.dim, a.cases, seed);
    cfg.cap = a.cap;
    let report = experiments::property_battery(&cfg, &Executor::from_env())?;
    with_output(&a.output, stdout, |w, format| match format {
        Format::Json => write_json(w, &report),
        Format::Csv => write_table(w, format, &meta("battery", seed, cfg)?, &property_rows(&report)),
    })?;
    for v in &report.violations {
        let _ = writeln!(stderr, "violation: {} (case {}): {}", v.property, v.case, v.detail);
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_VIOLATION })
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: String,
    pub passed: bool,
    pub summary: String,
    #[serde(skip)]
    pub details: serde_json::Value,
}

fn verify(a: VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let seed = resolve_seed(a.seed, stderr);
    let exec = Executor::from_env();
    let want = |s: Suite| a.suite == Suite::All || a.suite == s;
    let mut results = Vec::new();

    if want(Suite::Battery) {
        let mut violations = 0;
        let mut details = Vec::new();
        for (dim, cases) in [(1, a.cases), (2, (a.cases / 2).max(1))] {
            let report = experiments::property_battery(&BatteryConfig::new(dim, cases, seed), &exec)?;
            violations += report.violations.len();
            details.push(serde_json::to_value(&report)?);
        }
        results.push(SuiteResult {
            suite: "battery".into(),
            passed: violations == 0,
            summary: format!("{violations} violations over {} + {} cases", a.cases, (a.cases / 2).max(1)),
            details: serde_json::Value::Array(details),
        });
    }
    if want(Suite::SweepVsExact) {
        let cmp = experiments::sweep_vs_exact(a.cases, 16, seed, &exec)?;
        results.push(SuiteResult {
            suite: "sweep-vs-exact".into(),
            passed: cmp.mismatches.is_empty(),
            summary: format!("{} mismatches over {} instances", cmp.mismatches.len(), cmp.cases),
            details: serde_json::to_value(&cmp)?,
        });
    }
    if want(Suite::EfronStein) {
        let study = BinomialStudy::new(a.dim, a.nu, a.k, a.trials.unwrap_or(2000), seed);
        let rows = experiments::efron_stein_check(&study, &a.n_grid, &exec)?;
        let n_max = a.n_grid.iter().copied().max().unwrap_or(1);
        let coupling = experiments::monotone_coupling_check(&study, n_max, 500, &exec)?;
        let passed = rows.iter().all(|r| r.ci_hi <= r.bound) && coupling.violations.is_empty();
        let summary = rows
            .iter()
            .map(|r| format!("n={}: var {:.3} (ci_hi {:.3}) vs {}", r.n, r.var_h, r.ci_hi, r.bound))
            .collect::<Vec<_>>()
            .join("; ");
        results.push(SuiteResult {
            suite: "efron-stein".into(),
            passed,
            summary: format!("{summary}; coupling violations {}", coupling.violations.len()),
            details: serde_json::json!({"rows": rows, "coupling": coupling}),
        });
    }
    if want(Suite::Concentration) {
        let study = BinomialStudy::new(a.dim, a.nu, a.k, a.trials.unwrap_or(5000), seed);
        let rows = experiments::concentration_check(&study, a.n, &a.delta_grid, &exec)?;
        let passed = rows.iter().all(|r| r.empirical <= r.bound);
        let summary = rows
            .iter()
            .map(|r| format!("delta={}: {} vs {:.4}", r.delta, r.empirical, r.bound))
            .collect::<Vec<_>>()
            .join("; ");
        results.push(SuiteResult {
            suite: "concentration".into(),
            passed,
            summary,
            details: serde_json::to_value(&rows)?,
        });
    }
    if want(Suite::Sandwich) {
        let grid = theory::default_s_grid();
        let mut failures = Vec::new();
        for lambda in [0.5, 1.0, 2.0, 4.0] {
            for k in [1, 2, 4, 8] {
                let lb = theory::a_lower_bound(1, lambda, k, &grid)?.value;
                let a1 = theory::a_one_dim(lambda, k);
                let ub = theory::a_upper_bound(1, lambda, k, theory::GMaxMode::Sharp)?;
                if !(lb <= a1 && a1 <= ub) {
                    failures.push(serde_json::json!({"lambda": lambda, "k": k, "lower": lb, "exact": a1, "upper": ub}));
                }
            }
        }
        results.push(SuiteResult {
            suite: "sandwich".into(),
            passed: failures.is_empty(),
            summary: format!("{} exceptions over 16 (lambda, k) pairs", failures.len()),
            details: serde_json::Value::Array(failures),
        });
    }

    for r in &results {
        let _ = writeln!(stderr, "{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.suite, r.summary);
    }
    let m = meta("verify", seed, serde_json::json!({"suite": format!("{:?}", a.suite), "cases": a.cases}))?;
    with_output(&a.output, stdout, |w, format| match format {
        Format::Json => {
            let full: Vec<_> = results
                .iter()
                .map(|r| serde_json::json!({"suite": r.suite, "passed": r.passed, "summary": r.summary, "details": r.details}))
                .collect();
            write_json(w, &serde_json::json!({"metadata": m, "suites": full}))
        }
        Format::Csv => write_table(w, format, &m, &results),
    })?;
    Ok(if results.iter().all(|r| r.passed) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}
