//! Seeded Monte Carlo harness.
//!
//! Trial `i` of an experiment draws all of its randomness from
//! `SeedSpec::new(master_seed, i)`, so results do not depend on how trials are
//! scheduled. [`Executor`] runs trials on a rayon pool and always returns them
//! in index order.

mod battery;
mod binomial;
pub mod stats;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coloring::{GreedyOrder, Solver};
use crate::error::{Error, Result};
use crate::point_process::{sample_binomial, sample_poisson, PointSet, SeedSpec};
use crate::theory::{self, TheoryReport};

pub use battery::{
    property_battery, property_battery_with, sweep_vs_exact, tiling_check, BatteryConfig,
    BatteryReport, ExactHook, SweepComparison, TilingCheck, Violation,
};
pub use binomial::{
    concentration_check, efron_stein_check, monotone_coupling_check, BinomialStudy,
    ConcentrationRow, CouplingReport, EfronSteinRow,
};
use stats::{jackknife_variance, mean_var, Z95};

/// Environment variable capping worker threads (0 or unset: one per core).
pub const THREADS_ENV: &str = "GEOCHROME_THREADS";

/// Where trials run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Executor {
    threads: usize,
}

impl Executor {
    /// `threads == 0` means one worker per core.
    pub fn with_threads(threads: usize) -> Self {
        Self { threads }
    }

    pub fn serial() -> Self {
        Self { threads: 1 }
    }

    pub fn from_env() -> Self {
        let threads = std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0);
        Self { threads }
    }

    /// `f(0), .., f(n - 1)`, in index order.
    pub fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        if self.threads == 1 {
            return (0..n).map(f).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .expect("thread pool");
        pool.install(|| (0..n).into_par_iter().map(f).collect())
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::from_env()
    }
}

/// Where the points come from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum Model {
    /// Poisson process of intensity `lambda` on `[0, t]^dim`, radius 1.
    Poisson { dim: usize, lambda: f64, t: f64 },
    /// `n` uniform points in the unit cube, radius `(nu / n)^(1/dim)`.
    Binomial { dim: usize, n: usize, nu: f64 },
}

impl Model {
    pub fn dim(&self) -> usize {
        match *self {
            Model::Poisson { dim, .. } | Model::Binomial { dim, .. } => dim,
        }
    }

    pub fn radius(&self) -> f64 {
        match *self {
            Model::Poisson { .. } => 1.0,
            Model::Binomial { dim, n, nu } => (nu / n as f64).powf(1.0 / dim as f64),
        }
    }

    /// Denominator of the coloring ratio: `lambda t^d`, or `n`.
    pub fn normalizer(&self) -> f64 {
        match *self {
            Model::Poisson { dim, lambda, t } => lambda * t.powi(dim as i32),
            Model::Binomial { n, .. } => n as f64,
        }
    }

    /// Intensity in the unit-radius picture.
    pub fn intensity(&self) -> f64 {
        match *self {
            Model::Poisson { lambda, .. } => lambda,
            Model::Binomial { nu, .. } => nu,
        }
    }

    pub fn sample(&self, seed: SeedSpec) -> Result<PointSet> {
        match *self {
            Model::Poisson { dim, lambda, t } => sample_poisson(dim, lambda, t, seed),
            Model::Binomial { dim, n, .. } => sample_binomial(dim, n, seed),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        match *self {
            Model::Poisson { lambda, t, .. } => {
                if !(lambda.is_finite() && lambda > 0.0) {
                    return Err(Error::invalid("lambda", format!("{lambda} is not positive")));
                }
                if !(t.is_finite() && t > 0.0) {
                    return Err(Error::invalid("t", format!("{t} is not positive")));
                }
            }
            Model::Binomial { n, nu, .. } => {
                if n == 0 {
                    return Err(Error::invalid("n", "must be at least 1"));
                }
                if !(nu.is_finite() && nu > 0.0) {
                    return Err(Error::invalid("nu", format!("{nu} is not positive")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: Model,
    pub k: u32,
    pub trials: usize,
    pub master_seed: u64,
    pub solver: Solver,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if matches!(self.solver, Solver::Sweep1d) && self.model.dim() != 1 {
            return Err(Error::invalid("method", "sweep1d requires dim = 1"));
        }
        if matches!(self.solver, Solver::Anchor { .. }) && self.model.dim() > 2 {
            return Err(Error::invalid("method", "anchor requires dim <= 2"));
        }
        Ok(())
    }

    /// Same configuration on a cube of side `t` (Poisson model only).
    pub fn with_side(&self, t: f64) -> Self {
        let mut cfg = *self;
        if let Model::Poisson { dim, lambda, .. } = self.model {
            cfg.model = Model::Poisson { dim, lambda, t };
        }
        cfg
    }
}

/// Realized point count and colored count of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub points: usize,
    pub colored: usize,
}

/// Runs trial `index` of `cfg`.
pub fn run_trial(cfg: &ExperimentConfig, index: usize) -> Result<TrialOutcome> {
    let seed = SeedSpec::new(cfg.master_seed, index as u64);
    let ps = cfg.model.sample(seed)?;
    let solver = match cfg.solver {
        Solver::Greedy {
            order: GreedyOrder::Random(base),
        } => Solver::Greedy {
            order: GreedyOrder::Random(SeedSpec::new(base, index as u64).child(1).mixed()),
        },
        other => other,
    };
    let coloring = solver.solve(&ps, cfg.model.radius(), cfg.k)?;
    Ok(TrialOutcome {
        points: ps.len(),
        colored: coloring.colored_count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateSummary {
    pub config: ExperimentConfig,
    /// Colored count per trial; `None` for trials the solver could not finish.
    pub counts: Vec<Option<usize>>,
    /// Realized point count per trial.
    pub points: Vec<usize>,
    pub failed: usize,
    pub mean_ratio: f64,
    pub se_ratio: f64,
    pub ci95_ratio: [f64; 2],
    pub var_count: f64,
    /// Total colored over total realized points.
    pub realized_ratio: f64,
    pub wall_time_secs: f64,
}

impl EstimateSummary {
    pub fn successful_counts(&self) -> Vec<f64> {
        self.counts.iter().flatten().map(|&c| c as f64).collect()
    }
}

pub fn estimate_ratio(cfg: &ExperimentConfig) -> Result<EstimateSummary> {
    estimate_ratio_with(cfg, &Executor::from_env())
}

/// Estimates the coloring ratio of `cfg` over independent trials.
///
/// Trials whose exact solve hits the component cap are recorded and skipped;
/// more than 1% of them fails the whole estimate.
pub fn estimate_ratio_with(cfg: &ExperimentConfig, exec: &Executor) -> Result<EstimateSummary> {
    cfg.validate()?;
    let start = Instant::now();
    let outcomes = exec.map(cfg.trials, |i| run_trial(cfg, i));

    let mut counts = Vec::with_capacity(cfg.trials);
    let mut points = Vec::with_capacity(cfg.trials);
    let mut failed = 0;
    for outcome in outcomes {
        match outcome {
            Ok(o) => {
                counts.push(Some(o.colored));
                points.push(o.points);
            }
            Err(Error::ComponentTooLarge { .. }) => {
                failed += 1;
                counts.push(None);
                points.push(0);
            }
            Err(e) => return Err(e),
        }
    }
    if failed * 100 > cfg.trials {
        return Err(Error::TooManyFailedTrials {
            failed,
            trials: cfg.trials,
        });
    }

    let xs: Vec<f64> = counts.iter().flatten().map(|&c| c as f64).collect();
    let (mean, var) = mean_var(&xs);
    let norm = cfg.model.normalizer();
    let se = (var / xs.len() as f64).sqrt() / norm;
    let mean_ratio = mean / norm;
    let colored_total: f64 = xs.iter().sum();
    let points_total: usize = counts
        .iter()
        .zip(&points)
        .filter(|(c, _)| c.is_some())
        .map(|(_, &p)| p)
        .sum();
    Ok(EstimateSummary {
        config: *cfg,
        counts,
        points,
        failed,
        mean_ratio,
        se_ratio: se,
        ci95_ratio: [mean_ratio - Z95 * se, mean_ratio + Z95 * se],
        var_count: var,
        realized_ratio: if points_total == 0 {
            0.0
        } else {
            colored_total / points_total as f64
        },
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub t: f64,
    pub var_count: f64,
    /// `var_count / t^d`.
    pub var_norm: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub trials: usize,
    pub failed: usize,
}

/// Normalized variance of the colored count across cube sides.
pub fn variance_scan(base: &ExperimentConfig, t_grid: &[f64], exec: &Executor) -> Result<Vec<VarianceRow>> {
    let dim = poisson_dim(base)?;
    t_grid
        .iter()
        .map(|&t| {
            let summary = estimate_ratio_with(&base.with_side(t), exec)?;
            let scale = t.powi(dim as i32);
            let (var, lo, hi) = jackknife_variance(&summary.successful_counts());
            Ok(VarianceRow {
                t,
                var_count: var,
                var_norm: var / scale,
                ci_lo: lo / scale,
                ci_hi: hi / scale,
                trials: summary.config.trials,
                failed: summary.failed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub t: f64,
    pub method: String,
    pub mean_ratio: f64,
    pub se_ratio: f64,
    pub a_exact: Option<f64>,
    pub deviation: Option<f64>,
    pub a_lower: f64,
    pub a_upper: f64,
    pub trials: usize,
    pub failed: usize,
}

/// Mean ratio per cube side and solver, next to the theoretical constant (on
/// the line) or its bounds. An empty `solvers` list means `base.solver`.
///
/// A solver that fails on too many trials yields a row with a NaN mean.
pub fn convergence_scan(
    base: &ExperimentConfig,
    t_grid: &[f64],
    solvers: &[Solver],
    exec: &Executor,
) -> Result<Vec<ConvergenceRow>> {
    let dim = poisson_dim(base)?;
    let report = TheoryReport::compute(dim, base.model.intensity(), base.k, &theory::default_s_grid())?;
    let solvers: Vec<Solver> = if solvers.is_empty() {
        vec![base.solver]
    } else {
        solvers.to_vec()
    };
    let mut rows = Vec::new();
    for &t in t_grid {
        for &solver in &solvers {
            let cfg = ExperimentConfig {
                solver,
                ..base.with_side(t)
            };
            let (mean, se, failed) = match estimate_ratio_with(&cfg, exec) {
                Ok(s) => (s.mean_ratio, s.se_ratio, s.failed),
                Err(Error::TooManyFailedTrials { failed, .. }) => (f64::NAN, f64::NAN, failed),
                Err(e) => return Err(e),
            };
            rows.push(ConvergenceRow {
                t,
                method: solver.method().as_str().to_string(),
                mean_ratio: mean,
                se_ratio: se,
                a_exact: report.a_exact,
                deviation: report.a_exact.map(|a| (mean - a).abs()),
                a_lower: report.a_lower,
                a_upper: report.a_upper,
                trials: cfg.trials,
                failed,
            });
        }
    }
    Ok(rows)
}

fn poisson_dim(cfg: &ExperimentConfig) -> Result<usize> {
    match cfg.model {
        Model::Poisson { dim, .. } => Ok(dim),
        Model::Binomial { .. } => Err(Error::invalid("model", "scans over t need the Poisson model")),
    }
}
