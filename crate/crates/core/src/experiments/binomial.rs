//! Fixed-size (binomial) checks: variance bound, concentration, coupling.

use serde::{Deserialize, Serialize};

use super::stats::jackknife_variance;
use super::{estimate_ratio_with, EstimateSummary, ExperimentConfig, Executor, Model};
use crate::coloring::{Solver, DEFAULT_COMPONENT_CAP};
use crate::error::{Error, Result};
use crate::point_process::{sample_binomial, SeedSpec};

/// `H(n)`: the colored count of `n` uniform points in the unit cube with
/// radius `(nu / n)^(1/d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialStudy {
    pub dim: usize,
    pub nu: f64,
    pub k: u32,
    pub trials: usize,
    pub master_seed: u64,
    pub cap: usize,
}

impl BinomialStudy {
    pub fn new(dim: usize, nu: f64, k: u32, trials: usize, master_seed: u64) -> Self {
        Self {
            dim,
            nu,
            k,
            trials,
            master_seed,
            cap: DEFAULT_COMPONENT_CAP,
        }
    }

    /// The sweep on the line, the exact solver elsewhere.
    pub fn solver(&self) -> Solver {
        if self.dim == 1 {
            Solver::Sweep1d
        } else {
            Solver::Exact { cap: self.cap }
        }
    }

    pub fn config(&self, n: usize) -> ExperimentConfig {
        ExperimentConfig {
            model: Model::Binomial {
                dim: self.dim,
                n,
                nu: self.nu,
            },
            k: self.k,
            trials: self.trials,
            master_seed: self.master_seed,
            solver: self.solver(),
        }
    }

    fn run(&self, n: usize, exec: &Executor) -> Result<EstimateSummary> {
        estimate_ratio_with(&self.config(n), exec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfronSteinRow {
    pub n: usize,
    pub mean_h: f64,
    pub var_h: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `n / 2`.
    pub bound: f64,
    pub trials: usize,
    pub failed: usize,
}

/// Empirical `Var(H(n))` against the Efron-Stein bound `n / 2`.
pub fn efron_stein_check(study: &BinomialStudy, n_grid: &[usize], exec: &Executor) -> Result<Vec<EfronSteinRow>> {
    n_grid
        .iter()
        .map(|&n| {
            let s = study.run(n, exec)?;
            let xs = s.successful_counts();
            let (var, lo, hi) = jackknife_variance(&xs);
            Ok(EfronSteinRow {
                n,
                mean_h: s.mean_ratio * n as f64,
                var_h: var,
                ci_lo: lo,
                ci_hi: hi,
                bound: n as f64 / 2.0,
                trials: study.trials,
                failed: s.failed,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub delta: f64,
    /// Fraction of trials with `|H/n - mean| >= delta`.
    pub empirical: f64,
    /// `2 exp(-n delta^2 / 2)`.
    pub bound: f64,
    pub trials: usize,
}

/// Tail frequencies of the normalized count against the bounded-difference bound.
pub fn concentration_check(
    study: &BinomialStudy,
    n: usize,
    delta_grid: &[f64],
    exec: &Executor,
) -> Result<Vec<ConcentrationRow>> {
    if let Some(&d) = delta_grid.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
        return Err(Error::invalid("delta", format!("{d} is not a nonnegative number")));
    }
    let s = study.run(n, exec)?;
    let ratios: Vec<f64> = s.successful_counts().iter().map(|c| c / n as f64).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(delta_grid
        .iter()
        .map(|&delta| {
            let hits = ratios.iter().filter(|&&x| (x - mean).abs() >= delta).count();
            ConcentrationRow {
                delta,
                empirical: hits as f64 / ratios.len() as f64,
                bound: 2.0 * (-(n as f64) * delta * delta / 2.0).exp(),
                trials: ratios.len(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingReport {
    pub n: usize,
    pub pairs: usize,
    /// Pair indices where adding the last point lowered the count.
    pub violations: Vec<usize>,
}

/// Draws `n + 1` points and compares the count on the first `n` with the count
/// on all of them, at the radius of size `n`.
pub fn monotone_coupling_check(study: &BinomialStudy, n: usize, pairs: usize, exec: &Executor) -> Result<CouplingReport> {
    let r = (study.nu / n.max(1) as f64).powf(1.0 / study.dim as f64);
    let solver = study.solver();
    let results = exec.map(pairs, |i| -> Result<bool> {
        let ps = sample_binomial(study.dim, n + 1, SeedSpec::new(study.master_seed, i as u64))?;
        let small = solver.solve(&ps.prefix(n), r, study.k)?.colored_count;
        let big = solver.solve(&ps, r, study.k)?.colored_count;
        Ok(big >= small)
    });
    let mut violations = Vec::new();
    for (i, ok) in results.into_iter().enumerate() {
        if !ok? {
            violations.push(i);
        }
    }
    Ok(CouplingReport { n, pairs, violations })
}
