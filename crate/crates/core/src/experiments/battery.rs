//! Structural property battery.
//!
//! Every case draws a small random instance and checks the exact count
//! against the relations it must satisfy: subadditivity, additivity across
//! well separated parts, monotonicity in the point set and in the radius,
//! the scale exchange `N_r(aV) = N_{r/a}(V)`, the one-Lipschitz property under
//! point replacement, agreement with the line sweep, and additivity over
//! components. Heuristic solvers must never beat the exact count. Violations
//! are collected with the seed of the case that produced them.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{estimate_ratio_with, ExperimentConfig, Executor, Model};
use crate::coloring::{
    max_colorable_anchor, max_colorable_exact, max_colorable_greedy, max_colorable_sweep_1d,
    validate_coloring, Coloring, GreedyOrder, Solver, DEFAULT_COMPONENT_CAP,
};
use crate::error::{Error, Result};
use crate::geo_graph::{build_graph, scale_points, GeoGraph};
use crate::point_process::{sample_binomial, sample_poisson, PointSet, SeedSpec};
use crate::theory::v_d;

/// Stand-in for the exact solver, so the battery can be pointed at a broken
/// one to prove it notices.
pub type ExactHook<'a> = &'a (dyn Fn(&GeoGraph, u32) -> Result<Coloring> + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub dim: usize,
    pub cases: usize,
    pub max_points: usize,
    pub master_seed: u64,
    pub cap: usize,
    /// Trials per side for the tiling check; 0 skips it.
    pub tiling_trials: usize,
}

impl BatteryConfig {
    pub fn new(dim: usize, cases: usize, master_seed: u64) -> Self {
        Self {
            dim,
            cases,
            max_points: if dim == 1 { 16 } else { 14 },
            master_seed,
            cap: DEFAULT_COMPONENT_CAP,
            tiling_trials: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub property: String,
    pub case: usize,
    pub seed: SeedSpec,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryReport {
    pub config: BatteryConfig,
    /// Number of checks evaluated per property.
    pub checks: BTreeMap<String, usize>,
    pub violations: Vec<Violation>,
    pub tiling: Option<TilingCheck>,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn property_battery(cfg: &BatteryConfig, exec: &Executor) -> Result<BatteryReport> {
    let cap = cfg.cap;
    let exact = move |g: &GeoGraph, k: u32| max_colorable_exact(g, k, cap);
    property_battery_with(cfg, &exact, exec)
}

/// Runs the battery with `exact` standing in for the exact solver.
pub fn property_battery_with(cfg: &BatteryConfig, exact: ExactHook<'_>, exec: &Executor) -> Result<BatteryReport> {
    if cfg.dim == 0 {
        return Err(Error::invalid("dim", "must be at least 1"));
    }
    if cfg.cases == 0 {
        return Err(Error::invalid("cases", "must be at least 1"));
    }
    if cfg.max_points == 0 {
        return Err(Error::invalid("max_points", "must be at least 1"));
    }
    let tallies = exec.map(cfg.cases, |case| run_case(cfg, exact, case));

    let mut checks = BTreeMap::new();
    let mut violations = Vec::new();
    for tally in tallies {
        for (name, count) in tally.checks {
            *checks.entry(name.to_string()).or_insert(0) += count;
        }
        violations.extend(tally.violations);
    }

    let tiling = if cfg.tiling_trials > 0 {
        // Mean degree is held at the plane's 0.5 pi so the exact solver stays cheap.
        let (lambda, k, s, t) = match cfg.dim {
            1 => (1.0, 2, 10.0, 40.0),
            2 => (0.5, 2, 4.0, 10.0),
            d => (0.5 * v_d(2, 1.0) / v_d(d, 1.0), 2, 3.0, 6.0),
        };
        let check = tiling_check(cfg.dim, lambda, k, s, t, cfg.tiling_trials, cfg.master_seed, exec)?;
        *checks.entry("tiling".to_string()).or_insert(0) += 2;
        for (side, ok) in [("upper", check.upper_holds), ("lower", check.lower_holds)] {
            if !ok {
                violations.push(Violation {
                    property: format!("tiling_{side}"),
                    case: 0,
                    seed: SeedSpec::new(cfg.master_seed, 0),
                    detail: format!("{check:?}"),
                });
            }
        }
        Some(check)
    } else {
        None
    };

    Ok(BatteryReport {
        config: *cfg,
        checks,
        violations,
        tiling,
    })
}

#[derive(Default)]
struct Tally {
    checks: BTreeMap<&'static str, usize>,
    violations: Vec<Violation>,
}

struct Case<'a> {
    index: usize,
    seed: SeedSpec,
    k: u32,
    exact: ExactHook<'a>,
    tally: Tally,
}

impl Case<'_> {
    fn check(&mut self, property: &'static str, ok: bool, detail: impl FnOnce() -> String) {
        *self.tally.checks.entry(property).or_insert(0) += 1;
        if !ok {
            self.violations_push(property, detail());
        }
    }

    fn violations_push(&mut self, property: &str, detail: String) {
        self.tally.violations.push(Violation {
            property: property.to_string(),
            case: self.index,
            seed: self.seed,
            detail,
        });
    }

    /// Exact count on the radius-`r` graph of `ps`, validating the coloring.
    fn count(&mut self, ps: &PointSet, r: f64) -> Option<usize> {
        let g = match build_graph(ps, r) {
            Ok(g) => g,
            Err(e) => {
                self.violations_push("solver_error", e.to_string());
                return None;
            }
        };
        self.count_on(&g)
    }

    fn count_on(&mut self, g: &GeoGraph) -> Option<usize> {
        match (self.exact)(g, self.k) {
            Ok(c) => {
                let ok = validate_coloring(g, &c).unwrap_or(false);
                self.check("properness", ok, || format!("exact solver returned {:?}", c.assignment));
                Some(c.colored_count)
            }
            Err(e) => {
                self.violations_push("solver_error", e.to_string());
                None
            }
        }
    }
}

fn run_case(cfg: &BatteryConfig, exact: ExactHook<'_>, index: usize) -> Tally {
    let seed = SeedSpec::new(cfg.master_seed, index as u64);
    let mut rng = seed.rng();
    let dim = cfg.dim;
    let n = rng.random_range(1..=cfg.max_points);
    let k = rng.random_range(1..=4u32);
    let degree: f64 = rng.random_range(0.5..4.0);
    let r = 1.0;
    let side = (n as f64 * v_d(dim, r) / degree).powf(1.0 / dim as f64);
    let mut case = Case {
        index,
        seed,
        k,
        exact,
        tally: Tally::default(),
    };
    let ps = match sample_binomial(dim, n, seed.child(1)).and_then(|p| scale_points(&p, side)) {
        Ok(ps) => ps,
        Err(e) => {
            case.violations_push("instance", e.to_string());
            return case.tally;
        }
    };
    if let Err(e) = check_instance(&mut case, &mut rng, &ps, r) {
        case.violations_push("solver_error", e.to_string());
    }
    case.tally
}

fn check_instance<R: Rng>(case: &mut Case<'_>, rng: &mut R, ps: &PointSet, r: f64) -> Result<()> {
    let n = ps.len();
    let dim = ps.dim();
    let k = case.k;
    let g = build_graph(ps, r)?;
    let Some(full) = case.count_on(&g) else {
        return Ok(());
    };

    // Components.
    let mut total = 0;
    for comp in g.components() {
        if let Some(c) = case.count(&ps.select(&comp), r) {
            total += c;
        }
    }
    case.check("component_additivity", total == full, || {
        format!("sum over components {total} vs whole {full}")
    });

    // Random split.
    let (left, right): (Vec<usize>, Vec<usize>) = (0..n).partition(|_| rng.random_bool(0.5));
    if let (Some(a), Some(b)) = (case.count(&ps.select(&left), r), case.count(&ps.select(&right), r)) {
        case.check("subadditivity", full <= a + b, || format!("N(V) = {full} > {a} + {b}"));
    }

    // Split at the median of the first axis and pull the halves more than r apart.
    let mut by_x: Vec<usize> = (0..n).collect();
    by_x.sort_by(|&a, &b| ps.point(a)[0].total_cmp(&ps.point(b)[0]));
    let cut = ps.point(by_x[n / 2])[0];
    let (low, high): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| ps.point(i)[0] < cut);
    let shift = 1.25 * r;
    let mut coords = Vec::with_capacity(n);
    for &i in low.iter().chain(&high) {
        let mut p = ps.point(i).to_vec();
        if ps.point(i)[0] >= cut {
            p[0] += shift;
        }
        coords.push(p);
    }
    let joined = PointSet::from_points(dim, ps.side() + shift, &coords)?;
    let low_part = joined.select(&(0..low.len()).collect::<Vec<_>>());
    let high_part = joined.select(&(low.len()..n).collect::<Vec<_>>());
    if let (Some(u), Some(a), Some(b)) = (
        case.count(&joined, r),
        case.count(&low_part, r),
        case.count(&high_part, r),
    ) {
        case.check("separated_superadditivity", u >= a + b, || {
            format!("separated union {u} < {a} + {b}")
        });
        case.check("subadditivity", u <= a + b, || format!("separated union {u} > {a} + {b}"));
    }

    // Subset.
    let subset: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
    if let Some(s) = case.count(&ps.select(&subset), r) {
        case.check("subset_monotonicity", s <= full, || format!("N(U) = {s} > N(V) = {full}"));
    }

    // Larger radius.
    let r2 = r * (1.0 + rng.random::<f64>());
    if let Some(c2) = case.count(ps, r2) {
        case.check("r_monotonicity", c2 <= full, || format!("N at r = {r2} is {c2} > {full}"));
    }

    // Scale exchange, power-of-two factors.
    let alpha = 2f64.powi(rng.random_range(1..=2) * if rng.random_bool(0.5) { 1 } else { -1 });
    let scaled = scale_points(ps, alpha)?;
    let g_scaled = build_graph(&scaled, r)?;
    let g_shrunk = build_graph(ps, r / alpha)?;
    case.check("scale_exchange", g_scaled.edges() == g_shrunk.edges(), || {
        format!("edge sets differ for alpha = {alpha}")
    });
    if let (Some(a), Some(b)) = (case.count_on(&g_scaled), case.count_on(&g_shrunk)) {
        case.check("scale_exchange", a == b, || format!("alpha = {alpha}: {a} vs {b}"));
    }

    // Replace one point.
    let i = rng.random_range(0..n);
    let fresh: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * ps.side()).collect();
    let replaced = ps.replace_point(i, &fresh)?;
    if let Some(c) = case.count(&replaced, r) {
        case.check("one_lipschitz", full.abs_diff(c) <= 1, || {
            format!("replacing point {i}: {full} -> {c}")
        });
    }

    // Other solvers.
    if dim == 1 {
        let sweep = max_colorable_sweep_1d(ps, r, k)?;
        let ok = validate_coloring(&g, &sweep)?;
        case.check("properness", ok, || format!("sweep returned {:?}", sweep.assignment));
        case.check("sweep_vs_exact", sweep.colored_count == full, || {
            format!("sweep {} vs exact {full}", sweep.colored_count)
        });
    }
    let greedy = max_colorable_greedy(&g, k, GreedyOrder::Random(case.seed.child(2).mixed()));
    let ok = validate_coloring(&g, &greedy)?;
    case.check("properness", ok, || format!("greedy returned {:?}", greedy.assignment));
    case.check("heuristic_below_exact", greedy.colored_count <= full, || {
        format!("greedy {} > exact {full}", greedy.colored_count)
    });
    if dim <= 2 {
        let s = if dim == 1 { 1.0 } else { 1.5 };
        let anchor = max_colorable_anchor(ps, r, k, s)?;
        let ok = validate_coloring(&g, &anchor)?;
        case.check("properness", ok, || format!("anchor returned {:?}", anchor.assignment));
        case.check("heuristic_below_exact", anchor.colored_count <= full, || {
            format!("anchor {} > exact {full}", anchor.colored_count)
        });
    }
    Ok(())
}

/// Expected-value form of the tiling bounds
/// `M^l E[F(s)] <= E[F(t)] <= M^u E[F(s)]` with `M^u = ceil(t/s)^d` and
/// `M^l = floor(t/(s+1))^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TilingCheck {
    pub dim: usize,
    pub lambda: f64,
    pub k: u32,
    pub s: f64,
    pub t: f64,
    pub trials: usize,
    pub m_upper: f64,
    pub m_lower: f64,
    pub mean_t: f64,
    pub se_t: f64,
    pub mean_s: f64,
    pub se_s: f64,
    pub upper_holds: bool,
    pub lower_holds: bool,
}

/// Slack is four combined standard errors of the two sides.
#[allow(clippy::too_many_arguments)]
pub fn tiling_check(
    dim: usize,
    lambda: f64,
    k: u32,
    s: f64,
    t: f64,
    trials: usize,
    master_seed: u64,
    exec: &Executor,
) -> Result<TilingCheck> {
    let solver = if dim == 1 {
        Solver::Sweep1d
    } else {
        Solver::Exact {
            cap: DEFAULT_COMPONENT_CAP,
        }
    };
    let run = |side: f64, seed: u64| {
        let cfg = ExperimentConfig {
            model: Model::Poisson { dim, lambda, t: side },
            k,
            trials,
            master_seed: seed,
            solver,
        };
        estimate_ratio_with(&cfg, exec).map(|e| {
            let norm = cfg.model.normalizer();
            (e.mean_ratio * norm, e.se_ratio * norm)
        })
    };
    let streams = SeedSpec::new(master_seed, u64::MAX);
    let (mean_t, se_t) = run(t, streams.child(0).mixed())?;
    let (mean_s, se_s) = run(s, streams.child(1).mixed())?;
    let m_upper = (t / s).ceil().powi(dim as i32);
    let m_lower = (t / (s + 1.0)).floor().powi(dim as i32);
    let slack = |m: f64| 4.0 * (se_t * se_t + m * m * se_s * se_s).sqrt();
    Ok(TilingCheck {
        dim,
        lambda,
        k,
        s,
        t,
        trials,
        m_upper,
        m_lower,
        mean_t,
        se_t,
        mean_s,
        se_s,
        upper_holds: mean_t <= m_upper * mean_s + slack(m_upper),
        lower_holds: mean_t >= m_lower * mean_s - slack(m_lower),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepComparison {
    pub cases: usize,
    pub max_component: usize,
    /// `(case, sweep count, exact count)` for every disagreement.
    pub mismatches: Vec<(usize, usize, usize)>,
}

/// Compares the sweep with the exact solver on random Poisson instances on
/// `[0, 20]` with intensities {0.5, 1, 2} and `k` in {1, 2, 3}. Instances
/// with a component above `max_component` vertices are redrawn.
pub fn sweep_vs_exact(cases: usize, max_component: usize, master_seed: u64, exec: &Executor) -> Result<SweepComparison> {
    const LAMBDAS: [f64; 3] = [0.5, 1.0, 2.0];
    let results = exec.map(cases, |case| -> Result<(usize, usize, usize)> {
        let lambda = LAMBDAS[case % 3];
        let k = 1 + ((case / 3) % 3) as u32;
        let base = SeedSpec::new(master_seed, case as u64);
        for attempt in 0.. {
            let ps = sample_poisson(1, lambda, 20.0, base.child(attempt))?;
            let g = build_graph(&ps, 1.0)?;
            let biggest = g.components().iter().map(Vec::len).max().unwrap_or(0);
            if biggest > max_component {
                continue;
            }
            let sweep = max_colorable_sweep_1d(&ps, 1.0, k)?.colored_count;
            let exact = max_colorable_exact(&g, k, max_component.max(DEFAULT_COMPONENT_CAP))?.colored_count;
            return Ok((sweep, exact, biggest));
        }
        unreachable!()
    });
    let mut mismatches = Vec::new();
    let mut max_seen = 0;
    for (case, res) in results.into_iter().enumerate() {
        let (sweep, exact, biggest) = res?;
        max_seen = max_seen.max(biggest);
        if sweep != exact {
            mismatches.push((case, sweep, exact));
        }
    }
    Ok(SweepComparison {
        cases,
        max_component: max_seen,
        mismatches,
    })
}
