//! Closed-form and semi-analytic quantities.
//!
//! Everything here uses the unit-radius convention: the coloring radius is 1
//! and `lambda` is the intensity of the point process, i.e. the expected
//! number of points per unit volume. General radii follow by scaling.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Volume of the `dim`-dimensional Euclidean ball of the given radius,
/// `pi^(d/2) r^d / Gamma(d/2 + 1)`.
pub fn v_d(dim: usize, radius: f64) -> f64 {
    unit_ball_volume(dim) * radius.powi(dim as i32)
}

// V_d = 2 pi / d * V_{d-2}, starting from V_0 = 1 and V_1 = 2.
fn unit_ball_volume(dim: usize) -> f64 {
    let (mut v, mut d) = if dim.is_multiple_of(2) { (1.0, 2) } else { (2.0, 3) };
    while d <= dim {
        v *= 2.0 * PI / d as f64;
        d += 2;
    }
    v
}

/// Erlang loss probability `(lambda^k / k!) / sum_{l <= k} lambda^l / l!`,
/// evaluated with the recurrence `B(j) = lambda B(j-1) / (j + lambda B(j-1))`.
pub fn erlang_b(lambda: f64, k: u32) -> f64 {
    let mut b = 1.0;
    for j in 1..=k {
        b = lambda * b / (j as f64 + lambda * b);
    }
    b
}

/// Erlang loss probability by direct log-space summation of the series.
pub fn erlang_b_direct(lambda: f64, k: u32) -> f64 {
    if lambda == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let ln_lambda = lambda.ln();
    let terms: Vec<f64> = (0..=k)
        .map(|l| l as f64 * ln_lambda - ln_factorial(l as u64))
        .collect();
    (terms[k as usize] - log_sum_exp(&terms)).exp()
}

/// Limiting fraction of colorable points on the line: `1 - erlang_b(lambda, k)`.
pub fn a_one_dim(lambda: f64, k: u32) -> f64 {
    1.0 - erlang_b(lambda, k)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln(m!)`.
pub fn ln_factorial(m: u64) -> f64 {
    if m < 128 {
        (2..=m).map(|i| (i as f64).ln()).sum()
    } else {
        let x = m as f64;
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        x * x.ln() - x
            + 0.5 * (2.0 * PI * x).ln()
            + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
    }
}

/// `P(Po(mu) = m)`, evaluated in log space.
pub fn poisson_pmf(mu: f64, m: u64) -> f64 {
    if mu == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    (m as f64 * mu.ln() - mu - ln_factorial(m)).exp()
}

/// First two moments of `min{Po(mu), cap}`.
///
/// Below the mean the lower sum is used; above it the upper tail is summed
/// directly, since `1 - P(X < cap)` would cancel.
fn truncated_poisson_moments(mu: f64, cap: u64) -> (f64, f64) {
    let c = cap as f64;
    if c <= mu {
        let mut below = 0.0;
        let mut first = 0.0;
        let mut second = 0.0;
        for j in 0..cap {
            let p = poisson_pmf(mu, j);
            let jf = j as f64;
            below += p;
            first += jf * p;
            second += jf * jf * p;
        }
        let tail = (1.0 - below).max(0.0);
        return (first + c * tail, second + c * c * tail);
    }
    // E[(X - c)^+] and E[(X^2 - c^2)^+] over j > cap.
    let mut excess1 = 0.0;
    let mut excess2 = 0.0;
    let mut j = cap + 1;
    let mut p = poisson_pmf(mu, j);
    while p > 0.0 {
        let jf = j as f64;
        let d1 = (jf - c) * p;
        excess1 += d1;
        excess2 += (jf * jf - c * c) * p;
        if d1 <= excess1 * 1e-17 {
            break;
        }
        j += 1;
        p *= mu / j as f64;
    }
    let m1 = (mu - excess1).clamp(0.0, mu.min(c));
    let m2 = (mu + mu * mu - excess2).clamp(0.0, c * c);
    (m1, m2)
}

/// `E[min{Po(mu), cap}]`.
pub fn truncated_poisson_mean(mu: f64, cap: u64) -> f64 {
    truncated_poisson_moments(mu, cap).0
}

/// `Var(min{Po(mu), cap})`.
pub fn truncated_poisson_variance(mu: f64, cap: u64) -> f64 {
    let (m1, m2) = truncated_poisson_moments(mu, cap);
    (m2 - m1 * m1).max(0.0)
}

/// Which bound on the maximum density of a unit-separated point set to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GMaxMode {
    /// Disjoint balls of radius 1/2 around the points, valid in any dimension.
    HalfBall,
    /// Best known packing density, d <= 2 only.
    Sharp,
}

/// Upper bound on the density of a point set whose pairwise distances exceed 1.
pub fn g_max_upper(dim: usize, mode: GMaxMode) -> Result<f64> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be at least 1"));
    }
    match (mode, dim) {
        (GMaxMode::HalfBall, _) => Ok(1.0 / v_d(dim, 0.5)),
        (GMaxMode::Sharp, 1) => Ok(1.0),
        (GMaxMode::Sharp, 2) => Ok(2.0 / 3f64.sqrt()),
        (GMaxMode::Sharp, _) => Err(Error::invalid(
            "mode",
            format!("sharp packing density is only available for d <= 2, got d = {dim}"),
        )),
    }
}

/// Packing upper bound `min{1, k g_max / lambda}` on the limiting ratio.
pub fn a_upper_bound(dim: usize, lambda: f64, k: u32, mode: GMaxMode) -> Result<f64> {
    let g = g_max_upper(dim, mode)?;
    Ok((k as f64 * g / lambda).min(1.0))
}

/// Anchor points ("base stations") for the constructive lower bound.
///
/// Anchors sit at the centres of the cells of a cubic lattice of spacing
/// `anchor_spacing`, so every point of the positive orthant is within `s` of
/// an anchor. An anchor with lattice index `(i_1, .., i_d)` belongs to group
/// `(i_1 mod p, .., i_d mod p)`; two anchors in one group are at least
/// `p * anchor_spacing >= 1 + 2s` apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorLattice {
    pub dim: usize,
    pub s: f64,
    pub anchor_spacing: f64,
    pub period: u64,
    pub group_count: u64,
}

impl AnchorLattice {
    pub fn new(dim: usize, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::invalid("s", format!("{s} is not positive")));
        }
        let spacing = match dim {
            1 => 2.0 * s,
            2 => s * 2f64.sqrt(),
            _ => {
                return Err(Error::invalid(
                    "dim",
                    format!("anchor lattices exist for d in {{1, 2}}, got {dim}"),
                ))
            }
        };
        let separation = 1.0 + 2.0 * s;
        let mut period = (separation / spacing).ceil() as u64;
        while (period as f64) * spacing < separation {
            period += 1;
        }
        Ok(Self {
            dim,
            s,
            anchor_spacing: spacing,
            period,
            group_count: period.pow(dim as u32),
        })
    }

    /// Position of the anchor with the given lattice index.
    pub fn anchor(&self, index: &[i64]) -> Vec<f64> {
        index
            .iter()
            .map(|&i| (i as f64 + 0.5) * self.anchor_spacing)
            .collect()
    }

    /// Group of an anchor, in `0..group_count`.
    pub fn group_of(&self, index: &[i64]) -> u64 {
        let p = self.period as i64;
        index
            .iter()
            .fold(0u64, |acc, &i| acc * self.period + i.rem_euclid(p) as u64)
    }

    /// Lattice index of the anchor nearest to `point`, which must lie in the
    /// positive orthant. Equidistant anchors are resolved towards the
    /// lexicographically smallest coordinates.
    pub fn nearest(&self, point: &[f64]) -> Vec<i64> {
        let base: Vec<i64> = point
            .iter()
            .map(|&x| (x / self.anchor_spacing).floor() as i64)
            .collect();
        let dim = point.len();
        let mut best: Option<(f64, Vec<i64>)> = None;
        let mut offset = vec![-1i64; dim];
        loop {
            let cand: Vec<i64> = base.iter().zip(&offset).map(|(b, o)| b + o).collect();
            if cand.iter().any(|&c| c < 0) {
                if !advance(&mut offset) {
                    break;
                }
                continue;
            }
            let pos = self.anchor(&cand);
            let d2: f64 = pos.iter().zip(point).map(|(a, x)| (a - x) * (a - x)).sum();
            let better = match &best {
                None => true,
                Some((bd, bi)) => d2 < *bd || (d2 == *bd && cand < *bi),
            };
            if better {
                best = Some((d2, cand));
            }
            if !advance(&mut offset) {
                break;
            }
        }
        best.expect("the base cell is always a candidate").1
    }
}

// Odometer over {-1, 0, 1}^d.
fn advance(offset: &mut [i64]) -> bool {
    for o in offset.iter_mut() {
        if *o < 1 {
            *o += 1;
            return true;
        }
        *o = -1;
    }
    false
}

pub fn anchor_lattice(dim: usize, s: f64) -> Result<AnchorLattice> {
    AnchorLattice::new(dim, s)
}

/// Number of anchor groups of the lattice construction.
pub fn m_of_s(dim: usize, s: f64) -> Result<u64> {
    Ok(AnchorLattice::new(dim, s)?.group_count)
}

/// 64 geometrically spaced values of `s` in `[0.05, 5]`.
pub fn default_s_grid() -> Vec<f64> {
    let (lo, hi) = (0.05f64, 5.0f64);
    let steps = 63;
    (0..=steps)
        .map(|i| {
            if i == steps {
                hi
            } else {
                lo * (hi / lo).powf(i as f64 / steps as f64)
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    pub best_s: f64,
}

/// Anchor-construction lower bound
/// `max_s E[min{Po(lambda V_d(s)), floor(k / m(s))}] / (lambda V_d(s))`.
pub fn a_lower_bound(dim: usize, lambda: f64, k: u32, s_grid: &[f64]) -> Result<LowerBound> {
    if s_grid.is_empty() {
        return Err(Error::invalid("s_grid", "must not be empty"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", format!("{lambda} is not positive")));
    }
    let mut best = LowerBound {
        value: 0.0,
        best_s: s_grid[0],
    };
    for &s in s_grid {
        let value = anchor_ratio(dim, lambda, k, s)?;
        if value > best.value {
            best = LowerBound { value, best_s: s };
        }
    }
    Ok(best)
}

/// The bound's objective at a single `s`.
pub fn anchor_ratio(dim: usize, lambda: f64, k: u32, s: f64) -> Result<f64> {
    let m = m_of_s(dim, s)?;
    let per_anchor = k as u64 / m;
    let mu = lambda * v_d(dim, s);
    Ok(truncated_poisson_mean(mu, per_anchor) / mu)
}

/// Constant `q sigma_k^2 / 6^d` with `q = exp(-lambda (V_d(3/2) - V_d(1/2)))` and
/// `sigma_k^2 = Var(min{k, Po(lambda V_d(1/2))})`; a lower bound on
/// `Var(F) / t^d` for all `t > 3`.
pub fn variance_lb_constant(dim: usize, lambda: f64, k: u32) -> f64 {
    let q = (-lambda * (v_d(dim, 1.5) - v_d(dim, 0.5))).exp();
    let sigma2 = truncated_poisson_variance(lambda * v_d(dim, 0.5), k as u64);
    q * sigma2 / 6f64.powi(dim as i32)
}

/// Asymptotic slope of the variance upper bound, `lambda / 2`.
pub fn variance_ub_slope(lambda: f64) -> f64 {
    lambda / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub dim: usize,
    pub lambda: f64,
    pub k: u32,
    pub a_exact: Option<f64>,
    pub a_lower: f64,
    pub best_s: Option<f64>,
    pub a_upper: f64,
    pub var_lb_constant: f64,
    pub var_ub_slope: f64,
}

impl TheoryReport {
    /// Gathers every closed-form quantity for `(dim, lambda, k)`.
    ///
    /// The lower bound comes from the anchor construction for `d <= 2` and is
    /// the trivial 0 above that. The upper bound uses the sharp packing
    /// density where it is known and the half-ball bound otherwise.
    pub fn compute(dim: usize, lambda: f64, k: u32, s_grid: &[f64]) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid("lambda", format!("{lambda} is not positive")));
        }
        let (a_lower, best_s) = if dim <= 2 {
            let lb = a_lower_bound(dim, lambda, k, s_grid)?;
            (lb.value, Some(lb.best_s))
        } else {
            (0.0, None)
        };
        let mode = if dim <= 2 { GMaxMode::Sharp } else { GMaxMode::HalfBall };
        Ok(Self {
            dim,
            lambda,
            k,
            a_exact: (dim == 1).then(|| a_one_dim(lambda, k)),
            a_lower,
            best_s,
            a_upper: a_upper_bound(dim, lambda, k, mode)?,
            var_lb_constant: variance_lb_constant(dim, lambda, k),
            var_ub_slope: variance_ub_slope(lambda),
        })
    }
}
