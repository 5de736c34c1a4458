//! Seeded point processes on cubes.
//!
//! Two models are provided: the homogeneous Poisson process restricted to
//! `[0, t]^d`, and the binomial process of exactly `n` uniform points in the
//! unit cube. Every sample is a pure function of its parameters and a
//! [`SeedSpec`], so trials can be generated in any order or in parallel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper limit on the number of points a single sample may hold.
pub const DEFAULT_COUNT_CAP: u64 = 100_000_000;

// Below this mean the count is drawn by inversion.
const INVERSION_LIMIT: f64 = 30.0;

/// Identifies the random stream of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// 64-bit seed obtained by avalanche-mixing the pair.
    pub fn mixed(&self) -> u64 {
        let a = splitmix64(self.master_seed);
        splitmix64(a ^ splitmix64(self.stream_index.wrapping_add(0x632b_e59b_d9b4_e019)))
    }

    /// A child stream, used when one trial needs several independent sources.
    pub fn child(&self, tag: u64) -> SeedSpec {
        SeedSpec::new(self.mixed(), tag)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.mixed())
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A finite ordered set of points in the cube `[0, side]^dim`.
///
/// Coordinates are stored row-major in a flat buffer; point `i` occupies
/// `coords[i * dim..(i + 1) * dim]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "PointSetJson", try_from = "PointSetJson")]
pub struct PointSet {
    dim: usize,
    side: f64,
    coords: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct PointSetJson {
    dim: usize,
    side: f64,
    points: Vec<Vec<f64>>,
}

impl From<PointSet> for PointSetJson {
    fn from(ps: PointSet) -> Self {
        PointSetJson {
            dim: ps.dim,
            side: ps.side,
            points: ps.iter().map(<[f64]>::to_vec).collect(),
        }
    }
}

impl TryFrom<PointSetJson> for PointSet {
    type Error = Error;

    fn try_from(json: PointSetJson) -> Result<Self> {
        PointSet::from_points(json.dim, json.side, json.points)
    }
}

impl PointSet {
    /// Builds a point set, checking that every coordinate lies in `[0, side]`.
    pub fn from_points<P: AsRef<[f64]>>(
        dim: usize,
        side: f64,
        points: impl IntoIterator<Item = P>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        if !(side.is_finite() && side >= 0.0) {
            return Err(Error::invalid("side", format!("{side} is not a finite nonnegative number")));
        }
        let mut coords = Vec::new();
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            check_inside(p, side)?;
            coords.extend_from_slice(p);
        }
        Ok(Self { dim, side, coords })
    }

    pub fn empty(dim: usize, side: f64) -> Result<Self> {
        Self::from_points::<[f64; 0]>(dim, side, [])
    }

    pub(crate) fn from_raw(dim: usize, side: f64, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len() % dim, 0);
        Self { dim, side, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Points at the given indices, in that order, inside the same cube.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointSet::from_raw(self.dim, self.side, coords)
    }

    /// The first `n` points.
    pub fn prefix(&self, n: usize) -> PointSet {
        let n = n.min(self.len());
        PointSet::from_raw(self.dim, self.side, self.coords[..n * self.dim].to_vec())
    }

    /// Returns a copy with point `index` replaced by `new_point`.
    pub fn replace_point(&self, index: usize, new_point: &[f64]) -> Result<PointSet> {
        if index >= self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        if new_point.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: new_point.len(),
            });
        }
        check_inside(new_point, self.side)?;
        let mut out = self.clone();
        out.coords[index * self.dim..(index + 1) * self.dim].copy_from_slice(new_point);
        Ok(out)
    }
}

fn check_inside(p: &[f64], side: f64) -> Result<()> {
    if p.iter().all(|&x| (0.0..=side).contains(&x)) {
        Ok(())
    } else {
        Err(Error::PointOutsideCube {
            point: p.to_vec(),
            side,
        })
    }
}

/// Free-function form of [`PointSet::replace_point`].
pub fn replace_point(ps: &PointSet, index: usize, new_point: &[f64]) -> Result<PointSet> {
    ps.replace_point(index, new_point)
}

/// Poisson process of intensity `lambda` on `[0, side]^dim`.
pub fn sample_poisson(dim: usize, lambda: f64, side: f64, seed: SeedSpec) -> Result<PointSet> {
    sample_poisson_capped(dim, lambda, side, seed, DEFAULT_COUNT_CAP)
}

pub fn sample_poisson_capped(
    dim: usize,
    lambda: f64,
    side: f64,
    seed: SeedSpec,
    cap: u64,
) -> Result<PointSet> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be at least 1"));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid("lambda", format!("{lambda} is not positive")));
    }
    if !(side.is_finite() && side > 0.0) {
        return Err(Error::invalid("side", format!("{side} is not positive")));
    }
    let mean = lambda * side.powi(dim as i32);
    if mean.is_nan() || mean > cap as f64 {
        return Err(Error::CountCapExceeded {
            expected: mean,
            cap,
        });
    }
    let mut rng = seed.rng();
    let n = poisson_count(&mut rng, mean);
    if n > cap {
        return Err(Error::CountCapExceeded {
            expected: n as f64,
            cap,
        });
    }
    Ok(uniform_points(&mut rng, dim, n as usize, side))
}

/// Exactly `n` i.i.d. uniform points in `[0, 1]^dim`.
pub fn sample_binomial(dim: usize, n: usize, seed: SeedSpec) -> Result<PointSet> {
    sample_binomial_capped(dim, n, seed, DEFAULT_COUNT_CAP)
}

pub fn sample_binomial_capped(dim: usize, n: usize, seed: SeedSpec, cap: u64) -> Result<PointSet> {
    if dim == 0 {
        return Err(Error::invalid("dim", "must be at least 1"));
    }
    if n as u64 > cap {
        return Err(Error::CountCapExceeded {
            expected: n as f64,
            cap,
        });
    }
    let mut rng = seed.rng();
    Ok(uniform_points(&mut rng, dim, n, 1.0))
}

fn uniform_points<R: Rng>(rng: &mut R, dim: usize, n: usize, side: f64) -> PointSet {
    // `random::<f64>()` lies in [0, 1), so every coordinate stays in [0, side).
    let coords = (0..n * dim).map(|_| rng.random::<f64>() * side).collect();
    PointSet::from_raw(dim, side, coords)
}

/// Draws a Poisson(`mean`) variate.
pub fn poisson_count<R: Rng>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut p = (-mean).exp();
        let mut cdf = p;
        let mut x = 0u64;
        // The tail beyond mean + 40 sd has probability far below f64 resolution.
        let limit = (mean + 40.0 * mean.sqrt() + 40.0) as u64;
        while u > cdf && x < limit {
            x += 1;
            p *= mean / x as f64;
            cdf += p;
        }
        x
    } else {
        let dist = Poisson::new(mean).expect("mean is finite and positive");
        dist.sample(rng) as u64
    }
}
