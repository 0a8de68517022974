//! Seeded Monte Carlo engines and scaling bookkeeping.
//!
//! Replicate `r` of every sampler draws from `stream(seed, r)`. Replicates
//! run in parallel but are collected in index order, so results do not
//! depend on the size of the thread pool.

use rayon::prelude::*;

use crate::distmodel::DistributionModel;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::rng::{stream, Stream};
use crate::stats::CompensatedSum;

/// Generator of the speed `v_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedKind {
    Linear,
    Log,
}

impl SpeedKind {
    pub fn value(&self, n: u64) -> f64 {
        match self {
            SpeedKind::Linear => n as f64,
            SpeedKind::Log => (n as f64).ln(),
        }
    }
}

/// Which principle a scaling reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// `0 < beta < 1`: a genuine moderate-deviation scaling.
    Moderate,
    /// `beta = 1`, i.e. `a_n = 1/v_n`: the large deviation principle itself.
    LargeDeviationBoundary,
    /// `beta = 0`, i.e. `a_n = 1`: the weak-convergence normalization.
    WeakConvergenceBoundary,
}

/// A pair `(v_n, a_n)` with `a_n = v_n^{-beta}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFamily {
    pub speed: SpeedKind,
    pub beta: f64,
    pub label: String,
}

impl ScalingFamily {
    /// `beta` may sit on either end of `[0, 1]`; such families are flagged
    /// through [`ScalingFamily::regime`].
    pub fn new(speed: SpeedKind, beta: f64, label: impl Into<String>) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::Argument(format!("beta = {beta} outside [0, 1]")));
        }
        Ok(Self {
            speed,
            beta,
            label: label.into(),
        })
    }

    pub fn v(&self, n: u64) -> f64 {
        self.speed.value(n)
    }

    pub fn a(&self, n: u64) -> f64 {
        self.v(n).powf(-self.beta)
    }

    pub fn regime(&self) -> Regime {
        if self.beta == 1.0 {
            Regime::LargeDeviationBoundary
        } else if self.beta == 0.0 {
            Regime::WeakConvergenceBoundary
        } else {
            Regime::Moderate
        }
    }

    /// Numerical witness of `a_n -> 0` and `a_n v_n -> infinity` between the
    /// first and last sample sizes of a grid.
    pub fn satisfies_md_conditions(&self, n_first: u64, n_last: u64) -> bool {
        let (a1, an) = (self.a(n_first), self.a(n_last));
        let (v1, vn) = (self.v(n_first), self.v(n_last));
        an < 0.1 * a1 && an * vn > 10.0 * a1 * v1
    }
}

/// Choice of the sequence `L(n)` in the noncentral normalization `n L(n) (Z_n - M)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LSequence {
    /// `L(n) = F'(M-)` for every `n`.
    #[default]
    Constant,
    /// `L(n) = 1 / (n (M - F^{-1}(1 - 1/n)))`.
    QuantileBased,
}

impl LSequence {
    pub fn value(&self, model: &DistributionModel, n: u64) -> Result<f64> {
        let upper = model
            .support()
            .upper
            .finite()
            .ok_or_else(|| Error::UnsupportedRegime("L(n) needs a finite right endpoint".into()))?;
        match self {
            LSequence::Constant => model
                .right_density()
                .ok_or_else(|| Error::UnsupportedRegime("no density at the right endpoint".into())),
            LSequence::QuantileBased => {
                let nf = n as f64;
                Ok(1.0 / (nf * (upper - model.quantile(1.0 - 1.0 / nf))))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumMaxSample {
    /// Sample mean `(W_1 + ... + W_n) / n`.
    pub y: f64,
    /// Sample maximum.
    pub z: f64,
    pub n: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimaSample {
    /// `sum_k min(W_1..W_k) / log n`.
    pub x: f64,
    pub n: u64,
}

/// Runs `f` once per replicate on its own stream, results in replicate order.
pub fn replicate<T: Send>(seed: u64, reps: usize, f: impl Fn(&mut Stream) -> T + Sync) -> Vec<T> {
    (0..reps as u64)
        .into_par_iter()
        .map(|r| f(&mut stream(seed, r)))
        .collect()
}

/// One replicate of `(Y_n, Z_n)`.
pub fn draw_sum_max(model: &DistributionModel, n: u64, rng: &mut Stream) -> SumMaxSample {
    let mut sum = CompensatedSum::new();
    let mut max = f64::NEG_INFINITY;
    for _ in 0..n {
        let w = model.sample_one(rng);
        sum.add(w);
        max = max.max(w);
    }
    SumMaxSample {
        y: sum.value() / n as f64,
        z: max,
        n,
    }
}

pub fn sample_sum_max(model: &DistributionModel, n: u64, reps: usize, seed: u64) -> Vec<SumMaxSample> {
    assert!(n >= 1 && reps >= 1);
    replicate(seed, reps, |rng| draw_sum_max(model, n, rng))
}

/// Draws of `n Y_n` given `Z_n = z`: `z` plus `n - 1` independent draws from
/// the law truncated to `(-inf, z)`.
pub fn sample_sum_given_max(model: &DistributionModel, n: u64, z: f64, reps: usize, seed: u64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::Argument("conditional sampling needs n >= 2".into()));
    }
    let truncated = model.truncate(z)?;
    Ok(replicate(seed, reps, |rng| {
        let mut sum = CompensatedSum::new();
        sum.add(z);
        for _ in 1..n {
            sum.add(truncated.sample_one(rng));
        }
        sum.value()
    }))
}

/// One replicate of the partial-minima sum of `n` Exponential(`lambda`) draws.
///
/// All `n` uniforms are consumed, but a draw is only turned into an
/// exponential variate when it sets a new minimum: with inverse-CDF
/// sampling `W < m` is equivalent to `U < 1 - e^{-lambda m}`. Between
/// records the running minimum is constant, so its contribution is added
/// once per record as `m * duration`.
pub fn draw_partial_minima(lambda: f64, n: u64, rng: &mut Stream) -> MinimaSample {
    let mut sum = CompensatedSum::new();
    let mut m = -(-rng.uniform()).ln_1p() / lambda;
    let mut threshold = -(-lambda * m).exp_m1();
    let mut since = 1u64;
    for _ in 1..n {
        let u = rng.uniform();
        if u < threshold {
            sum.add(m * since as f64);
            m = -(-u).ln_1p() / lambda;
            threshold = -(-lambda * m).exp_m1();
            since = 1;
        } else {
            since += 1;
        }
    }
    sum.add(m * since as f64);
    MinimaSample {
        x: sum.value() / (n as f64).ln(),
        n,
    }
}

pub fn sample_partial_minima(lambda: f64, n: u64, reps: usize, seed: u64) -> Vec<MinimaSample> {
    assert!(lambda > 0.0 && n >= 2 && reps >= 1);
    replicate(seed, reps, |rng| draw_partial_minima(lambda, n, rng))
}

/// Log moment generating function of `sum_k min(W_1..W_k)` at `s`:
/// `sum_k log(1 + u / (k (1 - u)))` with `u = s / lambda`, and `+inf` once `u >= 1`.
pub fn minima_log_mgf(lambda: f64, n: u64, s: f64) -> ExtReal {
    assert!(lambda > 0.0 && n >= 1);
    let u = s / lambda;
    if u >= 1.0 {
        return ExtReal::PosInf;
    }
    let c = u / (1.0 - u);
    let total: CompensatedSum = (1..=n).map(|k| (c / k as f64).ln_1p()).collect();
    ExtReal::Finite(total.value())
}

/// Certified half-width for `log(1 + x) >= x - v x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Log1pBound {
    /// The bound holds at every point of a dense grid on `(-delta, delta)`.
    pub holds: bool,
    pub delta: f64,
}

/// Finds `delta(v)` such that `log(1 + x) >= x - v x^2` for `|x| < delta`.
///
/// `g(x) = log(1+x) - x + v x^2` is positive for `x > 0`, decreases to 0
/// on `(1/(2v) - 1, 0)` and tends to `-inf` at `-1`, so `delta` is the
/// distance to its negative root, located by bisection.
pub fn log1p_lower_bound_check(v: f64) -> Result<Log1pBound> {
    if v.is_nan() || v <= 0.5 {
        return Err(Error::Precondition(format!("v = {v} must exceed 1/2")));
    }
    let g = |x: f64| x.ln_1p() - x + v * x * x;
    let (mut lo, mut hi) = (-1.0 + f64::EPSILON, 0.5 / v - 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = -hi;
    let steps = 100_000;
    let holds = (1..steps).all(|i| {
        let x = -delta + 2.0 * delta * i as f64 / steps as f64;
        g(x) >= -4.0 * f64::EPSILON * x.abs()
    });
    Ok(Log1pBound { holds, delta })
}
