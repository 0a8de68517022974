//! Experiments that confront limit statements with exact formulas or Monte
//! Carlo estimates at finite sample sizes.
//!
//! Every log-probability is reported together with the speed used to
//! normalize it, because the same sequence obeys different principles at
//! different speeds.

use rayon::prelude::*;

use crate::cgf::{ConditionalCgf, KappaPartials};
use crate::distmodel::DistributionModel;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::rates::RateFunction;
use crate::rng::{derive_seed, stream, Stream};
use crate::simulate::{
    draw_partial_minima, draw_sum_max, minima_log_mgf, sample_partial_minima, sample_sum_given_max, sample_sum_max,
    LSequence, ScalingFamily, SpeedKind,
};
use crate::stats::{
    ks_one_sample, ks_two_sample, ks_two_sample_critical, linear_fit, quadrant_chi_square, standard_normal_cdf,
    wilson_interval, Z95,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

/// `(1/v_n) log P(event)` with its confidence interval on the same scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogProbEstimate {
    pub value: ExtReal,
    pub ci_low: ExtReal,
    pub ci_high: ExtReal,
    pub n: u64,
    pub speed_value: f64,
    pub method: Method,
    pub hits: Option<u64>,
}

fn log_scaled(p: f64, v: f64) -> ExtReal {
    if p <= 0.0 {
        ExtReal::NegInf
    } else {
        ExtReal::Finite(p.ln() / v)
    }
}

impl LogProbEstimate {
    pub fn exact(log_p: f64, n: u64, speed_value: f64) -> Self {
        let value = if log_p == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(log_p / speed_value)
        };
        Self {
            value,
            ci_low: value,
            ci_high: value,
            n,
            speed_value,
            method: Method::Exact,
            hits: None,
        }
    }

    /// Wilson 95% interval on the raw frequency, mapped through `log(.)/v_n`.
    /// Zero hits give `value = -inf` with a finite upper bound.
    pub fn from_hits(hits: u64, trials: u64, n: u64, speed_value: f64) -> Self {
        let (lo, hi) = wilson_interval(hits, trials, Z95);
        Self {
            value: log_scaled(hits as f64 / trials as f64, speed_value),
            ci_low: log_scaled(lo, speed_value),
            ci_high: log_scaled(hi, speed_value),
            n,
            speed_value,
            method: Method::MonteCarlo,
            hits: Some(hits),
        }
    }

    /// A zero-hit Monte Carlo estimate: only `ci_high` is informative.
    pub fn is_censored(&self) -> bool {
        self.hits == Some(0)
    }

    pub fn covers(&self, x: f64) -> bool {
        self.ci_low <= ExtReal::Finite(x) && ExtReal::Finite(x) <= self.ci_high
    }
}

/// Monte Carlo frequency of `event` over `reps` replicates of `sampler`,
/// replicate `r` drawing from `stream(seed, r)`.
pub fn estimate_log_prob<T>(
    sampler: impl Fn(&mut Stream) -> T + Sync,
    event: impl Fn(&T) -> bool + Sync,
    n: u64,
    speed_value: f64,
    reps: u64,
    seed: u64,
) -> LogProbEstimate {
    assert!(reps > 0);
    let hits = (0..reps)
        .into_par_iter()
        .filter(|&r| event(&sampler(&mut stream(seed, r))))
        .count() as u64;
    LogProbEstimate::from_hits(hits, reps, n, speed_value)
}

/// Exact `(1/v_n) log P(a < Z_n <= b) = (1/v_n) log(F(b)^n - F(a)^n)`.
/// Either end may be infinite.
pub fn exact_log_prob_max(model: &DistributionModel, n: u64, speed_value: f64, a: f64, b: f64) -> Result<LogProbEstimate> {
    if a >= b || a.is_nan() || b.is_nan() {
        return Err(Error::Argument(format!("empty interval ({a}, {b}]")));
    }
    let nf = n as f64;
    let upper = if b == f64::INFINITY { 0.0 } else { nf * model.log_cdf(b) };
    let lower = if a == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        nf * model.log_cdf(a)
    };
    let log_p = if upper == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if lower == f64::NEG_INFINITY {
        upper
    } else {
        upper + (-(lower - upper).exp_m1()).ln()
    };
    Ok(LogProbEstimate::exact(log_p, n, speed_value))
}

/// Estimates over a grid of sample sizes next to the value predicted by a rate.
#[derive(Debug, Clone, PartialEq)]
pub struct SlopeFitReport {
    pub n_grid: Vec<u64>,
    pub estimates: Vec<LogProbEstimate>,
    /// `-inf` of the rate over the event.
    pub predicted: ExtReal,
    /// Estimate at the largest `n`.
    pub extrapolated: ExtReal,
    /// Intercept of the least-squares line of the finite estimates against `1/v_n`.
    pub intercept: Option<f64>,
    pub relative_gap: f64,
}

fn relative_gap(value: ExtReal, predicted: ExtReal) -> f64 {
    match (value, predicted) {
        (ExtReal::Finite(v), ExtReal::Finite(p)) => (v - p).abs() / p.abs().max(0.1),
        (v, p) if v == p => 0.0,
        _ => f64::INFINITY,
    }
}

impl SlopeFitReport {
    pub fn new(n_grid: Vec<u64>, estimates: Vec<LogProbEstimate>, predicted: ExtReal) -> Self {
        let extrapolated = estimates.last().map_or(ExtReal::NegInf, |e| e.value);
        let (xs, ys): (Vec<f64>, Vec<f64>) = estimates
            .iter()
            .filter_map(|e| e.value.finite().map(|v| (1.0 / e.speed_value, v)))
            .unzip();
        let intercept = linear_fit(&xs, &ys).map(|(c, _)| c);
        Self {
            relative_gap: relative_gap(extrapolated, predicted),
            n_grid,
            estimates,
            predicted,
            extrapolated,
            intercept,
        }
    }

    /// Relative gap of the regression intercept to the prediction.
    pub fn intercept_gap(&self) -> Option<f64> {
        self.intercept.map(|c| relative_gap(ExtReal::Finite(c), self.predicted))
    }
}

fn ncmd_parts(model: &DistributionModel) -> Result<f64> {
    let upper = model
        .support()
        .upper
        .finite()
        .ok_or_else(|| Error::UnsupportedRegime("noncentral scaling needs a finite right endpoint".into()))?;
    model
        .right_density()
        .filter(|f| *f > 0.0)
        .ok_or_else(|| Error::UnsupportedRegime("noncentral scaling needs a positive density at the right endpoint".into()))?;
    Ok(upper)
}

/// Exact `a_n log P(a_n n L(n) (Z_n - M) <= z)` over `n_grid`, next to `-J_Z(z) = z`.
pub fn ncmd_z_rate_check(
    model: &DistributionModel,
    scaling: &ScalingFamily,
    z: f64,
    n_grid: &[u64],
    l_seq: LSequence,
) -> Result<SlopeFitReport> {
    let upper = ncmd_parts(model)?;
    if z > 0.0 {
        return Err(Error::Argument(format!("z = {z} must be nonpositive")));
    }
    let mut estimates = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let a = scaling.a(n);
        let l = l_seq.value(model, n)?;
        let x = upper + z / (a * n as f64 * l);
        estimates.push(exact_log_prob_max(model, n, 1.0 / a, f64::NEG_INFINITY, x)?);
    }
    let predicted = -RateFunction::j_z().eval(&[z]);
    Ok(SlopeFitReport::new(n_grid.to_vec(), estimates, predicted))
}

/// Exact probability `P(n L(n) (Z_n - M) <= z)` and its Weibull limit `e^z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullPoint {
    pub n: u64,
    pub z: f64,
    pub exact: f64,
    pub limit: f64,
}

pub fn weibull_limit_point(model: &DistributionModel, n: u64, z: f64, l_seq: LSequence) -> Result<WeibullPoint> {
    let upper = ncmd_parts(model)?;
    let x = upper + z / (n as f64 * l_seq.value(model, n)?);
    let exact = if z >= 0.0 { 1.0 } else { (n as f64 * model.log_cdf(x)).exp() };
    Ok(WeibullPoint {
        n,
        z,
        exact,
        limit: z.min(0.0).exp(),
    })
}

/// One `theta` of the conditional moment generating function comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarlingRow {
    pub theta: f64,
    /// Monte Carlo `log E[exp(theta n Y_n) | Z_n = z]`.
    pub estimate: f64,
    pub standard_error: f64,
    /// `(n - 1) kappa(theta | z) + theta z`.
    pub predicted: f64,
    /// `|estimate - predicted| / standard_error`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DarlingReport {
    pub rows: Vec<DarlingRow>,
    /// Grid points outside the effective domain of `kappa(. | z)`.
    pub skipped: Vec<f64>,
}

impl DarlingReport {
    pub fn max_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap).fold(0.0, f64::max)
    }
}

/// Compares the Monte Carlo conditional log-MGF of `n Y_n` given `Z_n = z`
/// with `(n - 1) kappa(theta | z) + theta z`. All thetas share one sample.
pub fn darling_identity_check(
    model: &DistributionModel,
    n: u64,
    z: f64,
    theta_grid: &[f64],
    reps: usize,
    seed: u64,
) -> Result<DarlingReport> {
    let cgf = ConditionalCgf::auto(*model);
    let domain = cgf.domain(ExtReal::Finite(z));
    let draws = sample_sum_given_max(model, n, z, reps, seed)?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &theta in theta_grid {
        let kappa = cgf.kappa(theta, z)?;
        let predicted = match kappa.finite() {
            Some(k) if domain.contains(theta) => (n - 1) as f64 * k + theta * z,
            _ => {
                skipped.push(theta);
                continue;
            }
        };
        if theta == 0.0 {
            rows.push(DarlingRow {
                theta,
                estimate: 0.0,
                standard_error: 0.0,
                predicted,
                gap: 0.0,
            });
            continue;
        }
        let shift = draws.iter().map(|d| theta * d).fold(f64::NEG_INFINITY, f64::max);
        let terms: Vec<f64> = draws.iter().map(|d| (theta * d - shift).exp()).collect();
        let count = terms.len() as f64;
        let mean = terms.iter().sum::<f64>() / count;
        let var = terms.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (count - 1.0);
        let estimate = shift + mean.ln();
        let standard_error = (var / count).sqrt() / mean;
        rows.push(DarlingRow {
            theta,
            estimate,
            standard_error,
            predicted,
            gap: (estimate - predicted).abs() / standard_error,
        });
    }
    Ok(DarlingReport { rows, skipped })
}

/// Two-sample comparison of `n Y_n` from direct samples with `Z_n` in
/// `[z, z + eps)` against the constructive sampler at the bin midpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsReport {
    pub distance: f64,
    pub critical: f64,
    pub samples: usize,
}

impl KsReport {
    pub fn passed(&self) -> bool {
        self.distance < self.critical
    }
}

pub fn conditional_law_check(
    model: &DistributionModel,
    n: u64,
    z: f64,
    eps: f64,
    matched: usize,
    seed: u64,
) -> Result<KsReport> {
    let batch = 100_000;
    let mut direct = Vec::with_capacity(matched);
    let mut round = 0u64;
    while direct.len() < matched {
        if round > 100_000 {
            return Err(Error::Precondition(format!("bin [{z}, {}) is too rare", z + eps)));
        }
        for s in sample_sum_max(model, n, batch, derive_seed(seed, round)) {
            if s.z >= z && s.z < z + eps && direct.len() < matched {
                direct.push(n as f64 * s.y);
            }
        }
        round += 1;
    }
    let constructive = sample_sum_given_max(model, n, z + 0.5 * eps, matched, derive_seed(seed, u64::MAX))?;
    Ok(KsReport {
        distance: ks_two_sample(&direct, &constructive),
        critical: ks_two_sample_critical(matched, matched, 0.01),
        samples: matched,
    })
}

/// Distances of `(sqrt(n)(Y_n - mu)/sigma, n L(n) (Z_n - M))` to the product
/// of a standard normal and the Weibull law `min(e^u, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BivariateReport {
    pub n: u64,
    pub ks_normal: f64,
    pub ks_weibull: f64,
    pub chi_square: f64,
    pub p_value: f64,
}

pub fn bivariate_weak_convergence_check(
    model: &DistributionModel,
    n: u64,
    reps: usize,
    seed: u64,
    l_seq: LSequence,
) -> Result<BivariateReport> {
    let upper = ncmd_parts(model)?;
    let (mu, sigma) = (model.mean(), model.variance().sqrt());
    let scale = n as f64 * l_seq.value(model, n)?;
    let samples = sample_sum_max(model, n, reps, seed);
    let first: Vec<f64> = samples.iter().map(|s| (n as f64).sqrt() * (s.y - mu) / sigma).collect();
    let second: Vec<f64> = samples.iter().map(|s| scale * (s.z - upper)).collect();
    let (chi_square, p_value) = quadrant_chi_square(&first, &second);
    Ok(BivariateReport {
        n,
        ks_normal: ks_one_sample(&first, standard_normal_cdf),
        ks_weibull: ks_one_sample(&second, |u| u.min(0.0).exp()),
        chi_square,
        p_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeReport {
    pub partials: KappaPartials,
    pub mean: f64,
    pub variance: f64,
}

impl DerivativeReport {
    pub fn mean_error(&self) -> f64 {
        (self.partials.d_theta - self.mean).abs() / self.mean.abs()
    }

    pub fn variance_error(&self) -> f64 {
        (self.partials.d_theta_theta - self.variance).abs() / self.variance
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.mean_error() <= tol && self.variance_error() <= tol && self.partials.d_z.abs() <= tol
    }
}

/// Partials of `kappa` at `(0, M)` next to `(mu, sigma^2, 0)`.
pub fn derivative_identities_check(model: &DistributionModel) -> Result<DerivativeReport> {
    ncmd_parts(model)?;
    let partials = ConditionalCgf::auto(*model).partials_at_origin()?;
    Ok(DerivativeReport {
        partials,
        mean: model.mean(),
        variance: model.variance(),
    })
}

/// Exact moderate-deviation prelimit for the partial-minima sums at `theta`:
/// `a_n log E exp((theta / a_n) sqrt(a_n log n) (X_n - 1/lambda))`.
pub fn minima_md_prelimit(lambda: f64, scaling: &ScalingFamily, theta: f64, n: u64) -> Result<ExtReal> {
    if scaling.speed != SpeedKind::Log {
        return Err(Error::Argument("the minima scaling runs at speed log n".into()));
    }
    let a = scaling.a(n);
    let root = (a * (n as f64).ln()).sqrt();
    let centering = -theta * root / (lambda * a);
    let mgf = minima_log_mgf(lambda, n, theta / root);
    Ok(match mgf {
        ExtReal::Finite(m) => ExtReal::Finite(a * (centering + m)),
        other => other,
    })
}

/// Limit of [`minima_md_prelimit`]: `sigma^2 theta^2 / 2 = theta^2 / lambda^2`.
pub fn minima_md_limit(lambda: f64, theta: f64) -> f64 {
    theta * theta / (lambda * lambda)
}

/// `(1/log n) log P(X_n >= x)` for `x > 1/lambda`, or of `P(X_n <= x)` below,
/// over `n_grid`, next to `-I_X(x)`.
pub fn minima_ldp_slope(lambda: f64, x: f64, n_grid: &[u64], reps: u64, seed: u64) -> SlopeFitReport {
    let upper_tail = x >= 1.0 / lambda;
    let estimates = n_grid
        .iter()
        .map(|&n| {
            estimate_log_prob(
                |rng| draw_partial_minima(lambda, n, rng),
                |s| if upper_tail { s.x >= x } else { s.x <= x },
                n,
                (n as f64).ln(),
                reps,
                derive_seed(seed, n),
            )
        })
        .collect();
    let predicted = -RateFunction::i_x(lambda).eval(&[x]);
    SlopeFitReport::new(n_grid.to_vec(), estimates, predicted)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoglundReport {
    pub n_grid: Vec<u64>,
    pub ks: Vec<f64>,
    /// `sigma^2 = 2 / lambda^2`
    pub variance: f64,
}

impl HoglundReport {
    pub fn nonincreasing(&self) -> bool {
        self.ks.windows(2).all(|w| w[1] <= w[0])
    }
}

/// KS distance of `(X_n - 1/lambda) sqrt(log n / sigma^2)` to the standard normal.
pub fn hoglund_clt_check(lambda: f64, n_grid: &[u64], reps: usize, seed: u64) -> HoglundReport {
    let variance = 2.0 / (lambda * lambda);
    let ks = n_grid
        .iter()
        .map(|&n| {
            let scale = ((n as f64).ln() / variance).sqrt();
            let normalized: Vec<f64> = sample_partial_minima(lambda, n, reps, derive_seed(seed, n))
                .iter()
                .map(|s| (s.x - 1.0 / lambda) * scale)
                .collect();
            ks_one_sample(&normalized, standard_normal_cdf)
        })
        .collect();
    HoglundReport {
        n_grid: n_grid.to_vec(),
        ks,
        variance,
    }
}

/// `(1/log n) log P(|Y_n - x| < radius)`: tends to `-inf` for `x != mu` and
/// to 0 at `x = mu`.
pub fn two_speed_degeneracy_check(
    model: &DistributionModel,
    x: f64,
    radius: f64,
    n: u64,
    reps: u64,
    seed: u64,
) -> LogProbEstimate {
    estimate_log_prob(
        |rng| draw_sum_max(model, n, rng).y,
        |y| (y - x).abs() < radius,
        n,
        (n as f64).ln(),
        reps,
        seed,
    )
}

/// `h_n` with `H(h_n) = log n`, i.e. the `1 - 1/n` quantile.
pub fn scale_h(model: &DistributionModel, n: u64) -> f64 {
    model.quantile(1.0 - 1.0 / n as f64)
}

/// Exact `(1/log n) log P(Z_n / h_n > z)`, to be compared with `-H_Z(z)`.
pub fn scaled_max_log_prob(model: &DistributionModel, n: u64, z: f64) -> Result<LogProbEstimate> {
    if model.tail_index().is_none() {
        return Err(Error::UnsupportedRegime("scaled maxima need a regularly varying tail".into()));
    }
    exact_log_prob_max(model, n, (n as f64).ln(), z * scale_h(model, n), f64::INFINITY)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::draw_sum_max;

    #[test]
    fn certain_event_has_zero_log_probability() {
        let m = DistributionModel::uniform01();
        let e = estimate_log_prob(|rng| draw_sum_max(&m, 5, rng), |_| true, 5, 5.0, 1000, 1);
        assert_eq!(e.value, ExtReal::ZERO);
        assert_eq!(e.ci_high, ExtReal::ZERO);
        assert!(e.ci_low < ExtReal::ZERO);
    }

    #[test]
    fn zero_hits_are_censored() {
        let e = LogProbEstimate::from_hits(0, 1_000_000, 1000, 1000f64.ln());
        assert!(e.is_censored());
        assert_eq!(e.value, ExtReal::NegInf);
        let bound = e.ci_high.finite().unwrap();
        // Wilson upper bound with zero hits is z^2 / (N + z^2)
        let expected = (Z95 * Z95 / (1e6 + Z95 * Z95)).ln() / 1000f64.ln();
        assert!((bound - expected).abs() < 1e-12);
    }

    #[test]
    fn mc_interval_covers_exact_max_probability() {
        let m = DistributionModel::uniform01();
        let n = 50;
        let mc = estimate_log_prob(|rng| draw_sum_max(&m, n, rng), |s| s.z <= 0.9, n, n as f64, 20_000, 3);
        let exact = exact_log_prob_max(&m, n, n as f64, f64::NEG_INFINITY, 0.9).unwrap();
        assert!((exact.value.to_f64() - 0.9f64.ln()).abs() < 1e-14);
        assert!(mc.covers(exact.value.to_f64()));
        assert_eq!(exact.ci_low, exact.ci_high);
    }

    #[test]
    fn mc_and_exact_agree_at_nominal_rate() {
        let m = DistributionModel::uniform01();
        let n = 20;
        let exact = exact_log_prob_max(&m, n, 1.0, f64::NEG_INFINITY, 0.95).unwrap().value.to_f64();
        let covered = (0..100)
            .filter(|&s| {
                estimate_log_prob(|rng| draw_sum_max(&m, n, rng), |s| s.z <= 0.95, n, 1.0, 2000, 500 + s)
                    .covers(exact)
            })
            .count();
        assert!(covered >= 88, "{covered}/100");
    }

    #[test]
    fn neg_exp_mean_upper_tail_against_gamma_law() {
        use statrs::distribution::{ContinuousCDF, Gamma};
        let m = DistributionModel::neg_exp();
        let n = 30;
        let e = estimate_log_prob(|rng| draw_sum_max(&m, n, rng), |s| s.y >= -0.5, n, n as f64, 1_000_000, 7);
        // -n Y_n is Gamma(n, 1)
        let exact = Gamma::new(n as f64, 1.0).unwrap().cdf(0.5 * n as f64).ln() / n as f64;
        assert!(e.covers(exact), "{e:?} vs {exact}");
        // the Cramér rate is approached from below, with an O(log n / n) prefactor gap
        let rate = RateFunction::kappa_star(m).eval(&[-0.5]).finite().unwrap();
        assert!(e.value.to_f64() < -rate && e.value.to_f64() > -2.0 * rate);
    }

    #[test]
    fn exact_interval_probabilities() {
        let m = DistributionModel::uniform01();
        assert!(exact_log_prob_max(&m, 10, 1.0, 0.5, 0.5).is_err());
        let e = exact_log_prob_max(&m, 3, 1.0, 0.5, 0.8).unwrap().value.to_f64();
        assert!((e - (0.8f64.powi(3) - 0.125).ln()).abs() < 1e-14);
        let one = exact_log_prob_max(&m, 3, 1.0, f64::NEG_INFINITY, 1.0).unwrap();
        assert_eq!(one.value, ExtReal::ZERO);
    }

    #[test]
    fn uniform_weibull_gap_is_second_order() {
        let m = DistributionModel::uniform01();
        for &z in &[-0.5f64, -1.0, -2.0, -3.0] {
            for &n in &[100u64, 1000, 10_000, 1_000_000] {
                let p = weibull_limit_point(&m, n, z, LSequence::Constant).unwrap();
                let oracle = (1.0 + z / n as f64).powi(n as i32);
                assert!((p.exact - oracle).abs() < 1e-12 * oracle.max(1e-300) * n as f64);
                assert!((p.exact - p.limit).abs() <= 1.1 * z * z * z.exp() / n as f64);
            }
        }
        assert_eq!(weibull_limit_point(&m, 100, 0.0, LSequence::Constant).unwrap().exact, 1.0);
    }

    #[test]
    fn ncmd_z_rate_examples() {
        let sqrt = ScalingFamily::new(SpeedKind::Linear, 0.5, "sqrt").unwrap();
        let u = DistributionModel::uniform01();
        let r = ncmd_z_rate_check(&u, &sqrt, -1.0, &[1_000_000], LSequence::Constant).unwrap();
        let oracle = 1e-3 * 1e6 * (1.0 - 1.0 / 1e3f64).ln();
        assert!((r.extrapolated.to_f64() - oracle).abs() < 1e-9);
        assert!(r.relative_gap < 0.02);
        let neg = DistributionModel::neg_exp();
        let r = ncmd_z_rate_check(&neg, &sqrt, -2.0, &[1_000_000], LSequence::Constant).unwrap();
        assert!((r.extrapolated.to_f64() + 2.0).abs() < 1e-12);
        let r = ncmd_z_rate_check(&u, &sqrt, 0.0, &[1000], LSequence::Constant).unwrap();
        assert_eq!(r.extrapolated, ExtReal::ZERO);
        assert!(matches!(
            ncmd_z_rate_check(&DistributionModel::exponential(1.0), &sqrt, -1.0, &[10], LSequence::Constant),
            Err(Error::UnsupportedRegime(_))
        ));
        // larger |z| gives a more negative value
        let vals: Vec<f64> = [-0.5, -1.0, -2.0]
            .iter()
            .map(|&z| ncmd_z_rate_check(&u, &sqrt, z, &[10_000], LSequence::Constant).unwrap().extrapolated.to_f64())
            .collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2]);
    }

    #[test]
    fn scaled_max_examples() {
        let e = DistributionModel::exponential(1.0);
        let n = 1_000_000u64;
        let v = scaled_max_log_prob(&e, n, 1.5).unwrap().value.to_f64();
        let oracle = (-(1.0 - (n as f64).powf(-1.5)).powf(n as f64) + 1.0).ln() / (n as f64).ln();
        assert!((v - oracle).abs() < 1e-6);
        assert!((v + 0.5).abs() < 0.05);
        assert!(scaled_max_log_prob(&DistributionModel::uniform01(), 10, 1.5).is_err());
    }

    #[test]
    fn darling_theta_zero_and_domain() {
        let m = DistributionModel::neg_exp();
        let r = darling_identity_check(&m, 5, -0.3, &[0.0, -1.5, 0.5], 20_000, 1).unwrap();
        assert_eq!(r.skipped, vec![-1.5]);
        assert_eq!(r.rows[0].predicted, 0.0);
        assert!(r.max_gap() < 4.0, "{:?}", r.rows);
    }

    #[test]
    fn derivative_identities() {
        let r = derivative_identities_check(&DistributionModel::uniform01()).unwrap();
        assert!(r.passed(1e-3), "{r:?}");
        let r = derivative_identities_check(&DistributionModel::neg_exp()).unwrap();
        assert!(r.passed(1e-3), "{r:?}");
        assert!(matches!(
            derivative_identities_check(&DistributionModel::stretched_tail(2.0)),
            Err(Error::UnsupportedRegime(_))
        ));
    }

    #[test]
    fn minima_prelimit_at_zero_and_branch() {
        let s = ScalingFamily::new(SpeedKind::Log, 0.5, "md").unwrap();
        for n in [10, 1000, 100_000] {
            assert_eq!(minima_md_prelimit(1.0, &s, 0.0, n).unwrap(), ExtReal::ZERO);
        }
        // theta / sqrt(a_n log n) >= lambda on the first terms
        assert_eq!(minima_md_prelimit(1.0, &s, 2.0, 3).unwrap(), ExtReal::PosInf);
        let lin = ScalingFamily::new(SpeedKind::Linear, 0.5, "lin").unwrap();
        assert!(minima_md_prelimit(1.0, &lin, 1.0, 10).is_err());
    }

    #[test]
    fn minima_prelimit_matches_direct_sum() {
        let s = ScalingFamily::new(SpeedKind::Log, 0.5, "md").unwrap();
        let (lambda, theta, n) = (2.0, -1.0, 5000u64);
        let a = (n as f64).ln().powf(-0.5);
        let root = (a * (n as f64).ln()).sqrt();
        let u = theta / root / lambda;
        let direct: f64 = (1..=n).map(|k| (1.0 + u / (k as f64 * (1.0 - u))).ln()).sum::<f64>() * a
            - a * theta * root / (lambda * a);
        let v = minima_md_prelimit(lambda, &s, theta, n).unwrap().to_f64();
        assert!((v - direct).abs() < 1e-10);
    }

    #[test]
    fn minima_slope_at_zero_of_rate() {
        let r = minima_ldp_slope(1.0, 1.0, &[1000], 2000, 4);
        assert_eq!(r.predicted, ExtReal::ZERO);
        let v = r.extrapolated.to_f64();
        assert!(v < 0.0 && v > -0.2, "{v}");
    }

    #[test]
    fn slope_report_regression() {
        let ests: Vec<LogProbEstimate> = [10.0f64, 20.0, 40.0]
            .iter()
            .map(|&v| LogProbEstimate::exact((-0.25 + 0.5 / v) * v, 0, v))
            .collect();
        let r = SlopeFitReport::new(vec![1, 2, 3], ests, ExtReal::Finite(-0.25));
        assert!((r.intercept.unwrap() + 0.25).abs() < 1e-12);
        assert!(r.intercept_gap().unwrap() < 1e-10);
        assert!((r.relative_gap - 0.5 / 40.0 / 0.25).abs() < 1e-12);
    }

    #[test]
    fn two_speed_mean_is_not_rare() {
        let m = DistributionModel::exponential(1.0);
        let e = two_speed_degeneracy_check(&m, 1.0, 0.1, 1000, 2000, 1);
        assert!(e.value > ExtReal::Finite(-0.02));
        let e = two_speed_degeneracy_check(&m, 2.0, 0.1, 1000, 2000, 1);
        assert!(e.is_censored());
    }
}
