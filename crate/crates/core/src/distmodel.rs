//! Distribution families for the i.i.d. sequence and their truncations.
//!
//! A [`DistributionModel`] is one of four built-in families, optionally
//! truncated to `(-inf, z)`. Truncation keeps the family's analytic CDF,
//! quantile and log-survival, so conditional samplers stay inverse-CDF and
//! exact in the far tail.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr};

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::legendre::Interval;
use crate::rng::Stream;

/// Support `(lower, upper)` of a density, with possibly infinite endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Support {
    pub lower: ExtReal,
    pub upper: ExtReal,
}

/// Shape of the interval on which maxima live.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportClass {
    /// `[m, M]` with both ends finite.
    Compact,
    /// `(-inf, M]`.
    UnboundedBelow,
    /// `[m, inf)`.
    UnboundedAbove,
}

impl Support {
    pub fn new(lower: ExtReal, upper: ExtReal) -> Result<Self> {
        if lower >= upper {
            return Err(Error::Argument(format!(
                "support lower {lower} must be below upper {upper}"
            )));
        }
        Ok(Support { lower, upper })
    }

    pub fn class(&self) -> SupportClass {
        match (self.lower, self.upper) {
            (ExtReal::Finite(_), ExtReal::Finite(_)) => SupportClass::Compact,
            (_, ExtReal::Finite(_)) => SupportClass::UnboundedBelow,
            _ => SupportClass::UnboundedAbove,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// Density `e^w` on `(-inf, 0)`.
    NegExp,
    /// Density 1 on `(0, 1)`.
    Uniform01,
    /// `F(x) = 1 - exp(-lambda x)` on `[0, inf)`.
    Exponential { lambda: f64 },
    /// `F(x) = 1 - exp(-x^alpha)` on `[0, inf)`.
    StretchedTail { alpha: f64 },
}

/// JSON description of a model: `{"family": ..., "lambda": ..., "alpha": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyName {
    NegExp,
    Uniform01,
    Exponential,
    StretchedTail,
}

impl DistributionSpec {
    pub fn build(&self) -> Result<DistributionModel> {
        let positive = |name: &str, v: Option<f64>| -> Result<f64> {
            match v {
                Some(x) if x.is_finite() && x > 0.0 => Ok(x),
                Some(x) => Err(Error::Argument(format!("{name} must be positive, got {x}"))),
                None => Err(Error::Argument(format!("missing parameter {name}"))),
            }
        };
        let family = match self.family {
            FamilyName::NegExp => Family::NegExp,
            FamilyName::Uniform01 => Family::Uniform01,
            FamilyName::Exponential => Family::Exponential {
                lambda: positive("lambda", self.lambda.or(Some(1.0)))?,
            },
            FamilyName::StretchedTail => Family::StretchedTail {
                alpha: positive("alpha", self.alpha)?,
            },
        };
        Ok(DistributionModel::new(family))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Truncation {
    z: f64,
    /// log F(z) of the untruncated family.
    log_mass: f64,
    mean: f64,
    variance: f64,
}

/// An i.i.d. law with density, CDF, quantile and moments.
///
/// Values are immutable and cheap to copy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionModel {
    family: Family,
    truncation: Option<Truncation>,
}

impl DistributionModel {
    pub fn new(family: Family) -> Self {
        DistributionModel {
            family,
            truncation: None,
        }
    }

    pub fn neg_exp() -> Self {
        Self::new(Family::NegExp)
    }

    pub fn uniform01() -> Self {
        Self::new(Family::Uniform01)
    }

    pub fn exponential(lambda: f64) -> Self {
        assert!(lambda > 0.0 && lambda.is_finite());
        Self::new(Family::Exponential { lambda })
    }

    pub fn stretched_tail(alpha: f64) -> Self {
        assert!(alpha > 0.0 && alpha.is_finite());
        Self::new(Family::StretchedTail { alpha })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Upper truncation point, if this is a conditional law `f(.|z)`.
    pub fn truncation_point(&self) -> Option<f64> {
        self.truncation.map(|t| t.z)
    }

    /// The untruncated parent law.
    pub fn base(&self) -> DistributionModel {
        Self::new(self.family)
    }

    pub fn support(&self) -> Support {
        let (lo, hi) = base_support(self.family);
        let hi = match self.truncation {
            Some(t) => ExtReal::Finite(t.z),
            None => hi,
        };
        Support {
            lower: lo,
            upper: hi,
        }
    }

    pub fn density(&self, w: f64) -> f64 {
        let ld = self.log_density(w);
        if ld == f64::NEG_INFINITY {
            0.0
        } else {
            ld.exp()
        }
    }

    /// `log f(w)`; `-inf` off the support.
    pub fn log_density(&self, w: f64) -> f64 {
        match self.truncation {
            Some(t) if w >= t.z => f64::NEG_INFINITY,
            Some(t) => base_log_density(self.family, w) - t.log_mass,
            None => base_log_density(self.family, w),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.log_cdf(x).exp()
    }

    /// `log F(x)`, accurate when `F(x)` is close to 1. Returns `-inf` where
    /// `F(x) = 0`.
    pub fn log_cdf(&self, x: f64) -> f64 {
        match self.truncation {
            Some(t) if x >= t.z => 0.0,
            Some(t) => base_log_cdf(self.family, x) - t.log_mass,
            None => base_log_cdf(self.family, x),
        }
    }

    /// `H(x) = -log(1 - F(x))`, computed without forming `1 - F(x)` where the
    /// family allows it.
    pub fn log_survival(&self, x: f64) -> f64 {
        match self.truncation {
            Some(t) => {
                if x >= t.z {
                    f64::INFINITY
                } else {
                    let ratio = base_log_cdf(self.family, x) - t.log_mass;
                    -(-ratio.exp_m1()).ln()
                }
            }
            None => base_log_survival(self.family, x),
        }
    }

    /// `F^{-1}(p)` for `p` in `(0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        match self.truncation {
            Some(t) => match self.family {
                // F(w) = e^w, so F^{-1}(p F(z)) = log p + z exactly.
                Family::NegExp => p.ln() + t.z,
                _ => base_quantile(self.family, p * t.log_mass.exp()),
            },
            None => base_quantile(self.family, p),
        }
    }

    pub fn mean(&self) -> f64 {
        match self.truncation {
            Some(t) => t.mean,
            None => base_moments(self.family).0,
        }
    }

    pub fn variance(&self) -> f64 {
        match self.truncation {
            Some(t) => t.variance,
            None => base_moments(self.family).1,
        }
    }

    /// `f(M) = F'(M-)` when the right endpoint is finite.
    pub fn right_density(&self) -> Option<f64> {
        match self.support().upper {
            ExtReal::Finite(m) => {
                let base_f = match self.family {
                    Family::NegExp => m.exp(),
                    Family::Uniform01 => 1.0,
                    Family::Exponential { lambda } => lambda * (-lambda * m).exp(),
                    Family::StretchedTail { .. } => base_log_density(self.family, m).exp(),
                };
                let mass = self.truncation.map_or(0.0, |t| t.log_mass).exp();
                let f = base_f / mass;
                (f > 0.0).then_some(f)
            }
            _ => None,
        }
    }

    /// Index of regular variation of `H(x) = -log(1 - F(x))` when `M = inf`.
    pub fn tail_index(&self) -> Option<f64> {
        if self.truncation.is_some() {
            return None;
        }
        match self.family {
            Family::Exponential { .. } => Some(1.0),
            Family::StretchedTail { alpha } => Some(alpha),
            _ => None,
        }
    }

    /// Set of `theta` where the unconditional log-MGF `log E[exp(theta W)]`
    /// is finite.
    pub fn theta_domain(&self) -> Interval {
        self.theta_domain_at(self.support().upper)
    }

    /// Set of `theta` where `E[exp(theta W) 1{W < z}]` is finite.
    ///
    /// Quadrature cannot certify divergence, so each family declares the
    /// exponential decay of its unbounded tails here: the lower tail matters
    /// for every `z`, the upper tail only when `z = M = inf`.
    pub fn theta_domain_at(&self, z: ExtReal) -> Interval {
        if z.is_finite() {
            return match self.family {
                Family::NegExp => Interval::open_lower(-1.0),
                _ => Interval::real_line(),
            };
        }
        match self.family {
            Family::Exponential { lambda } => Interval::open_upper(lambda),
            Family::StretchedTail { alpha } if alpha < 1.0 => Interval::closed_upper(0.0),
            Family::StretchedTail { alpha } if alpha <= 1.0 => Interval::open_upper(1.0),
            _ => Interval::real_line(),
        }
    }

    /// Analytic `kappa(theta | z) = log E[exp(theta W) | W < z]` when the
    /// family has one. `z` is clamped to the right endpoint.
    pub fn closed_form_kappa(&self, theta: f64, z: f64) -> Option<ExtReal> {
        let z = match self.support().upper {
            ExtReal::Finite(m) => z.min(m),
            _ => z,
        };
        if !self.theta_domain_at(ExtReal::from_f64(z)).contains(theta) {
            return Some(ExtReal::PosInf);
        }
        match self.family {
            Family::NegExp => Some(ExtReal::Finite(theta * z - theta.ln_1p())),
            Family::Uniform01 => Some(ExtReal::Finite(ln_expm1_ratio(theta * z))),
            Family::Exponential { lambda } => {
                if z.is_infinite() {
                    return Some(ExtReal::Finite(-(-theta / lambda).ln_1p()));
                }
                // ∫_0^z e^{-(λ-θ)w} dw = z R(-(λ-θ)z) with R(t) = (e^t - 1)/t.
                let d = lambda - theta;
                let log_mass = (-(-lambda * z).exp_m1()).ln();
                Some(ExtReal::Finite(
                    lambda.ln() + z.ln() + ln_expm1_ratio(-d * z) - log_mass,
                ))
            }
            Family::StretchedTail { .. } => None,
        }
    }

    /// The conditional law `f(w | z) = f(w) 1{w < z} / F(z)`.
    ///
    /// Truncating at or above the right endpoint returns the model unchanged.
    pub fn truncate(&self, z: f64) -> Result<DistributionModel> {
        if !z.is_finite() {
            return Err(Error::Argument(format!("truncation point must be finite, got {z}")));
        }
        let support = self.support();
        if ExtReal::Finite(z) <= support.lower {
            return Err(Error::Domain(format!(
                "truncation point {z} is not above the lower endpoint {}",
                support.lower
            )));
        }
        if ExtReal::Finite(z) >= support.upper {
            return Ok(*self);
        }
        let log_mass = base_log_cdf(self.family, z);
        if log_mass == f64::NEG_INFINITY {
            return Err(Error::Domain(format!("F({z}) = 0")));
        }
        let (mean, variance) = truncated_moments(self.family, z, log_mass);
        Ok(DistributionModel {
            family: self.family,
            truncation: Some(Truncation {
                z,
                log_mass,
                mean,
                variance,
            }),
        })
    }

    #[inline]
    pub fn sample_one(&self, rng: &mut Stream) -> f64 {
        self.quantile(rng.uniform())
    }

    /// `count` inverse-CDF draws from `rng`.
    pub fn sample(&self, rng: &mut Stream, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.sample_one(rng)).collect()
    }
}

/// `F(x)^n`, evaluated as `exp(n log F(x))` with `log F` taken on the
/// survival scale near the right endpoint.
pub fn exact_max_cdf(model: &DistributionModel, n: u64, x: f64) -> f64 {
    assert!(n >= 1, "n must be at least 1");
    (n as f64 * model.log_cdf(x)).exp()
}

/// `log((e^t - 1) / t)`, stable for every finite `t` (0 at `t = 0`).
pub(crate) fn ln_expm1_ratio(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else if t.abs() < 1.0 {
        (t.exp_m1() / t).ln()
    } else if t > 0.0 {
        t + (-(-t).exp_m1()).ln() - t.ln()
    } else {
        (-t.exp_m1()).ln() - (-t).ln()
    }
}

fn base_support(family: Family) -> (ExtReal, ExtReal) {
    match family {
        Family::NegExp => (ExtReal::NegInf, ExtReal::Finite(0.0)),
        Family::Uniform01 => (ExtReal::Finite(0.0), ExtReal::Finite(1.0)),
        Family::Exponential { .. } | Family::StretchedTail { .. } => {
            (ExtReal::Finite(0.0), ExtReal::PosInf)
        }
    }
}

fn base_log_density(family: Family, w: f64) -> f64 {
    match family {
        Family::NegExp => {
            if w < 0.0 {
                w
            } else {
                f64::NEG_INFINITY
            }
        }
        Family::Uniform01 => {
            if w > 0.0 && w < 1.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        }
        Family::Exponential { lambda } => {
            if w >= 0.0 {
                lambda.ln() - lambda * w
            } else {
                f64::NEG_INFINITY
            }
        }
        Family::StretchedTail { alpha } => {
            if w > 0.0 {
                alpha.ln() + (alpha - 1.0) * w.ln() - w.powf(alpha)
            } else if w == 0.0 && alpha == 1.0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        }
    }
}

fn base_log_cdf(family: Family, x: f64) -> f64 {
    match family {
        Family::NegExp => x.min(0.0),
        Family::Uniform01 => {
            if x <= 0.0 {
                f64::NEG_INFINITY
            } else if x >= 1.0 {
                0.0
            } else {
                x.ln()
            }
        }
        Family::Exponential { lambda } => {
            if x <= 0.0 {
                f64::NEG_INFINITY
            } else {
                (-(-lambda * x).exp_m1()).ln()
            }
        }
        Family::StretchedTail { alpha } => {
            if x <= 0.0 {
                f64::NEG_INFINITY
            } else {
                (-(-x.powf(alpha)).exp_m1()).ln()
            }
        }
    }
}

fn base_log_survival(family: Family, x: f64) -> f64 {
    match family {
        Family::NegExp => {
            if x >= 0.0 {
                f64::INFINITY
            } else {
                -(-x.exp_m1()).ln()
            }
        }
        Family::Uniform01 => {
            if x >= 1.0 {
                f64::INFINITY
            } else if x <= 0.0 {
                0.0
            } else {
                -(-x).ln_1p()
            }
        }
        Family::Exponential { lambda } => lambda * x.max(0.0),
        Family::StretchedTail { alpha } => x.max(0.0).powf(alpha),
    }
}

fn base_quantile(family: Family, p: f64) -> f64 {
    match family {
        Family::NegExp => p.ln(),
        Family::Uniform01 => p,
        Family::Exponential { lambda } => -(-p).ln_1p() / lambda,
        Family::StretchedTail { alpha } => (-(-p).ln_1p()).powf(1.0 / alpha),
    }
}

fn base_moments(family: Family) -> (f64, f64) {
    match family {
        Family::NegExp => (-1.0, 1.0),
        Family::Uniform01 => (0.5, 1.0 / 12.0),
        Family::Exponential { lambda } => (1.0 / lambda, 1.0 / (lambda * lambda)),
        Family::StretchedTail { alpha } => {
            let m1 = gamma(1.0 + 1.0 / alpha);
            let m2 = gamma(1.0 + 2.0 / alpha);
            (m1, m2 - m1 * m1)
        }
    }
}

fn truncated_moments(family: Family, z: f64, log_mass: f64) -> (f64, f64) {
    match family {
        // z + log U with U uniform: a shifted negative standard exponential.
        Family::NegExp => (z - 1.0, 1.0),
        Family::Uniform01 => (0.5 * z, z * z / 12.0),
        Family::Exponential { lambda } => {
            // 1/λ - z/(e^{λz} - 1) and 1/λ² - z² e^{λz}/(e^{λz} - 1)²
            let t = lambda * z;
            let em1 = t.exp_m1();
            let mean = 1.0 / lambda - z / em1;
            let var = 1.0 / (lambda * lambda) - z * z * (t.exp() / (em1 * em1));
            (mean, var)
        }
        Family::StretchedTail { alpha } => {
            // E[W^k 1{W<z}] = Γ(1+k/α) P(1+k/α, z^α)
            let za = z.powf(alpha);
            let mass = log_mass.exp();
            let a1 = 1.0 + 1.0 / alpha;
            let a2 = 1.0 + 2.0 / alpha;
            let m1 = gamma(a1) * gamma_lr(a1, za) / mass;
            let m2 = gamma(a2) * gamma_lr(a2, za) / mass;
            (m1, m2 - m1 * m1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::rng::stream;

    fn builtins() -> Vec<DistributionModel> {
        vec![
            DistributionModel::neg_exp(),
            DistributionModel::uniform01(),
            DistributionModel::exponential(1.0),
            DistributionModel::exponential(2.5),
            DistributionModel::stretched_tail(2.0),
            DistributionModel::stretched_tail(0.7),
        ]
    }

    /// ∫ g(w) f(w) dw over the support by quadrature, independent of the
    /// stored moments.
    fn expect(model: &DistributionModel, g: impl Fn(f64) -> f64) -> f64 {
        let s = model.support();
        match (s.lower, s.upper) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                integrate(|w| g(w) * model.density(w), a, b, 1e-12).value
            }
            (ExtReal::NegInf, ExtReal::Finite(b)) => integrate(
                |t| {
                    let w = b - t / (1.0 - t);
                    g(w) * model.density(w) / ((1.0 - t) * (1.0 - t))
                },
                0.0,
                1.0,
                1e-12,
            )
            .value,
            (ExtReal::Finite(a), _) => integrate(
                |t| {
                    let w = a + t / (1.0 - t);
                    g(w) * model.density(w) / ((1.0 - t) * (1.0 - t))
                },
                0.0,
                1.0,
                1e-12,
            )
            .value,
            _ => unreachable!(),
        }
    }

    #[test]
    fn densities_integrate_to_one_and_moments_match() {
        for m in builtins() {
            let mass = expect(&m, |_| 1.0);
            assert!((mass - 1.0).abs() < 1e-8, "{m:?} mass {mass}");
            let mean = expect(&m, |w| w);
            let var = expect(&m, |w| (w - mean) * (w - mean));
            assert!((mean - m.mean()).abs() < 1e-6, "{m:?} mean {mean}");
            assert!((var - m.variance()).abs() < 1e-6, "{m:?} var {var}");
        }
    }

    #[test]
    fn truncated_densities_integrate_to_one_on_a_grid() {
        for m in builtins() {
            let s = m.support();
            let zs: Vec<f64> = match (s.lower, s.upper) {
                (ExtReal::NegInf, ExtReal::Finite(b)) => (0..16).map(|i| b - 0.25 * i as f64).collect(),
                (ExtReal::Finite(a), ExtReal::Finite(b)) => {
                    (1..=16).map(|i| a + (b - a) * i as f64 / 16.0).collect()
                }
                _ => (1..=16).map(|i| 0.25 * i as f64).collect(),
            };
            for z in zs {
                let t = m.truncate(z).unwrap();
                let mass = expect(&t, |_| 1.0);
                assert!((mass - 1.0).abs() < 1e-8, "{m:?} z={z} mass {mass}");
                let mean = expect(&t, |w| w);
                let var = expect(&t, |w| (w - mean) * (w - mean));
                assert!((mean - t.mean()).abs() < 1e-6, "{m:?} z={z}");
                assert!((var - t.variance()).abs() < 1e-6, "{m:?} z={z}");
            }
        }
    }

    #[test]
    fn cdf_endpoints_and_monotonicity() {
        for m in builtins() {
            let s = m.support();
            if let ExtReal::Finite(b) = s.upper {
                assert_eq!(m.cdf(b), 1.0);
            }
            if let ExtReal::Finite(a) = s.lower {
                assert_eq!(m.cdf(a), 0.0);
            }
            let xs: Vec<f64> = (1..64).map(|i| m.quantile(i as f64 / 64.0)).collect();
            for w in xs.windows(2) {
                assert!(m.cdf(w[0]) <= m.cdf(w[1]));
            }
            for &x in &xs {
                assert!((m.quantile(m.cdf(x)) - x).abs() < 1e-9 * (1.0 + x.abs()));
            }
        }
    }

    #[test]
    fn quantile_round_trip_on_tail_grid() {
        let ps: Vec<f64> = (0..64)
            .map(|i| {
                // log-spaced into both tails between 1e-6 and 1 - 1e-6
                let s = i as f64 / 63.0;
                let q = 10f64.powf(-6.0 + (6.0 + 0.5f64.log10()) * 2.0 * s.min(1.0 - s));
                if s < 0.5 {
                    q
                } else {
                    1.0 - q
                }
            })
            .collect();
        for m in builtins() {
            for z in [None, Some(0.5)] {
                let model = match z {
                    Some(z) if m.support().lower < ExtReal::Finite(z) => m.truncate(z.min(match m.support().upper {
                        ExtReal::Finite(b) => b - 0.25,
                        _ => z,
                    })).unwrap(),
                    _ => m,
                };
                for &p in &ps {
                    let back = model.cdf(model.quantile(p));
                    assert!((back - p).abs() < 1e-10, "{model:?} p={p} back={back}");
                }
            }
        }
    }

    #[test]
    fn truncate_at_right_endpoint_is_identity() {
        let m = DistributionModel::neg_exp();
        assert_eq!(m.truncate(0.0).unwrap(), m);
    }

    #[test]
    fn truncated_uniform_has_density_two() {
        let t = DistributionModel::uniform01().truncate(0.5).unwrap();
        assert!((t.density(0.2) - 2.0).abs() < 1e-15);
        assert_eq!(t.density(0.6), 0.0);
        assert_eq!(t.support().upper, ExtReal::Finite(0.5));
        assert!((t.cdf(0.25) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn truncated_neg_exp_mean() {
        let t = DistributionModel::neg_exp().truncate(-1.0).unwrap();
        // ∫_{-∞}^{-1} w e^{w+1} dw = -2
        let oracle = expect(&t, |w| w);
        assert!((oracle + 2.0).abs() < 1e-9);
        assert!((t.mean() + 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_below_support_is_a_domain_error() {
        assert!(matches!(DistributionModel::uniform01().truncate(0.0), Err(Error::Domain(_))));
        assert!(matches!(DistributionModel::exponential(1.0).truncate(-1.0), Err(Error::Domain(_))));
        assert!(matches!(DistributionModel::neg_exp().truncate(f64::NAN), Err(Error::Argument(_))));
    }

    #[test]
    fn exponential_sample_mean() {
        let m = DistributionModel::exponential(1.0);
        let mut s = stream(2024, 0);
        let xs = m.sample(&mut s, 1_000_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0).abs() < 4e-3);
        assert!(m.sample(&mut s, 0).is_empty());
    }

    #[test]
    fn neg_exp_samples_respect_support() {
        let m = DistributionModel::neg_exp();
        let mut s = stream(5, 9);
        let max = m.sample(&mut s, 1_000_000).into_iter().fold(f64::MIN, f64::max);
        assert!(max <= 0.0);
    }

    #[test]
    fn max_cdf_examples() {
        let u = DistributionModel::uniform01();
        assert_eq!(exact_max_cdf(&u, 10, 1.0), 1.0);
        let p = exact_max_cdf(&u, 100, 1.0 - 3.0 / 100.0);
        assert!((p - 0.97f64.powi(100)).abs() < 1e-14);
        assert!((p - 0.047553).abs() < 1e-6);
        let e = DistributionModel::exponential(1.0);
        for (n, x) in [(5u64, 0.3f64), (1000, 7.0), (1_000_000, 15.0)] {
            let direct = (1.0 - (-x).exp()).powi(n as i32);
            assert!((exact_max_cdf(&e, n, x) - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn stretched_tail_log_survival_is_exact_power() {
        let alpha = 2.0;
        let m = DistributionModel::stretched_tail(alpha);
        for &x in &[0.5, 1.0, 2.0, 7.5] {
            for &y in &[0.3, 1.0, 10.0, 1e3] {
                let r = m.log_survival(x * y) / m.log_survival(y);
                assert!((r - x.powf(alpha)).abs() < 1e-12 * x.powf(alpha));
            }
        }
    }

    #[test]
    fn spec_json_builds_each_family() {
        let cases = [
            (r#"{"family":"neg_exp"}"#, Family::NegExp),
            (r#"{"family":"uniform01"}"#, Family::Uniform01),
            (r#"{"family":"exponential","lambda":2}"#, Family::Exponential { lambda: 2.0 }),
            (r#"{"family":"stretched_tail","alpha":2}"#, Family::StretchedTail { alpha: 2.0 }),
        ];
        for (json, family) in cases {
            let spec: DistributionSpec = serde_json::from_str(json).unwrap();
            assert_eq!(spec.build().unwrap().family(), family);
        }
        let bad: DistributionSpec = serde_json::from_str(r#"{"family":"stretched_tail"}"#).unwrap();
        assert!(bad.build().is_err());
    }
}
