//! Conditional cumulant generating function
//! `kappa(theta | z) = log( ∫_{-inf}^z e^{theta w} f(w) dw / F(z) )`.

use crate::distmodel::DistributionModel;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::legendre::Interval;
use crate::quadrature::integrate;

/// Relative tolerance of the quadrature route.
pub const QUADRATURE_REL_TOL: f64 = 1e-10;

/// Grid used to locate the log-integrand maximum before integrating.
const SHIFT_GRID: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CgfMode {
    ClosedForm,
    Quadrature,
}

/// Partial derivatives of `kappa` at `(theta, z) = (0, M)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaPartials {
    pub d_theta: f64,
    pub d_theta_theta: f64,
    pub d_z: f64,
    pub d_theta_z: f64,
    pub d_zz: f64,
}

/// Change of variable `t -> (w, log |dw/dt|)`.
type Substitution = Box<dyn Fn(f64) -> (f64, f64)>;

/// Evaluator of `kappa(. | .)` for one model.
#[derive(Debug, Clone, Copy)]
pub struct ConditionalCgf {
    model: DistributionModel,
    mode: CgfMode,
}

impl ConditionalCgf {
    pub fn new(model: DistributionModel, mode: CgfMode) -> Result<Self> {
        if mode == CgfMode::ClosedForm && model.closed_form_kappa(0.0, 0.5).is_none() {
            return Err(Error::UnsupportedRegime(format!(
                "{:?} has no closed-form cumulant generating function",
                model.family()
            )));
        }
        Ok(ConditionalCgf { model, mode })
    }

    /// Closed form when the family has one, quadrature otherwise.
    pub fn auto(model: DistributionModel) -> Self {
        let mode = if model.closed_form_kappa(0.0, 0.5).is_some() {
            CgfMode::ClosedForm
        } else {
            CgfMode::Quadrature
        };
        ConditionalCgf { model, mode }
    }

    pub fn quadrature(model: DistributionModel) -> Self {
        ConditionalCgf {
            model,
            mode: CgfMode::Quadrature,
        }
    }

    pub fn model(&self) -> &DistributionModel {
        &self.model
    }

    pub fn mode(&self) -> CgfMode {
        self.mode
    }

    /// Effective domain of `theta -> kappa(theta | z)`.
    pub fn domain(&self, z: ExtReal) -> Interval {
        self.model.theta_domain_at(z)
    }

    /// `kappa(theta | z)`; `+inf` outside the effective domain.
    pub fn kappa(&self, theta: f64, z: f64) -> Result<ExtReal> {
        if !theta.is_finite() {
            return Err(Error::Argument(format!("theta must be finite, got {theta}")));
        }
        if z.is_nan() {
            return Err(Error::Argument("z is NaN".into()));
        }
        let support = self.model.support();
        let z_ext = ExtReal::from_f64(z).min(support.upper);
        if z_ext < support.lower {
            return Err(Error::Domain(format!("z = {z} is below the support")));
        }
        if z_ext == support.lower {
            // degenerate conditioning on the left endpoint
            return Ok(ExtReal::Finite(theta * z));
        }
        if let ExtReal::Finite(zf) = z_ext {
            if self.model.log_cdf(zf) == f64::NEG_INFINITY {
                return Err(Error::Domain(format!("F({z}) = 0")));
            }
        }
        if !self.domain(z_ext).contains(theta) {
            return Ok(ExtReal::PosInf);
        }
        if theta == 0.0 {
            return Ok(ExtReal::ZERO);
        }
        match self.mode {
            CgfMode::ClosedForm => Ok(self
                .model
                .closed_form_kappa(theta, z_ext.to_f64())
                .expect("closed form checked at construction")),
            CgfMode::Quadrature => Ok(ExtReal::Finite(self.kappa_by_quadrature(theta, z_ext))),
        }
    }

    /// `kappa_Y(theta) = kappa(theta | M)`, the unconditional log-MGF.
    pub fn kappa_global(&self, theta: f64) -> Result<ExtReal> {
        self.kappa(theta, self.model.support().upper.to_f64())
    }

    fn kappa_by_quadrature(&self, theta: f64, z: ExtReal) -> f64 {
        let support = self.model.support();
        let model = &self.model;
        // Map the integration range onto a finite interval.
        let (t0, t1, map): (f64, f64, Substitution) = match (support.lower, z) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a, b, Box::new(|w| (w, 0.0))),
            (ExtReal::NegInf, ExtReal::Finite(b)) => (
                0.0,
                1.0,
                Box::new(move |t: f64| (b - t / (1.0 - t), -2.0 * (1.0 - t).ln())),
            ),
            (ExtReal::Finite(a), ExtReal::PosInf) => (
                0.0,
                1.0,
                Box::new(move |t: f64| (a + t / (1.0 - t), -2.0 * (1.0 - t).ln())),
            ),
            _ => unreachable!("supports are bounded on at least one side"),
        };
        let log_integrand = |t: f64| {
            let (w, log_jac) = map(t);
            theta * w + model.log_density(w) + log_jac
        };
        let shift = (1..SHIFT_GRID)
            .map(|i| log_integrand(t0 + (t1 - t0) * i as f64 / SHIFT_GRID as f64))
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        let q = integrate(|t| (log_integrand(t) - shift).exp(), t0, t1, QUADRATURE_REL_TOL);
        let log_mass = match z {
            ExtReal::Finite(zf) => model.log_cdf(zf),
            _ => 0.0,
        };
        shift + q.value.ln() - log_mass
    }

    /// Finite-difference partials of `kappa` at `(0, M)`.
    ///
    /// Differences are central in `theta` and one-sided (`z <= M`) in `z`,
    /// with a fixed step `h = 1e-4 max(1, |M|)` and one Richardson
    /// extrapolation.
    pub fn partials_at_origin(&self) -> Result<KappaPartials> {
        let m = match self.model.support().upper {
            ExtReal::Finite(m) => m,
            _ => {
                return Err(Error::UnsupportedRegime(
                    "derivatives at the right endpoint need a finite endpoint".into(),
                ))
            }
        };
        if self.model.right_density().is_none() {
            return Err(Error::UnsupportedRegime("model has no right-endpoint density".into()));
        }
        let h = 1e-4 * m.abs().max(1.0);
        let k = |theta: f64, z: f64| -> Result<f64> {
            self.kappa(theta, z)?
                .finite()
                .ok_or_else(|| Error::Domain(format!("kappa({theta}|{z}) is infinite")))
        };
        let richardson = |f: &dyn Fn(f64) -> Result<f64>| -> Result<f64> {
            let coarse = f(h)?;
            let fine = f(0.5 * h)?;
            Ok((4.0 * fine - coarse) / 3.0)
        };
        let d_theta_at = |z: f64, s: f64| -> Result<f64> { Ok((k(s, z)? - k(-s, z)?) / (2.0 * s)) };

        let d_theta = richardson(&|s| d_theta_at(m, s))?;
        let d_theta_theta = richardson(&|s| Ok((k(s, m)? - 2.0 * k(0.0, m)? + k(-s, m)?) / (s * s)))?;
        let d_z = richardson(&|s| {
            Ok((3.0 * k(0.0, m)? - 4.0 * k(0.0, m - s)? + k(0.0, m - 2.0 * s)?) / (2.0 * s))
        })?;
        let d_theta_z = richardson(&|s| {
            Ok((3.0 * d_theta_at(m, s)? - 4.0 * d_theta_at(m - s, s)? + d_theta_at(m - 2.0 * s, s)?)
                / (2.0 * s))
        })?;
        let d_zz = richardson(&|s| {
            Ok((2.0 * k(0.0, m)? - 5.0 * k(0.0, m - s)? + 4.0 * k(0.0, m - 2.0 * s)?
                - k(0.0, m - 3.0 * s)?)
                / (s * s))
        })?;
        Ok(KappaPartials {
            d_theta,
            d_theta_theta,
            d_z,
            d_theta_z,
            d_zz,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn neg_exp_closed(theta: f64, z: f64) -> f64 {
        theta * z - theta.ln_1p()
    }

    #[test]
    fn neg_exp_example_value() {
        let c = ConditionalCgf::quadrature(DistributionModel::neg_exp());
        let v = c.kappa(1.0, -0.5).unwrap().finite().unwrap();
        assert!((v - (-0.5 - 2f64.ln())).abs() < 1e-10);
        assert!((v + 1.193147).abs() < 1e-6);
    }

    #[test]
    fn neg_exp_diverges_at_and_below_minus_one() {
        for mode in [CgfMode::ClosedForm, CgfMode::Quadrature] {
            let c = ConditionalCgf::new(DistributionModel::neg_exp(), mode).unwrap();
            for z in [-2.0, -0.3, 0.0] {
                assert_eq!(c.kappa(-1.0, z).unwrap(), ExtReal::PosInf);
                assert_eq!(c.kappa(-3.5, z).unwrap(), ExtReal::PosInf);
            }
        }
    }

    #[test]
    fn zero_at_origin_for_every_model() {
        for m in [
            DistributionModel::neg_exp(),
            DistributionModel::uniform01(),
            DistributionModel::exponential(2.0),
            DistributionModel::stretched_tail(2.0),
        ] {
            let c = ConditionalCgf::quadrature(m);
            for z in [0.1f64, 0.5, 1.0, 3.0] {
                let z = match m.support().upper {
                    ExtReal::Finite(b) => b - z.min(0.9),
                    _ => z,
                };
                assert_eq!(c.kappa(0.0, z).unwrap(), ExtReal::ZERO);
            }
        }
    }

    #[test]
    fn quadrature_matches_closed_form_on_grid() {
        let q = ConditionalCgf::quadrature(DistributionModel::neg_exp());
        for i in 0..12 {
            for j in 0..12 {
                let theta = -0.9 + 5.9 * i as f64 / 11.0;
                let z = -3.0 + 3.0 * j as f64 / 11.0;
                let v = q.kappa(theta, z).unwrap().finite().unwrap();
                assert!((v - neg_exp_closed(theta, z)).abs() < 1e-8, "theta={theta} z={z}");
            }
        }
    }

    #[test]
    fn closed_forms_agree_with_quadrature_for_other_families() {
        for m in [DistributionModel::uniform01(), DistributionModel::exponential(1.5)] {
            let closed = ConditionalCgf::new(m, CgfMode::ClosedForm).unwrap();
            let quad = ConditionalCgf::quadrature(m);
            for &theta in &[-30.0, -2.0, -0.1, 0.7, 1.4, 3.0, 25.0] {
                for &z in &[0.05, 0.3, 1.0, 2.0] {
                    let a = closed.kappa(theta, z).unwrap();
                    let b = quad.kappa(theta, z).unwrap();
                    assert_relative_eq!(a.to_f64(), b.to_f64(), epsilon = 1e-9, max_relative = 1e-9);
                }
            }
        }
    }

    #[test]
    fn global_kappa_examples() {
        let c = ConditionalCgf::auto(DistributionModel::neg_exp());
        let v = c.kappa_global(0.5).unwrap().finite().unwrap();
        assert!((v + 1.5f64.ln()).abs() < 1e-12);
        assert!((v + 0.405465).abs() < 1e-6);
        for lambda in [0.5, 1.0, 3.0] {
            let quad = ConditionalCgf::quadrature(DistributionModel::exponential(lambda));
            for frac in [-2.0, -0.5, 0.25, 0.8] {
                let theta = frac * lambda;
                let v = quad.kappa_global(theta).unwrap().finite().unwrap();
                assert!((v + (-theta / lambda).ln_1p()).abs() < 1e-9, "lambda={lambda} theta={theta}");
            }
            assert_eq!(quad.kappa_global(lambda).unwrap(), ExtReal::PosInf);
        }
    }

    #[test]
    fn degenerate_branch_at_left_endpoint() {
        let c = ConditionalCgf::auto(DistributionModel::uniform01());
        assert_eq!(c.kappa(2.5, 0.0).unwrap(), ExtReal::Finite(0.0));
        let e = ConditionalCgf::auto(DistributionModel::exponential(1.0).truncate(3.0).unwrap());
        assert_eq!(e.kappa(-4.0, 0.0).unwrap(), ExtReal::Finite(0.0));
    }

    #[test]
    fn errors() {
        let c = ConditionalCgf::auto(DistributionModel::uniform01());
        assert!(matches!(c.kappa(f64::NAN, 0.5), Err(Error::Argument(_))));
        assert!(matches!(c.kappa(1.0, -0.5), Err(Error::Domain(_))));
        assert!(ConditionalCgf::new(DistributionModel::stretched_tail(2.0), CgfMode::ClosedForm).is_err());
    }

    #[test]
    fn partition_mass_is_monotone_in_z() {
        let c = ConditionalCgf::quadrature(DistributionModel::neg_exp());
        for theta in [-0.5, 0.5, 2.0] {
            let mut prev = f64::NEG_INFINITY;
            for j in 0..20 {
                let z = -4.0 + 0.2 * j as f64;
                let log_mass = c.kappa(theta, z).unwrap().finite().unwrap() + z;
                assert!(log_mass >= prev);
                prev = log_mass;
            }
        }
    }

    #[test]
    fn slope_at_origin_is_truncated_mean() {
        for m in [DistributionModel::neg_exp(), DistributionModel::uniform01(), DistributionModel::stretched_tail(2.0)] {
            let c = ConditionalCgf::quadrature(m);
            for z in [0.3f64, 0.7, 1.5] {
                let z = match m.support().upper {
                    ExtReal::Finite(b) => b - z.min(0.6),
                    _ => z,
                };
                let h = 1e-4;
                let d = (c.kappa(h, z).unwrap().to_f64() - c.kappa(-h, z).unwrap().to_f64()) / (2.0 * h);
                let mean = m.truncate(z).unwrap().mean();
                assert!((d - mean).abs() < 1e-5, "{m:?} z={z}: {d} vs {mean}");
            }
        }
    }

    #[test]
    fn midpoint_convexity_on_grid() {
        let c = ConditionalCgf::quadrature(DistributionModel::stretched_tail(2.0));
        for z in [0.5, 1.0, 2.5] {
            for i in 0..15 {
                for j in 0..15 {
                    let a = -6.0 + i as f64;
                    let b = -6.0 + j as f64;
                    let mid = c.kappa(0.5 * (a + b), z).unwrap().to_f64();
                    let avg = 0.5 * (c.kappa(a, z).unwrap().to_f64() + c.kappa(b, z).unwrap().to_f64());
                    assert!(mid <= avg + 1e-9);
                }
            }
        }
    }

    #[test]
    fn large_theta_does_not_overflow() {
        let c = ConditionalCgf::quadrature(DistributionModel::uniform01());
        for theta in [-50.0, 50.0] {
            let v = c.kappa(theta, 1.0).unwrap().finite().unwrap();
            let closed = ConditionalCgf::auto(DistributionModel::uniform01()).kappa(theta, 1.0).unwrap().to_f64();
            assert!((v - closed).abs() < 1e-9);
        }
    }

    #[test]
    fn partials_reproduce_moments() {
        let u = ConditionalCgf::auto(DistributionModel::uniform01()).partials_at_origin().unwrap();
        assert!((u.d_theta - 0.5).abs() < 1e-8);
        assert!((u.d_theta_theta - 1.0 / 12.0).abs() < 1e-7);
        assert!(u.d_z.abs() < 1e-12);
        // d/dz of the truncated mean at M is f(M)(M - mu)
        assert!((u.d_theta_z - 0.5).abs() < 1e-6);
        let n = ConditionalCgf::auto(DistributionModel::neg_exp()).partials_at_origin().unwrap();
        assert!((n.d_theta + 1.0).abs() < 1e-8);
        assert!((n.d_theta_theta - 1.0).abs() < 1e-6);
        assert!((n.d_theta_z - 1.0).abs() < 1e-6);
        let s = ConditionalCgf::auto(DistributionModel::stretched_tail(2.0)).partials_at_origin();
        assert!(matches!(s, Err(Error::UnsupportedRegime(_))));
    }
}
