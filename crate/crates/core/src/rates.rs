//! Catalog of rate functions.
//!
//! Each [`RateFunction`] carries the speed it is paired with, so that a rate
//! is never evaluated against the wrong normalization: the same sequence can
//! obey different principles at speeds `n`, `log n` and `1/a_n`.

use std::fmt;
use std::str::FromStr;

use crate::cgf::ConditionalCgf;
use crate::distmodel::DistributionModel;
use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::legendre::{conjugate, ConjugateResult};

/// Normalizing speed `v_n` paired with a rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Speed {
    /// `v_n = n`
    Linear,
    /// `v_n = log n`
    Log,
    /// `v_n = 1 / a_n` for a moderate-deviation scaling `a_n`.
    InverseScaling,
}

impl fmt::Display for Speed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Speed::Linear => "n",
            Speed::Log => "log n",
            Speed::InverseScaling => "1/a_n",
        })
    }
}

/// String keys used by experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateKey {
    IZ,
    ICond,
    IJoint,
    JZ,
    JCond,
    JJoint,
    HZ,
    HJoint,
    Delta,
    IX,
    JX,
    KappaStar,
}

impl RateKey {
    pub const ALL: [RateKey; 12] = [
        RateKey::IZ,
        RateKey::ICond,
        RateKey::IJoint,
        RateKey::JZ,
        RateKey::JCond,
        RateKey::JJoint,
        RateKey::HZ,
        RateKey::HJoint,
        RateKey::Delta,
        RateKey::IX,
        RateKey::JX,
        RateKey::KappaStar,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RateKey::IZ => "I_Z",
            RateKey::ICond => "I_cond",
            RateKey::IJoint => "I_joint",
            RateKey::JZ => "J_Z",
            RateKey::JCond => "J_cond",
            RateKey::JJoint => "J_joint",
            RateKey::HZ => "H_Z",
            RateKey::HJoint => "H_joint",
            RateKey::Delta => "Delta",
            RateKey::IX => "I_X",
            RateKey::JX => "J_X",
            RateKey::KappaStar => "kappa_star",
        }
    }
}

impl fmt::Display for RateKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RateKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RateKey::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Argument(format!("unknown rate key {s:?}")))
    }
}

/// Where a rate vanishes.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroSet {
    Point(Vec<f64>),
    /// `{(y, z) : y = E[W | W < z]}`, the graph of the conditional mean.
    ConditionalMean,
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    IZ(DistributionModel),
    ICond(ConditionalCgf),
    IJoint(ConditionalCgf),
    JZ,
    JCond,
    JJoint,
    HZ { alpha: f64 },
    HJoint { alpha: f64, mu: f64 },
    Delta { r0: f64 },
    IX { lambda: f64 },
    JX { lambda: f64 },
    KappaStar(ConditionalCgf),
}

#[derive(Debug, Clone, Copy)]
pub struct RateFunction {
    kind: Kind,
}

impl RateFunction {
    /// `I_Z(z) = -log F(z)` on the support, speed `n`.
    pub fn i_z(model: DistributionModel) -> Self {
        Self { kind: Kind::IZ(model) }
    }

    /// `I_{Y|Z}(y | z) = sup_theta { theta y - kappa(theta | z) }`, evaluated at `(y, z)`.
    pub fn i_cond(model: DistributionModel) -> Self {
        Self {
            kind: Kind::ICond(ConditionalCgf::auto(model)),
        }
    }

    /// `I_{Y,Z}(y, z) = I_{Y|Z}(y | z) + I_Z(z)`.
    pub fn i_joint(model: DistributionModel) -> Self {
        Self {
            kind: Kind::IJoint(ConditionalCgf::auto(model)),
        }
    }

    /// `J_Z(z) = -z` for `z <= 0`.
    pub fn j_z() -> Self {
        Self { kind: Kind::JZ }
    }

    /// `J_{Y|Z}(y) = y^2 / 2`.
    pub fn j_cond() -> Self {
        Self { kind: Kind::JCond }
    }

    /// `J_{Y,Z}(y, z) = y^2/2 - z` for `z <= 0`.
    pub fn j_joint() -> Self {
        Self { kind: Kind::JJoint }
    }

    /// `H_Z(z) = z^alpha - 1` for `z >= 1`.
    pub fn h_z(alpha: f64) -> Self {
        Self {
            kind: Kind::HZ { alpha },
        }
    }

    /// `H_{Y,Z}(y, z) = H_Z(z)` on `{y = mu, z >= 1}`, `+inf` elsewhere.
    pub fn h_joint(alpha: f64, mu: f64) -> Self {
        Self {
            kind: Kind::HJoint { alpha, mu },
        }
    }

    /// Zero at `r0`, infinite everywhere else.
    pub fn delta(r0: f64) -> Self {
        Self {
            kind: Kind::Delta { r0 },
        }
    }

    /// `I_X(x) = (sqrt(lambda x) - 1)^2` for `x >= 0`.
    pub fn i_x(lambda: f64) -> Self {
        Self {
            kind: Kind::IX { lambda },
        }
    }

    /// `J_X(x) = x^2 / (2 sigma^2)` with `sigma^2 = 2 / lambda^2`.
    pub fn j_x(lambda: f64) -> Self {
        Self {
            kind: Kind::JX { lambda },
        }
    }

    /// Cramér rate `kappa_Y^*`.
    pub fn kappa_star(model: DistributionModel) -> Self {
        Self {
            kind: Kind::KappaStar(ConditionalCgf::auto(model)),
        }
    }

    /// Builds a catalog entry from its config key. Parameters not carried by
    /// the key are taken from `model` (mean, tail index) or `lambda`.
    pub fn for_key(key: RateKey, model: &DistributionModel, lambda: Option<f64>) -> Result<Self> {
        let need_lambda = || {
            lambda.ok_or_else(|| Error::Argument(format!("{key} needs an exponential rate lambda")))
        };
        let need_alpha = || {
            model
                .tail_index()
                .ok_or_else(|| Error::UnsupportedRegime(format!("{key} needs a regularly varying tail")))
        };
        Ok(match key {
            RateKey::IZ => Self::i_z(*model),
            RateKey::ICond => Self::i_cond(*model),
            RateKey::IJoint => Self::i_joint(*model),
            RateKey::JZ => Self::j_z(),
            RateKey::JCond => Self::j_cond(),
            RateKey::JJoint => Self::j_joint(),
            RateKey::HZ => Self::h_z(need_alpha()?),
            RateKey::HJoint => Self::h_joint(need_alpha()?, model.mean()),
            RateKey::Delta => Self::delta(model.mean()),
            RateKey::IX => Self::i_x(need_lambda()?),
            RateKey::JX => Self::j_x(need_lambda()?),
            RateKey::KappaStar => Self::kappa_star(*model),
        })
    }

    pub fn key(&self) -> RateKey {
        match self.kind {
            Kind::IZ(_) => RateKey::IZ,
            Kind::ICond(_) => RateKey::ICond,
            Kind::IJoint(_) => RateKey::IJoint,
            Kind::JZ => RateKey::JZ,
            Kind::JCond => RateKey::JCond,
            Kind::JJoint => RateKey::JJoint,
            Kind::HZ { .. } => RateKey::HZ,
            Kind::HJoint { .. } => RateKey::HJoint,
            Kind::Delta { .. } => RateKey::Delta,
            Kind::IX { .. } => RateKey::IX,
            Kind::JX { .. } => RateKey::JX,
            Kind::KappaStar(_) => RateKey::KappaStar,
        }
    }

    pub fn speed(&self) -> Speed {
        match self.kind {
            Kind::IZ(_) | Kind::ICond(_) | Kind::IJoint(_) | Kind::KappaStar(_) => Speed::Linear,
            Kind::JZ | Kind::JCond | Kind::JJoint | Kind::JX { .. } => Speed::InverseScaling,
            Kind::HZ { .. } | Kind::HJoint { .. } | Kind::Delta { .. } | Kind::IX { .. } => Speed::Log,
        }
    }

    /// Number of coordinates of an evaluation point.
    pub fn dim(&self) -> usize {
        match self.kind {
            Kind::ICond(_) | Kind::IJoint(_) | Kind::JJoint | Kind::HJoint { .. } => 2,
            _ => 1,
        }
    }

    pub fn zero_set(&self) -> ZeroSet {
        match self.kind {
            Kind::IZ(m) => ZeroSet::Point(vec![m.support().upper.to_f64()]),
            Kind::ICond(_) => ZeroSet::ConditionalMean,
            Kind::IJoint(c) => {
                let m = c.model();
                ZeroSet::Point(vec![m.mean(), m.support().upper.to_f64()])
            }
            Kind::JZ | Kind::JCond => ZeroSet::Point(vec![0.0]),
            Kind::JJoint => ZeroSet::Point(vec![0.0, 0.0]),
            Kind::HZ { .. } => ZeroSet::Point(vec![1.0]),
            Kind::HJoint { mu, .. } => ZeroSet::Point(vec![mu, 1.0]),
            Kind::Delta { r0 } => ZeroSet::Point(vec![r0]),
            Kind::IX { lambda } => ZeroSet::Point(vec![1.0 / lambda]),
            Kind::JX { .. } => ZeroSet::Point(vec![0.0]),
            Kind::KappaStar(c) => ZeroSet::Point(vec![c.model().mean()]),
        }
    }

    pub fn domain_description(&self) -> String {
        match self.kind {
            Kind::IZ(m) => format!("z in [{}, {}]", m.support().lower, m.support().upper),
            Kind::ICond(m) | Kind::IJoint(m) => {
                let s = m.model().support();
                format!("(y, z) with {} <= y <= z <= {}", s.lower, s.upper)
            }
            Kind::JZ => "z <= 0".into(),
            Kind::JCond | Kind::JX { .. } => "all reals".into(),
            Kind::JJoint => "y real, z <= 0".into(),
            Kind::HZ { .. } => "z >= 1".into(),
            Kind::HJoint { mu, .. } => format!("y = {mu}, z >= 1"),
            Kind::Delta { r0 } => format!("{{{r0}}}"),
            Kind::IX { .. } => "x >= 0".into(),
            Kind::KappaStar(c) => {
                let s = c.model().support();
                format!("y in [{}, {}]", s.lower, s.upper)
            }
        }
    }

    /// Value of the rate at `point`; `+inf` off the effective domain.
    ///
    /// # Panics
    /// Panics when `point.len() != self.dim()`.
    pub fn eval(&self, point: &[f64]) -> ExtReal {
        assert_eq!(point.len(), self.dim(), "{} takes {} coordinates", self.key(), self.dim());
        let inf = ExtReal::PosInf;
        match self.kind {
            Kind::IZ(m) => i_z(&m, point[0]),
            Kind::ICond(c) => conditional(&c, point[0], point[1]),
            Kind::IJoint(c) => {
                let iz = i_z(c.model(), point[1]);
                if !iz.is_finite() {
                    return inf;
                }
                conditional(&c, point[0], point[1]) + iz
            }
            Kind::JZ => j_z(point[0]),
            Kind::JCond => ExtReal::Finite(0.5 * point[0] * point[0]),
            Kind::JJoint => j_z(point[1]) + ExtReal::Finite(0.5 * point[0] * point[0]),
            Kind::HZ { alpha } => h_z(alpha, point[0]),
            Kind::HJoint { alpha, mu } => {
                if point[0] == mu {
                    h_z(alpha, point[1])
                } else {
                    inf
                }
            }
            Kind::Delta { r0 } => delta(r0, point[0]),
            Kind::IX { lambda } => {
                let x = point[0];
                if x >= 0.0 {
                    ExtReal::Finite(((lambda * x).sqrt() - 1.0).powi(2))
                } else {
                    inf
                }
            }
            Kind::JX { lambda } => ExtReal::Finite(point[0] * point[0] * lambda * lambda / 4.0),
            Kind::KappaStar(c) => conjugate(
                |t| c.kappa_global(t).unwrap_or(ExtReal::PosInf),
                point[0],
                c.domain(c.model().support().upper),
            )
            .map(|r| r.value)
            .unwrap_or(inf),
        }
    }

    /// Full conjugation record for the Legendre-based entries
    /// (`I_cond`, `I_joint`'s conditional part, `kappa_star`).
    pub fn conjugate_at(&self, point: &[f64]) -> Result<ConjugateResult> {
        match self.kind {
            Kind::ICond(c) | Kind::IJoint(c) => {
                let (y, z) = (point[0], point[1]);
                let dom = c.domain(ExtReal::Finite(z));
                c.kappa(0.0, z)?;
                conjugate(|t| c.kappa(t, z).unwrap_or(ExtReal::PosInf), y, dom)
            }
            Kind::KappaStar(c) => {
                let upper = c.model().support().upper;
                conjugate(|t| c.kappa_global(t).unwrap_or(ExtReal::PosInf), point[0], c.domain(upper))
            }
            _ => Err(Error::Argument(format!("{} is not defined by conjugation", self.key()))),
        }
    }
}

fn i_z(model: &DistributionModel, z: f64) -> ExtReal {
    if ExtReal::Finite(z) > model.support().upper {
        return ExtReal::PosInf;
    }
    let lf = model.log_cdf(z);
    if lf == f64::NEG_INFINITY {
        ExtReal::PosInf
    } else {
        ExtReal::Finite(-lf)
    }
}

fn conditional(c: &ConditionalCgf, y: f64, z: f64) -> ExtReal {
    let s = c.model().support();
    let zt = ExtReal::Finite(z);
    if zt < s.lower || zt > s.upper {
        return ExtReal::PosInf;
    }
    if c.kappa(0.0, z).is_err() {
        return ExtReal::PosInf;
    }
    conjugate(
        |t| c.kappa(t, z).unwrap_or(ExtReal::PosInf),
        y,
        c.domain(zt),
    )
    .map(|r| r.value)
    .unwrap_or(ExtReal::PosInf)
}

fn j_z(z: f64) -> ExtReal {
    if z <= 0.0 {
        ExtReal::Finite(-z)
    } else {
        ExtReal::PosInf
    }
}

fn h_z(alpha: f64, z: f64) -> ExtReal {
    if z >= 1.0 {
        ExtReal::Finite(z.powf(alpha) - 1.0)
    } else {
        ExtReal::PosInf
    }
}

fn delta(r0: f64, r: f64) -> ExtReal {
    if r == r0 {
        ExtReal::ZERO
    } else {
        ExtReal::PosInf
    }
}

/// Central second difference of `I_X` at its zero `1/lambda`; the exact
/// value is `lambda^2 / 2 = 1 / sigma^2`.
pub fn second_derivative_check_ix(lambda: f64) -> f64 {
    assert!(lambda > 0.0, "lambda must be positive");
    let rate = RateFunction::i_x(lambda);
    let x0 = 1.0 / lambda;
    let h = 1e-3 * x0;
    let f = |x: f64| rate.eval(&[x]).finite().expect("finite near 1/lambda");
    (f(x0 + h) - 2.0 * f(x0) + f(x0 - h)) / (h * h)
}

/// Outcome of a grid scan of `{rate <= eta}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetScan {
    pub bounded: bool,
    pub points_inside: usize,
    /// Coordinate-wise min and max over grid points in the level set.
    pub bbox: Option<(Vec<f64>, Vec<f64>)>,
}

/// Scans `{rate <= eta}` on a regular grid of `resolution` points per axis
/// over the box `[lo, hi]`.
///
/// The set is reported unbounded when it reaches a face of the box and the
/// rate is still `<= eta` one grid step beyond that face. Faces along which
/// the rate jumps to `+inf` (the edge of its domain) therefore do not count.
pub fn scan_level_set(rate: &RateFunction, eta: f64, lo: &[f64], hi: &[f64], resolution: usize) -> LevelSetScan {
    let d = rate.dim();
    assert!(eta >= 0.0, "eta must be nonnegative");
    assert!(lo.len() == d && hi.len() == d && resolution >= 2);
    let step: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / (resolution - 1) as f64).collect();
    let inside = |p: &[f64]| rate.eval(p) <= ExtReal::Finite(eta);
    let mut bounded = true;
    let mut count = 0;
    let mut bmin = vec![f64::INFINITY; d];
    let mut bmax = vec![f64::NEG_INFINITY; d];
    let total = resolution.pow(d as u32);
    let mut idx = vec![0usize; d];
    for flat in 0..total {
        let mut rem = flat;
        for slot in idx.iter_mut() {
            *slot = rem % resolution;
            rem /= resolution;
        }
        let p: Vec<f64> = (0..d).map(|k| lo[k] + step[k] * idx[k] as f64).collect();
        if !inside(&p) {
            continue;
        }
        count += 1;
        for k in 0..d {
            bmin[k] = bmin[k].min(p[k]);
            bmax[k] = bmax[k].max(p[k]);
            let face = if idx[k] == 0 {
                Some(-1.0)
            } else if idx[k] == resolution - 1 {
                Some(1.0)
            } else {
                None
            };
            if let Some(dir) = face {
                let mut q = p.clone();
                q[k] += dir * step[k];
                if inside(&q) {
                    bounded = false;
                }
            }
        }
    }
    LevelSetScan {
        bounded,
        points_inside: count,
        bbox: (count > 0).then_some((bmin, bmax)),
    }
}

/// `true` when `{rate <= eta}` stays inside the search box.
pub fn level_set_bounded(rate: &RateFunction, eta: f64, lo: &[f64], hi: &[f64]) -> bool {
    scan_level_set(rate, eta, lo, hi, 201).bounded
}
