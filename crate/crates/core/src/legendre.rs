//! Legendre–Fenchel conjugation of one-dimensional convex functions.
//!
//! `conjugate` maximizes the concave objective `theta -> theta x - L(theta)`
//! with a derivative-free search: geometric bracket expansion from the
//! origin followed by golden-section refinement.

use crate::error::{Error, Result};
use crate::ext::ExtReal;

/// An interval of the real line with optional infinite ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: ExtReal,
    pub hi: ExtReal,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn real_line() -> Self {
        Interval {
            lo: ExtReal::NegInf,
            hi: ExtReal::PosInf,
            lo_closed: false,
            hi_closed: false,
        }
    }

    /// `(a, inf)`
    pub fn open_lower(a: f64) -> Self {
        Interval {
            lo: ExtReal::Finite(a),
            ..Self::real_line()
        }
    }

    /// `(-inf, b)`
    pub fn open_upper(b: f64) -> Self {
        Interval {
            hi: ExtReal::Finite(b),
            ..Self::real_line()
        }
    }

    /// `(-inf, b]`
    pub fn closed_upper(b: f64) -> Self {
        Interval {
            hi: ExtReal::Finite(b),
            hi_closed: true,
            ..Self::real_line()
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let x = ExtReal::Finite(x);
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    fn edge(&self, direction: f64) -> (ExtReal, bool) {
        if direction > 0.0 {
            (self.hi, self.hi_closed)
        } else {
            (self.lo, self.lo_closed)
        }
    }
}

/// Location of the supremum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Argmax {
    Interior(f64),
    /// The supremum sits at (or converges to) a finite edge of the domain.
    Boundary(f64),
    /// The objective is unbounded; the conjugate is `+inf`.
    Unbounded,
}

impl Argmax {
    pub fn theta(&self) -> Option<f64> {
        match *self {
            Argmax::Interior(t) | Argmax::Boundary(t) => Some(t),
            Argmax::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConjugateResult {
    pub value: ExtReal,
    pub argmax: Argmax,
    /// Objective evaluations spent.
    pub iterations: usize,
    /// Final bracket around the maximizer.
    pub bracket: (f64, f64),
}

const MAX_EXPANSIONS: usize = 200;
const GROWTH_WINDOW: usize = 10;
const INV_PHI: f64 = 0.618_033_988_749_894_8;

struct Objective<'a, L> {
    lambda: &'a L,
    x: f64,
    domain: Interval,
    evaluations: usize,
    best_theta: f64,
    best_value: ExtReal,
}

impl<L: Fn(f64) -> ExtReal> Objective<'_, L> {
    fn eval(&mut self, theta: f64) -> ExtReal {
        self.evaluations += 1;
        let v = if self.domain.contains(theta) {
            match (self.lambda)(theta) {
                ExtReal::Finite(l) => ExtReal::Finite(theta * self.x - l),
                ExtReal::PosInf => ExtReal::NegInf,
                ExtReal::NegInf => ExtReal::PosInf,
            }
        } else {
            ExtReal::NegInf
        };
        // Ties keep the smaller |theta|.
        if v > self.best_value || (v == self.best_value && theta.abs() < self.best_theta.abs()) {
            self.best_value = v;
            self.best_theta = theta;
        }
        v
    }
}

enum Expansion {
    Bracket(f64, f64),
    Unbounded,
}

/// `sup_theta { theta x - lambda(theta) }`.
///
/// `domain_hint` is where `lambda` may be finite; points outside it are
/// never evaluated. `lambda(0)` must be finite and the hint must contain 0.
pub fn conjugate<L>(lambda: L, x: f64, domain_hint: Interval) -> Result<ConjugateResult>
where
    L: Fn(f64) -> ExtReal,
{
    if !domain_hint.contains(0.0) {
        return Err(Error::Argument("domain hint must contain 0".into()));
    }
    if !x.is_finite() {
        return Err(Error::Argument(format!("conjugate point must be finite, got {x}")));
    }
    let mut obj = Objective {
        lambda: &lambda,
        x,
        domain: domain_hint,
        evaluations: 0,
        best_theta: 0.0,
        best_value: ExtReal::NegInf,
    };
    let f0 = obj.eval(0.0);
    if !f0.is_finite() {
        return Err(Error::Argument("lambda(0) must be finite".into()));
    }

    let (lo, hi) = match expand(&mut obj, 1.0, f0) {
        Some(Expansion::Unbounded) => return Ok(unbounded(&obj)),
        Some(Expansion::Bracket(a, b)) => (a, b),
        None => match expand(&mut obj, -1.0, f0) {
            Some(Expansion::Unbounded) => return Ok(unbounded(&obj)),
            Some(Expansion::Bracket(a, b)) => (a, b),
            None => (first_step(&domain_hint, -1.0), first_step(&domain_hint, 1.0)),
        },
    };

    let bracket = golden(&mut obj, lo, hi);
    let theta = obj.best_theta;
    let tol = 1e-10 * theta.abs().max(1.0);
    let at_edge = [domain_hint.lo, domain_hint.hi]
        .iter()
        .any(|e| matches!(e, ExtReal::Finite(v) if (v - theta).abs() <= 2.0 * tol.max(bracket.1 - bracket.0)));
    Ok(ConjugateResult {
        value: obj.best_value,
        argmax: if at_edge {
            Argmax::Boundary(theta)
        } else {
            Argmax::Interior(theta)
        },
        iterations: obj.evaluations,
        bracket,
    })
}

fn unbounded<L>(obj: &Objective<'_, L>) -> ConjugateResult {
    ConjugateResult {
        value: ExtReal::PosInf,
        argmax: Argmax::Unbounded,
        iterations: obj.evaluations,
        bracket: (obj.best_theta, obj.best_theta),
    }
}

/// First probe in `direction`: unit step, or halfway to a closer edge.
fn first_step(domain: &Interval, direction: f64) -> f64 {
    match domain.edge(direction).0 {
        ExtReal::Finite(e) if e.abs() <= 1.0 => 0.5 * e,
        _ => direction,
    }
}

/// Walks outward from 0 while the objective increases. Returns `None` when
/// the first step already fails to improve on the origin.
fn expand<L: Fn(f64) -> ExtReal>(
    obj: &mut Objective<'_, L>,
    direction: f64,
    f0: ExtReal,
) -> Option<Expansion> {
    let (edge, edge_closed) = obj.domain.edge(direction);
    let mut prev = 0.0;
    let mut cur = first_step(&obj.domain, direction);
    let mut f_cur = obj.eval(cur);
    if f_cur <= f0 {
        return None;
    }
    let mut slopes: Vec<f64> = Vec::new();
    let mut f_prev = f0;
    for _ in 0..MAX_EXPANSIONS {
        if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (f_prev, f_cur) {
            slopes.push((b - a) / (cur - prev));
        }
        if !edge.is_finite() && linear_growth(&slopes, cur) {
            return Some(Expansion::Unbounded);
        }
        let next = match edge {
            ExtReal::Finite(e) => {
                let doubled = 2.0 * cur;
                if (doubled - e) * direction < 0.0 {
                    doubled
                } else if edge_closed && cur != e {
                    e
                } else {
                    cur + 0.5 * (e - cur)
                }
            }
            _ => 2.0 * cur,
        };
        if next == cur {
            // converged onto a closed edge
            return Some(Expansion::Bracket(prev.min(cur), prev.max(cur)));
        }
        let f_next = obj.eval(next);
        if f_next <= f_cur {
            let (a, b) = (prev.min(next), prev.max(next));
            return Some(Expansion::Bracket(a, b));
        }
        prev = cur;
        f_prev = f_cur;
        cur = next;
        f_cur = f_next;
    }
    match edge {
        ExtReal::Finite(_) => Some(Expansion::Bracket(prev.min(cur), prev.max(cur))),
        _ => Some(Expansion::Unbounded),
    }
}

/// True when the secant slope has stayed positive and essentially constant
/// over the last three decades of theta.
fn linear_growth(slopes: &[f64], theta: f64) -> bool {
    if theta.abs() < 1e3 || slopes.len() <= GROWTH_WINDOW {
        return false;
    }
    let last = slopes[slopes.len() - 1];
    let earlier = slopes[slopes.len() - 1 - GROWTH_WINDOW];
    last > 0.0 && (earlier - last).abs() <= 1e-9 * earlier.abs()
}

fn golden<L: Fn(f64) -> ExtReal>(obj: &mut Objective<'_, L>, mut a: f64, mut b: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = obj.eval(c);
    let mut fd = obj.eval(d);
    while (b - a) > 1e-10 * obj.best_theta.abs().max(1.0) {
        let keep_left = fc > fd || (fc == fd && c.abs() <= d.abs());
        if keep_left {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = obj.eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = obj.eval(d);
        }
        if obj.evaluations > 10_000 {
            break;
        }
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(a: f64) -> impl Fn(f64) -> ExtReal {
        move |t| ExtReal::Finite(0.5 * a * t * t)
    }

    fn neg_exp_kappa(z: f64) -> impl Fn(f64) -> ExtReal {
        move |t| {
            if t <= -1.0 {
                ExtReal::PosInf
            } else {
                ExtReal::Finite(t * z - t.ln_1p())
            }
        }
    }

    #[test]
    fn quadratic_is_self_dual() {
        let r = conjugate(quadratic(1.0), 3.0, Interval::real_line()).unwrap();
        assert!((r.value.finite().unwrap() - 4.5).abs() < 1e-12);
        assert!((r.argmax.theta().unwrap() - 3.0).abs() < 1e-7);
    }

    #[test]
    fn scaled_quadratic_over_a_range() {
        for a in [0.3, 1.0, 4.0] {
            for i in 0..=40 {
                let x = -10.0 + 0.5 * i as f64;
                let r = conjugate(quadratic(a), x, Interval::real_line()).unwrap();
                let exact = x * x / (2.0 * a);
                assert!((r.value.finite().unwrap() - exact).abs() < 1e-8, "a={a} x={x}");
            }
        }
    }

    #[test]
    fn neg_exp_conditional_rate_matches_closed_form() {
        let dom = Interval::open_lower(-1.0);
        for &(y, z) in &[(-1.0, 0.0), (-3.0, -0.5), (-0.6, -0.5), (-5.0, -2.0)] {
            let r = conjugate(neg_exp_kappa(z), y, dom).unwrap();
            let d: f64 = z - y;
            let exact = d - 1.0 - d.ln();
            assert!((r.value.finite().unwrap() - exact).abs() < 1e-9, "{y} {z}");
            assert!((r.argmax.theta().unwrap() - (1.0 / d - 1.0)).abs() < 1e-6);
        }
    }

    #[test]
    fn minima_md_conjugate() {
        for lambda in [0.5, 1.0, 2.0] {
            let l = move |t: f64| ExtReal::Finite(t * t / (lambda * lambda));
            for x in [-2.0, 0.3, 1.7] {
                let r = conjugate(l, x, Interval::real_line()).unwrap();
                let sigma2 = 2.0 / (lambda * lambda);
                assert!((r.value.finite().unwrap() - x * x / (2.0 * sigma2)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn linear_growth_is_unbounded() {
        // y > z for the neg-exp kappa: objective grows like theta (y - z).
        let r = conjugate(neg_exp_kappa(-1.0), -0.5, Interval::open_lower(-1.0)).unwrap();
        assert_eq!(r.value, ExtReal::PosInf);
        assert_eq!(r.argmax, Argmax::Unbounded);
        // Linear lambda: conjugate is +inf away from the slope.
        let r = conjugate(|t: f64| ExtReal::Finite(2.0 * t), 1.0, Interval::real_line()).unwrap();
        assert_eq!(r.value, ExtReal::PosInf);
    }

    #[test]
    fn flat_objective_returns_origin() {
        let r = conjugate(|t: f64| ExtReal::Finite(2.0 * t), 2.0, Interval::real_line()).unwrap();
        assert_eq!(r.value, ExtReal::Finite(0.0));
        assert_eq!(r.argmax.theta(), Some(0.0));
    }

    #[test]
    fn closed_edge_supremum_is_flagged() {
        // lambda = theta^2 on (-inf, 0.5]; x = 3 wants theta = 1.5, clipped to 0.5.
        let dom = Interval::closed_upper(0.5);
        let r = conjugate(|t: f64| ExtReal::Finite(t * t), 3.0, dom).unwrap();
        assert!((r.value.finite().unwrap() - (1.5 - 0.25)).abs() < 1e-9);
        assert!(matches!(r.argmax, Argmax::Boundary(t) if (t - 0.5).abs() < 1e-9));
    }

    #[test]
    fn domain_without_origin_is_rejected() {
        let dom = Interval::open_lower(0.5);
        assert!(matches!(conjugate(quadratic(1.0), 1.0, dom), Err(Error::Argument(_))));
    }
}
