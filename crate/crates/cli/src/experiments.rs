use devlab_core::rates::scan_level_set;
use devlab_core::simulate::draw_sum_max;
use devlab_core::verify::{
    bivariate_weak_convergence_check, darling_identity_check, derivative_identities_check, estimate_log_prob,
    exact_log_prob_max, hoglund_clt_check, minima_ldp_slope, minima_md_limit, minima_md_prelimit, ncmd_z_rate_check,
    scaled_max_log_prob, two_speed_degeneracy_check, weibull_limit_point,
};
use devlab_core::{
    derive_seed, Error, ExtReal, Family, LSequence, RateFunction, RateKey, ScalingFamily, SpeedKind,
};

use crate::config::{Experiment, ExperimentConfig, LChoice};
use crate::output::{number, Criterion, Row};

/// Why an experiment could not run.
#[derive(Debug, Clone, PartialEq)]
pub enum RunError {
    /// The config asks for something meaningless (exit 2).
    Config(String),
    /// The model is outside the regime the experiment needs (exit 3).
    Regime(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::UnsupportedRegime(m) => RunError::Regime(m),
            other => RunError::Config(other.to_string()),
        }
    }
}

pub struct Outcome {
    pub rows: Vec<Row>,
    pub criteria: Vec<Criterion>,
}

type Run = Result<Outcome, RunError>;

pub fn run(cfg: &ExperimentConfig) -> Run {
    match cfg.experiment {
        Experiment::LdpSumMax => ldp_sum_max(cfg),
        Experiment::NcmdSumMax => ncmd_sum_max(cfg),
        Experiment::WeibullLimit => weibull_limit(cfg),
        Experiment::ChowTeugels => chow_teugels(cfg),
        Experiment::DarlingIdentity => darling_identity(cfg),
        Experiment::DerivativeIdentities => derivative_identities(cfg),
        Experiment::ScaledMaxLdp => scaled_max_ldp(cfg),
        Experiment::MinimaLdp => minima_ldp(cfg),
        Experiment::MinimaClt => minima_clt(cfg),
        Experiment::MinimaMd => minima_md(cfg),
        Experiment::TwoSpeed => two_speed(cfg),
        Experiment::LevelSet => level_set(cfg),
    }
}

fn l_sequence(cfg: &ExperimentConfig) -> LSequence {
    match cfg.l_sequence {
        LChoice::Constant => LSequence::Constant,
        LChoice::Quantile => LSequence::QuantileBased,
    }
}

fn need_noncentral(cfg: &ExperimentConfig) -> Result<(), RunError> {
    let m = &cfg.model;
    if m.support().upper.is_finite() && m.right_density().is_some_and(|f| f > 0.0) {
        Ok(())
    } else {
        Err(RunError::Regime(format!(
            "{} needs a finite right endpoint with positive density there",
            cfg.experiment
        )))
    }
}

fn need_exponential(cfg: &ExperimentConfig) -> Result<f64, RunError> {
    match cfg.model.family() {
        Family::Exponential { lambda } => Ok(lambda),
        _ => Err(RunError::Regime(format!("{} needs exponential draws", cfg.experiment))),
    }
}

fn kind_or<'a>(cfg: &'a ExperimentConfig, allowed: &[&str], default: &'a str) -> Result<&'a str, RunError> {
    match cfg.event_kind() {
        None => Ok(default),
        Some(k) if allowed.contains(&k) => Ok(k),
        Some(k) => Err(RunError::Config(format!(
            "event kind {k:?} is not available for {}; expected one of {allowed:?}",
            cfg.experiment
        ))),
    }
}

fn largest_n(cfg: &ExperimentConfig) -> Result<u64, RunError> {
    cfg.n_grid
        .last()
        .copied()
        .ok_or_else(|| RunError::Config(format!("{} needs a nonempty n_grid", cfg.experiment)))
}

fn abs_gap(a: ExtReal, b: ExtReal) -> f64 {
    match (a, b) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => (x - y).abs(),
        (x, y) if x == y => 0.0,
        _ => f64::INFINITY,
    }
}

fn ldp_sum_max(cfg: &ExperimentConfig) -> Run {
    let m = &cfg.model;
    let kind = kind_or(cfg, &["max_below", "mean_above", "mean_below"], "max_below")?;
    let (mu, sd) = (m.mean(), m.variance().sqrt());
    let bounds = cfg.bounds_for(kind).unwrap_or_else(|| match kind {
        "max_below" => vec![m.quantile(0.5), m.quantile(0.1)],
        "mean_above" => vec![mu + 0.5 * sd],
        _ => vec![mu - 0.5 * sd],
    });
    let mut rows = Vec::new();
    let mut criteria = Vec::new();
    if kind == "max_below" {
        let rate = RateFunction::i_z(*m);
        let mut worst: f64 = 0.0;
        for &n in &cfg.n_grid {
            for &c in &bounds {
                let e = exact_log_prob_max(m, n, n as f64, f64::NEG_INFINITY, c)?;
                let predicted = -rate.eval(&[c]);
                worst = worst.max(abs_gap(e.value, predicted));
                rows.push(Row::from_estimate(&e, Some(RateKey::IZ), c, predicted));
            }
        }
        criteria.push(Criterion::at_most("max_rate", worst, cfg.tolerance("max_rate", 1e-9)));
    } else {
        let above = kind == "mean_above";
        let rate = RateFunction::kappa_star(*m);
        for (k, &y) in bounds.iter().enumerate() {
            if above != (y > mu) {
                return Err(RunError::Config(format!("probe {y} is on the wrong side of the mean {mu}")));
            }
            let predicted = -rate.eval(&[y]);
            let mut ests = Vec::new();
            for &n in &cfg.n_grid {
                let e = estimate_log_prob(
                    |rng| draw_sum_max(m, n, rng).y,
                    |&v| if above { v >= y } else { v <= y },
                    n,
                    n as f64,
                    cfg.reps,
                    derive_seed(derive_seed(cfg.seed, n), k as u64),
                );
                rows.push(Row::from_estimate(&e, Some(RateKey::KappaStar), y, predicted));
                ests.push(e);
            }
            let report = devlab_core::SlopeFitReport::new(cfg.n_grid.clone(), ests, predicted);
            criteria.push(Criterion::at_most(
                format!("mean_rate y={}", number(y)),
                report.intercept_gap().unwrap_or(report.relative_gap),
                cfg.tolerance("mean_rate", 0.25),
            ));
        }
    }
    Ok(Outcome { rows, criteria })
}

fn ncmd_sum_max(cfg: &ExperimentConfig) -> Run {
    need_noncentral(cfg)?;
    let m = &cfg.model;
    let scaling = ScalingFamily::new(SpeedKind::Linear, cfg.beta.unwrap_or(0.5), "n^-beta")?;
    let kind = cfg.event_kind();
    if let Some(k) = kind {
        kind_or(cfg, &["max_below", "mean_above"], k)?;
    }
    let mut rows = Vec::new();
    let mut criteria = Vec::new();
    if kind != Some("mean_above") {
        let zs = cfg.bounds_for("max_below").unwrap_or_else(|| vec![-0.5, -1.0, -2.0]);
        let mut worst: f64 = 0.0;
        for &z in &zs {
            let report = ncmd_z_rate_check(m, &scaling, z, &cfg.n_grid, l_sequence(cfg))?;
            for e in &report.estimates {
                rows.push(Row::from_estimate(e, Some(RateKey::JZ), z, report.predicted));
            }
            worst = worst.max(abs_gap(report.extrapolated, report.predicted));
        }
        criteria.push(Criterion::at_most("z_rate", worst, cfg.tolerance("z_rate", 0.03)));
    }
    if kind != Some("max_below") {
        let ys = cfg.bounds_for("mean_above").unwrap_or_else(|| vec![0.3]);
        let (mu, sd) = (m.mean(), m.variance().sqrt());
        let rate = RateFunction::j_cond();
        let last = largest_n(cfg)?;
        let mut worst: f64 = 0.0;
        for (k, &y) in ys.iter().enumerate() {
            let predicted = -rate.eval(&[y]);
            for &n in &cfg.n_grid {
                let a = scaling.a(n);
                let threshold = y / a.sqrt();
                let root_n = (n as f64).sqrt();
                let e = estimate_log_prob(
                    |rng| draw_sum_max(m, n, rng).y,
                    |&v| root_n * (v - mu) / sd >= threshold,
                    n,
                    1.0 / a,
                    cfg.reps,
                    derive_seed(derive_seed(cfg.seed, n), k as u64),
                );
                if n == last {
                    worst = worst.max(abs_gap(e.value, predicted));
                }
                rows.push(Row::from_estimate(&e, Some(RateKey::JCond), y, predicted));
            }
        }
        criteria.push(Criterion::at_most("y_rate", worst, cfg.tolerance("y_rate", 0.03)));
    }
    Ok(Outcome { rows, criteria })
}

fn weibull_limit(cfg: &ExperimentConfig) -> Run {
    need_noncentral(cfg)?;
    kind_or(cfg, &["max_below"], "max_below")?;
    let zs = cfg.bounds_for("max_below").unwrap_or_else(|| vec![-0.5, -1.0, -2.0, -3.0]);
    let rate = RateFunction::j_z();
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &n in &cfg.n_grid {
        for &z in &zs {
            let p = weibull_limit_point(&cfg.model, n, z, l_sequence(cfg))?;
            let e = devlab_core::LogProbEstimate::exact(p.exact.ln(), n, 1.0);
            if z < 0.0 {
                worst = worst.max((p.exact - p.limit).abs() * n as f64 / (z * z * z.exp()));
            }
            rows.push(Row::from_estimate(&e, Some(RateKey::JZ), z, -rate.eval(&[z])));
        }
    }
    Ok(Outcome {
        rows,
        criteria: vec![Criterion::at_most("gap_factor", worst, cfg.tolerance("gap_factor", 1.1))],
    })
}

fn chow_teugels(cfg: &ExperimentConfig) -> Run {
    need_noncentral(cfg)?;
    let last = largest_n(cfg)?;
    let mut rows = Vec::new();
    let mut criteria = Vec::new();
    for &n in &cfg.n_grid {
        let r = bivariate_weak_convergence_check(
            &cfg.model,
            n,
            cfg.reps as usize,
            derive_seed(cfg.seed, n),
            l_sequence(cfg),
        )?;
        rows.push(Row::statistic(Some(n), "ks_normal", r.ks_normal, None, "monte_carlo"));
        rows.push(Row::statistic(Some(n), "ks_weibull", r.ks_weibull, None, "monte_carlo"));
        rows.push(Row::statistic(Some(n), "chi_square_p", r.p_value, None, "monte_carlo"));
        if n == last {
            let ks = cfg.tolerance("ks", 0.02);
            criteria.push(Criterion::at_most("ks_normal", r.ks_normal, ks));
            criteria.push(Criterion::at_most("ks_weibull", r.ks_weibull, ks));
            criteria.push(Criterion::at_least(
                "independence_p_value",
                r.p_value,
                cfg.tolerance("chi_square_level", 0.01),
            ));
        }
    }
    Ok(Outcome { rows, criteria })
}

fn darling_identity(cfg: &ExperimentConfig) -> Run {
    let m = &cfg.model;
    let z = cfg.condition.unwrap_or_else(|| m.quantile(0.75));
    let thetas = cfg.theta_grid.clone().unwrap_or_else(|| vec![-0.25, 0.25, 0.5, 1.0]);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &n in &cfg.n_grid {
        let report = darling_identity_check(m, n, z, &thetas, cfg.reps as usize, derive_seed(cfg.seed, n))?;
        for r in &report.rows {
            let half = 1.959_963_984_540_054 * r.standard_error;
            rows.push(Row {
                n: Some(n),
                rate: None,
                probe: number(r.theta),
                speed: Some(1.0),
                estimate: Some(ExtReal::Finite(r.estimate)),
                ci_low: Some(ExtReal::Finite(r.estimate - half)),
                ci_high: Some(ExtReal::Finite(r.estimate + half)),
                predicted: Some(ExtReal::Finite(r.predicted)),
                method: "monte_carlo",
                hits: None,
            });
        }
        for &theta in &report.skipped {
            rows.push(Row {
                predicted: Some(ExtReal::PosInf),
                ..Row::statistic(Some(n), number(theta), f64::NAN, None, "monte_carlo")
            });
        }
        worst = worst.max(report.max_gap());
    }
    Ok(Outcome {
        rows,
        criteria: vec![Criterion::at_most(
            "standard_errors",
            worst,
            cfg.tolerance("standard_errors", 3.0),
        )],
    })
}

fn derivative_identities(cfg: &ExperimentConfig) -> Run {
    let r = derivative_identities_check(&cfg.model)?;
    let tol = cfg.tolerance("relative", 1e-3);
    let rows = vec![
        Row::statistic(None, "d_theta", r.partials.d_theta, Some(r.mean), "exact"),
        Row::statistic(None, "d_theta_theta", r.partials.d_theta_theta, Some(r.variance), "exact"),
        Row::statistic(None, "d_z", r.partials.d_z, Some(0.0), "exact"),
    ];
    Ok(Outcome {
        rows,
        criteria: vec![
            Criterion::at_most("d_theta", r.mean_error(), tol),
            Criterion::at_most("d_theta_theta", r.variance_error(), tol),
            Criterion::at_most("d_z", r.partials.d_z.abs(), tol),
        ],
    })
}

fn scaled_max_ldp(cfg: &ExperimentConfig) -> Run {
    let alpha = cfg
        .model
        .tail_index()
        .ok_or_else(|| RunError::Regime("scaled_max_ldp needs a regularly varying tail".into()))?;
    kind_or(cfg, &["max_above"], "max_above")?;
    let zs = cfg.bounds_for("max_above").unwrap_or_else(|| vec![1.2, 1.5, 2.0]);
    let rate = RateFunction::h_z(alpha);
    let last = largest_n(cfg)?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &n in &cfg.n_grid {
        for &z in &zs {
            let e = scaled_max_log_prob(&cfg.model, n, z)?;
            let predicted = -rate.eval(&[z]);
            if n == last {
                worst = worst.max(abs_gap(e.value, predicted));
            }
            rows.push(Row::from_estimate(&e, Some(RateKey::HZ), z, predicted));
        }
    }
    Ok(Outcome {
        rows,
        criteria: vec![Criterion::at_most("rate", worst, cfg.tolerance("rate", 0.05))],
    })
}

fn minima_ldp(cfg: &ExperimentConfig) -> Run {
    let lambda = need_exponential(cfg)?;
    let kind = kind_or(cfg, &["mean_above", "mean_below"], "mean_above")?;
    let xs = cfg.event.as_ref().map(|e| e.bounds.clone()).unwrap_or_else(|| vec![2.25 / lambda]);
    let mut rows = Vec::new();
    let mut criteria = Vec::new();
    for (k, &x) in xs.iter().enumerate() {
        if (kind == "mean_above") != (x >= 1.0 / lambda) {
            return Err(RunError::Config(format!("probe {x} is on the wrong side of 1/lambda")));
        }
        let report = minima_ldp_slope(lambda, x, &cfg.n_grid, cfg.reps, derive_seed(cfg.seed, k as u64));
        for e in &report.estimates {
            rows.push(Row::from_estimate(e, Some(RateKey::IX), x, report.predicted));
        }
        let fitted = report.intercept.map_or(report.extrapolated, ExtReal::Finite);
        criteria.push(Criterion::at_most(
            format!("rate x={}", number(x)),
            abs_gap(fitted, report.predicted),
            cfg.tolerance("rate", 0.12),
        ));
    }
    Ok(Outcome { rows, criteria })
}

fn minima_clt(cfg: &ExperimentConfig) -> Run {
    let lambda = need_exponential(cfg)?;
    let report = hoglund_clt_check(lambda, &cfg.n_grid, cfg.reps as usize, cfg.seed);
    let rows = report
        .n_grid
        .iter()
        .zip(&report.ks)
        .map(|(&n, &ks)| Row::statistic(Some(n), "ks_normal", ks, None, "monte_carlo"))
        .collect();
    let (first, last) = (report.ks[0], *report.ks.last().expect("nonempty grid"));
    let mut criteria = vec![Criterion::at_most("ks", last, cfg.tolerance("ks", 0.15))];
    if report.ks.len() > 1 {
        criteria.push(Criterion::at_most("ks_decreases", last - first, 0.0));
    }
    Ok(Outcome { rows, criteria })
}

fn minima_md(cfg: &ExperimentConfig) -> Run {
    let lambda = need_exponential(cfg)?;
    let scaling = ScalingFamily::new(SpeedKind::Log, cfg.beta.unwrap_or(0.5), "(log n)^-beta")?;
    let thetas = cfg.theta_grid.clone().unwrap_or_else(|| vec![-2.0, -1.0, 1.0, 2.0]);
    let last = largest_n(cfg)?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for &n in &cfg.n_grid {
        for &theta in &thetas {
            let v = minima_md_prelimit(lambda, &scaling, theta, n)?;
            let limit = minima_md_limit(lambda, theta);
            if n == last {
                worst = worst.max(abs_gap(v, ExtReal::Finite(limit)) / limit.max(1.0));
            }
            rows.push(Row {
                n: Some(n),
                speed: Some(1.0 / scaling.a(n)),
                estimate: Some(v),
                ci_low: Some(v),
                ci_high: Some(v),
                ..Row::statistic(Some(n), number(theta), 0.0, Some(limit), "exact")
            });
        }
    }
    Ok(Outcome {
        rows,
        criteria: vec![Criterion::at_most("relative", worst, cfg.tolerance("relative", 0.05))],
    })
}

fn two_speed(cfg: &ExperimentConfig) -> Run {
    let m = &cfg.model;
    kind_or(cfg, &["ball"], "ball")?;
    let mu = m.mean();
    let xs = cfg
        .bounds_for("ball")
        .unwrap_or_else(|| vec![mu + 0.5 * m.variance().sqrt(), mu]);
    let radius = cfg.event.as_ref().and_then(|e| e.radius).unwrap_or(0.1);
    let rate = RateFunction::delta(mu);
    let last = largest_n(cfg)?;
    let mut rows = Vec::new();
    let mut criteria = Vec::new();
    for (k, &x) in xs.iter().enumerate() {
        for &n in &cfg.n_grid {
            let e = two_speed_degeneracy_check(m, x, radius, n, cfg.reps, derive_seed(derive_seed(cfg.seed, n), k as u64));
            let predicted = -rate.eval(&[x]);
            if n == last {
                if x == mu {
                    criteria.push(Criterion::at_least(
                        "mean_floor",
                        e.value.to_f64(),
                        cfg.tolerance("mean_floor", -0.01),
                    ));
                } else {
                    criteria.push(Criterion::at_most(
                        format!("censored_bound x={}", number(x)),
                        if e.is_censored() { e.ci_high.to_f64() } else { e.value.to_f64() },
                        cfg.tolerance("censored_bound", -1.5),
                    ));
                }
            }
            rows.push(Row::from_estimate(&e, Some(RateKey::Delta), x, predicted));
        }
    }
    Ok(Outcome { rows, criteria })
}

fn level_set(cfg: &ExperimentConfig) -> Run {
    let m = &cfg.model;
    let etas = cfg.event.as_ref().map(|e| e.bounds.clone()).unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let (mu, sd) = (m.mean(), m.variance().sqrt());
    let s = m.support();
    let lo = s.lower.finite().unwrap_or(mu - 20.0 * sd);
    let hi = s.upper.finite().unwrap_or(mu + 20.0 * sd);
    let rate = RateFunction::i_joint(*m);
    let mut rows = Vec::new();
    let mut criteria = Vec::new();
    for &eta in &etas {
        if eta < 0.0 {
            return Err(RunError::Config(format!("level {eta} must be nonnegative")));
        }
        let scan = scan_level_set(&rate, eta, &[lo, lo], &[hi, hi], 201);
        let bounded = if scan.bounded { 1.0 } else { 0.0 };
        rows.push(Row::statistic(None, format!("eta={}", number(eta)), bounded, Some(1.0), "exact"));
        criteria.push(Criterion::at_least(format!("bounded eta={}", number(eta)), bounded, 1.0));
    }
    Ok(Outcome { rows, criteria })
}
