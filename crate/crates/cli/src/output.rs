use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use devlab_core::verify::LogProbEstimate;
use devlab_core::{DistributionSpec, ExtReal, RateKey};
use serde::Serialize;

pub const HEADER: [&str; 10] = [
    "n", "rate", "probe", "speed", "estimate", "ci_low", "ci_high", "predicted", "method", "hits",
];

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub n: Option<u64>,
    pub rate: Option<RateKey>,
    pub probe: String,
    pub speed: Option<f64>,
    pub estimate: Option<ExtReal>,
    pub ci_low: Option<ExtReal>,
    pub ci_high: Option<ExtReal>,
    pub predicted: Option<ExtReal>,
    pub method: &'static str,
    pub hits: Option<u64>,
}

impl Row {
    /// Row for a log-probability; censored estimates leave `estimate` empty.
    pub fn from_estimate(e: &LogProbEstimate, rate: Option<RateKey>, probe: f64, predicted: ExtReal) -> Self {
        Self {
            n: Some(e.n),
            rate,
            probe: number(probe),
            speed: Some(e.speed_value),
            estimate: (!e.is_censored()).then_some(e.value),
            ci_low: Some(e.ci_low),
            ci_high: Some(e.ci_high),
            predicted: Some(predicted),
            method: e.method.as_str(),
            hits: e.hits,
        }
    }

    /// Row for a statistic that is not a log-probability.
    pub fn statistic(n: Option<u64>, probe: impl Into<String>, value: f64, predicted: Option<f64>, method: &'static str) -> Self {
        Self {
            n,
            rate: None,
            probe: probe.into(),
            speed: None,
            estimate: Some(ExtReal::Finite(value)),
            ci_low: None,
            ci_high: None,
            predicted: predicted.map(ExtReal::Finite),
            method,
            hits: None,
        }
    }

    fn fields(&self) -> [String; 10] {
        let ext = |x: Option<ExtReal>| x.map(ext_number).unwrap_or_default();
        [
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            self.rate.map(|r| r.to_string()).unwrap_or_default(),
            self.probe.clone(),
            self.speed.map(number).unwrap_or_default(),
            ext(self.estimate),
            ext(self.ci_low),
            ext(self.ci_high),
            ext(self.predicted),
            self.method.to_string(),
            self.hits.map(|h| h.to_string()).unwrap_or_default(),
        ]
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x > 0.0 {
        "inf".into()
    } else if x < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

fn ext_number(x: ExtReal) -> String {
    number(x.to_f64())
}

pub fn write_csv(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Criterion {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value <= threshold,
            value,
            threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            passed: value >= threshold,
            value,
            threshold,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub experiment: &'a str,
    pub distribution: &'a DistributionSpec,
    pub seed: u64,
    pub reps: u64,
    pub n_grid: &'a [u64],
    pub passed: bool,
    pub criteria: &'a [Criterion],
    pub wall_time_seconds: f64,
}

pub fn write_summary(path: &Path, summary: &Summary<'_>) -> Result<()> {
    // serde_json writes non-finite floats as null, which is what a reader expects
    let text = serde_json::to_string_pretty(summary)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
