use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use devlab_core::distmodel::FamilyName;
use devlab_core::{DistributionModel, DistributionSpec};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    LdpSumMax,
    NcmdSumMax,
    WeibullLimit,
    ChowTeugels,
    DarlingIdentity,
    DerivativeIdentities,
    ScaledMaxLdp,
    MinimaLdp,
    MinimaClt,
    MinimaMd,
    TwoSpeed,
    LevelSet,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Experiment::LdpSumMax,
        Experiment::NcmdSumMax,
        Experiment::WeibullLimit,
        Experiment::ChowTeugels,
        Experiment::DarlingIdentity,
        Experiment::DerivativeIdentities,
        Experiment::ScaledMaxLdp,
        Experiment::MinimaLdp,
        Experiment::MinimaClt,
        Experiment::MinimaMd,
        Experiment::TwoSpeed,
        Experiment::LevelSet,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::LdpSumMax => "ldp_sum_max",
            Experiment::NcmdSumMax => "ncmd_sum_max",
            Experiment::WeibullLimit => "weibull_limit",
            Experiment::ChowTeugels => "chow_teugels",
            Experiment::DarlingIdentity => "darling_identity",
            Experiment::DerivativeIdentities => "derivative_identities",
            Experiment::ScaledMaxLdp => "scaled_max_ldp",
            Experiment::MinimaLdp => "minima_ldp",
            Experiment::MinimaClt => "minima_clt",
            Experiment::MinimaMd => "minima_md",
            Experiment::TwoSpeed => "two_speed",
            Experiment::LevelSet => "level_set",
        }
    }

    /// Result the experiment checks, and the regime it needs.
    pub fn describe(&self) -> (&'static str, &'static str) {
        match self {
            Experiment::LdpSumMax => ("Prop. LDP-sum-maxima", "any model"),
            Experiment::NcmdSumMax => ("Prop. sum-maxima-NCMD", "finite M, f(M) > 0"),
            Experiment::WeibullLimit => ("Assumption NCMD, Weibull limit of the maximum", "finite M, f(M) > 0"),
            Experiment::ChowTeugels => ("Prop. bivariate Gaussian x Weibull limit", "finite M, f(M) > 0"),
            Experiment::DarlingIdentity => ("Prop. LDP-sum-maxima, conditional law given the maximum", "any model"),
            Experiment::DerivativeIdentities => ("Prop. sum-maxima-NCMD, derivative identities", "finite M, f(M) > 0"),
            Experiment::ScaledMaxLdp => ("Prop. LDP-sum-maxima-added", "M infinite, regularly varying tail"),
            Experiment::MinimaLdp => ("Prop. partial-minima LDP", "exponential"),
            Experiment::MinimaClt => ("Prop. partial-minima CLT", "exponential"),
            Experiment::MinimaMd => ("Prop. MD", "exponential"),
            Experiment::TwoSpeed => ("Lemma two-speed-functions", "any model"),
            Experiment::LevelSet => ("Example non-compact, bounded level sets", "any model"),
        }
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(
            self,
            Experiment::LdpSumMax
                | Experiment::NcmdSumMax
                | Experiment::ChowTeugels
                | Experiment::DarlingIdentity
                | Experiment::MinimaLdp
                | Experiment::MinimaClt
                | Experiment::TwoSpeed
        )
    }

    pub fn tolerance_names(&self) -> &'static [&'static str] {
        match self {
            Experiment::LdpSumMax => &["max_rate", "mean_rate"],
            Experiment::NcmdSumMax => &["z_rate", "y_rate"],
            Experiment::WeibullLimit => &["gap_factor"],
            Experiment::ChowTeugels => &["ks", "chi_square_level"],
            Experiment::DarlingIdentity => &["standard_errors"],
            Experiment::DerivativeIdentities => &["relative"],
            Experiment::ScaledMaxLdp => &["rate"],
            Experiment::MinimaLdp => &["rate"],
            Experiment::MinimaClt => &["ks"],
            Experiment::MinimaMd => &["relative"],
            Experiment::TwoSpeed => &["censored_bound", "mean_floor"],
            Experiment::LevelSet => &[],
        }
    }

    fn default_family(&self) -> DistributionSpec {
        let family = match self {
            Experiment::LdpSumMax | Experiment::DarlingIdentity | Experiment::TwoSpeed | Experiment::LevelSet => {
                FamilyName::NegExp
            }
            Experiment::NcmdSumMax
            | Experiment::WeibullLimit
            | Experiment::ChowTeugels
            | Experiment::DerivativeIdentities => FamilyName::Uniform01,
            Experiment::ScaledMaxLdp | Experiment::MinimaLdp | Experiment::MinimaClt | Experiment::MinimaMd => {
                FamilyName::Exponential
            }
        };
        DistributionSpec {
            family,
            lambda: None,
            alpha: None,
        }
    }

    fn default_n_grid(&self) -> Vec<u64> {
        match self {
            Experiment::LdpSumMax => vec![10, 30, 100],
            Experiment::NcmdSumMax => vec![100, 1000, 10_000],
            Experiment::WeibullLimit => vec![100, 1000, 10_000, 1_000_000],
            Experiment::ChowTeugels => vec![100, 1000, 10_000],
            Experiment::DarlingIdentity => vec![20],
            Experiment::DerivativeIdentities | Experiment::LevelSet => vec![],
            Experiment::ScaledMaxLdp => vec![10_000, 1_000_000],
            Experiment::MinimaLdp => vec![100, 1000, 10_000],
            Experiment::MinimaClt => vec![100, 10_000, 1_000_000],
            Experiment::MinimaMd => vec![1000, 100_000, 10_000_000],
            Experiment::TwoSpeed => vec![100, 1000],
        }
    }

    fn default_reps(&self) -> u64 {
        match self {
            Experiment::LdpSumMax | Experiment::NcmdSumMax | Experiment::DarlingIdentity => 100_000,
            Experiment::TwoSpeed => 1_000_000,
            _ => 10_000,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LChoice {
    #[default]
    Constant,
    Quantile,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scaling {
    pub beta: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Event {
    pub kind: Option<String>,
    #[serde(default)]
    pub bounds: Vec<f64>,
    pub radius: Option<f64>,
}

/// Raw file contents, before defaults are applied.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Experiment,
    distribution: Option<DistributionSpec>,
    n_grid: Option<Vec<u64>>,
    reps: Option<u64>,
    seed: Option<u64>,
    scaling: Option<Scaling>,
    event: Option<Event>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
    output_dir: Option<PathBuf>,
    theta_grid: Option<Vec<f64>>,
    condition: Option<f64>,
    l_sequence: Option<LChoice>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub distribution: DistributionSpec,
    pub model: DistributionModel,
    pub n_grid: Vec<u64>,
    pub reps: u64,
    pub seed: u64,
    pub beta: Option<f64>,
    pub event: Option<Event>,
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
    pub theta_grid: Option<Vec<f64>>,
    pub condition: Option<f64>,
    pub l_sequence: LChoice,
}

/// A config problem located in the source file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

/// Line of the first occurrence of `"key"`, or 1.
fn line_of(src: &str, key: &str) -> usize {
    let needle = format!("\"{key}\"");
    src.lines().position(|l| l.contains(&needle)).map_or(1, |i| i + 1)
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub reps: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn parse(src: &str, overrides: &Overrides) -> Result<Self, ConfigError> {
        let raw: RawConfig = serde_json::from_str(src).map_err(|e| ConfigError {
            line: e.line().max(1),
            message: e.to_string(),
        })?;
        let fail = |key: &str, message: String| ConfigError {
            line: line_of(src, key),
            message,
        };
        let experiment = raw.experiment;

        let distribution = raw.distribution.unwrap_or_else(|| experiment.default_family());
        let model = distribution.build().map_err(|e| fail("distribution", e.to_string()))?;

        let n_grid = match raw.n_grid {
            Some(g) if g.is_empty() => return Err(fail("n_grid", "n_grid must not be empty".into())),
            Some(g) => g,
            None => experiment.default_n_grid(),
        };
        if n_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(fail("n_grid", "n_grid must be strictly increasing".into()));
        }
        if n_grid.first().is_some_and(|&n| n < 2) {
            return Err(fail("n_grid", "sample sizes must be at least 2".into()));
        }

        let reps = overrides.reps.or(raw.reps).unwrap_or_else(|| experiment.default_reps());
        if experiment.is_monte_carlo() && reps < 1000 {
            return Err(fail("reps", format!("reps = {reps}: Monte Carlo experiments need at least 1000")));
        }

        let beta = raw.scaling.map(|s| s.beta);
        if let Some(b) = beta {
            if !(b > 0.0 && b < 1.0) {
                return Err(fail("beta", format!("beta = {b} must lie in (0, 1)")));
            }
        }

        for key in raw.tolerances.keys() {
            if !experiment.tolerance_names().contains(&key.as_str()) {
                return Err(fail(
                    key,
                    format!(
                        "unknown tolerance {key:?} for {experiment}; expected one of {:?}",
                        experiment.tolerance_names()
                    ),
                ));
            }
        }

        if let Some(event) = &raw.event {
            if event.bounds.iter().any(|b| !b.is_finite()) {
                return Err(fail("bounds", "event bounds must be finite".into()));
            }
            if event.radius.is_some_and(|r| r.is_nan() || r <= 0.0) {
                return Err(fail("radius", "radius must be positive".into()));
            }
        }

        Ok(Self {
            experiment,
            distribution,
            model,
            n_grid,
            reps,
            seed: overrides.seed.or(raw.seed).unwrap_or(0),
            beta,
            event: raw.event,
            tolerances: raw.tolerances,
            output_dir: overrides
                .output_dir
                .clone()
                .or(raw.output_dir)
                .unwrap_or_else(|| PathBuf::from("devlab_out")),
            theta_grid: raw.theta_grid,
            condition: raw.condition,
            l_sequence: raw.l_sequence.unwrap_or_default(),
        })
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    /// Event bounds if the kind matches (or is omitted), else `None`.
    pub fn bounds_for(&self, kind: &str) -> Option<Vec<f64>> {
        let event = self.event.as_ref()?;
        match &event.kind {
            Some(k) if k != kind => None,
            _ => Some(event.bounds.clone()),
        }
    }

    pub fn event_kind(&self) -> Option<&str> {
        self.event.as_ref().and_then(|e| e.kind.as_deref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(src: &str) -> Result<ExperimentConfig, ConfigError> {
        ExperimentConfig::parse(src, &Overrides::default())
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse(r#"{"experiment":"weibull_limit","distribution":{"family":"uniform01"},"n_grid":[100,1000]}"#)
            .unwrap();
        assert_eq!(c.n_grid, vec![100, 1000]);
        assert_eq!(c.seed, 0);
        assert_eq!(c.l_sequence, LChoice::Constant);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let src = "{\n  \"experiment\": \"minima_ldp\",\n  \"n_grid\": []\n}";
        assert_eq!(parse(src).unwrap_err().line, 3);
        let src = "{\n  \"experiment\": \"minima_ldp\",\n  \"n_grid\": [10, 10]\n}";
        assert_eq!(parse(src).unwrap_err().line, 3);
        let src = "{\n  \"experiment\": \"minima_ldp\",\n\n  \"reps\": 10\n}";
        assert_eq!(parse(src).unwrap_err().line, 4);
        let src = "{\n  \"experiment\": \"nope\"\n}";
        assert_eq!(parse(src).unwrap_err().line, 2);
        let src = "{\"experiment\": \"minima_md\",\n \"scaling\": {\"beta\": 1.0}}";
        assert_eq!(parse(src).unwrap_err().line, 2);
        let src = "{\"experiment\": \"minima_md\",\n \"tolerances\": {\n \"bogus\": 1}}";
        assert_eq!(parse(src).unwrap_err().line, 3);
        let src = "{\"experiment\": \"minima_md\", \"extra\": 1}";
        assert!(parse(src).is_err());
    }

    #[test]
    fn overrides_win() {
        let o = Overrides {
            seed: Some(9),
            reps: Some(5000),
            output_dir: Some("x".into()),
        };
        let c = ExperimentConfig::parse(r#"{"experiment":"two_speed","seed":1,"reps":2000}"#, &o).unwrap();
        assert_eq!((c.seed, c.reps), (9, 5000));
        assert_eq!(c.output_dir, PathBuf::from("x"));
    }
}
