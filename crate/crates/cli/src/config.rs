//! Run configuration: a versioned JSON document listing scenarios.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use telewm_core::experiments::{default_time_grid, linspace, Scenario};
use telewm_core::{MeasurementMode, NoiseModel, WeakMeasConfig};

pub const CONFIG_VERSION: u32 = 1;

pub const DEFAULT_MC_SAMPLES: usize = 200_000;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported config version {0} (expected {CONFIG_VERSION})")]
    Version(u32),
    #[error("config lists no scenarios")]
    NoScenarios,
    #[error("{field}: {message}")]
    Run {
        field: &'static str,
        message: String,
    },
    #[error("scenario `{scenario}`, field `{field}`: {message}")]
    Field {
        scenario: String,
        field: &'static str,
        message: String,
    },
}

impl ConfigError {
    fn field(scenario: &str, field: &'static str, message: impl fmt::Display) -> Self {
        ConfigError::Field {
            scenario: scenario.to_string(),
            field,
            message: message.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Evenly spaced range or explicit list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Range {
        start: f64,
        stop: f64,
        points: usize,
    },
    List(Vec<f64>),
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Range {
                start,
                stop,
                points,
            } => linspace(*start, *stop, *points),
            GridSpec::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub noise: NoiseModel,
    pub theta: Option<f64>,
    #[serde(default)]
    pub w: f64,
    #[serde(default)]
    pub wr: f64,
    pub mode: Option<MeasurementMode>,
    pub t_grid: Option<GridSpec>,
    pub seed: Option<u64>,
    pub n_samples: Option<usize>,
    pub bracket: Option<[f64; 2]>,
    pub dt: Option<f64>,
    pub theta_grid: Option<GridSpec>,
    pub w_grid: Option<Vec<f64>>,
    pub wr_grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: OutputSpec,
    pub scenarios: Vec<ScenarioSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field that does not depend on the subcommand.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError::Version(self.version));
        }
        if self.workers == Some(0) {
            return Err(ConfigError::Run {
                field: "workers",
                message: "must be at least 1".into(),
            });
        }
        if self.scenarios.is_empty() {
            return Err(ConfigError::NoScenarios);
        }
        let mut names = HashSet::new();
        for s in &self.scenarios {
            s.validate()?;
            if !names.insert(s.name.as_str()) {
                return Err(ConfigError::field(
                    &s.name,
                    "name",
                    "duplicate scenario name",
                ));
            }
        }
        Ok(())
    }
}

fn check_grid(name: &str, field: &'static str, grid: &[f64]) -> Result<(), ConfigError> {
    if grid.is_empty() {
        return Err(ConfigError::field(name, field, "grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(ConfigError::field(
            name,
            field,
            "grid has a non-finite value",
        ));
    }
    Ok(())
}

impl ScenarioSpec {
    fn validate(&self) -> Result<(), ConfigError> {
        let name = self.name.as_str();
        let safe = |c: char| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.');
        if name.is_empty() || !name.chars().all(safe) || name.starts_with('.') {
            return Err(ConfigError::field(
                name,
                "name",
                "use letters, digits, '_', '-' or '.'",
            ));
        }
        self.noise
            .validate()
            .map_err(|e| ConfigError::field(name, "noise", e))?;
        if let Some(theta) = self.theta {
            telewm_core::BellTypeParams::new(theta)
                .map_err(|e| ConfigError::field(name, "theta", e))?;
        }
        self.measurement(self.w, self.wr)?;
        if let Some(g) = &self.t_grid {
            let t = g.values();
            check_grid(name, "t_grid", &t)?;
            if t.iter().any(|x| *x < 0.0) || t.windows(2).any(|p| p[1] <= p[0]) {
                return Err(ConfigError::field(
                    name,
                    "t_grid",
                    "times must be >= 0 and strictly increasing",
                ));
            }
        }
        if let Some([lo, hi]) = self.bracket {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
                return Err(ConfigError::field(
                    name,
                    "bracket",
                    format!("[{lo}, {hi}] is not a valid time bracket"),
                ));
            }
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(ConfigError::field(name, "dt", "must be positive"));
            }
        }
        if let Some(n) = self.n_samples {
            if n < telewm_core::experiments::MIN_MC_SAMPLES {
                return Err(ConfigError::field(
                    name,
                    "n_samples",
                    "must be at least 1000",
                ));
            }
        }
        if let Some(g) = &self.theta_grid {
            let v = g.values();
            check_grid(name, "theta_grid", &v)?;
            for th in v {
                telewm_core::BellTypeParams::new(th)
                    .map_err(|e| ConfigError::field(name, "theta_grid", e))?;
            }
        }
        for (field, grid) in [("w_grid", &self.w_grid), ("wr_grid", &self.wr_grid)] {
            if let Some(v) = grid {
                check_grid(name, field, v)?;
                if v.iter().any(|x| !(0.0..1.0).contains(x)) {
                    return Err(ConfigError::field(
                        name,
                        field,
                        "strengths must lie in [0, 1)",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn mode(&self) -> MeasurementMode {
        self.mode
            .unwrap_or_else(|| MeasurementMode::for_family(self.noise.family()))
    }

    pub fn measurement(&self, w: f64, wr: f64) -> Result<WeakMeasConfig, ConfigError> {
        let required = MeasurementMode::for_family(self.noise.family());
        if self.mode() != required {
            return Err(ConfigError::field(
                &self.name,
                "mode",
                format!("{} needs {:?}", self.noise.family(), required),
            ));
        }
        WeakMeasConfig::new(w, wr, required).map_err(|e| ConfigError::field(&self.name, "w/wr", e))
    }

    pub fn theta(&self) -> Result<f64, ConfigError> {
        self.theta
            .ok_or_else(|| ConfigError::field(&self.name, "theta", "required by this command"))
    }

    pub fn times(&self) -> Vec<f64> {
        self.t_grid
            .as_ref()
            .map_or_else(default_time_grid, GridSpec::values)
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let cfg = self.measurement(self.w, self.wr)?;
        Scenario::new(self.theta()?, cfg, self.noise, self.times(), self.seed)
            .map_err(|e| ConfigError::field(&self.name, "t_grid", e))
    }

    pub fn strength_pairs(&self) -> Vec<(f64, f64)> {
        let ws = self.w_grid.clone().unwrap_or_else(|| vec![self.w]);
        let wrs = self.wr_grid.clone().unwrap_or_else(|| vec![self.wr]);
        ws.iter()
            .flat_map(|&w| wrs.iter().map(move |&wr| (w, wr)))
            .collect()
    }

    pub fn seed(&self) -> Result<u64, ConfigError> {
        self.seed.ok_or_else(|| {
            ConfigError::field(&self.name, "seed", "Monte-Carlo runs need an explicit seed")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        RunConfig::parse(text, Path::new("test.json"))
    }

    const MINIMAL: &str = r#"{
        "version": 1,
        "scenarios": [
            {"name": "adc", "noise": {"family": "ADC", "params": {"gamma": 0.2}}, "theta": 0.1}
        ]
    }"#;

    #[test]
    fn minimal_config_defaults() {
        let cfg = parse(MINIMAL).unwrap();
        let s = &cfg.scenarios[0];
        assert_eq!(s.mode(), MeasurementMode::OneSided);
        assert_eq!(s.times().len(), 501);
        assert_eq!(s.noise, NoiseModel::adc(0.2).unwrap());
    }

    #[test]
    fn family_names_decode() {
        for (family, params, expect) in [
            (
                "NM_ADC",
                r#"{"gamma0": 1, "k": 0.05}"#,
                NoiseModel::non_markovian_adc(1.0, 0.05).unwrap(),
            ),
            (
                "RTN",
                r#"{"a": 0.1, "gamma": 3}"#,
                NoiseModel::rtn(0.1, 3.0).unwrap(),
            ),
            (
                "OUN",
                r#"{"a": 0.5, "gamma": 5}"#,
                NoiseModel::oun(0.5, 5.0).unwrap(),
            ),
            (
                "PLN",
                r#"{"a": 0.5, "gamma": 3}"#,
                NoiseModel::pln(0.5, 3.0).unwrap(),
            ),
            (
                "CADC",
                r#"{"gamma": 0.2, "q": 0.8}"#,
                NoiseModel::cadc(0.2, 0.8).unwrap(),
            ),
        ] {
            let text = format!(
                r#"{{"version": 1, "scenarios": [{{"name": "x", "noise": {{"family": "{family}", "params": {params}}}}}]}}"#
            );
            assert_eq!(parse(&text).unwrap().scenarios[0].noise, expect);
        }
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(
            parse(r#"{"version": 1, "scenarios": []}"#),
            Err(ConfigError::NoScenarios)
        ));
        assert!(matches!(
            parse(&MINIMAL.replace("\"version\": 1", "\"version\": 2")),
            Err(ConfigError::Version(2))
        ));
        assert!(matches!(
            parse(&MINIMAL.replace("\"theta\"", "\"thet\"")),
            Err(ConfigError::Parse { .. })
        ));
        assert!(matches!(
            parse(&MINIMAL.replace("\"ADC\"", "\"XYZ\"")),
            Err(ConfigError::Parse { .. })
        ));
        let err = parse(&MINIMAL.replace("\"theta\": 0.1", "\"theta\": 0.1, \"bracket\": [0, 0]"))
            .unwrap_err();
        assert!(matches!(
            err,
            ConfigError::Field {
                field: "bracket",
                ..
            }
        ));
        let err =
            parse(&MINIMAL.replace("\"theta\": 0.1", "\"theta\": 0.1, \"mode\": \"two_sided\""))
                .unwrap_err();
        assert!(matches!(err, ConfigError::Field { field: "mode", .. }));
        let err = parse(&MINIMAL.replace("\"adc\"", "\"../adc\"")).unwrap_err();
        assert!(matches!(err, ConfigError::Field { field: "name", .. }));
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse("{\n  \"version\": 1,\n  \"scenarios\": [,]\n}") {
            Err(ConfigError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grids_accept_ranges_and_lists() {
        let text = MINIMAL.replace(
            "\"theta\": 0.1",
            "\"theta\": 0.1, \"t_grid\": {\"start\": 0, \"stop\": 1, \"points\": 3}, \"w_grid\": [0, 0.1], \"wr_grid\": [0.5]",
        );
        let cfg = parse(&text).unwrap();
        let s = &cfg.scenarios[0];
        assert_eq!(s.times(), vec![0.0, 0.5, 1.0]);
        assert_eq!(s.strength_pairs(), vec![(0.0, 0.5), (0.1, 0.5)]);
        let text = MINIMAL.replace("\"theta\": 0.1", "\"theta\": 0.1, \"t_grid\": [0, 2, 1]");
        assert!(parse(&text).is_err());
    }
}
