use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use telewm_core::experiments::{
    blp_series, find_zero_deviation, grid_sweep, mc_teleportation_fidelity, time_sweep, Scenario,
};
use telewm_core::metrics::{fidelity, integrated_non_markovianity, DEFAULT_BLP_STEP};
use telewm_core::states::bell_type;
use telewm_core::weakmeas::run_protocol;
use telewm_core::{BellTypeParams, NoiseModel, Regime, WeakMeasConfig};

use crate::config::{ConfigError, Format, RunConfig, ScenarioSpec, DEFAULT_MC_SAMPLES};
use crate::output::{series_file, table_file, BlpRow, Cell, GridRow, OutputFile, Tabular};

/// σ above this marks information backflow.
pub const BACKFLOW_TOL: f64 = 1e-9;

/// Default search window for zero deviation.
pub const DEFAULT_BRACKET: [f64; 2] = [0.0, 10.0];

pub const DEFAULT_OUT_DIR: &str = "out";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Evolve,
    Grid,
    FindZeroDev,
    Blp,
    Oracle,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("scenario `{scenario}`: {source}")]
    Numeric {
        scenario: String,
        #[source]
        source: telewm_core::Error,
    },
    #[error("{failed} of {total} oracle comparisons failed")]
    OracleMismatch { failed: usize, total: usize },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 for configuration and I/O problems, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Numeric { .. } | CliError::OracleMismatch { .. } => 2,
        }
    }
}

fn numeric(scenario: &str) -> impl Fn(telewm_core::Error) -> CliError + '_ {
    move |source| CliError::Numeric {
        scenario: scenario.to_string(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub command: CommandKind,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub format: Option<Format>,
}

/// Files produced by a command plus the count of failed comparisons.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub files: Vec<OutputFile>,
    pub failures: usize,
    pub checks: usize,
}

impl Report {
    fn files(files: Vec<OutputFile>) -> Self {
        Self {
            files,
            failures: 0,
            checks: 0,
        }
    }
}

/// Loads the config, runs the command on a pool of `workers` threads and
/// writes every output file once all scenarios are done.
pub fn run(opts: &RunOptions) -> Result<Vec<PathBuf>, CliError> {
    let cfg = RunConfig::load(&opts.config)?;
    let workers = match opts.workers.or(cfg.workers) {
        Some(0) => {
            return Err(ConfigError::Run {
                field: "workers",
                message: "must be at least 1".into(),
            }
            .into())
        }
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let format = opts.format.or(cfg.output.format).unwrap_or(Format::Csv);
    let out = opts
        .out
        .clone()
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool");
    log::info!(
        "running {:?} on {} scenario(s) with {workers} worker(s)",
        opts.command,
        cfg.scenarios.len()
    );
    let report = pool.install(|| execute(opts.command, &cfg, format))?;
    let written = write_all(&out, &report.files)?;
    if report.failures > 0 {
        return Err(CliError::OracleMismatch {
            failed: report.failures,
            total: report.checks,
        });
    }
    Ok(written)
}

pub fn write_all(dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let mut written = Vec::with_capacity(files.len());
    for f in files {
        let path = dir.join(&f.name);
        std::fs::write(&path, &f.contents).map_err(io(&path))?;
        log::info!("wrote {}", path.display());
        written.push(path);
    }
    Ok(written)
}

/// Runs a command on the current rayon pool. Config problems surface before
/// any computation starts.
pub fn execute(kind: CommandKind, cfg: &RunConfig, format: Format) -> Result<Report, CliError> {
    match kind {
        CommandKind::Evolve => evolve(cfg, format),
        CommandKind::Grid => grid(cfg, format),
        CommandKind::FindZeroDev => find_zero_dev(cfg, format),
        CommandKind::Blp => blp(cfg, format),
        CommandKind::Oracle => oracle(cfg, format),
    }
}

/// Maps jobs in parallel and returns results in job order; the first failure
/// in that order wins.
fn par_ordered<J: Sync, T: Send>(
    jobs: &[J],
    f: impl Fn(&J) -> Result<T, CliError> + Sync + Send,
) -> Result<Vec<T>, CliError> {
    jobs.par_iter()
        .map(f)
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

fn evolve(cfg: &RunConfig, format: Format) -> Result<Report, CliError> {
    let jobs = cfg
        .scenarios
        .iter()
        .map(|s| Ok((s.name.as_str(), s.scenario()?)))
        .collect::<Result<Vec<(&str, Scenario)>, ConfigError>>()?;
    let files = par_ordered(&jobs, |(name, sc)| {
        let series = time_sweep(sc).map_err(numeric(name))?;
        if let Some(r) = series.records.iter().find(|r| !r.beats_classical()) {
            log::warn!(
                "{name}: fidelity {:.6} at t = {} is not above 2/3",
                r.fidelity,
                r.t
            );
        }
        Ok(series_file(name, &series, format))
    })?;
    Ok(Report::files(files))
}

struct StrengthJob<'a> {
    spec: &'a ScenarioSpec,
    cfgs: Vec<WeakMeasConfig>,
}

fn strength_jobs(cfg: &RunConfig) -> Result<Vec<StrengthJob<'_>>, ConfigError> {
    cfg.scenarios
        .iter()
        .map(|spec| {
            let cfgs = spec
                .strength_pairs()
                .into_iter()
                .map(|(w, wr)| spec.measurement(w, wr))
                .collect::<Result<_, _>>()?;
            Ok(StrengthJob { spec, cfgs })
        })
        .collect()
}

fn grid(cfg: &RunConfig, format: Format) -> Result<Report, CliError> {
    let jobs = strength_jobs(cfg)?;
    let thetas = jobs
        .iter()
        .map(|j| match &j.spec.theta_grid {
            Some(g) => Ok(g.values()),
            None => Ok(vec![j.spec.theta()?]),
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let indexed: Vec<(usize, &StrengthJob)> = jobs.iter().enumerate().collect();
    let files = par_ordered(&indexed, |(i, job)| {
        let name = job.spec.name.as_str();
        let times = job.spec.times();
        let mut rows = Vec::new();
        for wm in &job.cfgs {
            let cells =
                grid_sweep(&thetas[*i], &times, wm, &job.spec.noise).map_err(numeric(name))?;
            rows.extend(cells.into_iter().map(|cell| GridRow {
                w: wm.w,
                wr: wm.wr,
                cell,
            }));
        }
        Ok(table_file(name, &rows, format))
    })?;
    Ok(Report::files(files))
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroDevRow {
    pub scenario: String,
    pub family: String,
    pub regime: String,
    pub theta: f64,
    pub w: f64,
    pub wr: f64,
    pub found: bool,
    pub t_star: Option<f64>,
    pub deviation_at_root: Option<f64>,
    pub min_deviation: f64,
    pub t_at_min: f64,
}

impl Tabular for ZeroDevRow {
    const HEADER: &'static [&'static str] = &[
        "scenario",
        "family",
        "regime",
        "theta",
        "w",
        "wr",
        "found",
        "t_star",
        "deviation_at_root",
        "min_deviation",
        "t_at_min",
    ];
    fn cells(&self) -> Vec<Cell> {
        vec![
            self.scenario.as_str().into(),
            self.family.as_str().into(),
            self.regime.as_str().into(),
            self.theta.into(),
            self.w.into(),
            self.wr.into(),
            self.found.into(),
            self.t_star.into(),
            self.deviation_at_root.into(),
            self.min_deviation.into(),
            self.t_at_min.into(),
        ]
    }
}

fn regime_label(model: &NoiseModel) -> String {
    match model.regime() {
        Regime::Markovian => "markovian",
        Regime::NonMarkovian => "non_markovian",
    }
    .to_string()
}

fn find_zero_dev(cfg: &RunConfig, format: Format) -> Result<Report, CliError> {
    let jobs = strength_jobs(cfg)?;
    let thetas = jobs
        .iter()
        .map(|j| j.spec.theta())
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let indexed: Vec<(usize, &StrengthJob)> = jobs.iter().enumerate().collect();
    let per_scenario = par_ordered(&indexed, |(i, job)| {
        let spec = job.spec;
        let [lo, hi] = spec.bracket.unwrap_or(DEFAULT_BRACKET);
        let mut rows = Vec::with_capacity(job.cfgs.len());
        for wm in &job.cfgs {
            let r = find_zero_deviation(thetas[*i], wm, &spec.noise, (lo, hi))
                .map_err(numeric(&spec.name))?;
            rows.push(ZeroDevRow {
                scenario: spec.name.clone(),
                family: spec.noise.family().to_string(),
                regime: regime_label(&spec.noise),
                theta: thetas[*i],
                w: wm.w,
                wr: wm.wr,
                found: r.found(),
                t_star: r.t_star,
                deviation_at_root: r.deviation_at_root,
                min_deviation: r.min_deviation,
                t_at_min: r.t_at_min,
            });
        }
        log_wr_trend(&spec.name, &rows);
        Ok(rows)
    })?;
    let rows: Vec<ZeroDevRow> = per_scenario.into_iter().flatten().collect();
    Ok(Report::files(vec![table_file(
        "zero_deviation",
        &rows,
        format,
    )]))
}

/// Reports whether t* moves monotonically with wr at each fixed w.
fn log_wr_trend(name: &str, rows: &[ZeroDevRow]) {
    let mut ws: Vec<f64> = rows.iter().map(|r| r.w).collect();
    ws.dedup();
    for w in ws {
        let ts: Vec<f64> = rows
            .iter()
            .filter(|r| r.w == w)
            .filter_map(|r| r.t_star)
            .collect();
        if ts.len() < 2 {
            continue;
        }
        let trend = if ts.windows(2).all(|p| p[1] >= p[0]) {
            "non-decreasing"
        } else if ts.windows(2).all(|p| p[1] <= p[0]) {
            "non-increasing"
        } else {
            "not monotone"
        };
        log::info!(
            "{name}: at w = {w}, t* is {trend} in wr over {} roots",
            ts.len()
        );
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BlpSummary {
    pub scenario: String,
    pub integrated_non_markovianity: f64,
    pub max_sigma: f64,
    pub backflow_points: u64,
}

impl Tabular for BlpSummary {
    const HEADER: &'static [&'static str] = &[
        "scenario",
        "integrated_non_markovianity",
        "max_sigma",
        "backflow_points",
    ];
    fn cells(&self) -> Vec<Cell> {
        vec![
            self.scenario.as_str().into(),
            self.integrated_non_markovianity.into(),
            self.max_sigma.into(),
            Cell::Int(self.backflow_points),
        ]
    }
}

fn blp(cfg: &RunConfig, format: Format) -> Result<Report, CliError> {
    let jobs = cfg
        .scenarios
        .iter()
        .map(|s| Ok((s, s.measurement(s.w, s.wr)?)))
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let results = par_ordered(&jobs, |(spec, wm)| {
        let times = spec.times();
        let dt = spec.dt.unwrap_or(DEFAULT_BLP_STEP);
        let points = blp_series(&spec.noise, wm, &times, dt).map_err(numeric(&spec.name))?;
        let rows: Vec<BlpRow> = points
            .iter()
            .map(|&point| BlpRow {
                point,
                sigma_positive: point.sigma.max(0.0),
                backflow: point.sigma > BACKFLOW_TOL,
            })
            .collect();
        let sigma: Vec<f64> = points.iter().map(|p| p.sigma).collect();
        let summary = BlpSummary {
            scenario: spec.name.clone(),
            integrated_non_markovianity: integrated_non_markovianity(&times, &sigma),
            max_sigma: sigma.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            backflow_points: rows.iter().filter(|r| r.backflow).count() as u64,
        };
        if summary.backflow_points > 0 {
            log::info!(
                "{}: σ > 0 at {} point(s)",
                spec.name,
                summary.backflow_points
            );
        }
        Ok((table_file(&spec.name, &rows, format), summary))
    })?;
    let (mut files, summaries): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    files.push(table_file("blp_summary", &summaries, format));
    Ok(Report::files(files))
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub scenario: String,
    pub t: f64,
    pub seed: u64,
    pub n_samples: u64,
    pub mc_mean: f64,
    pub mc_std_error: f64,
    pub predicted: f64,
    pub pass: bool,
}

impl Tabular for OracleRow {
    const HEADER: &'static [&'static str] = &[
        "scenario",
        "t",
        "seed",
        "n_samples",
        "mc_mean",
        "mc_std_error",
        "predicted",
        "pass",
    ];
    fn cells(&self) -> Vec<Cell> {
        vec![
            self.scenario.as_str().into(),
            self.t.into(),
            Cell::Int(self.seed),
            Cell::Int(self.n_samples),
            self.mc_mean.into(),
            self.mc_std_error.into(),
            self.predicted.into(),
            self.pass.into(),
        ]
    }
}

/// MC mean within three standard errors of the prediction; exact agreement
/// is required when the estimate has no spread.
pub fn oracle_agrees(mean: f64, std_error: f64, predicted: f64) -> bool {
    (mean - predicted).abs() <= (3.0 * std_error).max(1e-12)
}

fn oracle(cfg: &RunConfig, format: Format) -> Result<Report, CliError> {
    struct Job<'a> {
        spec: &'a ScenarioSpec,
        theta: f64,
        wm: WeakMeasConfig,
        seed: u64,
        times: Vec<f64>,
    }
    let jobs = cfg
        .scenarios
        .iter()
        .map(|spec| {
            Ok(Job {
                spec,
                theta: spec.theta()?,
                wm: spec.measurement(spec.w, spec.wr)?,
                seed: spec.seed()?,
                times: spec
                    .t_grid
                    .as_ref()
                    .map_or_else(|| vec![0.0], |g| g.values()),
            })
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    let per_scenario = par_ordered(&jobs, |job| {
        let name = job.spec.name.as_str();
        let n = job.spec.n_samples.unwrap_or(DEFAULT_MC_SAMPLES);
        let input = bell_type(BellTypeParams::new(job.theta).map_err(numeric(name))?);
        let mut rows = Vec::with_capacity(job.times.len());
        for &t in &job.times {
            let state = run_protocol(&input, &job.wm, &job.spec.noise, t)
                .map_err(|e| numeric(name)(e.at(t)))?
                .state;
            let predicted = fidelity(&state).map_err(numeric(name))?;
            let est = mc_teleportation_fidelity(&state, n, job.seed).map_err(numeric(name))?;
            rows.push(OracleRow {
                scenario: name.to_string(),
                t,
                seed: job.seed,
                n_samples: n as u64,
                mc_mean: est.mean,
                mc_std_error: est.std_error,
                predicted,
                pass: oracle_agrees(est.mean, est.std_error, predicted),
            });
        }
        Ok(rows)
    })?;
    let rows: Vec<OracleRow> = per_scenario.into_iter().flatten().collect();
    let failures = rows.iter().filter(|r| !r.pass).count();
    for r in rows.iter().filter(|r| !r.pass) {
        log::warn!(
            "{} at t = {}: MC {} ± {} vs predicted {}",
            r.scenario,
            r.t,
            r.mc_mean,
            r.mc_std_error,
            r.predicted
        );
    }
    Ok(Report {
        files: vec![table_file("oracle", &rows, format)],
        failures,
        checks: rows.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_class() {
        let cfg = CliError::Config(ConfigError::NoScenarios);
        assert_eq!(cfg.exit_code(), 1);
        let num = CliError::Numeric {
            scenario: "x".into(),
            source: telewm_core::Error::SuccessProbTooSmall {
                prob: 0.0,
                t: Some(1.0),
            },
        };
        assert_eq!(num.exit_code(), 2);
        assert_eq!(
            CliError::OracleMismatch {
                failed: 1,
                total: 2
            }
            .exit_code(),
            2
        );
    }

    #[test]
    fn oracle_tolerance() {
        assert!(oracle_agrees(1.0, 0.0, 1.0));
        assert!(!oracle_agrees(1.0, 0.0, 1.0 - 1e-9));
        assert!(oracle_agrees(0.7, 0.01, 0.725));
        assert!(!oracle_agrees(0.7, 0.01, 0.74));
    }
}
