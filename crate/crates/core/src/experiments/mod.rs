//! Scenario drivers: time sweeps, parameter grids, the zero-deviation root
//! finder, BLP series and the Monte-Carlo teleportation oracle.

mod blp;
pub mod presets;
mod teleport;
mod zero_dev;

pub use blp::{blp_series, BlpPoint};
pub use teleport::{clifford_group, mc_teleportation_fidelity, McEstimate, MIN_MC_SAMPLES};
pub use zero_dev::{find_zero_deviation, ZeroDeviation, SCAN_INTERVALS, ZERO_DEVIATION_TOL};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::NoiseModel;
use crate::error::{Error, Result};
use crate::metrics::{fidelity_pair, MetricRecord};
use crate::states::{bell_type, BellTypeParams, TwoQubitState};
use crate::weakmeas::{run_protocol, MeasurementMode, WeakMeasConfig};

/// Figure time axis: [0, 10] with 501 points.
pub fn default_time_grid() -> Vec<f64> {
    linspace(0.0, 10.0, 501)
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        n => {
            let step = (stop - start) / (n - 1) as f64;
            (0..n)
                .map(|i| {
                    if i == n - 1 {
                        stop
                    } else {
                        start + step * i as f64
                    }
                })
                .collect()
        }
    }
}

/// One Bell-type input evolved over a time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub theta: f64,
    pub cfg: WeakMeasConfig,
    pub model: NoiseModel,
    pub t_grid: Vec<f64>,
    /// Only the Monte-Carlo oracle draws random numbers.
    pub seed: Option<u64>,
}

impl Scenario {
    pub fn new(
        theta: f64,
        cfg: WeakMeasConfig,
        model: NoiseModel,
        t_grid: Vec<f64>,
        seed: Option<u64>,
    ) -> Result<Self> {
        let s = Self {
            theta,
            cfg,
            model,
            t_grid,
            seed,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        BellTypeParams::new(self.theta)?;
        self.cfg.validate()?;
        self.model.validate()?;
        check_mode(&self.cfg, &self.model)?;
        match self.t_grid.first() {
            None => return Err(Error::InvalidScenario("empty time grid".into())),
            Some(&t0) if t0 != 0.0 => {
                return Err(Error::InvalidScenario(format!(
                    "time grid starts at {t0}, not 0"
                )))
            }
            _ => {}
        }
        check_increasing(&self.t_grid)
    }

    pub fn input_state(&self) -> TwoQubitState {
        bell_type(BellTypeParams::new(self.theta).expect("validated theta"))
    }
}

pub(crate) fn check_mode(cfg: &WeakMeasConfig, model: &NoiseModel) -> Result<()> {
    let required = MeasurementMode::for_family(model.family());
    if cfg.mode == required {
        Ok(())
    } else {
        Err(Error::InvalidScenario(format!(
            "{} needs {:?} measurements",
            model.family(),
            required
        )))
    }
}

pub(crate) fn check_increasing(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidScenario(
            "times must be finite and >= 0".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidScenario(
            "time grid is not strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Metrics at every time of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub scenario: Scenario,
    pub records: Vec<MetricRecord>,
}

/// Evaluates the scenario at every grid time. Times are processed in parallel
/// and merged in grid order; the first failing time (in grid order) is
/// reported.
pub fn time_sweep(s: &Scenario) -> Result<MetricSeries> {
    s.validate()?;
    let input = s.input_state();
    let results: Vec<Result<MetricRecord>> = s
        .t_grid
        .par_iter()
        .map(|&t| {
            let out = run_protocol(&input, &s.cfg, &s.model, t).map_err(|e| e.at(t))?;
            MetricRecord::evaluate(&out, t)
        })
        .collect();
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(MetricSeries {
        scenario: s.clone(),
        records,
    })
}

/// One cell of a (θ, t) table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub theta: f64,
    pub t: f64,
    pub fidelity: f64,
    pub fidelity_deviation: f64,
}

/// Fidelity and deviation over θ × t, row-major with θ outer.
pub fn grid_sweep(
    theta_grid: &[f64],
    t_grid: &[f64],
    cfg: &WeakMeasConfig,
    model: &NoiseModel,
) -> Result<Vec<GridCell>> {
    if theta_grid.is_empty() || t_grid.is_empty() {
        return Err(Error::InvalidScenario("empty grid".into()));
    }
    check_mode(cfg, model)?;
    let inputs = theta_grid
        .iter()
        .map(|&th| Ok(bell_type(BellTypeParams::new(th)?)))
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<Result<GridCell>> = (0..theta_grid.len() * t_grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / t_grid.len(), k % t_grid.len());
            let t = t_grid[j];
            let out = run_protocol(&inputs[i], cfg, model, t).map_err(|e| e.at(t))?;
            let (fidelity, fidelity_deviation) = fidelity_pair(&out.state)?;
            Ok(GridCell {
                theta: theta_grid[i],
                t,
                fidelity,
                fidelity_deviation,
            })
        })
        .collect();
    cells.into_iter().collect()
}
