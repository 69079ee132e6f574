use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::NoiseModel;
use crate::error::{Error, Result};
use crate::metrics::{blp_distance, blp_sigma, check_blp_step};
use crate::weakmeas::WeakMeasConfig;

use super::{check_increasing, check_mode};

/// Trace distance of the BLP pair and its rate of change at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlpPoint {
    pub t: f64,
    pub distance: f64,
    pub sigma: f64,
}

/// D(t) and σ(t) over a grid. Times closer to 0 than `dt` use a second-order
/// forward difference.
pub fn blp_series(
    model: &NoiseModel,
    cfg: &WeakMeasConfig,
    t_grid: &[f64],
    dt: f64,
) -> Result<Vec<BlpPoint>> {
    if t_grid.is_empty() {
        return Err(Error::InvalidScenario("empty time grid".into()));
    }
    check_increasing(t_grid)?;
    check_mode(cfg, model)?;
    check_blp_step(model, dt)?;
    let points: Vec<Result<BlpPoint>> = t_grid
        .par_iter()
        .map(|&t| {
            let distance = blp_distance(model, cfg, t)?;
            let sigma = if t >= dt {
                blp_sigma(model, cfg, t, dt)?
            } else {
                let d1 = blp_distance(model, cfg, t + dt)?;
                let d2 = blp_distance(model, cfg, t + 2.0 * dt)?;
                (-3.0 * distance + 4.0 * d1 - d2) / (2.0 * dt)
            };
            Ok(BlpPoint { t, distance, sigma })
        })
        .collect();
    points.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::linspace;
    use crate::metrics::DEFAULT_BLP_STEP;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn starts_at_pair_distance() {
        let model = NoiseModel::adc(0.2).unwrap();
        let cfg = WeakMeasConfig::one_sided(0.0, 0.0).unwrap();
        let s = blp_series(&model, &cfg, &[0.0, 1.0], DEFAULT_BLP_STEP).unwrap();
        assert!((s[0].distance - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(s[0].sigma < 0.0);
    }

    #[test]
    fn memory_kernel_shows_backflow() {
        let model = NoiseModel::non_markovian_adc(1.0, 0.05).unwrap();
        let cfg = WeakMeasConfig::one_sided(0.0, 0.0).unwrap();
        let s = blp_series(&model, &cfg, &linspace(0.0, 40.0, 401), DEFAULT_BLP_STEP).unwrap();
        assert!(s.iter().any(|p| p.sigma > 1e-4));
    }

    #[test]
    fn rejects_bad_input() {
        let model = NoiseModel::adc(0.2).unwrap();
        let cfg = WeakMeasConfig::one_sided(0.0, 0.0).unwrap();
        assert!(blp_series(&model, &cfg, &[], 1e-3).is_err());
        assert!(blp_series(&model, &cfg, &[1.0, 0.5], 1e-3).is_err());
        assert!(matches!(
            blp_series(&model, &cfg, &[0.0], 0.1),
            Err(Error::StepTooLarge { .. })
        ));
    }
}
