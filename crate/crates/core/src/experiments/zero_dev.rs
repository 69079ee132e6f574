use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::NoiseModel;
use crate::error::{Error, Result};
use crate::metrics::fidelity_deviation;
use crate::states::{bell_type, correlation_matrix, BellTypeParams, TwoQubitState};
use crate::weakmeas::{run_protocol, WeakMeasConfig};

use super::{check_mode, linspace};

/// Δ below this counts as zero.
pub const ZERO_DEVIATION_TOL: f64 = 1e-8;

/// Coarse scan resolution before bisection.
pub const SCAN_INTERVALS: usize = 2000;

const BISECTION_WIDTH: f64 = 1e-10;

/// Outcome of a zero-deviation search over a time bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroDeviation {
    pub t_star: Option<f64>,
    pub deviation_at_root: Option<f64>,
    /// Smallest Δ seen on the scan.
    pub min_deviation: f64,
    pub t_at_min: f64,
}

impl ZeroDeviation {
    pub fn found(&self) -> bool {
        self.t_star.is_some()
    }
}

struct Probe<'a> {
    input: TwoQubitState,
    cfg: &'a WeakMeasConfig,
    model: &'a NoiseModel,
}

impl Probe<'_> {
    /// g(t) = |t11| - |t33|; for X-states |t11| = |t22|, so Δ = 0 iff g = 0.
    fn eval(&self, t: f64) -> Result<(f64, f64)> {
        let out = run_protocol(&self.input, self.cfg, self.model, t).map_err(|e| e.at(t))?;
        let d = correlation_matrix(&out.state).diagonal();
        Ok((d[0].abs() - d[2].abs(), fidelity_deviation(&out.state)?))
    }
}

/// First time in `bracket` at which the fidelity deviation vanishes.
///
/// The bracket is scanned for a sign change of g, which is then bisected to
/// a width of 1e-10. Without a sign change, a scan point with Δ below
/// [`ZERO_DEVIATION_TOL`] still counts (a touching root).
pub fn find_zero_deviation(
    theta: f64,
    cfg: &WeakMeasConfig,
    model: &NoiseModel,
    bracket: (f64, f64),
) -> Result<ZeroDeviation> {
    let (lo, hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
        return Err(Error::InvalidBracket { lo, hi });
    }
    cfg.validate()?;
    model.validate()?;
    check_mode(cfg, model)?;
    let probe = Probe {
        input: bell_type(BellTypeParams::new(theta)?),
        cfg,
        model,
    };

    let grid = linspace(lo, hi, SCAN_INTERVALS + 1);
    let samples = grid
        .par_iter()
        .map(|&t| probe.eval(t))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let (imin, min_deviation) =
        samples
            .iter()
            .map(|s| s.1)
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (i, d)| if d < best.1 { (i, d) } else { best },
            );

    let mut root = None;
    for i in 0..grid.len() {
        let (g, d) = samples[i];
        if g == 0.0 || d < ZERO_DEVIATION_TOL {
            root = Some((grid[i], d));
            break;
        }
        if i + 1 < grid.len() && g.signum() != samples[i + 1].0.signum() && samples[i + 1].0 != 0.0
        {
            root = Some(bisect(&probe, grid[i], grid[i + 1], g)?);
            break;
        }
    }

    Ok(ZeroDeviation {
        t_star: root.map(|r| r.0),
        deviation_at_root: root.map(|r| r.1),
        min_deviation,
        t_at_min: grid[imin],
    })
}

fn bisect(probe: &Probe, mut a: f64, mut b: f64, mut ga: f64) -> Result<(f64, f64)> {
    while b - a > BISECTION_WIDTH {
        let m = 0.5 * (a + b);
        let (gm, _) = probe.eval(m)?;
        if gm == 0.0 {
            return Ok((m, probe.eval(m)?.1));
        }
        if gm.signum() == ga.signum() {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    let m = 0.5 * (a + b);
    Ok((m, probe.eval(m)?.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn bracket_validation() {
        let cfg = WeakMeasConfig::one_sided(0.1, 0.99).unwrap();
        let m = NoiseModel::adc(0.2).unwrap();
        for b in [(0.0, 0.0), (1.0, 0.5), (-1.0, 1.0), (0.0, f64::NAN)] {
            assert!(matches!(
                find_zero_deviation(0.1, &cfg, &m, b),
                Err(Error::InvalidBracket { .. })
            ));
        }
    }

    #[test]
    fn root_reached_with_strong_reversal() {
        let cfg = WeakMeasConfig::one_sided(0.1, 0.995).unwrap();
        let m = NoiseModel::adc(0.2).unwrap();
        let r = find_zero_deviation(0.1, &cfg, &m, (0.0, 10.0)).unwrap();
        let t = r.t_star.expect("root exists");
        assert!(t > 0.0);
        assert!(r.deviation_at_root.unwrap() < ZERO_DEVIATION_TOL);
    }

    #[test]
    fn bell_state_root_sits_at_origin() {
        let cfg = WeakMeasConfig::one_sided(0.0, 0.0).unwrap();
        let m = NoiseModel::adc(0.2).unwrap();
        let r = find_zero_deviation(FRAC_PI_4, &cfg, &m, (0.0, 5.0)).unwrap();
        assert_eq!(r.t_star, Some(0.0));
        assert!(r.deviation_at_root.unwrap() < 1e-12);
    }

    #[test]
    fn dephasing_has_no_root() {
        let cfg = WeakMeasConfig::one_sided(0.1, 0.99).unwrap();
        let m = NoiseModel::pln(0.5, 3.0).unwrap();
        let r = find_zero_deviation(0.1, &cfg, &m, (0.0, 10.0)).unwrap();
        assert!(!r.found());
        assert!(r.min_deviation > 0.0);
    }
}
