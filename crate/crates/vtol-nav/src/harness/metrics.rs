//! Run summaries: terminal errors, fitted exponential decay rates of the
//! logged error norms, and command extrema.

use crate::harness::config::ScenarioConfig;
use crate::harness::runner::StepLog;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Least-squares fit of `log(e)` against `t` over a time window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Slope of `ln(e)` per second; negative means exponential decay.
    pub slope: f64,
    /// Intercept of the fit line at `t = 0`.
    pub intercept: f64,
    /// Samples used.
    pub used: usize,
    /// Non-positive samples skipped (their logarithm is undefined).
    pub skipped: usize,
}

/// Fits an exponential decay rate to `(t, e)` pairs restricted to
/// `window = (t_min, t_max)`. Non-positive values are skipped and counted;
/// fewer than two usable samples is an error.
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let mut skipped = 0usize;
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .filter_map(|(t, e)| {
            if *e > 0.0 {
                Some((*t, e.ln()))
            } else {
                skipped += 1;
                None
            }
        })
        .collect();
    if pts.len() < 2 {
        return Err(Error::DecayFitUnderdetermined { usable: pts.len(), skipped });
    }
    let n = pts.len() as f64;
    let (st, sy): (f64, f64) = pts.iter().fold((0.0, 0.0), |acc, (t, y)| (acc.0 + t, acc.1 + y));
    let (tm, ym) = (st / n, sy / n);
    let (mut num, mut den) = (0.0, 0.0);
    for (t, y) in &pts {
        num += (t - tm) * (y - ym);
        den += (t - tm) * (t - tm);
    }
    if den == 0.0 {
        return Err(Error::DecayFitUnderdetermined { usable: pts.len(), skipped });
    }
    let slope = num / den;
    Ok(DecayFit { slope, intercept: ym - slope * tm, used: pts.len(), skipped })
}

/// Error norms at the last logged step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminalErrors {
    pub attitude_obs: f64,
    pub gyro_bias: f64,
    pub position_obs: f64,
    pub velocity_obs: f64,
    pub attitude_trk: f64,
    pub position_trk: f64,
    pub velocity_trk: f64,
}

/// Scenario summary written next to the CSV log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub steps: usize,
    pub dt: f64,
    pub duration: f64,
    pub seed: u64,
    pub wall_ms: f64,
    pub terminal: TerminalErrors,
    /// Fitted slopes of `ln(error)` over the decay window, when defined.
    pub decay_slope_attitude_obs: Option<f64>,
    pub decay_slope_bias: Option<f64>,
    pub decay_slope_position_obs: Option<f64>,
    pub decay_slope_velocity_obs: Option<f64>,
    /// Window used for the decay fits (s).
    pub decay_window: (f64, f64),
    pub max_torque: f64,
    pub max_thrust: f64,
}

impl Summary {
    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }
}

/// Builds the summary from a finished log.
pub fn summarize(cfg: &ScenarioConfig, log: &[StepLog], wall_ms: f64) -> Summary {
    let last = log.last().expect("log has at least one row");
    let window = (1.0_f64.min(cfg.duration * 0.5), 10.0_f64.min(cfg.duration));
    let series = |f: fn(&StepLog) -> f64| -> Vec<(f64, f64)> {
        log.iter().map(|r| (r.t, f(r))).collect()
    };
    let slope = |f: fn(&StepLog) -> f64| fit_decay_rate(&series(f), window).ok().map(|d| d.slope);
    Summary {
        steps: log.len(),
        dt: cfg.dt,
        duration: cfg.duration,
        seed: cfg.seed,
        wall_ms,
        terminal: TerminalErrors {
            attitude_obs: last.err_att_obs,
            gyro_bias: last.err_bias,
            position_obs: last.err_pos_obs,
            velocity_obs: last.err_vel_obs,
            attitude_trk: last.err_att_trk,
            position_trk: last.err_pos_trk,
            velocity_trk: last.err_vel_trk,
        },
        decay_slope_attitude_obs: slope(|r| r.err_att_obs),
        decay_slope_bias: slope(|r| r.err_bias),
        decay_slope_position_obs: slope(|r| r.err_pos_obs),
        decay_slope_velocity_obs: slope(|r| r.err_vel_obs),
        decay_window: window,
        max_torque: log
            .iter()
            .map(|r| (r.torque[0].powi(2) + r.torque[1].powi(2) + r.torque[2].powi(2)).sqrt())
            .fold(0.0, f64::max),
        max_thrust: log.iter().map(|r| r.thrust).fold(0.0, f64::max),
    }
}
