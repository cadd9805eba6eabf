//! Seeded experiment runners and their CSV formats.
//!
//! `fig3` sweeps the PU-BS distance and scores the downlink-loss estimator;
//! `fig5` sweeps PU circles and SU positions and scores the full pipeline;
//! `single` runs one scenario end to end and renders a report. Trials fan
//! out through [`crate::exec`]; per-trial RNG streams are derived from
//! `(seed, experiment domain, grid index, trial)`, so results do not depend
//! on scheduling. All floats are written as `{:.9e}` — locale-free with ten
//! significant digits.

use std::fmt::Write as _;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::exec::map_tasks;
use crate::geometry::{pu_su_distance, MIN_RADIUS_GAP_M};
use crate::map_estimator::estimate_bs_pu_loss;
use crate::rng::derive_stream;
use crate::sim::{abs_db_error, run_estimation, simulate_downlink_modes, simulate_scenario,
                 EstimationResult, ObservationTrace};
use crate::units;

/// Trial count used when the caller does not override it.
pub const DEFAULT_TRIALS: usize = 500;

/// RNG stream domains, one per experiment kind.
mod stream {
    pub const FIG3: u64 = 1;
    pub const FIG5: u64 = 2;
    pub const SINGLE: u64 = 3;
}

// ---------------------------------------------------------------------------
// fig3: downlink-loss estimation error vs PU-BS distance
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Spec {
    pub distances_m: Vec<f64>,
    pub trials: usize,
}

impl Default for Fig3Spec {
    fn default() -> Self {
        Self {
            distances_m: vec![50.0, 100.0, 150.0, 200.0, 250.0, 300.0, 350.0, 400.0, 450.0, 500.0],
            trials: DEFAULT_TRIALS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Row {
    pub distance_m: f64,
    pub mean_abs_err_db: f64,
    pub stderr_db: f64,
    pub trials: usize,
}

pub fn run_fig3(spec: &Fig3Spec, config: &ScenarioConfig) -> Result<Vec<Fig3Row>> {
    config.validate()?;
    if spec.distances_m.is_empty() {
        return Err(Error::Config("fig3 needs at least one distance".into()));
    }
    if spec.trials < 1 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    for &d in &spec.distances_m {
        if d < config.min_pu_bs_distance_m || d > config.cell_radius_m {
            return Err(Error::Config(format!(
                "fig3 distance {d} m outside [{}, {}] m",
                config.min_pu_bs_distance_m, config.cell_radius_m
            )));
        }
    }

    let n_points = spec.distances_m.len();
    let tasks = n_points * spec.trials;
    let errors: Vec<Result<f64>> = map_tasks(tasks, |task| {
        let point = task / spec.trials;
        let trial = task % spec.trials;
        let distance = spec.distances_m[point];
        let true_loss = config.propagation.loss(distance)?;
        let mut rng = derive_stream(config.seed, stream::FIG3, point as u64, trial as u64);
        let modes =
            simulate_downlink_modes(config, true_loss, config.observation_count, &mut rng);
        let est = estimate_bs_pu_loss(&modes, config)?;
        abs_db_error(true_loss, est.loss)
    });

    let mut rows = Vec::with_capacity(n_points);
    for (point, &distance_m) in spec.distances_m.iter().enumerate() {
        let slice = &errors[point * spec.trials..(point + 1) * spec.trials];
        let mut errs = Vec::with_capacity(spec.trials);
        for e in slice {
            match e {
                Ok(v) => errs.push(*v),
                Err(err) => return Err(Error::Numeric(format!("distance {distance_m} m: {err}"))),
            }
        }
        let (mean, stderr) = mean_and_stderr(&errs);
        rows.push(Fig3Row { distance_m, mean_abs_err_db: mean, stderr_db: stderr, trials: spec.trials });
    }
    Ok(rows)
}

pub fn fig3_csv(rows: &[Fig3Row]) -> String {
    let mut out = String::from("distance_m,mean_abs_err_db,stderr_db,trials\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.distance_m),
            fmt_f64(r.mean_abs_err_db),
            fmt_f64(r.stderr_db),
            r.trials
        );
    }
    out
}

// ---------------------------------------------------------------------------
// fig5: PU-SU loss estimation error over the position grid
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct Fig5Spec {
    /// SU distances from the BS (the SU sits on the reference axis).
    pub su_distances_m: Vec<f64>,
    /// PU circle radii.
    pub pu_radii_m: Vec<f64>,
    /// Uniform angle grid size over `[0, 2*pi)`.
    pub theta_points: usize,
    pub trials: usize,
}

impl Default for Fig5Spec {
    fn default() -> Self {
        Self {
            su_distances_m: vec![100.0, 400.0],
            pu_radii_m: vec![100.0, 250.0, 400.0],
            theta_points: 36,
            trials: DEFAULT_TRIALS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig5Row {
    pub su_bs_distance_m: f64,
    pub pu_radius_m: f64,
    pub theta_rad: f64,
    /// NaN on skipped (singular-geometry) points.
    pub mean_abs_err_db: f64,
    pub stderr_db: f64,
    /// Zero on skipped points.
    pub trials: usize,
}

impl Fig5Row {
    /// A warning row emitted in place of a grid point whose true geometry
    /// puts the PU on top of the SU.
    pub fn skipped(&self) -> bool {
        self.trials == 0
    }
}

pub fn run_fig5(spec: &Fig5Spec, config: &ScenarioConfig) -> Result<Vec<Fig5Row>> {
    config.validate()?;
    if spec.su_distances_m.is_empty() || spec.pu_radii_m.is_empty() || spec.theta_points == 0 {
        return Err(Error::Config("fig5 needs a non-empty position grid".into()));
    }
    if spec.trials < 1 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    for &r0 in &spec.pu_radii_m {
        if r0 < config.min_pu_bs_distance_m || r0 > config.cell_radius_m {
            return Err(Error::Config(format!(
                "fig5 PU radius {r0} m outside [{}, {}] m",
                config.min_pu_bs_distance_m, config.cell_radius_m
            )));
        }
    }
    for &r1 in &spec.su_distances_m {
        if r1 <= 0.0 {
            return Err(Error::Config(format!("fig5 SU distance {r1} m must be positive")));
        }
    }

    // Grid in row-major (r1, r0, theta) order.
    struct Point {
        r1: f64,
        r0: f64,
        theta: f64,
        live: bool,
    }
    let mut points = Vec::new();
    for &r1 in &spec.su_distances_m {
        for &r0 in &spec.pu_radii_m {
            for j in 0..spec.theta_points {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / spec.theta_points as f64;
                let live = pu_su_distance(r0, r1, theta) >= MIN_RADIUS_GAP_M;
                points.push(Point { r1, r0, theta, live });
            }
        }
    }
    let live_indices: Vec<usize> =
        points.iter().enumerate().filter(|(_, p)| p.live).map(|(i, _)| i).collect();

    let tasks = live_indices.len() * spec.trials;
    let errors: Vec<Result<f64>> = map_tasks(tasks, |task| {
        let slot = task / spec.trials;
        let trial = task % spec.trials;
        let point = &points[live_indices[slot]];
        let mut rng = derive_stream(
            config.seed,
            stream::FIG5,
            live_indices[slot] as u64,
            trial as u64,
        );
        let trace = simulate_scenario(config, point.r0, point.theta, point.r1, &mut rng)?;
        let est = run_estimation(&trace.observables, point.r1, config)?;
        abs_db_error(trace.ground_truth.pu_su_loss, est.pu_su_loss)
    });

    let mut rows = Vec::with_capacity(points.len());
    let mut slot = 0usize;
    for point in &points {
        if !point.live {
            rows.push(Fig5Row {
                su_bs_distance_m: point.r1,
                pu_radius_m: point.r0,
                theta_rad: point.theta,
                mean_abs_err_db: f64::NAN,
                stderr_db: f64::NAN,
                trials: 0,
            });
            continue;
        }
        let slice = &errors[slot * spec.trials..(slot + 1) * spec.trials];
        slot += 1;
        let mut errs = Vec::with_capacity(spec.trials);
        for e in slice {
            match e {
                Ok(v) => errs.push(*v),
                Err(err) => {
                    return Err(Error::Numeric(format!(
                        "point (r1 {} m, r0 {} m, theta {:.4}): {err}",
                        point.r1, point.r0, point.theta
                    )))
                }
            }
        }
        let (mean, stderr) = mean_and_stderr(&errs);
        rows.push(Fig5Row {
            su_bs_distance_m: point.r1,
            pu_radius_m: point.r0,
            theta_rad: point.theta,
            mean_abs_err_db: mean,
            stderr_db: stderr,
            trials: spec.trials,
        });
    }
    Ok(rows)
}

pub fn fig5_csv(rows: &[Fig5Row]) -> String {
    let mut out = String::from("r1_m,r0_m,theta_rad,mean_abs_err_db,stderr_db,trials\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(r.su_bs_distance_m),
            fmt_f64(r.pu_radius_m),
            fmt_f64(r.theta_rad),
            fmt_f64(r.mean_abs_err_db),
            fmt_f64(r.stderr_db),
            r.trials
        );
    }
    out
}

// ---------------------------------------------------------------------------
// single: one scenario, full report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SingleSpec {
    pub pu_radius_m: f64,
    pub pu_angle_rad: f64,
    pub su_bs_distance_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleRun {
    pub trace: ObservationTrace,
    pub estimate: EstimationResult,
}

pub fn run_single(spec: &SingleSpec, config: &ScenarioConfig) -> Result<SingleRun> {
    config.validate()?;
    let mut rng = derive_stream(config.seed, stream::SINGLE, 0, 0);
    let trace =
        simulate_scenario(config, spec.pu_radius_m, spec.pu_angle_rad, spec.su_bs_distance_m, &mut rng)?;
    let estimate = run_estimation(&trace.observables, spec.su_bs_distance_m, config)?;
    Ok(SingleRun { trace, estimate })
}

impl SingleRun {
    /// Human-readable ground-truth vs estimate report with per-stage
    /// diagnostics.
    pub fn render(&self) -> String {
        let gt = &self.trace.ground_truth;
        let est = &self.estimate;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "scenario: PU at (r = {} m, theta = {} rad), SU at r1 = {} m, I = {}",
            gt.pu_radius_m,
            gt.pu_angle_rad,
            gt.su_bs_distance_m,
            self.trace.observables.len()
        );
        let _ = writeln!(out, "{:<6} {:>14} {:>14} {:>12}", "loss", "true (dB)", "estimated (dB)", "|err| (dB)");
        let mut line = |name: &str, truth: f64, estimate: f64| {
            let t = units::linear_to_db(truth);
            let e = units::linear_to_db(estimate);
            let _ = writeln!(out, "{:<6} {:>14.4} {:>14.4} {:>12.4}", name, t, e, (t - e).abs());
        };
        line("L_bp", gt.bs_pu_loss, est.bs_pu_loss);
        line("L_pb", gt.pu_bs_loss, est.pu_bs_loss);
        line("L_ps", gt.pu_su_loss, est.pu_su_loss);
        line("L_sp", gt.su_pu_loss, est.su_pu_loss);
        let d = &est.diagnostics;
        let _ = writeln!(
            out,
            "map-estimate: {} grid points, log-density {:.4}, support edge: {}",
            d.map.grid_points, d.map.log_density, d.map.at_support_edge
        );
        let _ = writeln!(
            out,
            "geometry-prior: pu radius {:.3} m (perturbed: {}, clamped: {})",
            d.pu_radius_m, d.radius_perturbed, d.radius_clamped
        );
        let _ = writeln!(
            out,
            "mmse-solve: condition estimate {:.3e}, regularized: {}, x_hat {:.6e}, loss clamped: {}",
            d.mmse.condition_estimate, d.mmse.regularized, d.inverse_loss, d.loss_clamped
        );
        out
    }

    /// Per-instant observable dump: `i,m_d,m_u,p_r_w` with a header row.
    pub fn trace_csv(&self) -> String {
        let obs = &self.trace.observables;
        let mut out = String::from("i,m_d,m_u,p_r_w\n");
        for i in 0..obs.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                i,
                obs.downlink_modes[i],
                obs.uplink_modes[i],
                fmt_f64(obs.received_power_w[i])
            );
        }
        out
    }
}

// ---------------------------------------------------------------------------

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Locale-free float with ten significant digits.
fn fmt_f64(v: f64) -> String {
    format!("{v:.9e}")
}
