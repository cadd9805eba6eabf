//! BS-PU path-loss estimation from the observed downlink mode sequence.
//!
//! The joint log-density of the mode sequence and the loss (uniform-PU prior
//! times the per-instant mode probabilities) is maximized over the loss
//! support. The mode sequence enters only through its histogram, so one
//! density evaluation costs O(modes) rather than O(instants). Search is a
//! geometric grid followed by golden-section refinement; everything runs in
//! the log domain — a 200-factor product underflows f64 otherwise.

use crate::amc::{mode_likelihood, Mode};
use crate::config::{Duplex, ScenarioConfig};
use crate::error::{Error, Result};
use crate::propagation::PropagationModel;
use crate::units;

/// Points in the first-stage geometric grid over the loss support.
pub const GRID_POINTS: usize = 2048;

/// Golden-section refinement stops once the bracket is this wide (dB).
pub const REFINE_WIDTH_DB: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapDiagnostics {
    /// Grid points evaluated in the first stage.
    pub grid_points: usize,
    /// Joint log-density at the returned estimate.
    pub log_density: f64,
    /// Estimate pinned within one grid step of the support boundary
    /// (degenerate traces, e.g. every instant at the top mode).
    pub at_support_edge: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossEstimate {
    /// Estimated linear loss, always inside the prior support.
    pub loss: f64,
    pub diagnostics: MapDiagnostics,
}

impl PathLossEstimate {
    pub fn loss_db(&self) -> f64 {
        units::linear_to_db(self.loss)
    }

    /// Duplex conversion of the downlink estimate; diagnostics carry over.
    pub fn to_uplink(&self, duplex: Duplex) -> PathLossEstimate {
        PathLossEstimate {
            loss: uplink_loss_from_downlink(self.loss, duplex),
            diagnostics: self.diagnostics,
        }
    }
}

/// Uplink loss implied by a downlink loss: identical under TDD, shifted by
/// the configured constant under FDD.
pub fn uplink_loss_from_downlink(downlink_loss: f64, duplex: Duplex) -> f64 {
    match duplex {
        Duplex::Tdd => downlink_loss,
        Duplex::Fdd { offset_db } => downlink_loss * units::db_to_linear(offset_db),
    }
}

/// Prior density of the BS-PU loss for a PU uniform over the annulus
/// `rmin <= r <= r0`: `2 / (alpha l0 (r0^2 - rmin^2)) * (loss/l0)^(2/alpha - 1)`
/// on `[loss(rmin), loss(r0)]`, zero outside.
pub fn pathloss_prior_pdf(
    model: &PropagationModel,
    cell_radius_m: f64,
    min_distance_m: f64,
    loss: f64,
) -> f64 {
    let lo = model.loss(min_distance_m).expect("rmin > 0");
    let hi = model.loss(cell_radius_m).expect("r0 > 0");
    if loss < lo || loss > hi {
        return 0.0;
    }
    let alpha = model.alpha();
    let l0 = model.l0();
    let norm = 2.0 / (alpha * l0 * (cell_radius_m.powi(2) - min_distance_m.powi(2)));
    norm * (loss / l0).powf(2.0 / alpha - 1.0)
}

/// Joint log-density of a mode sequence and a loss value inside the support.
/// A zero likelihood factor yields `-inf`, which is a valid output.
///
/// Panics if any mode is outside `1..=mode_count`.
pub fn joint_log_density(modes: &[Mode], loss: f64, config: &ScenarioConfig) -> f64 {
    let counts = mode_counts(modes, config.amc.mode_count())
        .expect("mode out of table range");
    log_density_from_counts(&counts, loss, config)
}

fn mode_counts(modes: &[Mode], mode_count: usize) -> Result<Vec<usize>> {
    let mut counts = vec![0usize; mode_count + 1];
    for &m in modes {
        if m < 1 || m > mode_count {
            return Err(Error::Domain(format!(
                "mode {m} outside table range 1..={mode_count}"
            )));
        }
        counts[m] += 1;
    }
    Ok(counts)
}

fn log_density_from_counts(counts: &[usize], loss: f64, config: &ScenarioConfig) -> f64 {
    let model = &config.propagation;
    let prior = pathloss_prior_pdf(model, config.cell_radius_m, config.min_pu_bs_distance_m, loss);
    if prior <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut log_density = prior.ln();
    for (m, &n) in counts.iter().enumerate().skip(1) {
        if n == 0 {
            continue;
        }
        let p = mode_likelihood(&config.amc, m, loss, config.bs_power_w, config.noise_mean_w);
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        log_density += n as f64 * p.ln();
    }
    log_density
}

/// Maximize the joint log-density of the observed downlink modes over the
/// loss support. Ties break toward the smaller loss.
pub fn estimate_bs_pu_loss(modes: &[Mode], config: &ScenarioConfig) -> Result<PathLossEstimate> {
    if modes.is_empty() {
        return Err(Error::Domain("empty downlink mode sequence".into()));
    }
    let counts = mode_counts(modes, config.amc.mode_count())?;
    let (support_lo, support_hi) = config.loss_support();
    let (t_lo, t_hi) = (support_lo.ln(), support_hi.ln());
    let objective = |t: f64| log_density_from_counts(&counts, t.exp(), config);

    // Stage 1: geometric grid (uniform in log loss). Ascending scan with a
    // strict improvement test keeps the smallest argmax on ties.
    let step = (t_hi - t_lo) / (GRID_POINTS - 1) as f64;
    let mut best_t = t_lo;
    let mut best_f = f64::NEG_INFINITY;
    let mut best_idx = 0usize;
    for i in 0..GRID_POINTS {
        let t = t_lo + step * i as f64;
        let f = objective(t);
        if f > best_f {
            best_f = f;
            best_t = t;
            best_idx = i;
        }
    }

    // Stage 2: golden-section refinement inside the bracketing grid cells.
    let bracket_lo = t_lo + step * best_idx.saturating_sub(1) as f64;
    let bracket_hi = t_lo + step * (best_idx + 1).min(GRID_POINTS - 1) as f64;
    let width = REFINE_WIDTH_DB * std::f64::consts::LN_10 / 10.0;
    let (refined_t, refined_f) = golden_max(&objective, bracket_lo, bracket_hi, width);
    if refined_f > best_f || (refined_f == best_f && refined_t < best_t) {
        best_t = refined_t;
        best_f = refined_f;
    }

    let edge_margin = step.max(width);
    Ok(PathLossEstimate {
        loss: best_t.exp().clamp(support_lo, support_hi),
        diagnostics: MapDiagnostics {
            grid_points: GRID_POINTS,
            log_density: best_f,
            at_support_edge: best_t - t_lo <= edge_margin || t_hi - best_t <= edge_margin,
        },
    })
}

/// Golden-section maximizer on `[lo, hi]`; shrinks the bracket to `width`
/// and returns the bracket midpoint. Equal interior values keep the left
/// interval, so flat stretches resolve toward the smaller argument.
fn golden_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > width {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}
