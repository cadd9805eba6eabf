//! PU transmit power under SINR-target control clipped to `[pmin, pmax]`:
//! the sampler used by the scenario simulator, and the mixed density /
//! first two moments used by the correlation builder.
//!
//! Everything is parameterized by the scale `k = required_sinr * uplink_loss
//! * sigma2` (watts): the unclipped power is `k / |h|^2` with unit-mean
//! exponential fading, which puts probability mass `e^(-k/pmin)` at `pmin`,
//! mass `1 - e^(-k/pmax)` at `pmax`, and density `(k/p^2) e^(-k/p)` between.

use crate::amc::Mode;
use crate::config::{ScenarioConfig, UplinkPolicy};
use crate::error::{Error, Result};
use crate::quad;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerMoments {
    pub mean_w: f64,
    pub mean_square_w2: f64,
}

/// Per-instant transmit-power moments given the estimated uplink loss and
/// the observed uplink mode sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerStats {
    pub per_instant: Vec<PowerMoments>,
}

impl PowerStats {
    pub fn len(&self) -> usize {
        self.per_instant.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_instant.is_empty()
    }
}

/// Mixed distribution of the clipped transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TxPowerPdf {
    /// `k`: required SINR times uplink loss times mean noise power (W).
    pub scale_w: f64,
    pub min_w: f64,
    pub max_w: f64,
    /// Point mass at `min_w` (fading strong enough to undershoot the floor).
    pub mass_at_min: f64,
    /// Point mass at `max_w` (fading too weak to reach the target).
    pub mass_at_max: f64,
}

impl TxPowerPdf {
    pub fn new(scale_w: f64, min_w: f64, max_w: f64) -> Result<Self> {
        if !scale_w.is_finite() || scale_w <= 0.0 {
            return Err(Error::Domain(format!("power scale must be positive, got {scale_w}")));
        }
        if !min_w.is_finite() || min_w <= 0.0 || min_w >= max_w {
            return Err(Error::Config(format!(
                "power limits must satisfy 0 < pmin < pmax, got [{min_w}, {max_w}]"
            )));
        }
        Ok(Self {
            scale_w,
            min_w,
            max_w,
            mass_at_min: (-scale_w / min_w).exp(),
            mass_at_max: 1.0 - (-scale_w / max_w).exp(),
        })
    }

    /// Continuous density on `(min_w, max_w)`; zero elsewhere (the endpoint
    /// masses are carried separately).
    pub fn density(&self, p: f64) -> f64 {
        if p <= self.min_w || p >= self.max_w {
            return 0.0;
        }
        self.scale_w / (p * p) * (-self.scale_w / p).exp()
    }
}

/// SINR requirement driving the PU's power control at one instant.
pub fn required_sinr_for_uplink(mode: Mode, config: &ScenarioConfig) -> f64 {
    match config.uplink_policy {
        UplinkPolicy::AmcDriven => config.amc.required_sinr(mode),
        UplinkPolicy::FixedTarget { sinr_target } => sinr_target,
    }
}

/// One power-control outcome: `k / |h|^2` clipped to the limits.
pub fn simulate_tx_power(mode: Mode, uplink_loss: f64, fading_gain: f64, config: &ScenarioConfig) -> f64 {
    debug_assert!(fading_gain > 0.0);
    let unclipped =
        required_sinr_for_uplink(mode, config) * uplink_loss * config.noise_mean_w / fading_gain;
    unclipped.clamp(config.tx_power_min_w, config.tx_power_max_w)
}

/// Mixed density of the transmit power at one instant.
pub fn tx_power_pdf(mode: Mode, uplink_loss: f64, config: &ScenarioConfig) -> Result<TxPowerPdf> {
    TxPowerPdf::new(
        required_sinr_for_uplink(mode, config) * uplink_loss * config.noise_mean_w,
        config.tx_power_min_w,
        config.tx_power_max_w,
    )
}

/// First two moments of the clipped power for a raw scale `k`, including
/// both endpoint masses. Equal limits degenerate to a point distribution.
///
/// The continuous parts are integrated after the substitution `u = k/p`
/// (integrands `k e^-u / u` and `k^2 e^-u / u^2`, smooth on the mapped
/// interval) with adaptive quadrature at relative tolerance 1e-8.
pub fn clipped_moments(scale_w: f64, min_w: f64, max_w: f64) -> Result<PowerMoments> {
    if min_w == max_w {
        if !min_w.is_finite() || min_w <= 0.0 {
            return Err(Error::Config(format!("power limits must be positive, got {min_w}")));
        }
        return Ok(PowerMoments { mean_w: min_w, mean_square_w2: min_w * min_w });
    }
    let pdf = TxPowerPdf::new(scale_w, min_w, max_w)?;
    let u_lo = scale_w / max_w;
    let u_hi = scale_w / min_w;
    // Beyond ~745 the exponential underflows to zero; the truncated tail is
    // below 1e-300 of the total.
    let u_cap = (u_lo + 745.0).min(u_hi);
    let breaks = quad::geometric_breakpoints(u_lo, u_cap, 64);
    let rel_tol = 1e-8;
    let cont_mean = scale_w * quad::integrate_panels(|u| (-u).exp() / u, &breaks, rel_tol)?;
    let cont_ms =
        scale_w * scale_w * quad::integrate_panels(|u| (-u).exp() / (u * u), &breaks, rel_tol)?;
    Ok(PowerMoments {
        mean_w: min_w * pdf.mass_at_min + max_w * pdf.mass_at_max + cont_mean,
        mean_square_w2: min_w * min_w * pdf.mass_at_min
            + max_w * max_w * pdf.mass_at_max
            + cont_ms,
    })
}

/// Moments of the transmit power at one instant under the configured policy.
pub fn tx_power_moments(mode: Mode, uplink_loss: f64, config: &ScenarioConfig) -> Result<PowerMoments> {
    clipped_moments(
        required_sinr_for_uplink(mode, config) * uplink_loss * config.noise_mean_w,
        config.tx_power_min_w,
        config.tx_power_max_w,
    )
}

pub fn tx_power_mean(mode: Mode, uplink_loss: f64, config: &ScenarioConfig) -> Result<f64> {
    Ok(tx_power_moments(mode, uplink_loss, config)?.mean_w)
}

pub fn tx_power_mean_square(mode: Mode, uplink_loss: f64, config: &ScenarioConfig) -> Result<f64> {
    Ok(tx_power_moments(mode, uplink_loss, config)?.mean_square_w2)
}

/// Per-instant moments for a whole uplink mode sequence, memoized per
/// distinct mode (a fixed-target trace costs one quadrature, not `I`).
pub fn power_stats(modes: &[Mode], uplink_loss: f64, config: &ScenarioConfig) -> Result<PowerStats> {
    if modes.is_empty() {
        return Err(Error::Domain("empty uplink mode sequence".into()));
    }
    let mut cache: Vec<Option<PowerMoments>> = vec![None; config.amc.mode_count() + 1];
    let mut per_instant = Vec::with_capacity(modes.len());
    for &m in modes {
        if m < 1 || m > config.amc.mode_count() {
            return Err(Error::Domain(format!(
                "mode {m} outside table range 1..={}",
                config.amc.mode_count()
            )));
        }
        let moments = match cache[m] {
            Some(v) => v,
            None => {
                let v = tx_power_moments(m, uplink_loss, config)?;
                cache[m] = Some(v);
                v
            }
        };
        per_instant.push(moments);
    }
    Ok(PowerStats { per_instant })
}
