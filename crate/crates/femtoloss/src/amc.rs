//! Adaptive modulation and coding: the mode table, the downlink SINR, the
//! rate-maximizing assignment, and the per-instant mode probability given a
//! BS-PU path loss.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::units;

/// 1-based AMC mode sequence number.
pub type Mode = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct AmcMode {
    pub index: Mode,
    /// Required minimum SINR as a linear power ratio.
    pub min_sinr: f64,
    pub label: String,
}

/// Ordered mode ladder; requirements are strictly increasing with the index.
#[derive(Debug, Clone, PartialEq)]
pub struct AmcTable {
    modes: Vec<AmcMode>,
}

impl AmcTable {
    pub fn new(modes: Vec<AmcMode>) -> Result<Self> {
        if modes.len() < 2 {
            return Err(Error::Config(format!(
                "AMC table needs at least 2 modes, got {}",
                modes.len()
            )));
        }
        for (i, mode) in modes.iter().enumerate() {
            if mode.index != i + 1 {
                return Err(Error::Config(format!(
                    "AMC mode indices must run 1..=M in order; position {} has index {}",
                    i + 1,
                    mode.index
                )));
            }
            if !mode.min_sinr.is_finite() || mode.min_sinr <= 0.0 {
                return Err(Error::Config(format!(
                    "AMC mode {} has invalid SINR requirement {}",
                    mode.index, mode.min_sinr
                )));
            }
            if i > 0 && mode.min_sinr <= modes[i - 1].min_sinr {
                return Err(Error::Config(format!(
                    "AMC SINR requirements must be strictly increasing; mode {} breaks the order",
                    mode.index
                )));
            }
        }
        Ok(Self { modes })
    }

    /// Build from `(threshold_db, label)` rows, indexed in order from 1.
    pub fn from_thresholds_db(rows: &[(f64, &str)]) -> Result<Self> {
        Self::new(
            rows.iter()
                .enumerate()
                .map(|(i, (db, label))| AmcMode {
                    index: i + 1,
                    min_sinr: units::db_to_linear(*db),
                    label: (*label).to_string(),
                })
                .collect(),
        )
    }

    /// Seven-mode ladder shipped as `configs/amc_default.txt`; used whenever
    /// no table file is supplied.
    pub fn default_table() -> Self {
        Self::from_thresholds_db(&[
            (3.0, "BPSK1/2"),
            (6.0, "QPSK1/2"),
            (8.5, "QPSK3/4"),
            (11.5, "16QAM1/2"),
            (15.0, "16QAM3/4"),
            (19.0, "64QAM2/3"),
            (21.0, "64QAM3/4"),
        ])
        .expect("built-in table is valid")
    }

    /// Parse the table file format: one `index threshold_db label` line per
    /// mode; `#` comments and blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut modes = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(3, char::is_whitespace);
            let index: Mode = parts
                .next()
                .unwrap()
                .parse()
                .map_err(|_| Error::Config(format!("AMC table line {}: bad mode index", lineno + 1)))?;
            let threshold_db: f64 = parts
                .next()
                .ok_or_else(|| Error::Config(format!("AMC table line {}: missing threshold", lineno + 1)))?
                .parse()
                .map_err(|_| Error::Config(format!("AMC table line {}: bad threshold", lineno + 1)))?;
            let label = parts
                .next()
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .ok_or_else(|| Error::Config(format!("AMC table line {}: missing label", lineno + 1)))?;
            modes.push(AmcMode {
                index,
                min_sinr: units::db_to_linear(threshold_db),
                label,
            });
        }
        Self::new(modes)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[AmcMode] {
        &self.modes
    }

    /// Required minimum SINR of mode `m` (linear).
    ///
    /// Panics when `m` is outside `1..=mode_count()`.
    pub fn required_sinr(&self, m: Mode) -> f64 {
        self.modes[m - 1].min_sinr
    }

    /// SINR requirement of the next-higher mode; `+inf` above the top mode.
    pub fn next_required_sinr(&self, m: Mode) -> f64 {
        if m >= self.modes.len() {
            f64::INFINITY
        } else {
            self.modes[m].min_sinr
        }
    }
}

/// Instantaneous downlink SINR at the PU: `p0 * |h|^2 / (sigma2 * loss)`.
pub fn downlink_sinr(bs_power_w: f64, fading_gain: f64, noise_mean_w: f64, loss: f64) -> f64 {
    debug_assert!(bs_power_w > 0.0 && fading_gain > 0.0 && noise_mean_w > 0.0 && loss > 0.0);
    bs_power_w * fading_gain / (noise_mean_w * loss)
}

/// Highest-rate mode whose requirement is met (inclusive at the threshold).
/// Below the lowest requirement the assignment floors at mode 1: the
/// broadcast carries no outage symbol.
pub fn assign_mode(table: &AmcTable, sinr: f64) -> Mode {
    table.modes().partition_point(|m| m.min_sinr <= sinr).max(1)
}

/// Probability that the downlink assignment equals `m` given the BS-PU loss.
///
/// With `a = loss * sigma2 / p0` and unit-mean exponential fading the mode-`m`
/// probability is `e^(-min_sinr(m) a) - e^(-min_sinr(m+1) a)`; consistent
/// with the mode-1 floor in [`assign_mode`], mode 1 absorbs all mass below
/// the mode-2 requirement, so the probabilities sum to one exactly.
pub fn mode_likelihood(table: &AmcTable, m: Mode, loss: f64, bs_power_w: f64, noise_mean_w: f64) -> f64 {
    debug_assert!(loss > 0.0);
    let a = loss * noise_mean_w / bs_power_w;
    let lower = if m == 1 { 1.0 } else { (-table.required_sinr(m) * a).exp() };
    let upper = if m == table.mode_count() {
        0.0
    } else {
        (-table.next_required_sinr(m) * a).exp()
    };
    lower - upper
}
