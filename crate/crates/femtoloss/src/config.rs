//! Scenario configuration: physical and protocol parameters, the flat
//! key-value config file format, and BS transmit-power calibration.
//!
//! Config file keys (all values one per line, `key = value`, `#` comments):
//! `r0_m`, `rmin_m`, `l0_db`, `alpha`, `sigma2_dbm`, `p0_dbm` (a number or
//! `auto`), `pmin_dbm`, `pmax_dbm`, `i`, `uplink_policy` (`amc` |
//! `fixed_target`), `target_sinr_db`, `duplex` (`tdd` | `fdd`),
//! `fdd_offset_db`, `seed`, `amc_table` (path, relative to the config file).
//! `target_sinr_db` is required only under `fixed_target`, `fdd_offset_db`
//! only under `fdd`.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::amc::AmcTable;
use crate::error::{Error, Result};
use crate::propagation::PropagationModel;
use crate::units;

/// Average received SINR at the cell fringe that `p0_dbm = auto` calibrates to.
pub const FRINGE_SINR_DB: f64 = 12.0;

/// How the BS assigns the PU's uplink mode, and therefore which SINR
/// requirement drives the PU's power control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UplinkPolicy {
    /// The BS picks the highest-rate mode the PU can sustain within its
    /// power budget for the instantaneous uplink channel.
    AmcDriven,
    /// Power control towards a fixed received-SINR target (linear ratio);
    /// uplink AMC is bypassed.
    FixedTarget { sinr_target: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Duplex {
    /// Uplink loss equals downlink loss.
    Tdd,
    /// Uplink loss is the downlink loss shifted by a constant.
    Fdd { offset_db: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub cell_radius_m: f64,
    pub min_pu_bs_distance_m: f64,
    pub propagation: PropagationModel,
    /// Mean noise power (W).
    pub noise_mean_w: f64,
    /// BS transmit power (W).
    pub bs_power_w: f64,
    pub tx_power_min_w: f64,
    pub tx_power_max_w: f64,
    /// Number of observed instants per trace.
    pub observation_count: usize,
    pub uplink_policy: UplinkPolicy,
    pub duplex: Duplex,
    pub amc: AmcTable,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.to_string()))
            }
        };
        check(
            self.min_pu_bs_distance_m > 0.0 && self.min_pu_bs_distance_m < self.cell_radius_m,
            "need 0 < rmin_m < r0_m",
        )?;
        check(
            self.tx_power_min_w > 0.0 && self.tx_power_min_w < self.tx_power_max_w,
            "need 0 < pmin < pmax",
        )?;
        check(self.observation_count >= 1, "need i >= 1")?;
        check(self.noise_mean_w > 0.0, "need sigma2 > 0")?;
        check(self.bs_power_w > 0.0, "need p0 > 0")?;
        if let UplinkPolicy::FixedTarget { sinr_target } = self.uplink_policy {
            check(sinr_target > 0.0, "need target_sinr > 0")?;
        }
        Ok(())
    }

    /// Loss interval a PU inside the cell can produce:
    /// `[loss(rmin), loss(r0)]`.
    pub fn loss_support(&self) -> (f64, f64) {
        let lo = self.propagation.loss(self.min_pu_bs_distance_m).expect("rmin > 0");
        let hi = self.propagation.loss(self.cell_radius_m).expect("r0 > 0");
        (lo, hi)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path.parent())
    }

    /// Parse config text; `base_dir` anchors relative `amc_table` paths.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut entries: HashMap<String, (String, usize)> = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("config line {}: expected `key = value`", lineno + 1))
            })?;
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!(
                    "config line {}: unknown key `{key}`",
                    lineno + 1
                )));
            }
            if entries.insert(key.clone(), (value, lineno + 1)).is_some() {
                return Err(Error::Config(format!(
                    "config line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
        }

        let take = |key: &str| -> Result<String> {
            entries
                .get(key)
                .map(|(v, _)| v.clone())
                .ok_or_else(|| Error::Config(format!("missing config key `{key}`")))
        };
        let take_f64 = |key: &str| -> Result<f64> {
            let v = take(key)?;
            v.parse::<f64>().map_err(|_| {
                let line = entries[key].1;
                Error::Config(format!("config line {line}: key `{key}`: bad number `{v}`"))
            })
        };

        let cell_radius_m = take_f64("r0_m")?;
        let min_pu_bs_distance_m = take_f64("rmin_m")?;
        let propagation = PropagationModel::from_db(take_f64("l0_db")?, take_f64("alpha")?)?;
        let noise_mean_w = units::dbm_to_watts(take_f64("sigma2_dbm")?);
        let tx_power_min_w = units::dbm_to_watts(take_f64("pmin_dbm")?);
        let tx_power_max_w = units::dbm_to_watts(take_f64("pmax_dbm")?);
        let observation_count = take("i")?.parse::<usize>().map_err(|_| {
            Error::Config(format!("config line {}: key `i`: expected a positive integer", entries["i"].1))
        })?;
        let seed = take("seed")?.parse::<u64>().map_err(|_| {
            Error::Config(format!("config line {}: key `seed`: expected a u64", entries["seed"].1))
        })?;

        let uplink_policy = match take("uplink_policy")?.as_str() {
            "amc" => UplinkPolicy::AmcDriven,
            "fixed_target" => UplinkPolicy::FixedTarget {
                sinr_target: units::db_to_linear(take_f64("target_sinr_db")?),
            },
            other => {
                return Err(Error::Config(format!(
                    "config line {}: uplink_policy must be `amc` or `fixed_target`, got `{other}`",
                    entries["uplink_policy"].1
                )))
            }
        };

        let duplex = match take("duplex")?.as_str() {
            "tdd" => Duplex::Tdd,
            "fdd" => Duplex::Fdd { offset_db: take_f64("fdd_offset_db")? },
            other => {
                return Err(Error::Config(format!(
                    "config line {}: duplex must be `tdd` or `fdd`, got `{other}`",
                    entries["duplex"].1
                )))
            }
        };

        let table_ref = take("amc_table")?;
        let mut table_path = PathBuf::from(&table_ref);
        if table_path.is_relative() {
            if let Some(base) = base_dir {
                table_path = base.join(table_path);
            }
        }
        let amc = AmcTable::load(&table_path)?;

        let bs_power_w = match take("p0_dbm")?.as_str() {
            "auto" => calibrate_bs_power(&propagation, cell_radius_m, noise_mean_w)?,
            v => v.parse::<f64>().map(units::dbm_to_watts).map_err(|_| {
                Error::Config(format!(
                    "config line {}: key `p0_dbm`: expected a number or `auto`",
                    entries["p0_dbm"].1
                ))
            })?,
        };

        let config = ScenarioConfig {
            cell_radius_m,
            min_pu_bs_distance_m,
            propagation,
            noise_mean_w,
            bs_power_w,
            tx_power_min_w,
            tx_power_max_w,
            observation_count,
            uplink_policy,
            duplex,
            amc,
            seed,
        };
        config.validate()?;
        Ok(config)
    }
}

const KNOWN_KEYS: [&str; 15] = [
    "r0_m",
    "rmin_m",
    "l0_db",
    "alpha",
    "sigma2_dbm",
    "p0_dbm",
    "pmin_dbm",
    "pmax_dbm",
    "i",
    "uplink_policy",
    "target_sinr_db",
    "duplex",
    "fdd_offset_db",
    "seed",
    "amc_table",
];

/// Default scenario: 500 m cell, 35 m exclusion radius, -100 dBm noise,
/// auto-calibrated BS power, 37 dBm / -30 dBm PU power limits, 200 instants,
/// fixed 15 dB uplink target, TDD. Mirrors `configs/default.cfg`.
impl Default for ScenarioConfig {
    fn default() -> Self {
        let propagation = PropagationModel::default();
        let noise_mean_w = units::dbm_to_watts(-100.0);
        let bs_power_w =
            calibrate_bs_power(&propagation, 500.0, noise_mean_w).expect("defaults are valid");
        Self {
            cell_radius_m: 500.0,
            min_pu_bs_distance_m: 35.0,
            propagation,
            noise_mean_w,
            bs_power_w,
            tx_power_min_w: units::dbm_to_watts(-30.0),
            tx_power_max_w: units::dbm_to_watts(37.0),
            observation_count: 200,
            uplink_policy: UplinkPolicy::FixedTarget { sinr_target: units::db_to_linear(15.0) },
            duplex: Duplex::Tdd,
            amc: AmcTable::default_table(),
            seed: 42,
        }
    }
}

/// BS power that puts the fading-averaged SINR at the cell fringe at
/// [`FRINGE_SINR_DB`]: with unit-mean fading, `E[SINR at r0] = p0 / (sigma2 *
/// loss(r0))`.
pub fn calibrate_bs_power(
    model: &PropagationModel,
    cell_radius_m: f64,
    noise_mean_w: f64,
) -> Result<f64> {
    Ok(units::db_to_linear(FRINGE_SINR_DB) * noise_mean_w * model.loss(cell_radius_m)?)
}
