//! Log-distance propagation loss.

use crate::error::{Error, Result};
use crate::units;

/// Power-law propagation loss `l0 * d^alpha` (linear power ratio) at
/// distance `d` metres; `10*log10(l0) + 10*alpha*log10(d)` in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationModel {
    l0: f64,
    alpha: f64,
}

impl PropagationModel {
    pub fn new(l0: f64, alpha: f64) -> Result<Self> {
        if !(l0 > 0.0 && l0.is_finite()) {
            return Err(Error::Config(format!("unit-distance loss must be positive, got {l0}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Config(format!("attenuation exponent must be positive, got {alpha}")));
        }
        Ok(Self { l0, alpha })
    }

    /// Build from the dB form `loss_db(d) = l0_db + 10*alpha*log10(d)`.
    pub fn from_db(l0_db: f64, alpha: f64) -> Result<Self> {
        Self::new(units::db_to_linear(l0_db), alpha)
    }

    pub fn l0(&self) -> f64 {
        self.l0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Linear loss at `distance_m` > 0 metres.
    pub fn loss(&self, distance_m: f64) -> Result<f64> {
        if !distance_m.is_finite() || distance_m <= 0.0 {
            return Err(Error::Domain(format!(
                "propagation loss needs a positive distance, got {distance_m} m"
            )));
        }
        Ok(self.l0 * distance_m.powf(self.alpha))
    }

    pub fn loss_db(&self, distance_m: f64) -> Result<f64> {
        Ok(units::linear_to_db(self.loss(distance_m)?))
    }

    /// Distance at which the model produces `loss` (inverse of [`loss`](Self::loss)).
    pub fn distance_for_loss(&self, loss: f64) -> Result<f64> {
        if !loss.is_finite() || loss <= 0.0 {
            return Err(Error::Domain(format!("loss must be positive, got {loss}")));
        }
        Ok((loss / self.l0).powf(1.0 / self.alpha))
    }
}

/// `15.3 + 37.6 log10 d` — the urban macro model used by the default scenario.
impl Default for PropagationModel {
    fn default() -> Self {
        Self::from_db(15.3, 3.76).expect("constants are valid")
    }
}
