//! Linear MMSE estimation of the inverse PU-SU path loss from the received
//! power sequence: raw cross/auto correlation structures built from the
//! transmit-power moments and the geometry prior, a symmetric positive
//! definite solve for the weight vector, and inversion back to a loss.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::GeometryPrior;
use crate::propagation::PropagationModel;
use crate::tx_power::PowerStats;

/// Condition-estimate threshold beyond which the solve is regularized.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Ridge added on regularization, as a fraction of the mean diagonal.
pub const RIDGE_FACTOR: f64 = 1e-10;

/// Raw correlation structures of the received power sequence.
///
/// With per-instant power moments `(m_i, q_i)` = (mean, mean-square), prior
/// inverse-loss moments `(x1, x2)` and noise power `s`:
/// `cross[i] = m_i x2 + s x1`,
/// `auto[i][i] = 2 q_i x2 + 2 m_i x1 s + 3 s^2`,
/// `auto[i][j] = m_i m_j x2 + (m_i + m_j) x1 s + s^2` for `i != j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSystem {
    pub cross: DVector<f64>,
    pub auto: DMatrix<f64>,
}

impl CorrelationSystem {
    pub fn len(&self) -> usize {
        self.cross.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cross.is_empty()
    }
}

pub fn build_correlations(
    stats: &PowerStats,
    prior: &GeometryPrior,
    noise_mean_w: f64,
) -> CorrelationSystem {
    let n = stats.len();
    let x1 = prior.x_mean;
    let x2 = prior.x_mean_square;
    let s = noise_mean_w;
    let cross = DVector::from_fn(n, |i, _| stats.per_instant[i].mean_w * x2 + s * x1);
    let auto = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            let m = &stats.per_instant[i];
            2.0 * m.mean_square_w2 * x2 + 2.0 * m.mean_w * x1 * s + 3.0 * s * s
        } else {
            let a = stats.per_instant[i].mean_w;
            let b = stats.per_instant[j].mean_w;
            a * b * x2 + (a + b) * x1 * s + s * s
        }
    });
    CorrelationSystem { cross, auto }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmseDiagnostics {
    /// Squared ratio of extreme Cholesky-factor diagonals; cheap lower bound
    /// on the spectral condition number.
    pub condition_estimate: f64,
    /// A diagonal ridge was applied before the factorization succeeded.
    pub regularized: bool,
}

/// Solve `auto * w = cross` for the estimator weights without forming an
/// inverse. Ill-conditioned or non-factorizable systems get a diagonal ridge
/// `RIDGE_FACTOR * mean(diag)`, escalated tenfold up to four times.
pub fn solve_weights(corr: &CorrelationSystem) -> Result<(DVector<f64>, MmseDiagnostics)> {
    let n = corr.len();
    if n == 0 {
        return Err(Error::Domain("empty correlation system".into()));
    }
    let mean_diag = corr.auto.diagonal().sum() / n as f64;

    let attempt = |ridge: f64| -> Option<(Cholesky<f64, nalgebra::Dyn>, f64)> {
        let mut m = corr.auto.clone();
        if ridge > 0.0 {
            for i in 0..n {
                m[(i, i)] += ridge;
            }
        }
        let chol = Cholesky::new(m)?;
        let diag = chol.l_dirty().diagonal();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for &d in diag.iter() {
            lo = lo.min(d);
            hi = hi.max(d);
        }
        let cond = if lo > 0.0 { (hi / lo).powi(2) } else { f64::INFINITY };
        Some((chol, cond))
    };

    let first = attempt(0.0);
    if let Some((chol, cond)) = &first {
        if *cond <= CONDITION_LIMIT {
            let w = chol.solve(&corr.cross);
            return Ok((w, MmseDiagnostics { condition_estimate: *cond, regularized: false }));
        }
    }
    let base_cond = first.map_or(f64::INFINITY, |(_, c)| c);

    let mut ridge = RIDGE_FACTOR * mean_diag;
    for _ in 0..4 {
        if let Some((chol, _)) = attempt(ridge) {
            let w = chol.solve(&corr.cross);
            return Ok((w, MmseDiagnostics { condition_estimate: base_cond, regularized: true }));
        }
        ridge *= 10.0;
    }
    Err(Error::Numeric(format!(
        "correlation matrix not factorizable even with ridge {ridge:e} (condition estimate {base_cond:e})"
    )))
}

/// LMMSE estimate of the inverse loss: weights from [`solve_weights`] dotted
/// with the received powers.
pub fn estimate_inverse_loss(
    corr: &CorrelationSystem,
    received_power_w: &[f64],
) -> Result<(f64, MmseDiagnostics)> {
    if received_power_w.len() != corr.len() {
        return Err(Error::Domain(format!(
            "received power length {} does not match the correlation system length {}",
            received_power_w.len(),
            corr.len()
        )));
    }
    if received_power_w.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::Domain("received powers must be finite and non-negative".into()));
    }
    let (w, diag) = solve_weights(corr)?;
    let x_hat = w.iter().zip(received_power_w).map(|(wi, pi)| wi * pi).sum();
    Ok((x_hat, diag))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvertedLoss {
    pub loss: f64,
    /// The raw inverse was at or below the plausibility floor and the loss
    /// was clamped to `l0 * (2 r0)^alpha` instead of blowing up.
    pub clamped: bool,
}

/// Invert an estimated inverse loss, guarding non-positive and vanishing
/// estimates: anything at or below `1 / max_loss` (with `max_loss` the model
/// loss across the full cell diameter) clamps to `max_loss`.
pub fn pathloss_from_inverse(
    x_hat: f64,
    model: &PropagationModel,
    cell_radius_m: f64,
) -> InvertedLoss {
    let max_loss = model
        .loss(2.0 * cell_radius_m)
        .expect("cell radius is positive");
    if x_hat <= 1.0 / max_loss {
        InvertedLoss { loss: max_loss, clamped: true }
    } else {
        InvertedLoss { loss: 1.0 / x_hat, clamped: false }
    }
}
