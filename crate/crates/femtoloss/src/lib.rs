//! Link-level simulator and non-cooperative path-loss estimators for a
//! two-tier (macrocell + femtocell) network.
//!
//! A secondary user overhears the base station's AMC mode broadcasts and
//! measures the power it receives from a primary user; from those
//! observations alone it estimates the BS-PU path loss (MAP over the mode
//! sequence) and then the PU-SU path loss (linear MMSE over the received
//! powers, driven by the transmit-power moments and a circle-geometry
//! prior). The crate provides the physical-layer model, both estimators,
//! the end-to-end scenario simulator, and seeded experiment runners.
//!
//! Monte Carlo trials fan out across threads when the `parallel` feature
//! (default) is enabled; outputs are bit-identical either way.

pub mod amc;
pub mod channel;
pub mod config;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod geometry;
pub mod map_estimator;
pub mod mmse;
pub mod propagation;
pub mod quad;
pub mod rng;
pub mod sim;
pub mod tx_power;
pub mod units;

pub use amc::{assign_mode, downlink_sinr, mode_likelihood, AmcMode, AmcTable, Mode};
pub use config::{calibrate_bs_power, Duplex, ScenarioConfig, UplinkPolicy, FRINGE_SINR_DB};
pub use error::{Error, ErrorCategory, Result};
pub use geometry::{pu_su_distance, x_moments, GeometryPrior};
pub use map_estimator::{
    estimate_bs_pu_loss, joint_log_density, pathloss_prior_pdf, uplink_loss_from_downlink,
    MapDiagnostics, PathLossEstimate,
};
pub use mmse::{
    build_correlations, estimate_inverse_loss, pathloss_from_inverse, solve_weights,
    CorrelationSystem, InvertedLoss, MmseDiagnostics,
};
pub use propagation::PropagationModel;
pub use sim::{
    abs_db_error, run_estimation, simulate_downlink_modes, simulate_instant, simulate_scenario,
    ChannelDraws, EstimationResult, Observables, ObservationTrace,
};
pub use tx_power::{
    clipped_moments, power_stats, simulate_tx_power, tx_power_mean, tx_power_mean_square,
    tx_power_moments, tx_power_pdf, PowerMoments, PowerStats, TxPowerPdf,
};
