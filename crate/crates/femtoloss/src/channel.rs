//! Channel randomness: squared Rayleigh envelopes and receiver noise power.
//!
//! Samplers take `&mut impl Rng`; callers keep one derived stream per trial
//! (see [`crate::rng`]) so draws never cross thread boundaries.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// One squared channel gain `|h|^2`: unit-mean exponential, CDF `1 - e^-y`.
pub fn fading_gain<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// `n` i.i.d. squared channel gains.
pub fn sample_fading_gains<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| fading_gain(rng)).collect()
}

/// One noise-power draw: `noise_mean_w` times a chi-square variate with one
/// degree of freedom (mean `noise_mean_w`, second moment `3 noise_mean_w^2`).
pub fn noise_power<R: Rng + ?Sized>(rng: &mut R, noise_mean_w: f64) -> f64 {
    debug_assert!(noise_mean_w > 0.0);
    let z: f64 = StandardNormal.sample(rng);
    noise_mean_w * z * z
}

/// `n` i.i.d. noise-power draws.
pub fn sample_noise_powers<R: Rng + ?Sized>(rng: &mut R, noise_mean_w: f64, n: usize) -> Vec<f64> {
    (0..n).map(|_| noise_power(rng, noise_mean_w)).collect()
}
