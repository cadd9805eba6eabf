//! PU-SU geometry: the BS-centred circle implied by an uplink-loss estimate
//! and the angle-averaged moments of the inverse PU-SU path loss.

use crate::error::{Error, Result};
use crate::propagation::PropagationModel;
use crate::quad;

/// Radii closer than this make the second moment integral diverge
/// (the PU circle passes through the SU); callers must perturb or reject.
pub const MIN_RADIUS_GAP_M: f64 = 1.0;

/// Prior moments of `x = 1 / pu_su_loss` for a PU uniformly distributed on
/// the circle of radius `pu_radius_m` around the BS, seen from an SU at
/// distance `su_bs_distance_m` from the BS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryPrior {
    pub pu_radius_m: f64,
    pub su_bs_distance_m: f64,
    pub x_mean: f64,
    pub x_mean_square: f64,
}

impl GeometryPrior {
    pub fn new(pu_radius_m: f64, su_bs_distance_m: f64, model: &PropagationModel) -> Result<Self> {
        let (x_mean, x_mean_square) = x_moments(pu_radius_m, su_bs_distance_m, model)?;
        Ok(Self { pu_radius_m, su_bs_distance_m, x_mean, x_mean_square })
    }
}

/// Law-of-cosines distance between a point at radius `r0` and one at radius
/// `r1`, separated by the angle `theta` at the origin.
pub fn pu_su_distance(r0_m: f64, r1_m: f64, theta_rad: f64) -> f64 {
    debug_assert!(r0_m >= 0.0 && r1_m >= 0.0);
    let d2 = r0_m * r0_m + r1_m * r1_m - 2.0 * r0_m * r1_m * theta_rad.cos();
    d2.max(0.0).sqrt()
}

/// Mean and mean-square of the inverse loss `1 / (l0 D(theta)^alpha)` over a
/// uniform angle, by adaptive quadrature at relative tolerance 1e-8. The
/// integrand is symmetric about `theta = pi`, so `[0, pi]` is integrated and
/// doubled.
pub fn x_moments(r0_m: f64, r1_m: f64, model: &PropagationModel) -> Result<(f64, f64)> {
    let gap = (r0_m - r1_m).abs();
    if gap < MIN_RADIUS_GAP_M && !(r0_m == 0.0 && r1_m == 0.0) {
        return Err(Error::SingularGeometry { r0_m, r1_m, gap_m: gap });
    }
    // A radius of zero makes the distance constant.
    if r0_m == 0.0 || r1_m == 0.0 {
        let d = r0_m.max(r1_m);
        let x = 1.0 / model.loss(d)?;
        return Ok((x, x * x));
    }

    let l0 = model.l0();
    let alpha = model.alpha();
    let inv_loss = move |theta: f64| {
        let d = pu_su_distance(r0_m, r1_m, theta);
        1.0 / (l0 * d.powf(alpha))
    };
    let breaks = quad::uniform_breakpoints(0.0, std::f64::consts::PI, 64);
    let rel_tol = 1e-8;
    let mean = quad::integrate_panels(inv_loss, &breaks, rel_tol)? / std::f64::consts::PI;
    let mean_square = quad::integrate_panels(|t| inv_loss(t).powi(2), &breaks, rel_tol)?
        / std::f64::consts::PI;
    Ok((mean, mean_square))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> PropagationModel {
        PropagationModel::default()
    }

    #[test]
    fn distance_identities() {
        assert!((pu_su_distance(300.0, 100.0, 0.0) - 200.0).abs() < 1e-9);
        assert!((pu_su_distance(300.0, 100.0, std::f64::consts::PI) - 400.0).abs() < 1e-9);
        for theta in [0.0, 0.7, 2.0, 5.5] {
            assert!((pu_su_distance(250.0, 0.0, theta) - 250.0).abs() < 1e-9);
        }
    }

    #[test]
    fn su_at_the_bs_makes_the_moments_exact() {
        let m = model();
        let (x1, x2) = x_moments(250.0, 0.0, &m).unwrap();
        let expect = 1.0 / m.loss(250.0).unwrap();
        assert_eq!(x1, expect);
        assert_eq!(x2, expect * expect);
    }

    #[test]
    fn moments_match_a_dense_trapezoid_oracle() {
        let m = model();
        let (x1, x2) = x_moments(100.0, 400.0, &m).unwrap();

        // Independent oracle: 1e6-interval trapezoid over the full circle.
        let n = 1_000_000usize;
        let (mut t1, mut t2) = (0.0f64, 0.0f64);
        for i in 0..=n {
            let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            let inv = 1.0 / m.loss(pu_su_distance(100.0, 400.0, theta)).unwrap();
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            t1 += w * inv;
            t2 += w * inv * inv;
        }
        t1 /= n as f64;
        t2 /= n as f64;

        assert!((x1 - t1).abs() / t1 < 1e-6, "mean {x1} vs {t1}");
        assert!((x2 - t2).abs() / t2 < 1e-6, "mean-square {x2} vs {t2}");
        // Frozen high-precision values for this geometry.
        assert!((x1 - 6.083384587353467e-12).abs() / x1 < 1e-8);
        assert!((x2 - 5.384260396391567e-23).abs() / x2 < 1e-8);
    }

    #[test]
    fn moments_are_symmetric_in_the_radii() {
        let m = model();
        let a = x_moments(120.0, 330.0, &m).unwrap();
        let b = x_moments(330.0, 120.0, &m).unwrap();
        assert!((a.0 - b.0).abs() / a.0 < 1e-12);
        assert!((a.1 - b.1).abs() / a.1 < 1e-12);
    }

    #[test]
    fn near_coincident_radii_are_rejected() {
        let m = model();
        let err = x_moments(100.0, 100.4, &m).unwrap_err();
        assert!(matches!(err, Error::SingularGeometry { .. }));
        // 1 m apart is allowed
        assert!(x_moments(100.0, 101.0, &m).is_ok());
    }

    #[test]
    fn cauchy_schwarz_on_a_radius_grid() {
        let m = model();
        for i in 0..20 {
            for j in 0..20 {
                let r0 = 35.0 + 23.0 * i as f64;
                let r1 = 20.0 + 24.0 * j as f64;
                if (r0 - r1).abs() < MIN_RADIUS_GAP_M {
                    continue;
                }
                let (x1, x2) = x_moments(r0, r1, &m).unwrap();
                assert!(x2 >= x1 * x1 * (1.0 - 1e-12), "r0={r0} r1={r1}");
            }
        }
    }

    #[test]
    fn moments_decay_as_the_su_recedes() {
        let m = model();
        let r0 = 150.0;
        let mut prev = x_moments(r0, 160.0, &m).unwrap();
        for r1 in [200.0, 280.0, 400.0, 650.0, 1000.0] {
            let cur = x_moments(r0, r1, &m).unwrap();
            assert!(cur.0 < prev.0 && cur.1 < prev.1, "r1 = {r1}");
            prev = cur;
        }
    }

    #[test]
    fn halving_the_tolerance_does_not_move_the_result() {
        // Same integral at 1e-8 via the public path vs a manual 5e-9 run.
        let m = model();
        let (x1, _) = x_moments(100.0, 400.0, &m).unwrap();
        let breaks = quad::uniform_breakpoints(0.0, std::f64::consts::PI, 64);
        let tighter = quad::integrate_panels(
            |t| 1.0 / (m.l0() * pu_su_distance(100.0, 400.0, t).powf(m.alpha())),
            &breaks,
            5e-9,
        )
        .unwrap()
            / std::f64::consts::PI;
        assert!((x1 - tighter).abs() <= 1e-9 * x1.abs());
    }
}
