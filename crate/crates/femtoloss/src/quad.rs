//! Adaptive Simpson quadrature for the smooth one-dimensional integrals in
//! this crate (clipped-power moments, inverse-loss angle averages).
//!
//! The interval is seeded with an explicit panel list (uniform or geometric,
//! chosen by the caller to match the integrand's scale) and each panel is
//! refined until the classic `|S2 - S1| <= 15 tol` criterion holds. Failure
//! to converge within the depth limit is an error, not a silent result.

use crate::error::{Error, Result};

const MAX_DEPTH: u32 = 48;

/// Integrate `f` over `[a, b]`, seeding with `n_panels` uniform panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n_panels: usize, rel_tol: f64) -> Result<f64> {
    integrate_panels(f, &uniform_breakpoints(a, b, n_panels), rel_tol)
}

/// `n` uniform panels over `[a, b]` (returns `n + 1` breakpoints).
pub fn uniform_breakpoints(a: f64, b: f64, n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

/// `n` geometrically spaced panels over `[a, b]`; requires `0 < a < b`.
/// Suited to integrands whose scale is set by `x` itself, e.g. `e^-x / x^m`.
pub fn geometric_breakpoints(a: f64, b: f64, n: usize) -> Vec<f64> {
    debug_assert!(a > 0.0 && b > a);
    let n = n.max(1);
    let ratio = (b / a).ln() / n as f64;
    let mut pts: Vec<f64> = (0..=n).map(|i| a * (ratio * i as f64).exp()).collect();
    // endpoints exact despite rounding
    pts[0] = a;
    pts[n] = b;
    pts
}

/// Integrate `f` over the panels described by `breakpoints` (ascending).
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], rel_tol: f64) -> Result<f64> {
    assert!(breakpoints.len() >= 2, "need at least one panel");
    let a = breakpoints[0];
    let b = *breakpoints.last().unwrap();
    if a == b {
        return Ok(0.0);
    }

    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::Quadrature {
                a,
                b,
                detail: format!("non-finite integrand value {y} at x = {x:e}"),
            })
        }
    };

    struct Panel {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_mid: f64,
        f_hi: f64,
        coarse: f64,
    }

    let mut panels = Vec::with_capacity(breakpoints.len() - 1);
    let mut coarse_total = 0.0;
    let mut f_right = eval(a)?;
    for pair in breakpoints.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let f_lo = f_right;
        let f_mid = eval(0.5 * (lo + hi))?;
        let f_hi = eval(hi)?;
        f_right = f_hi;
        let coarse = simpson(lo, hi, f_lo, f_mid, f_hi);
        coarse_total += coarse;
        panels.push(Panel { lo, hi, f_lo, f_mid, f_hi, coarse });
    }

    if coarse_total == 0.0 {
        // Integrand vanished at every probe; treat as an all-zero integrand
        // (the callers' tails underflow long before this matters).
        return Ok(0.0);
    }

    // Halved so that halving rel_tol again cannot move the result measurably.
    let tol_each = 0.5 * rel_tol * coarse_total.abs() / panels.len() as f64;
    let mut total = 0.0;
    for p in &panels {
        total += adapt(&eval, p.lo, p.hi, p.f_lo, p.f_mid, p.f_hi, p.coarse, tol_each, MAX_DEPTH)?;
    }
    Ok(total)
}

fn simpson(lo: f64, hi: f64, f_lo: f64, f_mid: f64, f_hi: f64) -> f64 {
    (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
}

#[allow(clippy::too_many_arguments)]
fn adapt<E: Fn(f64) -> Result<f64>>(
    eval: &E,
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_mid: f64,
    f_hi: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let mid = 0.5 * (lo + hi);
    let lm = 0.5 * (lo + mid);
    let rm = 0.5 * (mid + hi);
    let f_lm = eval(lm)?;
    let f_rm = eval(rm)?;
    let left = simpson(lo, mid, f_lo, f_lm, f_mid);
    let right = simpson(mid, hi, f_mid, f_rm, f_hi);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (hi - lo) <= 1e-14 * (hi.abs() + lo.abs()) {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature {
            a: lo,
            b: hi,
            detail: format!("depth limit reached, residual {:e} > {:e}", delta.abs(), 15.0 * tol),
        });
    }
    Ok(adapt(eval, lo, mid, f_lo, f_lm, f_mid, left, 0.5 * tol, depth - 1)?
        + adapt(eval, mid, hi, f_mid, f_rm, f_hi, right, 0.5 * tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x * x, 0.0, 1.0, 4, 1e-10).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn exponential_tail() {
        // int_0^60 y^2 e^-y dy = 2 - tail; tail at 60 is ~1e-23.
        let v = integrate(|y| y * y * (-y).exp(), 0.0, 60.0, 16, 1e-10).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn geometric_panels_handle_wide_ratio() {
        // int_a^b e^-u / u du = E1(a) - E1(b); reference from mpmath.
        let v = integrate_panels(
            |u| (-u).exp() / u,
            &geometric_breakpoints(1e-4, 50.0, 64),
            1e-10,
        )
        .unwrap();
        let reference = 8.633_224_704_574_705; // E1(1e-4) - E1(50)
        assert!((v - reference).abs() / reference < 1e-9, "got {v}");
    }

    #[test]
    fn tolerance_halving_is_stable() {
        let f = |u: f64| (-u).exp() / (u * u);
        let breaks = geometric_breakpoints(0.05, 300.0, 64);
        let v1 = integrate_panels(f, &breaks, 1e-8).unwrap();
        let v2 = integrate_panels(f, &breaks, 5e-9).unwrap();
        assert!((v1 - v2).abs() <= 1e-9 * v1.abs());
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let err = integrate(|x| 1.0 / x, -1.0, 1.0, 4, 1e-8).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. }));
    }

    #[test]
    fn zero_integrand_short_circuits() {
        let v = integrate(|_| 0.0, 0.0, 1.0, 4, 1e-8).unwrap();
        assert_eq!(v, 0.0);
    }
}
