use serde::{Deserialize, Serialize};

use super::integrate::Rk4;
use super::rational::{compose_f, compose_g, compose_h, RationalTF, DEFAULT_CANCEL_TOL};
use super::routh::{routh_hurwitz_stable, slowest_decay_rate};
use super::state_space::StateSpace;
use crate::{Error, Result};

pub const DEFAULT_TAIL_TOL: f64 = 1e-6;
const MAX_HORIZON_DOUBLINGS: usize = 24;

/// `∫_0^∞ |g(t)| dt` for the impulse response of a strictly proper stable
/// transfer function.
///
/// The response is integrated with RK4 on the canonical realization and
/// accumulated with the trapezoid rule. Integration runs to `horizon`
/// (or `10 / slowest decay rate` when `horizon <= 0`); each further window
/// doubles the covered span until the window adds less than `tail_tol`.
pub fn impulse_l1_norm(g: &RationalTF, dt: f64, horizon: f64, tail_tol: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(crate::error::invalid("dt", "must be positive"));
    }
    if !g.is_strictly_proper() {
        return Err(Error::NotStrictlyProper);
    }
    if g.is_zero() {
        return Ok(0.0);
    }
    if g.den.degree() == 0 || !routh_hurwitz_stable(&g.den)? {
        return Err(Error::Unstable);
    }
    let horizon = if horizon > 0.0 {
        horizon
    } else {
        10.0 / slowest_decay_rate(&g.den)?
    };
    let ss = StateSpace::from_tf(g)?;
    let mut x: alloc::vec::Vec<f64> = ss.b.iter().copied().collect();
    let mut rk = Rk4::new(ss.order());
    let mut prev = ss.output(&x, 0.0).abs();
    let mut total = 0.0;
    let mut t = 0.0;
    let mut run_until = |x: &mut [f64], t: &mut f64, prev: &mut f64, end: f64| -> Result<f64> {
        let mut window = 0.0;
        while *t < end - 0.5 * dt {
            rk.step(|_, x, dx| ss.deriv_into(x, 0.0, dx), *t, x, dt);
            *t += dt;
            let cur = ss.output(x, 0.0).abs();
            if !cur.is_finite() {
                return Err(Error::NonFinite("impulse response"));
            }
            window += 0.5 * dt * (*prev + cur);
            *prev = cur;
        }
        Ok(window)
    };
    total += run_until(&mut x, &mut t, &mut prev, horizon)?;
    let mut span = horizon;
    for _ in 0..MAX_HORIZON_DOUBLINGS {
        let end = t + span;
        let window = run_until(&mut x, &mut t, &mut prev, end)?;
        total += window;
        if window < tail_tol {
            return Ok(total);
        }
        span *= 2.0;
    }
    Err(Error::IterationLimit(MAX_HORIZON_DOUBLINGS))
}

/// Step used by [`check_l1_condition`]: fine enough to resolve the fastest
/// pole of `g`.
pub fn default_norm_dt(g: &RationalTF) -> f64 {
    let fastest = g
        .poles()
        .iter()
        .fold(0.0_f64, |acc, p| acc.max(crate::math::hypot(p.re, p.im)));
    if fastest > 0.0 {
        (0.02 / fastest).min(1e-3)
    } else {
        1e-3
    }
}

/// Outcome of the small-gain design check `‖G‖₁ L < 1` with `H` and `F`
/// stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub h: RationalTF,
    pub g: RationalTF,
    pub f: RationalTF,
    pub h_stable: bool,
    pub f_stable: bool,
    pub g_norm: f64,
    pub g_norm_times_l: f64,
    pub passes: bool,
}

pub fn check_l1_condition(
    a: &RationalTF,
    m: &RationalTF,
    c: &RationalTF,
    k: f64,
    l: f64,
) -> Result<ConditionReport> {
    if !(l > 0.0) {
        return Err(crate::error::invalid("L", "Lipschitz constant must be positive"));
    }
    let h = compose_h(a, m, c, DEFAULT_CANCEL_TOL)?;
    let g = compose_g(&h, c)?;
    let f = compose_f(&h, c, k)?;
    let h_stable = h.den.degree() == 0 || routh_hurwitz_stable(&h.den)?;
    let f_stable = f.den.degree() == 0 || routh_hurwitz_stable(&f.den)?;
    let g_norm = if !h_stable {
        f64::INFINITY
    } else {
        impulse_l1_norm(&g, default_norm_dt(&g), 0.0, DEFAULT_TAIL_TOL)?
    };
    let g_norm_times_l = g_norm * l;
    Ok(ConditionReport {
        passes: h_stable && f_stable && g_norm_times_l < 1.0,
        h,
        g,
        f,
        h_stable,
        f_stable,
        g_norm,
        g_norm_times_l,
    })
}
