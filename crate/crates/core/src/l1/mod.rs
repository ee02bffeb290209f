//! Extended L1 adaptive output-feedback controller.
//!
//! Per axis the controller runs a first-order output predictor
//! `ŷ₁' = -m ŷ₁ + m (u + σ̂)`, a projected gradient law for `σ̂`, a
//! low-pass filtered control `u = C(s)(r₁ - σ̂)` and an outer position loop
//! `r₁ = K (r₂ - y₂)`. Axes are fully decoupled.

pub mod reference;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, invalid};
use crate::lti::RationalTF;
use crate::math;
use crate::Result;

/// Lower bound applied by [`default_sigma_bound`].
pub const SIGMA_BOUND_FLOOR: f64 = 2.0;

/// `max(10 × disturbance magnitude, SIGMA_BOUND_FLOOR)`.
pub fn default_sigma_bound(max_disturbance: f64) -> f64 {
    (10.0 * max_disturbance.abs()).max(SIGMA_BOUND_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1AxisConfig {
    /// Reference-model pole magnitude of `M(s) = m / (s + m)`.
    pub m: f64,
    /// Cutoff of `C(s) = ω / (s + ω)`.
    pub omega: f64,
    /// Outer position-loop gain.
    pub k: f64,
    pub gamma: f64,
    pub sigma_bound: f64,
    /// Controller period.
    pub dt: f64,
    /// Lyapunov weight; the effective adaptation gain is `Γ m P`.
    pub p: f64,
}

impl L1AxisConfig {
    /// Builds a validated configuration with `P = 0.5 / m`.
    pub fn new(m: f64, omega: f64, k: f64, gamma: f64, sigma_bound: f64, dt: f64) -> Result<Self> {
        Self::with_p(m, omega, k, gamma, sigma_bound, dt, 0.5 / m)
    }

    pub fn with_p(
        m: f64,
        omega: f64,
        k: f64,
        gamma: f64,
        sigma_bound: f64,
        dt: f64,
        p: f64,
    ) -> Result<Self> {
        let cfg = Self {
            m,
            omega,
            k,
            gamma,
            sigma_bound,
            dt,
            p,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("m", self.m),
            ("omega", self.omega),
            ("k", self.k),
            ("gamma", self.gamma),
            ("sigma_bound", self.sigma_bound),
            ("dt", self.dt),
            ("p", self.p),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be positive and finite"));
            }
        }
        if !self.discrete_loop_is_stable() {
            return Err(invalid(
                "gamma",
                "adaptation rate too high for the controller period (discrete error loop unstable)",
            ));
        }
        Ok(())
    }

    /// Jury test of the sampled predictor/adaptation error loop:
    /// `Γ m² P dt² < 4 - 2 m dt` together with `m dt < 2`.
    pub fn discrete_loop_is_stable(&self) -> bool {
        let a = self.m * self.dt;
        let ag = self.gamma * self.m * self.m * self.p * self.dt * self.dt;
        a < 2.0 && ag < 4.0 - 2.0 * a
    }

    pub fn reference_model(&self) -> RationalTF {
        RationalTF::first_order(self.m)
    }

    pub fn filter(&self) -> RationalTF {
        RationalTF::first_order(self.omega)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct L1AxisState {
    pub sigma_hat: f64,
    pub y1_hat: f64,
    /// Output of the `C(s)` realization.
    pub filter_state: f64,
    pub last_u: f64,
    /// Last prediction error `ŷ₁ - y₁` seen by the adaptation law.
    pub y_tilde: f64,
}

/// Per-step signals for tracing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct L1Telemetry {
    pub r1: f64,
    pub u: f64,
    pub sigma_hat: f64,
    pub y1_hat: f64,
    pub y_tilde: f64,
}

pub fn outer_loop(cfg: &L1AxisConfig, r2: f64, y2: f64) -> f64 {
    cfg.k * (r2 - y2)
}

/// Forward-Euler step of the output predictor.
pub fn predictor_step(state: &mut L1AxisState, cfg: &L1AxisConfig, u: f64, dt: f64) -> f64 {
    state.y1_hat += dt * cfg.m * (u + state.sigma_hat - state.y1_hat);
    state.y1_hat
}

/// Boundary-clamped projection: the outward component of `direction` is
/// removed when `sigma` sits on the bound.
pub fn project(sigma: f64, direction: f64, bound: f64) -> f64 {
    if (sigma >= bound && direction > 0.0) || (sigma <= -bound && direction < 0.0) {
        0.0
    } else {
        direction
    }
}

/// Euler step of `σ̂' = Γ Proj(σ̂, -m P ỹ)` with `ỹ = ŷ₁ - y₁`.
/// `|σ̂| <= sigma_bound` holds on return.
pub fn adaptation_step(
    state: &mut L1AxisState,
    cfg: &L1AxisConfig,
    y1_measured: f64,
    dt: f64,
) -> f64 {
    let y_tilde = state.y1_hat - y1_measured;
    state.y_tilde = y_tilde;
    let direction = project(state.sigma_hat, -cfg.m * cfg.p * y_tilde, cfg.sigma_bound);
    let next = state.sigma_hat + dt * cfg.gamma * direction;
    state.sigma_hat = next.clamp(-cfg.sigma_bound, cfg.sigma_bound);
    state.sigma_hat
}

/// One exact zero-order-hold step of `C(s)` driven by `r₁ - σ̂`.
pub fn control_step(state: &mut L1AxisState, cfg: &L1AxisConfig, r1: f64, dt: f64) -> f64 {
    let decay = math::exp(-cfg.omega * dt);
    let input = r1 - state.sigma_hat;
    state.filter_state = decay * state.filter_state + (1.0 - decay) * input;
    state.last_u = state.filter_state;
    state.last_u
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1Axis {
    pub cfg: L1AxisConfig,
    pub state: L1AxisState,
}

impl L1Axis {
    pub fn new(cfg: L1AxisConfig) -> Self {
        Self {
            cfg,
            state: L1AxisState::default(),
        }
    }

    /// Outer loop, adaptation on the current measurement, filtered control,
    /// then the predictor step with the fresh `σ̂` and `u`.
    pub fn step(&mut self, r2: f64, y1: f64, y2: f64) -> L1Telemetry {
        let dt = self.cfg.dt;
        let r1 = outer_loop(&self.cfg, r2, y2);
        adaptation_step(&mut self.state, &self.cfg, y1, dt);
        let u = control_step(&mut self.state, &self.cfg, r1, dt);
        predictor_step(&mut self.state, &self.cfg, u, dt);
        L1Telemetry {
            r1,
            u,
            sigma_hat: self.state.sigma_hat,
            y1_hat: self.state.y1_hat,
            y_tilde: self.state.y_tilde,
        }
    }

    pub fn reset(&mut self) {
        self.state = L1AxisState::default();
    }
}

/// Diagonal MIMO controller: one independent [`L1Axis`] per decoupled axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct L1MimoController {
    pub axes: Vec<L1Axis>,
}

impl L1MimoController {
    pub fn new(cfgs: Vec<L1AxisConfig>) -> Self {
        Self {
            axes: cfgs.into_iter().map(L1Axis::new).collect(),
        }
    }

    pub fn n_axes(&self) -> usize {
        self.axes.len()
    }

    pub fn reset(&mut self) {
        self.axes.iter_mut().for_each(L1Axis::reset);
    }

    /// Writes the control vector into `u`.
    pub fn step_into(&mut self, r2: &[f64], y1: &[f64], y2: &[f64], u: &mut [f64]) -> Result<()> {
        let n = self.axes.len();
        ensure_len(n, r2.len())?;
        ensure_len(n, y1.len())?;
        ensure_len(n, y2.len())?;
        ensure_len(n, u.len())?;
        for (i, axis) in self.axes.iter_mut().enumerate() {
            u[i] = axis.step(r2[i], y1[i], y2[i]).u;
        }
        Ok(())
    }
}

pub fn l1_step(ctrl: &mut L1MimoController, r2: &[f64], y1: &[f64], y2: &[f64]) -> Result<Vec<f64>> {
    let mut u = alloc::vec![0.0; ctrl.n_axes()];
    ctrl.step_into(r2, y1, y2, &mut u)?;
    Ok(u)
}
