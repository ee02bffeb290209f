//! PD and PID position controllers used as comparison frameworks.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, invalid};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdConfig {
    pub tau: f64,
    pub zeta: f64,
}

impl Default for PdConfig {
    fn default() -> Self {
        Self { tau: 0.8, zeta: 0.7 }
    }
}

impl PdConfig {
    pub fn new(tau: f64, zeta: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(invalid("tau", "must be positive"));
        }
        if !(zeta > 0.0) {
            return Err(invalid("zeta", "must be positive"));
        }
        Ok(Self { tau, zeta })
    }

    /// Velocity-error gain `2ζ/τ`.
    pub fn kd(&self) -> f64 {
        2.0 * self.zeta / self.tau
    }

    /// Position-error gain `1/τ²`.
    pub fn kp(&self) -> f64 {
        1.0 / (self.tau * self.tau)
    }
}

pub fn pd_step(cfg: &PdConfig, r2: f64, r2_dot: f64, y1: f64, y2: f64) -> f64 {
    cfg.kd() * (r2_dot - y1) + cfg.kp() * (r2 - y2)
}

/// PID gains and the clamped error integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidConfig {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub integrator_state: f64,
    pub integrator_limit: f64,
}

impl PidConfig {
    /// `α = τ(1 + 2ζ)`, `β = τ²(1 + 2ζ)`, `γ = τ³`, limit `u_max / γ`.
    pub fn from_time_constant(tau: f64, zeta: f64, u_max: f64) -> Result<Self> {
        PdConfig::new(tau, zeta)?;
        if !(u_max > 0.0) {
            return Err(invalid("u_max", "must be positive"));
        }
        let gamma = tau * tau * tau;
        Ok(Self {
            alpha: tau * (1.0 + 2.0 * zeta),
            beta: tau * tau * (1.0 + 2.0 * zeta),
            gamma,
            integrator_state: 0.0,
            integrator_limit: u_max / gamma,
        })
    }

    pub fn with_gains(alpha: f64, beta: f64, gamma: f64, integrator_limit: f64) -> Result<Self> {
        if !(integrator_limit >= 0.0) {
            return Err(invalid("integrator_limit", "must be non-negative"));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            integrator_state: 0.0,
            integrator_limit,
        })
    }

    pub fn reset(&mut self) {
        self.integrator_state = 0.0;
    }
}

/// Rectangle-rule integration of `r₂ - y₂`, clamped to the limit, then
/// `u = α(ṙ₂ - y₁) + β(r₂ - y₂) + γ ∫(r₂ - y₂)`.
pub fn pid_step(cfg: &mut PidConfig, r2: f64, r2_dot: f64, y1: f64, y2: f64, dt: f64) -> f64 {
    let e = r2 - y2;
    let lim = cfg.integrator_limit;
    cfg.integrator_state = (cfg.integrator_state + e * dt).clamp(-lim, lim);
    cfg.alpha * (r2_dot - y1) + cfg.beta * e + cfg.gamma * cfg.integrator_state
}

/// Baseline controller over several decoupled axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BaselineMimo {
    Pd(Vec<PdConfig>),
    Pid(Vec<PidConfig>),
}

impl BaselineMimo {
    pub fn n_axes(&self) -> usize {
        match self {
            Self::Pd(v) => v.len(),
            Self::Pid(v) => v.len(),
        }
    }

    pub fn reset(&mut self) {
        if let Self::Pid(v) = self {
            v.iter_mut().for_each(PidConfig::reset);
        }
    }

    pub fn step_into(
        &mut self,
        r2: &[f64],
        r2_dot: &[f64],
        y1: &[f64],
        y2: &[f64],
        dt: f64,
        u: &mut [f64],
    ) -> Result<()> {
        let n = self.n_axes();
        for len in [r2.len(), r2_dot.len(), y1.len(), y2.len(), u.len()] {
            ensure_len(n, len)?;
        }
        match self {
            Self::Pd(cfgs) => {
                for (i, c) in cfgs.iter().enumerate() {
                    u[i] = pd_step(c, r2[i], r2_dot[i], y1[i], y2[i]);
                }
            }
            Self::Pid(cfgs) => {
                for (i, c) in cfgs.iter_mut().enumerate() {
                    u[i] = pid_step(c, r2[i], r2_dot[i], y1[i], y2[i], dt);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pd_examples() {
        let c = PdConfig::new(1.0, 0.5).unwrap();
        assert_eq!(pd_step(&c, 0.3, 0.2, 0.2, 0.3), 0.0);
        assert_eq!(pd_step(&c, 1.0, 0.0, 0.0, 0.0), 1.0);
        let u1 = pd_step(&c, 0.4, 0.3, 0.1, 0.1);
        let u2 = pd_step(&c, 0.7, 0.5, 0.1, 0.1);
        assert!((u2 - 2.0 * u1).abs() < 1e-12);
        assert!(PdConfig::new(0.0, 0.5).is_err());
    }

    #[test]
    fn pid_examples() {
        let mut c = PidConfig::from_time_constant(0.8, 0.7, 100.0).unwrap();
        assert_eq!(pid_step(&mut c, 0.0, 0.0, 0.0, 0.0, 1e-3), 0.0);

        let (e, dt) = (0.2, 1e-3);
        let mut c = PidConfig::with_gains(0.0, 0.0, 0.5, 1e9).unwrap();
        let mut u = 0.0;
        for _ in 0..1000 {
            u = pid_step(&mut c, e, 0.0, 0.0, 0.0, dt);
        }
        assert!((u - 0.5 * e * 1.0).abs() <= dt * 0.5 * e + 1e-12);

        let mut c = PidConfig::with_gains(0.0, 0.0, 0.5, 0.1).unwrap();
        c.integrator_state = 0.1;
        let before = c.gamma * c.integrator_state;
        let u = pid_step(&mut c, 1.0, 0.0, 0.0, 0.0, dt);
        assert_eq!(u, before);
    }

    #[test]
    fn gain_formulas() {
        let c = PidConfig::from_time_constant(0.8, 0.7, 4.0).unwrap();
        assert!((c.alpha - 0.8 * 2.4).abs() < 1e-15);
        assert!((c.beta - 0.64 * 2.4).abs() < 1e-15);
        assert!((c.gamma - 0.512).abs() < 1e-15);
        assert!((c.integrator_limit - 4.0 / 0.512).abs() < 1e-12);
    }
}
