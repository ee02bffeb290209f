use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::lifted::LiftedSystem;
use crate::error::{ensure_len, invalid};
use crate::{Error, Result};

/// Cost weights and Kalman noise levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IlcWeights {
    /// Output-error weight, `Q = q I`.
    pub q: f64,
    /// Input weight, `R = r_w I`.
    pub r_w: f64,
    /// Acceleration weight, `S = s_w I`; `W = R + Dᵀ S D`.
    pub s_w: f64,
    /// Process-noise variance per iteration.
    pub eta: f64,
    /// Measurement-noise variance.
    pub eps: f64,
}

impl Default for IlcWeights {
    fn default() -> Self {
        Self {
            q: 1.0,
            r_w: 0.001,
            s_w: 0.0025,
            eta: 1e-3,
            eps: 1e-1,
        }
    }
}

impl IlcWeights {
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 0.0) {
            return Err(invalid("q", "must be positive"));
        }
        if !(self.r_w >= 0.0 && self.s_w >= 0.0) {
            return Err(invalid("r_w", "input weights must be non-negative"));
        }
        if !(self.eta > 0.0 && self.eps > 0.0) {
            return Err(invalid("eta", "noise variances must be positive"));
        }
        Ok(())
    }
}

/// Learned input deviation and repetitive-disturbance estimate; the object
/// exchanged between systems sharing a reference model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningState {
    pub iteration: usize,
    pub r_bar: Vec<f64>,
    pub d_hat: Vec<f64>,
    pub p_cov: Vec<f64>,
    #[serde(default)]
    pub model_id: String,
}

impl LearningState {
    /// `r̄ = 0`, `d̂ = 0`, `P = p0 I`.
    pub fn new(n_u: usize, n_y: usize, p0: f64) -> Self {
        Self {
            iteration: 0,
            r_bar: vec![0.0; n_u],
            d_hat: vec![0.0; n_y],
            p_cov: vec![p0; n_y],
            model_id: String::new(),
        }
    }

    pub fn for_system(sys: &LiftedSystem, p0: f64) -> Self {
        Self::new(sys.cols(), sys.rows(), p0)
    }

    pub fn check(&self, sys: &LiftedSystem) -> Result<()> {
        ensure_len(sys.cols(), self.r_bar.len())?;
        ensure_len(sys.rows(), self.d_hat.len())?;
        ensure_len(sys.rows(), self.p_cov.len())?;
        if self.p_cov.iter().any(|p| !(*p >= 0.0)) {
            return Err(invalid("p_cov", "covariance entries must be non-negative"));
        }
        Ok(())
    }
}

/// Diagonal iteration-domain Kalman step with identity transition:
/// `P⁻ = P + η`, `ν = y - (F r̄ + d̂)`, `k = P⁻ / (P⁻ + ε)`, `d̂ += k ν`,
/// `P = (1 - k) P⁻`.
pub fn kalman_update_with_prediction(
    state: &mut LearningState,
    w: &IlcWeights,
    predicted: &[f64],
    y_meas: &[f64],
) -> Result<()> {
    ensure_len(state.d_hat.len(), y_meas.len())?;
    ensure_len(state.d_hat.len(), predicted.len())?;
    if y_meas.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("measurement"));
    }
    for i in 0..y_meas.len() {
        let p_prior = state.p_cov[i] + w.eta;
        let gain = p_prior / (p_prior + w.eps);
        let innovation = y_meas[i] - (predicted[i] + state.d_hat[i]);
        state.d_hat[i] += gain * innovation;
        state.p_cov[i] = (1.0 - gain) * p_prior;
    }
    Ok(())
}

pub fn kalman_update(
    state: &mut LearningState,
    sys: &LiftedSystem,
    w: &IlcWeights,
    y_meas: &[f64],
) -> Result<()> {
    state.check(sys)?;
    let predicted = sys.apply(&state.r_bar);
    kalman_update_with_prediction(state, w, &predicted, y_meas)
}
