use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::lifted::{free_response, lifted_from_discrete, LiftedSystem};
use crate::lti::{DiscreteStateSpace, StateSpace};
use crate::{Error, Result};

/// Closed-loop L1 reference model of one axis with state `[y₂, y₁]`:
/// `A = [[0, 1], [-K m, -m]]`, `B = [0, K m]ᵀ`, output `y₂`.
#[derive(Debug, Clone)]
pub struct ReferenceModel {
    pub m: f64,
    pub k: f64,
    pub discrete: DiscreteStateSpace,
    pub lifted: LiftedSystem,
}

impl ReferenceModel {
    pub fn new(m: f64, k: f64, dt: f64, n: usize) -> Result<Self> {
        let km = k * m;
        let ss = StateSpace::new(
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -km, -m]),
            DVector::from_column_slice(&[0.0, km]),
            DVector::from_column_slice(&[1.0, 0.0]),
            0.0,
        )?;
        let discrete = ss.discretize_zoh(dt)?;
        let lifted = lifted_from_discrete(&discrete, n)?;
        Ok(Self {
            m,
            k,
            discrete,
            lifted,
        })
    }

    /// Stack of `C Aᵏ⁺¹ x₀` over the trial.
    pub fn free_response(&self, x0: &[f64]) -> Vec<f64> {
        free_response(&self.discrete, &DVector::from_column_slice(x0), self.lifted.n)
    }

    /// Positions of the discrete model driven by `r` from `x0`.
    pub fn simulate(&self, r: &[f64], x0: &[f64]) -> Vec<f64> {
        let mut x = DVector::from_column_slice(x0);
        r.iter()
            .map(|&u| {
                let (xn, y) = self.discrete.step(&x, u);
                x = xn;
                y
            })
            .collect()
    }

    /// Identifier shared by every system whose learning state this model
    /// can interpret.
    pub fn fingerprint(&self) -> String {
        model_fingerprint(self.m, self.k, self.lifted.dt, self.lifted.n)
    }
}

pub fn model_fingerprint(m: f64, k: f64, dt: f64, n: usize) -> String {
    alloc::format!("l1-ref:m={m:.6}:k={k:.6}:dt={dt:.6}:n={n}")
}

/// `r₂,₁ = F⁻¹ (y* - d⁰)` and `d₁ = F (r₂,₁ - y*)`, with `d⁰` the free
/// response from `x0`.
pub fn reference_model_input(
    model: &ReferenceModel,
    y_star: &[f64],
    x0: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let sys = &model.lifted;
    crate::error::ensure_len(sys.rows(), y_star.len())?;
    if sys.rows() != sys.cols() {
        return Err(Error::Singular);
    }
    let d0 = model.free_response(x0);
    let rhs = DVector::from_iterator(y_star.len(), y_star.iter().zip(&d0).map(|(y, d)| y - d));
    let r = sys.f.solve_lower_triangular(&rhs).ok_or(Error::Singular)?;
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    let r21: Vec<f64> = r.iter().copied().collect();
    let diff: Vec<f64> = r21.iter().zip(y_star).map(|(r, y)| r - y).collect();
    let d1 = sys.apply(&diff);
    Ok((r21, d1))
}

/// The desired output doubles as the first reference input.
pub fn naive_initial_input(y_star: &[f64]) -> Vec<f64> {
    y_star.to_vec()
}
