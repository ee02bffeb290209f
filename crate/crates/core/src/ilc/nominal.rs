//! Lifted nominal models used by the learning update.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::constraints::backward_difference_matrix;
use super::init::ReferenceModel;
use super::lifted::{toeplitz_lower, LiftedSystem};
use crate::lti::{RationalTF, StateSpace};
use crate::Result;

/// Linear law of a baseline position loop:
/// `u = kd (ṙ - y₁) + kp (r - y₂) + ki ∫(r - y₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineLaw {
    pub kd: f64,
    pub kp: f64,
    pub ki: f64,
}

impl BaselineLaw {
    pub fn pd(cfg: &crate::baselines::PdConfig) -> Self {
        Self {
            kd: cfg.kd(),
            kp: cfg.kp(),
            ki: 0.0,
        }
    }

    pub fn pid(cfg: &crate::baselines::PidConfig) -> Self {
        Self {
            kd: cfg.alpha,
            kp: cfg.beta,
            ki: cfg.gamma,
        }
    }
}

/// `(Ad, Bd)` of `x' = A x + B u` under a held multi-channel input.
pub fn zoh_multi(a: &DMatrix<f64>, b: &DMatrix<f64>, dt: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let m = b.ncols();
    let mut aug = DMatrix::zeros(n + m, n + m);
    aug.view_mut((0, 0), (n, n)).copy_from(&(a * dt));
    aug.view_mut((0, n), (n, m)).copy_from(&(b * dt));
    let e = crate::math::expm(&aug);
    (
        e.view((0, 0), (n, n)).into_owned(),
        e.view((0, n), (n, m)).into_owned(),
    )
}

/// Closed loop of `law` around the nominal plant `a` (velocity dynamics
/// followed by an integrator). The reference derivative is the backward
/// difference of the held reference samples, so `F = F_r + F_ṙ D_b` stays
/// lower triangular.
pub fn baseline_lifted(a: &RationalTF, law: &BaselineLaw, dt: f64, n: usize) -> Result<LiftedSystem> {
    let p = StateSpace::from_tf(a)?;
    let np = p.order();
    let with_int = law.ki != 0.0;
    let nx = np + 1 + usize::from(with_int);
    let iy = np;
    let mut acl = DMatrix::zeros(nx, nx);
    let mut b = DMatrix::zeros(nx, 2);
    for i in 0..np {
        for j in 0..np {
            acl[(i, j)] = p.a[(i, j)] - p.b[i] * law.kd * p.c[j];
        }
        acl[(i, iy)] = -p.b[i] * law.kp;
        if with_int {
            acl[(i, iy + 1)] = p.b[i] * law.ki;
        }
        b[(i, 0)] = p.b[i] * law.kp;
        b[(i, 1)] = p.b[i] * law.kd;
    }
    for j in 0..np {
        acl[(iy, j)] = p.c[j];
    }
    if with_int {
        acl[(iy + 1, iy)] = -1.0;
        b[(iy + 1, 0)] = 1.0;
    }
    let (ad, bd) = zoh_multi(&acl, &b, dt);
    let mut c = DVector::zeros(nx);
    c[iy] = 1.0;
    let mut markov_r = Vec::with_capacity(n);
    let mut markov_rd = Vec::with_capacity(n);
    let mut v = bd.clone();
    for _ in 0..n {
        let row = c.transpose() * &v;
        markov_r.push(row[(0, 0)]);
        markov_rd.push(row[(0, 1)]);
        v = &ad * v;
    }
    let f = toeplitz_lower(&markov_r) + toeplitz_lower(&markov_rd) * backward_difference_matrix(n, dt)?;
    LiftedSystem::new(f, n, dt, 1, 1)
}

/// Lifted map of the L1 reference model.
pub fn l1_lifted(m: f64, k: f64, dt: f64, n: usize) -> Result<LiftedSystem> {
    Ok(ReferenceModel::new(m, k, dt, n)?.lifted)
}
