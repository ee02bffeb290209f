use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::constraints::Constraints;
use super::kalman::{IlcWeights, LearningState};
use super::lifted::LiftedSystem;
use crate::error::ensure_len;
use crate::qp::{QpSolution, QpSolver};
use crate::{Error, Result};

/// `W = r_w I + s_w Dᵀ D`.
pub fn input_weight(n: usize, w: &IlcWeights, d: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let mut wm = DMatrix::identity(n, n) * w.r_w;
    if let Some(d) = d {
        if w.s_w > 0.0 {
            wm += d.transpose() * d * w.s_w;
        }
    }
    wm
}

/// Input update `r̄ = argmin ½[(F r̄ + d̂)ᵀ Q (F r̄ + d̂) + r̄ᵀ W r̄]` subject to
/// acceleration bounds on the total reference, with the cost Hessian
/// `F ᵀ Q F + W` factorized once.
#[derive(Debug, Clone)]
pub struct IlcUpdater {
    f: DMatrix<f64>,
    q: f64,
    solver: QpSolver,
    a_ineq: DMatrix<f64>,
    b_ineq: DVector<f64>,
    hint: Vec<usize>,
}

impl IlcUpdater {
    /// `constraints` bound `D (nominal + r̄)`; `None` leaves the update
    /// unconstrained. The smoothness term of `W` uses the constraint
    /// operator when present, otherwise a fresh second difference.
    pub fn new(
        sys: &LiftedSystem,
        w: &IlcWeights,
        constraints: Option<&Constraints>,
        nominal: &[f64],
    ) -> Result<Self> {
        w.validate()?;
        let n_u = sys.cols();
        let d_owned;
        let d = match constraints {
            Some(c) => Some(&c.d),
            None if w.s_w > 0.0 && n_u >= 3 => {
                d_owned = super::constraints::second_difference_matrix(n_u, sys.dt)?;
                Some(&d_owned)
            }
            None => None,
        };
        if let Some(d) = d {
            ensure_len(n_u, d.ncols())?;
        }
        let h = sys.f.transpose() * &sys.f * w.q + input_weight(n_u, w, d);
        let h = (&h + h.transpose()) * 0.5;
        let solver = QpSolver::new(&h)?;
        let (a_ineq, b_ineq) = match constraints {
            Some(c) => {
                ensure_len(n_u, nominal.len())?;
                c.inequality_rows(nominal)?
            }
            None => (DMatrix::zeros(0, n_u), DVector::zeros(0)),
        };
        // Assumption of the update: the nominal reference is feasible.
        if a_ineq.nrows() > 0 && b_ineq.iter().any(|&v| v < -1e-9) {
            let k = b_ineq.iter().position(|&v| v < -1e-9).unwrap_or(0);
            return Err(Error::Infeasible { constraint: k });
        }
        Ok(Self {
            f: sys.f.clone(),
            q: w.q,
            solver,
            a_ineq,
            b_ineq,
            hint: Vec::new(),
        })
    }

    /// Returns the QP solution; `solution.x` is the next `r̄`.
    pub fn solve(&mut self, d_hat: &[f64]) -> Result<QpSolution> {
        ensure_len(self.f.nrows(), d_hat.len())?;
        let g = self.f.transpose() * DVector::from_column_slice(d_hat) * self.q;
        let sol = self.solver.solve(&g, &self.a_ineq, &self.b_ineq, &self.hint)?;
        self.hint = sol.active_set.clone();
        Ok(sol)
    }

    /// Replaces `state.r_bar` with the optimal next input.
    pub fn update(&mut self, state: &mut LearningState) -> Result<QpSolution> {
        let sol = self.solve(&state.d_hat)?;
        state.r_bar.clone_from(&sol.x);
        Ok(sol)
    }

    pub fn a_ineq(&self) -> &DMatrix<f64> {
        &self.a_ineq
    }

    pub fn b_ineq(&self) -> &DVector<f64> {
        &self.b_ineq
    }
}

/// One-shot form of [`IlcUpdater::update`] returning the next `r̄`.
pub fn ilc_update(
    state: &LearningState,
    sys: &LiftedSystem,
    w: &IlcWeights,
    constraints: Option<&Constraints>,
    nominal: &[f64],
) -> Result<Vec<f64>> {
    state.check(sys)?;
    let mut up = IlcUpdater::new(sys, w, constraints, nominal)?;
    Ok(up.solve(&state.d_hat)?.x)
}

/// Cost `½[(F r̄ + d̂)ᵀ Q (F r̄ + d̂) + r̄ᵀ W r̄]`.
pub fn ilc_cost(sys: &LiftedSystem, w: &IlcWeights, d: Option<&DMatrix<f64>>, r_bar: &[f64], d_hat: &[f64]) -> f64 {
    let r = DVector::from_column_slice(r_bar);
    let e = &sys.f * &r + DVector::from_column_slice(d_hat);
    let wm = input_weight(r_bar.len(), w, d);
    0.5 * (w.q * e.norm_squared() + r.dot(&(wm * &r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(n: usize) -> LiftedSystem {
        // Sampled first-order lag: well-conditioned lower-triangular Toeplitz.
        let col: Vec<f64> = (0..n).map(|k| 0.5 * libm::pow(0.6, k as f64)).collect();
        LiftedSystem::new(super::super::lifted::toeplitz_lower(&col), n, 0.1, 1, 1).unwrap()
    }

    fn exact_weights() -> IlcWeights {
        IlcWeights {
            q: 1.0,
            r_w: 0.0,
            s_w: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn zeroing_of_the_error() {
        let s = sys(20);
        let mut st = LearningState::for_system(&s, 1.0);
        st.d_hat = (0..20).map(|k| libm::sin(k as f64 * 0.3)).collect();
        let r = ilc_update(&st, &s, &exact_weights(), None, &[]).unwrap();
        let pred = s.apply(&r);
        for (p, d) in pred.iter().zip(&st.d_hat) {
            assert!((p + d).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_estimate_gives_zero_input() {
        let s = sys(10);
        let st = LearningState::for_system(&s, 1.0);
        let r = ilc_update(&st, &s, &IlcWeights::default(), None, &[]).unwrap();
        assert!(r.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn one_active_bound_matches_kkt() {
        // Scalar: min ½ (f r + d)^2 + ½ w r^2 s.t. r <= u.
        // Unconstrained r* = -f d / (f^2 + w); with r* > u, r = u and
        // λ = -(f (f u + d) + w u).
        let f = 2.0;
        let w = 0.5;
        let d = -3.0;
        let u = 0.5;
        let h = DMatrix::from_element(1, 1, f * f + w);
        let mut solver = IlcUpdater {
            f: DMatrix::from_element(1, 1, f),
            q: 1.0,
            solver: QpSolver::new(&h).unwrap(),
            a_ineq: DMatrix::from_element(1, 1, 1.0),
            b_ineq: DVector::from_element(1, u),
            hint: Vec::new(),
        };
        let sol = solver.solve(&[d]).unwrap();
        assert!((sol.x[0] - u).abs() < 1e-14);
        assert!((sol.lambdas[0] + (f * (f * u + d) + w * u)).abs() < 1e-14);
    }
}
