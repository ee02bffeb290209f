use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::integrate::Rk4;
use super::rational::RationalTF;
use crate::{Error, Result};

/// Single-input single-output realization `x' = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub d: f64,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: DVector<f64>, d: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        crate::error::ensure_len(n, b.len())?;
        crate::error::ensure_len(n, c.len())?;
        Ok(Self { a, b, c, d })
    }

    /// Controllable canonical form of a proper transfer function.
    pub fn from_tf(tf: &RationalTF) -> Result<Self> {
        if !tf.is_proper() {
            return Err(Error::Degenerate("improper transfer function"));
        }
        let lead = tf.den.leading();
        let den: Vec<f64> = tf.den.coeffs().iter().map(|c| c / lead).collect();
        let n = den.len() - 1;
        let mut num = vec![0.0; n + 1];
        for (i, c) in tf.num.coeffs().iter().enumerate() {
            num[i] = c / lead;
        }
        let d = num[n];
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        if n > 0 {
            for j in 0..n {
                a[(n - 1, j)] = -den[j];
            }
        }
        let mut b = DVector::zeros(n);
        if n > 0 {
            b[n - 1] = 1.0;
        }
        let c = DVector::from_iterator(n, (0..n).map(|i| num[i] - den[i] * d));
        Ok(Self { a, b, c, d })
    }

    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// `dx = A x + B u` written into `dx` without allocating.
    #[inline]
    pub fn deriv_into(&self, x: &[f64], u: f64, dx: &mut [f64]) {
        let n = self.order();
        for i in 0..n {
            let mut acc = self.b[i] * u;
            for j in 0..n {
                acc += self.a[(i, j)] * x[j];
            }
            dx[i] = acc;
        }
    }

    #[inline]
    pub fn output(&self, x: &[f64], u: f64) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.d * u
    }

    /// Zero-order-hold equivalent `(Ad, Bd)` from the exponential of the
    /// augmented matrix `[[A, B], [0, 0]] dt`.
    pub fn discretize_zoh(&self, dt: f64) -> Result<DiscreteStateSpace> {
        if !(dt > 0.0) {
            return Err(crate::error::invalid("dt", "must be positive"));
        }
        let n = self.order();
        let mut aug = DMatrix::zeros(n + 1, n + 1);
        aug.view_mut((0, 0), (n, n)).copy_from(&(&self.a * dt));
        for i in 0..n {
            aug[(i, n)] = self.b[i] * dt;
        }
        let e = crate::math::expm(&aug);
        Ok(DiscreteStateSpace {
            a: e.view((0, 0), (n, n)).into_owned(),
            b: DVector::from_iterator(n, (0..n).map(|i| e[(i, n)])),
            c: self.c.clone(),
            d: self.d,
            dt,
        })
    }
}

/// Exactly sampled counterpart of a [`StateSpace`] under a held input.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteStateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub d: f64,
    pub dt: f64,
}

impl DiscreteStateSpace {
    /// Returns `(x(k+1), y(k+1))` for an input held over the step; the output
    /// feedthrough uses the same held value.
    pub fn step(&self, x: &DVector<f64>, u: f64) -> (DVector<f64>, f64) {
        let xn = &self.a * x + &self.b * u;
        let y = self.c.dot(&xn) + self.d * u;
        (xn, y)
    }
}

/// One RK4 step of `ss` under a held input; returns the new state and the
/// output evaluated at the end of the step.
pub fn simulate_tf_step(ss: &StateSpace, x: &[f64], u: f64, dt: f64) -> (Vec<f64>, f64) {
    let mut xn = x.to_vec();
    let mut rk = Rk4::new(ss.order());
    rk.step(|_, x, dx| ss.deriv_into(x, u, dx), 0.0, &mut xn, dt);
    let y = ss.output(&xn, u);
    (xn, y)
}

/// Reusable simulator for a single realization; avoids per-step allocation.
#[derive(Debug, Clone)]
pub struct TfSimulator {
    pub ss: StateSpace,
    pub x: Vec<f64>,
    rk: Rk4,
}

impl TfSimulator {
    pub fn new(ss: StateSpace) -> Self {
        let n = ss.order();
        Self {
            ss,
            x: vec![0.0; n],
            rk: Rk4::new(n),
        }
    }

    pub fn from_tf(tf: &RationalTF) -> Result<Self> {
        Ok(Self::new(StateSpace::from_tf(tf)?))
    }

    pub fn reset(&mut self) {
        self.x.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn step(&mut self, u: f64, dt: f64) -> f64 {
        let ss = &self.ss;
        self.rk
            .step(|_, x, dx| ss.deriv_into(x, u, dx), 0.0, &mut self.x, dt);
        self.ss.output(&self.x, u)
    }

    pub fn output(&self, u: f64) -> f64 {
        self.ss.output(&self.x, u)
    }
}
