use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_len, invalid};
use crate::Result;

/// `(N-2) × N` second-difference operator: row `k` is `[1, -2, 1] / dt²`
/// at columns `k..k+2`.
pub fn second_difference_matrix(n: usize, dt: f64) -> Result<DMatrix<f64>> {
    if n < 3 {
        return Err(invalid("n", "second difference needs at least three samples"));
    }
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let w = 1.0 / (dt * dt);
    let mut d = DMatrix::zeros(n - 2, n);
    for k in 0..n - 2 {
        d[(k, k)] = w;
        d[(k, k + 1)] = -2.0 * w;
        d[(k, k + 2)] = w;
    }
    Ok(d)
}

/// `N × N` causal first-derivative operator `(r[k] - r[k-1]) / dt`, with
/// `r[-1] = r[0]`.
pub fn backward_difference_matrix(n: usize, dt: f64) -> Result<DMatrix<f64>> {
    if n == 0 {
        return Err(invalid("n", "at least one sample is required"));
    }
    if !(dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let mut d = DMatrix::zeros(n, n);
    for k in 1..n {
        d[(k, k)] = 1.0 / dt;
        d[(k, k - 1)] = -1.0 / dt;
    }
    Ok(d)
}

/// Applies [`backward_difference_matrix`] without forming it.
pub fn backward_difference(r: &[f64], dt: f64) -> Vec<f64> {
    (0..r.len())
        .map(|k| if k == 0 { 0.0 } else { (r[k] - r[k - 1]) / dt })
        .collect()
}

/// Acceleration bounds on the total reference `lo <= D r <= hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraints {
    pub ddr_low: f64,
    pub ddr_hi: f64,
    pub d: DMatrix<f64>,
}

impl Constraints {
    pub fn new(n: usize, dt: f64, ddr_low: f64, ddr_hi: f64) -> Result<Self> {
        if !(ddr_low < ddr_hi) {
            return Err(invalid("ddr_low", "lower bound must be below the upper bound"));
        }
        Ok(Self {
            ddr_low,
            ddr_hi,
            d: second_difference_matrix(n, dt)?,
        })
    }

    /// Stacked rows `[D; -D] r̄ <= [hi - D r_nom; D r_nom - lo]` for the
    /// deviation `r̄` around `nominal`.
    pub fn inequality_rows(&self, nominal: &[f64]) -> Result<(DMatrix<f64>, DVector<f64>)> {
        ensure_len(self.d.ncols(), nominal.len())?;
        let m = self.d.nrows();
        let n = self.d.ncols();
        let dn = &self.d * DVector::from_column_slice(nominal);
        let mut a = DMatrix::zeros(2 * m, n);
        a.view_mut((0, 0), (m, n)).copy_from(&self.d);
        a.view_mut((m, 0), (m, n)).copy_from(&(-&self.d));
        let mut b = DVector::zeros(2 * m);
        for k in 0..m {
            b[k] = self.ddr_hi - dn[k];
            b[m + k] = dn[k] - self.ddr_low;
        }
        Ok((a, b))
    }

    /// Largest bound violation of the total reference `r`.
    pub fn violation(&self, r: &[f64]) -> f64 {
        let dr = &self.d * DVector::from_column_slice(r);
        dr.iter()
            .map(|&v| (v - self.ddr_hi).max(self.ddr_low - v).max(0.0))
            .fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, r: &[f64], tol: f64) -> bool {
        self.violation(r) <= tol
    }
}
