//! Strictly convex QP `min ½ xᵀHx + gᵀx  s.t.  A x <= b`.
//!
//! Solved with the Goldfarb–Idnani dual active-set method: start from the
//! unconstrained minimizer and repeatedly add the most violated constraint,
//! dropping active ones whose multiplier would turn negative. The Cholesky
//! factor of `H` is computed once; the active-set factorization is updated
//! with Givens rotations. Multipliers satisfy `H x + g + Aᵀ λ = 0`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::ensure_len;
use crate::math;
use crate::{Error, Result};

/// Ridge added to `H` when its Cholesky factorization fails.
pub const FALLBACK_RIDGE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub h: DMatrix<f64>,
    pub g: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl QpProblem {
    pub fn new(h: DMatrix<f64>, g: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = h.nrows();
        ensure_len(n, h.ncols())?;
        ensure_len(n, g.len())?;
        ensure_len(a.nrows(), b.len())?;
        if a.nrows() > 0 {
            ensure_len(n, a.ncols())?;
        }
        let scale = h.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (h[(i, j)] - h[(j, i)]).abs() > 1e-10 * scale {
                    return Err(crate::error::invalid("h", "must be symmetric"));
                }
            }
        }
        Ok(Self { h, g, a, b })
    }

    pub fn unconstrained(h: DMatrix<f64>, g: DVector<f64>) -> Result<Self> {
        let n = h.nrows();
        Self::new(h, g, DMatrix::zeros(0, n), DVector::zeros(0))
    }

    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    pub fn m(&self) -> usize {
        self.a.nrows()
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.h * x)) + self.g.dot(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpSolution {
    pub x: Vec<f64>,
    /// One multiplier per constraint row; zero for inactive rows.
    pub lambdas: Vec<f64>,
    pub active_set: Vec<usize>,
    pub kkt_residual: f64,
    pub iterations: usize,
}

/// `max(‖Hx + g + Aᵀλ‖∞, max(Ax - b)₊, max(-λ)₊, max |λᵢ (bᵢ - aᵢx)|)`.
pub fn kkt_residual(p: &QpProblem, x: &[f64], lambdas: &[f64]) -> f64 {
    let x = DVector::from_column_slice(x);
    let lam = DVector::from_column_slice(lambdas);
    let mut stat = &p.h * &x + &p.g;
    if p.m() > 0 {
        stat += p.a.transpose() * &lam;
    }
    let mut res = stat.amax();
    if p.m() > 0 {
        let slack = &p.b - &p.a * &x;
        for i in 0..p.m() {
            res = res
                .max(-slack[i])
                .max(-lam[i])
                .max((lam[i] * slack[i]).abs());
        }
    }
    res
}

/// Cached factorization of `H`: `J₀ = L⁻ᵀ` with `H = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct QpSolver {
    h: DMatrix<f64>,
    j0: DMatrix<f64>,
    pub max_iter: usize,
    pub feas_tol: f64,
}

impl QpSolver {
    pub fn new(h: &DMatrix<f64>) -> Result<Self> {
        let n = h.nrows();
        ensure_len(n, h.ncols())?;
        let chol = match h.clone().cholesky() {
            Some(c) => c,
            None => {
                let ridge = FALLBACK_RIDGE * h.diagonal().amax().max(1.0);
                log::warn!("cost matrix not positive definite; retrying with ridge {ridge:e}");
                let mut hr = h.clone();
                for i in 0..n {
                    hr[(i, i)] += ridge;
                }
                hr.cholesky().ok_or(Error::NotPositiveDefinite)?
            }
        };
        let l = chol.l();
        let linv = l
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .ok_or(Error::NotPositiveDefinite)?;
        Ok(Self {
            h: h.clone(),
            j0: linv.transpose(),
            max_iter: 10 * (n + 10),
            feas_tol: 1e-11,
        })
    }

    pub fn n(&self) -> usize {
        self.h.nrows()
    }

    /// `x = -H⁻¹ g`.
    pub fn solve_unconstrained(&self, g: &DVector<f64>) -> DVector<f64> {
        -(&self.j0 * (self.j0.transpose() * g))
    }

    /// Solves `min ½xᵀHx + gᵀx s.t. A x <= b`. Rows listed in `hint` are
    /// tried first when violated; the optimum does not depend on the hint.
    pub fn solve(
        &self,
        g: &DVector<f64>,
        a: &DMatrix<f64>,
        b: &DVector<f64>,
        hint: &[usize],
    ) -> Result<QpSolution> {
        let n = self.n();
        let m = a.nrows();
        ensure_len(n, g.len())?;
        ensure_len(m, b.len())?;
        if m > 0 {
            ensure_len(n, a.ncols())?;
        }
        let mut x = self.solve_unconstrained(g);
        let mut j = self.j0.clone();
        // R is stored column-wise: r_cols[c] holds entries 0..=c.
        let mut r_cols: Vec<Vec<f64>> = Vec::new();
        let mut active: Vec<usize> = Vec::new();
        let mut u: Vec<f64> = Vec::new();
        let mut in_active = vec![false; m];
        let row_norm: Vec<f64> = (0..m).map(|i| a.row(i).norm().max(1e-300)).collect();
        let mut iterations = 0;

        loop {
            // Step 1: most violated constraint, ties to the lowest index.
            let slack = |x: &DVector<f64>, i: usize| b[i] - a.row(i).transpose().dot(x);
            let tol = |i: usize, x: &DVector<f64>| {
                self.feas_tol * (1.0 + b[i].abs() + row_norm[i] * x.amax())
            };
            let mut pick: Option<(usize, f64)> = None;
            for &i in hint {
                if i < m && !in_active[i] {
                    let s = slack(&x, i);
                    if s < -tol(i, &x) {
                        pick = Some((i, s));
                        break;
                    }
                }
            }
            if pick.is_none() {
                for i in 0..m {
                    if in_active[i] {
                        continue;
                    }
                    let s = slack(&x, i) / row_norm[i];
                    if s < -tol(i, &x) / row_norm[i] && pick.is_none_or(|(_, best)| s < best) {
                        pick = Some((i, s));
                    }
                }
                if let Some((i, _)) = pick {
                    pick = Some((i, slack(&x, i)));
                }
            }
            let Some((p, _)) = pick else { break };

            // In >= form the constraint normal is -a_p.
            let np: DVector<f64> = -a.row(p).transpose();
            let mut u_p = 0.0;
            loop {
                iterations += 1;
                if iterations > self.max_iter {
                    return Err(Error::IterationLimit(self.max_iter));
                }
                let q = active.len();
                let d = j.transpose() * &np;
                // z = J₂ d₂ (primal direction), rdir = R⁻¹ d₁ (dual direction).
                let mut z = DVector::zeros(n);
                for c in q..n {
                    z.axpy(d[c], &j.column(c), 1.0);
                }
                let rdir = back_substitute(&r_cols, &d.as_slice()[..q]);
                let d2_norm = d.as_slice()[q..].iter().map(|v| v * v).sum::<f64>();
                let z_zero = d2_norm <= 1e-24 * np.norm_squared().max(1e-300);

                let mut t1 = f64::INFINITY;
                let mut k_drop = None;
                for (idx, &rv) in rdir.iter().enumerate() {
                    if rv > 0.0 {
                        let ratio = u[idx] / rv;
                        if ratio < t1 {
                            t1 = ratio;
                            k_drop = Some(idx);
                        }
                    }
                }
                // Violation of row p in >= form is its (negative) slack.
                let t2 = if z_zero {
                    f64::INFINITY
                } else {
                    (-slack(&x, p) / z.dot(&np)).max(0.0)
                };
                let t = t1.min(t2);
                if !t.is_finite() {
                    return Err(Error::Infeasible { constraint: p });
                }
                if z_zero {
                    // Dual step only: shift multipliers and drop a constraint.
                    for (ui, rv) in u.iter_mut().zip(&rdir) {
                        *ui -= t * rv;
                    }
                    u_p += t;
                    let k = k_drop.expect("finite t1 implies a blocking constraint");
                    drop_constraint(&mut j, &mut r_cols, &mut active, &mut u, &mut in_active, k);
                    continue;
                }
                x.axpy(t, &z, 1.0);
                for (ui, rv) in u.iter_mut().zip(&rdir) {
                    *ui -= t * rv;
                }
                u_p += t;
                if t2 <= t1 {
                    add_constraint(&mut j, &mut r_cols, &d, q)?;
                    active.push(p);
                    u.push(u_p);
                    in_active[p] = true;
                    break;
                }
                let k = k_drop.expect("t1 < t2 implies a blocking constraint");
                drop_constraint(&mut j, &mut r_cols, &mut active, &mut u, &mut in_active, k);
            }
        }

        for (c, col) in r_cols.iter().enumerate() {
            if col[c].abs() <= 1e-14 * (1.0 + col.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))) {
                return Err(Error::RankDeficient {
                    rank: c,
                    rows: active.len(),
                });
            }
        }
        let mut lambdas = vec![0.0; m];
        for (&i, &ui) in active.iter().zip(&u) {
            lambdas[i] = ui.max(0.0);
        }
        let x: Vec<f64> = x.iter().copied().collect();
        let p = QpProblem {
            h: self.h.clone(),
            g: g.clone(),
            a: a.clone(),
            b: b.clone(),
        };
        let kkt = kkt_residual(&p, &x, &lambdas);
        let mut active_sorted = active.clone();
        active_sorted.sort_unstable();
        Ok(QpSolution {
            x,
            lambdas,
            active_set: active_sorted,
            kkt_residual: kkt,
            iterations,
        })
    }
}

/// Solves `R y = rhs` for the column-stored upper-triangular `R`.
fn back_substitute(r_cols: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let q = rhs.len();
    let mut y = rhs.to_vec();
    for c in (0..q).rev() {
        y[c] /= r_cols[c][c];
        let yc = y[c];
        for (row, yr) in y.iter_mut().enumerate().take(c) {
            *yr -= r_cols[c][row] * yc;
        }
    }
    y
}

/// Givens rotation `(c, s)` with `[c s; -s c] [a; b] = [h; 0]`.
fn givens(a: f64, b: f64) -> (f64, f64, f64) {
    if b == 0.0 {
        return (1.0, 0.0, a);
    }
    let h = math::hypot(a, b);
    (a / h, b / h, h)
}

fn rotate_columns(j: &mut DMatrix<f64>, c1: usize, c2: usize, c: f64, s: f64) {
    let n = j.nrows();
    for row in 0..n {
        let (x1, x2) = (j[(row, c1)], j[(row, c2)]);
        j[(row, c1)] = c * x1 + s * x2;
        j[(row, c2)] = -s * x1 + c * x2;
    }
}

/// Appends the column `d₁` to `R` after rotating `d₂` onto its first entry.
fn add_constraint(j: &mut DMatrix<f64>, r_cols: &mut Vec<Vec<f64>>, d: &DVector<f64>, q: usize) -> Result<()> {
    let n = j.nrows();
    let mut d = d.clone();
    for i in (q + 1..n).rev() {
        let (c, s, h) = givens(d[i - 1], d[i]);
        if d[i] != 0.0 {
            d[i - 1] = h;
            d[i] = 0.0;
            rotate_columns(j, i - 1, i, c, s);
        }
    }
    if d[q].abs() <= 1e-14 {
        return Err(Error::RankDeficient { rank: q, rows: q + 1 });
    }
    r_cols.push(d.as_slice()[..=q].to_vec());
    Ok(())
}

/// Removes active constraint `k` and restores the triangular structure.
fn drop_constraint(
    j: &mut DMatrix<f64>,
    r_cols: &mut Vec<Vec<f64>>,
    active: &mut Vec<usize>,
    u: &mut Vec<f64>,
    in_active: &mut [bool],
    k: usize,
) {
    in_active[active[k]] = false;
    active.remove(k);
    u.remove(k);
    r_cols.remove(k);
    // Columns k.. now have one subdiagonal entry at row c + 1.
    for c in k..r_cols.len() {
        let (a0, b0) = (r_cols[c][c], r_cols[c][c + 1]);
        let (cs, sn, h) = givens(a0, b0);
        r_cols[c][c] = h;
        r_cols[c].truncate(c + 1);
        for later in r_cols.iter_mut().skip(c + 1) {
            let (x1, x2) = (later[c], later[c + 1]);
            later[c] = cs * x1 + sn * x2;
            later[c + 1] = -sn * x1 + cs * x2;
        }
        rotate_columns(j, c, c + 1, cs, sn);
    }
}

/// `x = -H⁻¹ g` through a fresh factorization.
pub fn solve_unconstrained(p: &QpProblem) -> Result<Vec<f64>> {
    let solver = QpSolver::new(&p.h)?;
    Ok(solver.solve_unconstrained(&p.g).iter().copied().collect())
}

pub fn solve_qp(p: &QpProblem) -> Result<QpSolution> {
    QpSolver::new(&p.h)?.solve(&p.g, &p.a, &p.b, &[])
}

pub fn solve_qp_with_hint(p: &QpProblem, hint: &[usize]) -> Result<QpSolution> {
    QpSolver::new(&p.h)?.solve(&p.g, &p.a, &p.b, hint)
}
