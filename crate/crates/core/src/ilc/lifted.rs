use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{ensure_len, invalid};
use crate::lti::DiscreteStateSpace;
use crate::{Error, Result};

/// Lifted trial map `y = F u` over `n` samples.
///
/// Output sample `k` is taken one step after input sample `k` is applied,
/// so `F` is block lower triangular with a nonzero diagonal. Signals are
/// interleaved: entry `k * n_in + i` is channel `i` at sample `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedSystem {
    pub f: DMatrix<f64>,
    pub n: usize,
    pub dt: f64,
    pub n_in: usize,
    pub n_out: usize,
}

impl LiftedSystem {
    /// Wraps `f` after checking shape, causality and full row rank.
    pub fn new(f: DMatrix<f64>, n: usize, dt: f64, n_in: usize, n_out: usize) -> Result<Self> {
        ensure_len(n * n_out, f.nrows())?;
        ensure_len(n * n_in, f.ncols())?;
        let scale = f.amax().max(1e-300);
        for k in 0..n {
            for l in (k + 1)..n {
                for o in 0..n_out {
                    for i in 0..n_in {
                        if f[(k * n_out + o, l * n_in + i)].abs() > 1e-12 * scale {
                            return Err(invalid("f", "lifted map must be causal"));
                        }
                    }
                }
            }
        }
        let sys = Self {
            f,
            n,
            dt,
            n_in,
            n_out,
        };
        sys.check_full_row_rank()?;
        Ok(sys)
    }

    fn check_full_row_rank(&self) -> Result<()> {
        let rows = self.f.nrows();
        if self.n_in == 1 && self.n_out == 1 {
            // Lower triangular: full rank iff the diagonal is nonzero.
            let tol = 1e-13 * self.f.amax();
            let rank = (0..rows).filter(|&i| self.f[(i, i)].abs() > tol).count();
            return if rank == rows {
                Ok(())
            } else {
                Err(Error::RankDeficient { rank, rows })
            };
        }
        self.check_rank_svd()
    }

    fn check_rank_svd(&self) -> Result<()> {
        let rows = self.f.nrows();
        let svd = self.f.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-12 * smax.max(1e-300) * rows as f64)
            .count();
        if rank < rows {
            Err(Error::RankDeficient { rank, rows })
        } else {
            Ok(())
        }
    }

    pub fn rows(&self) -> usize {
        self.f.nrows()
    }

    pub fn cols(&self) -> usize {
        self.f.ncols()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        (&self.f * DVector::from_column_slice(u)).iter().copied().collect()
    }
}

/// Unrolls the time-varying system `x(k+1) = A(k) x(k) + B(k) u(k)`,
/// `y(k) = C x(k+1)` over `n` steps into a lifted map.
pub fn build_lifted(
    a_seq: &[DMatrix<f64>],
    b_seq: &[DMatrix<f64>],
    c_out: &DMatrix<f64>,
    n: usize,
    dt: f64,
) -> Result<LiftedSystem> {
    if n == 0 {
        return Err(invalid("n", "at least one sample is required"));
    }
    ensure_len(n, a_seq.len())?;
    ensure_len(n, b_seq.len())?;
    let nx = c_out.ncols();
    let n_out = c_out.nrows();
    let n_in = b_seq[0].ncols();
    for (a, b) in a_seq.iter().zip(b_seq) {
        ensure_len(nx, a.nrows())?;
        ensure_len(nx, a.ncols())?;
        ensure_len(nx, b.nrows())?;
        ensure_len(n_in, b.ncols())?;
    }
    let mut f = DMatrix::zeros(n * n_out, n * n_in);
    for l in 0..n {
        // Propagate the input direction B(l) forward: block(k, l) = C Φ B(l).
        let mut prop = b_seq[l].clone();
        for k in l..n {
            if k > l {
                prop = &a_seq[k] * &prop;
            }
            let block = c_out * &prop;
            f.view_mut((k * n_out, l * n_in), (n_out, n_in)).copy_from(&block);
        }
    }
    LiftedSystem::new(f, n, dt, n_in, n_out)
}

/// Markov parameters `C A^k B`, `k = 0..n`, of a sampled SISO system.
pub fn markov_parameters(sys: &DiscreteStateSpace, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut v = sys.b.clone();
    for _ in 0..n {
        out.push(sys.c.dot(&v));
        v = &sys.a * v;
    }
    out
}

/// Lower-triangular Toeplitz matrix with first column `col`.
pub fn toeplitz_lower(col: &[f64]) -> DMatrix<f64> {
    let n = col.len();
    DMatrix::from_fn(n, n, |k, l| if l <= k { col[k - l] } else { 0.0 })
}

/// Lifted map of a time-invariant SISO sampled system.
pub fn lifted_from_discrete(sys: &DiscreteStateSpace, n: usize) -> Result<LiftedSystem> {
    if n == 0 {
        return Err(invalid("n", "at least one sample is required"));
    }
    let f = toeplitz_lower(&markov_parameters(sys, n));
    LiftedSystem::new(f, n, sys.dt, 1, 1)
}

/// Free response `C A^(k+1) x₀`, `k = 0..n`.
pub fn free_response(sys: &DiscreteStateSpace, x0: &DVector<f64>, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut x = x0.clone();
    for _ in 0..n {
        x = &sys.a * x;
        out.push(sys.c.dot(&x));
    }
    out
}

/// Block-diagonal lifted map of independent SISO axes in interleaved
/// ordering: entry `(k n + i, l n + i) = F_i[k, l]`.
pub fn interleave_block_diagonal(axes: &[LiftedSystem]) -> Result<LiftedSystem> {
    let n_axes = axes.len();
    if n_axes == 0 {
        return Err(invalid("axes", "at least one axis is required"));
    }
    let n = axes[0].n;
    for ax in axes {
        ensure_len(n, ax.n)?;
        if ax.n_in != 1 || ax.n_out != 1 {
            return Err(invalid("axes", "expected SISO axes"));
        }
    }
    let mut f = DMatrix::zeros(n * n_axes, n * n_axes);
    for (i, ax) in axes.iter().enumerate() {
        for k in 0..n {
            for l in 0..=k {
                f[(k * n_axes + i, l * n_axes + i)] = ax.f[(k, l)];
            }
        }
    }
    LiftedSystem::new(f, n, axes[0].dt, n_axes, n_axes)
}

/// Strided view `v[k n_axes + axis]` of an interleaved lifted signal.
pub fn axis_slice(v: &[f64], n_axes: usize, axis: usize) -> Vec<f64> {
    v.iter().skip(axis).step_by(n_axes).copied().collect()
}

/// Inverse of [`axis_slice`] over all axes.
pub fn interleave(per_axis: &[Vec<f64>]) -> Vec<f64> {
    let n_axes = per_axis.len();
    let n = per_axis.first().map_or(0, Vec::len);
    let mut out = alloc::vec![0.0; n * n_axes];
    for (i, v) in per_axis.iter().enumerate() {
        for (k, x) in v.iter().enumerate() {
            out[k * n_axes + i] = *x;
        }
    }
    out
}
