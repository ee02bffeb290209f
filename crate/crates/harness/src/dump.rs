//! JSON dumps of QP instances for offline comparison with other solvers.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use l1ilc_core::qp::QpProblem;

use crate::error::{io_err, Result};

/// `min ½ xᵀ H x + gᵀ x` s.t. `A x <= b`, matrices stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QpDump {
    pub n: usize,
    pub m: usize,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

fn row_major(mat: &DMatrix<f64>) -> Vec<f64> {
    mat.transpose().as_slice().to_vec()
}

impl QpDump {
    pub fn from_problem(p: &QpProblem) -> Self {
        Self {
            n: p.n(),
            m: p.m(),
            h: row_major(&p.h),
            g: p.g.as_slice().to_vec(),
            a: row_major(&p.a),
            b: p.b.as_slice().to_vec(),
        }
    }

    pub fn to_problem(&self) -> Result<QpProblem> {
        Ok(QpProblem::new(
            DMatrix::from_row_slice(self.n, self.n, &self.h),
            DVector::from_column_slice(&self.g),
            DMatrix::from_row_slice(self.m, self.n, &self.a),
            DVector::from_column_slice(&self.b),
        )?)
    }
}

pub fn dump_qp(p: &QpProblem, path: &Path) -> Result<()> {
    let text = serde_json::to_string(&QpDump::from_problem(p))?;
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn load_qp(path: &Path) -> Result<QpProblem> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str::<QpDump>(&text)?.to_problem()
}
