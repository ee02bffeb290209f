//! Numerical core of the L1-ILC workbench.
//!
//! Everything here is pure computation over `alloc` containers: rational
//! transfer-function tooling, the extended L1 adaptive output-feedback
//! controller, PD/PID baselines, simulated plants, a dual active-set QP
//! solver and the lifted-domain iterative learning controller. File formats,
//! scenario orchestration and the CLI live in the `l1ilc-harness` crate.
#![no_std]
// `!(x > 0.0)` deliberately rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the matrix notation of the algorithms.
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod error;
pub mod experiment;
pub mod ilc;
pub mod l1;
pub mod lti;
pub mod math;
pub mod plant;
pub mod qp;

pub use error::{Error, Result};
