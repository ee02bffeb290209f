//! Transfer-function arithmetic, stability tests, simulation and norms.

pub mod integrate;
pub mod norm;
pub mod polynomial;
pub mod rational;
pub mod routh;
pub mod state_space;

pub use integrate::Rk4;
pub use norm::{check_l1_condition, impulse_l1_norm, ConditionReport};
pub use polynomial::{Polynomial, C64};
pub use rational::{compose_f, compose_g, compose_h, tf_add, tf_div, tf_mul, tf_sub, RationalTF};
pub use routh::{routh_hurwitz_stable, slowest_decay_rate, RouthTable};
pub use state_space::{simulate_tf_step, DiscreteStateSpace, StateSpace, TfSimulator};
