//! Lifted-domain iterative learning control.

pub mod constraints;
pub mod init;
pub mod kalman;
pub mod lifted;
pub mod metrics;
pub mod nominal;
pub mod update;

pub use constraints::{backward_difference, second_difference_matrix, Constraints};
pub use init::{model_fingerprint, naive_initial_input, reference_model_input, ReferenceModel};
pub use kalman::{kalman_update, IlcWeights, LearningState};
pub use lifted::{build_lifted, LiftedSystem};
pub use metrics::tracking_error;
pub use nominal::BaselineLaw;
pub use update::{ilc_update, IlcUpdater};
