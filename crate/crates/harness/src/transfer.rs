//! Learning-state files exchanged between scenarios.

use std::path::Path;

use serde::{Deserialize, Serialize};

use l1ilc_core::ilc::LearningState;

use crate::error::{io_err, HarnessError, Result};

/// Where an exported state was learned and how well it performed there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DonorInfo {
    pub scenario: String,
    pub framework: String,
    /// Mean error of the donor's last three iterations.
    pub converged_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferFile {
    pub state: LearningState,
    #[serde(default)]
    pub donor: Option<DonorInfo>,
}

/// Writes `state` tagged with the fingerprint of the model it was learned
/// against.
pub fn export_learning(state: &LearningState, fingerprint: &str, donor: Option<DonorInfo>, path: &Path) -> Result<()> {
    let mut state = state.clone();
    state.model_id = fingerprint.to_string();
    let file = TransferFile { state, donor };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let text = serde_json::to_string_pretty(&file)?;
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_transfer_file(path: &Path) -> Result<TransferFile> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    Ok(serde_json::from_str(&text)?)
}

/// Reads a state and checks that it was learned against `expected`; a
/// mismatch is an error unless `allow_mismatch` is set.
pub fn import_learning(path: &Path, expected: &str, allow_mismatch: bool) -> Result<LearningState> {
    let file = read_transfer_file(path)?;
    check_fingerprint(&file.state, expected, allow_mismatch)?;
    Ok(file.state)
}

pub fn check_fingerprint(state: &LearningState, expected: &str, allow_mismatch: bool) -> Result<()> {
    if state.model_id == expected {
        return Ok(());
    }
    if allow_mismatch {
        log::warn!("importing a state learned on `{}` into `{expected}`", state.model_id);
        return Ok(());
    }
    Err(HarnessError::FingerprintMismatch {
        expected: expected.to_string(),
        found: state.model_id.clone(),
    })
}
