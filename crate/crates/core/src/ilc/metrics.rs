use alloc::vec::Vec;

use crate::error::{ensure_len, invalid};
use crate::math;
use crate::Result;

/// Mean over samples of the Euclidean distance between `r2` and `y2`,
/// both given per axis.
pub fn tracking_error(r2: &[Vec<f64>], y2: &[Vec<f64>]) -> Result<f64> {
    ensure_len(r2.len(), y2.len())?;
    let n = r2.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(invalid("r2", "empty trajectory"));
    }
    for (a, b) in r2.iter().zip(y2) {
        ensure_len(n, a.len())?;
        ensure_len(n, b.len())?;
    }
    let total: f64 = (0..n)
        .map(|k| {
            let sq: f64 = r2.iter().zip(y2).map(|(a, b)| (a[k] - b[k]) * (a[k] - b[k])).sum();
            math::sqrt(sq)
        })
        .sum();
    Ok(total / n as f64)
}

/// [`tracking_error`] for interleaved lifted signals with `n_axes` channels.
pub fn tracking_error_interleaved(r2: &[f64], y2: &[f64], n_axes: usize) -> Result<f64> {
    ensure_len(r2.len(), y2.len())?;
    if n_axes == 0 || !r2.len().is_multiple_of(n_axes) {
        return Err(invalid("n_axes", "length must be a multiple of the axis count"));
    }
    let split = |v: &[f64]| -> Vec<Vec<f64>> {
        (0..n_axes).map(|i| super::lifted::axis_slice(v, n_axes, i)).collect()
    };
    tracking_error(&split(r2), &split(y2))
}
