use crate::error::{Error, Result};

/// Linear-interpolated quantile (order statistics at `(n − 1)·q`).
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientData("quantile of an empty set".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::InvalidParameter(format!(
            "quantile {q} outside [0, 1]"
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

/// Uncertainty threshold keeping a fraction `rip` of one cloud's queries:
/// values `≤` the threshold survive. `rip = 0` keeps nothing.
pub fn uncertainty_threshold_for_rip(sigma_sq: &[f64], rip: f64) -> Result<f64> {
    if sigma_sq.is_empty() {
        return Err(Error::InsufficientData(
            "no uncertainty values to threshold".into(),
        ));
    }
    if rip == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    quantile(sigma_sq, rip)
}

/// Sequence-level threshold: the mean of per-cloud thresholds. A cloud
/// whose threshold keeps nothing pins the average to "keep nothing".
pub fn average_threshold(per_cloud: &[f64]) -> Option<f64> {
    if per_cloud.is_empty() {
        return None;
    }
    Some(per_cloud.iter().sum::<f64>() / per_cloud.len() as f64)
}
