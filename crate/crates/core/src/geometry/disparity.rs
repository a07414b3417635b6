//! Spherical disparity between the top and bottom camera rays.
//!
//! For a point at distance `r` from the bottom camera seen under polar angle
//! `θ_b`, with the top camera `B` meters above, the disparity is
//! `d = atan(sin θ_b / (r/B − cos θ_b))`. The inverse follows from the law of
//! sines in the camera-camera-point triangle: `r = B · sin(θ_b + d) / sin d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full-height raster size that maps 180° of disparity onto pixels.
pub const DISPARITY_REFERENCE_HEIGHT_PX: f64 = 960.0;

/// Cost-volume sizes are multiples of this many pixels.
pub const COST_VOLUME_MULTIPLE: usize = 32;

/// Valid disparity range, degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DisparityClamp {
    pub min_deg: f64,
    pub max_deg: f64,
}

impl Default for DisparityClamp {
    fn default() -> Self {
        Self {
            min_deg: 0.048,
            max_deg: 23.0,
        }
    }
}

impl DisparityClamp {
    /// Clamps into `[min_deg, max_deg]`; the flag is set when `d` moved.
    pub fn apply(&self, d: f64) -> (f64, bool) {
        let c = d.clamp(self.min_deg, self.max_deg);
        (c, c != d)
    }
}

/// A depth recovered from a disparity that may have been raised to the clamp floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampedDepth {
    pub depth: f64,
    pub clamped: bool,
}

fn check_polar(theta_b: f64) -> Result<()> {
    if theta_b > 0.0 && theta_b < 180.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "polar angle {theta_b}° must lie strictly inside (0, 180)"
        )))
    }
}

fn check_baseline(baseline: f64) -> Result<()> {
    if baseline.is_finite() && baseline > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "baseline {baseline} must be positive"
        )))
    }
}

/// Disparity in degrees for a bottom-camera depth in meters.
pub fn depth_to_disparity(depth: f64, theta_b: f64, baseline: f64) -> Result<f64> {
    if !(depth.is_finite() && depth > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "depth {depth} must be positive"
        )));
    }
    check_polar(theta_b)?;
    check_baseline(baseline)?;
    let (s, c) = theta_b.to_radians().sin_cos();
    // atan2 covers r/B - cos θ_b <= 0 (disparity at or beyond 90°)
    Ok(s.atan2(depth / baseline - c).to_degrees())
}

/// Exact inverse of [`depth_to_disparity`]. Disparity approaching zero sends
/// the depth to infinity; use [`disparity_to_depth_clamped`] to bound it.
pub fn disparity_to_depth(disparity: f64, theta_b: f64, baseline: f64) -> Result<f64> {
    if !(disparity > 0.0 && disparity < 180.0) {
        return Err(Error::InvalidParameter(format!(
            "disparity {disparity}° must lie strictly inside (0, 180)"
        )));
    }
    check_polar(theta_b)?;
    check_baseline(baseline)?;
    let d = disparity.to_radians();
    let depth = baseline * (theta_b.to_radians() + d).sin() / d.sin();
    if depth > 0.0 && depth.is_finite() {
        Ok(depth)
    } else {
        Err(Error::Degenerate(format!(
            "disparity {disparity}° at polar angle {theta_b}° implies non-positive depth"
        )))
    }
}

/// Inverts a disparity after raising it to the clamp floor when needed. The
/// upper clamp bound is not applied: large disparities invert to small,
/// perfectly finite depths.
pub fn disparity_to_depth_clamped(
    disparity: f64,
    theta_b: f64,
    baseline: f64,
    clamp: &DisparityClamp,
) -> Result<ClampedDepth> {
    if disparity.is_nan() {
        return Err(Error::InvalidParameter("disparity is NaN".into()));
    }
    let clamped = disparity < clamp.min_deg;
    let d = if clamped { clamp.min_deg } else { disparity };
    Ok(ClampedDepth {
        depth: disparity_to_depth(d, theta_b, baseline)?,
        clamped,
    })
}

pub fn disparity_deg_to_pixels(d_deg: f64) -> f64 {
    disparity_deg_to_pixels_with_height(d_deg, DISPARITY_REFERENCE_HEIGHT_PX)
}

pub fn disparity_deg_to_pixels_with_height(d_deg: f64, full_height_px: f64) -> f64 {
    full_height_px * d_deg / 180.0
}

/// Smallest multiple of [`COST_VOLUME_MULTIPLE`] strictly larger than `max_disparity_px`.
pub fn cost_volume_size(max_disparity_px: f64) -> usize {
    let m = COST_VOLUME_MULTIPLE as f64;
    ((max_disparity_px / m).floor() as usize + 1) * COST_VOLUME_MULTIPLE
}
