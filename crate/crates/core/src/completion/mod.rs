//! Sparse-to-dense depth completion on the LiDAR sphere.
//!
//! Temporally aggregated LiDAR points are indexed by direction. Depth is
//! interpolated on a near-uniform spherical query grid by inverse-distance
//! weighting of the k nearest points; queries with a high relative weighted
//! variance or with neighbors too far away are dropped, and the survivors are
//! projected into the bottom-camera raster.

mod aggregate;
pub mod grid;
mod interpolate;
pub mod knn;
mod pipeline;
mod threshold;

pub use aggregate::*;
pub use grid::{band_fraction, generate_query_grid};
pub use interpolate::*;
pub use knn::{angular_distance, Neighbor, SphereIndex};
pub use pipeline::*;
pub use threshold::*;

use serde::{Deserialize, Serialize};

use crate::calibration::Extrinsics;
use crate::error::{Error, Result};
use crate::geometry::{cart_to_spherical, spherical_to_cart, SphericalPoint, Vec3};

/// LiDAR scan pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigConfig {
    /// Vertical field of view, degrees, centered on the horizon.
    pub fov_v: f64,
    pub n_beams: usize,
    /// Horizontal field of view, degrees.
    pub fov_h: f64,
    pub n_channels_h: usize,
    pub frame_rate_hz: f64,
}

impl Default for RigConfig {
    fn default() -> Self {
        Self {
            fov_v: 42.4,
            n_beams: 64,
            fov_h: 360.0,
            n_channels_h: 1024,
            frame_rate_hz: 10.0,
        }
    }
}

impl RigConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.fov_v > 0.0
            && self.fov_v <= 180.0
            && self.fov_h > 0.0
            && self.fov_h <= 360.0
            && self.n_beams > 0
            && self.n_channels_h > 0
            && self.frame_rate_hz > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid LiDAR config {self:?}"
            )))
        }
    }
}

/// How the inlier threshold is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InlierMode {
    /// `|r_est − r_true| / r_true < t_inlier`
    #[default]
    Relative,
    /// `|r_est − r_true| < t_inlier` meters
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompletionParams {
    /// Clouds fused on each side of the current frame.
    pub m: usize,
    /// Neighbors per interpolated query.
    pub k: usize,
    /// Target fraction of candidate queries kept by the uncertainty filter.
    pub rip: f64,
    /// Mean-neighbor-distance limit, degrees. Derived from the LiDAR scan
    /// pattern, `m` and `k` when absent.
    pub t_ood: Option<f64>,
    /// Points on the full-sphere query lattice.
    pub n_grid: usize,
    /// Queries are kept only for θ ∈ [t_theta, 180° − t_theta].
    pub t_theta: f64,
    pub t_inlier: f64,
    pub inlier_mode: InlierMode,
}

impl Default for CompletionParams {
    fn default() -> Self {
        let rig = RigConfig::default();
        Self {
            m: 4,
            k: 17,
            rip: 0.8,
            t_ood: None,
            n_grid: 20_000_000,
            t_theta: (180.0 - rig.fov_v) / 2.0,
            t_inlier: 0.01,
            inlier_mode: InlierMode::Relative,
        }
    }
}

impl CompletionParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.rip) {
            return bad(format!("RIP {} must lie in [0, 1]", self.rip));
        }
        if let Some(t) = self.t_ood {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("t_ood {t} must be positive"));
            }
        }
        if self.n_grid == 0 {
            return bad("n_grid must be at least 1".into());
        }
        if !(0.0..90.0).contains(&self.t_theta) {
            return bad(format!("t_theta {} must lie in [0, 90)", self.t_theta));
        }
        if !(self.t_inlier.is_finite() && self.t_inlier >= 0.0) {
            return bad(format!("t_inlier {} must be non-negative", self.t_inlier));
        }
        Ok(())
    }

    /// Fills a missing `t_ood` from the scan pattern of `rig`.
    pub fn with_rig(mut self, rig: &RigConfig) -> Self {
        if self.t_ood.is_none() {
            self.t_ood = Some(derive_ood_threshold(rig, self.m, self.k).t_ood);
        }
        self
    }

    /// Like [`Self::with_rig`] for a frame that fused `clouds` sweeps.
    pub fn with_rig_for_clouds(mut self, rig: &RigConfig, clouds: usize) -> Self {
        if self.t_ood.is_none() {
            self.t_ood = Some(derive_ood_threshold_for_clouds(rig, clouds, self.k).t_ood);
        }
        self
    }

    /// The configured distance limit, or the one derived for the default
    /// LiDAR scan pattern.
    pub fn ood_limit(&self) -> f64 {
        self.t_ood
            .unwrap_or_else(|| derive_ood_threshold(&RigConfig::default(), self.m, self.k).t_ood)
    }
}

/// One LiDAR sweep in its own sensor frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<SphericalPoint>,
    pub frame_index: usize,
    /// Sensor-to-common-frame transform, when odometry is available.
    pub pose: Option<Extrinsics>,
}

impl PointCloud {
    /// Zero-length points carry no direction and are dropped.
    pub fn from_cartesian(points: &[Vec3], frame_index: usize) -> Self {
        Self {
            points: points
                .iter()
                .filter_map(|p| cart_to_spherical(p).ok())
                .collect(),
            frame_index,
            pose: None,
        }
    }

    pub fn to_cartesian(&self) -> Vec<Vec3> {
        self.points.iter().map(spherical_to_cart).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryStatus {
    Kept,
    /// Mean neighbor distance above `t_ood`.
    OutOfDistribution,
    /// Relative variance above the RIP threshold.
    Uncertain,
    /// Passed the distance test, uncertainty threshold not applied yet.
    Candidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QueryPointResult {
    pub theta_q: f64,
    pub phi_q: f64,
    pub r_q: f64,
    pub sigma_sq: f64,
    pub d_q: f64,
    pub status: QueryStatus,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_summary() {
        let p = CompletionParams::default();
        assert_eq!((p.m, p.k, p.rip, p.n_grid), (4, 17, 0.8, 20_000_000));
        assert!((p.ood_limit() - 0.375).abs() < 1e-3);
        assert_eq!(p.t_ood, None);
        assert_eq!(p.with_rig(&RigConfig::default()).t_ood, Some(p.ood_limit()));
        assert!((p.t_theta - 68.8).abs() < 1e-12);
        assert_eq!(p.t_inlier, 0.01);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn param_validation() {
        let base = CompletionParams::default();
        assert!(CompletionParams { k: 0, ..base }.validate().is_err());
        assert!(CompletionParams { rip: 1.5, ..base }.validate().is_err());
        assert!(CompletionParams {
            t_ood: Some(0.0),
            ..base
        }
        .validate()
        .is_err());
        assert!(CompletionParams {
            t_theta: 90.0,
            ..base
        }
        .validate()
        .is_err());
        assert!(CompletionParams { rip: 0.0, ..base }.validate().is_ok());
    }

    #[test]
    fn cartesian_conversion_drops_origin() {
        let c = PointCloud::from_cartesian(&[Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0)], 3);
        assert_eq!(c.len(), 1);
        assert_eq!(c.frame_index, 3);
    }
}
