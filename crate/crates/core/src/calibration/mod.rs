//! LiDAR-to-camera extrinsic calibration by reprojection-error minimization.
//!
//! LiDAR points are moved into the bottom-camera frame, converted to
//! spherical coordinates and projected onto the equirectangular raster. The
//! six extrinsic parameters (axis-angle rotation, translation) are fitted by
//! BFGS to minimize the sum of squared pixel distances to the observed image
//! positions.

pub mod bfgs;
mod extrinsics;

pub use bfgs::{BfgsOptions, Termination};
pub use extrinsics::*;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    cart_to_spherical, project_unchecked, spherical_to_pixel, EquirectGeometry, PixelCoord, Vec3,
};

/// A LiDAR point and the image position where it was observed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub lidar_point: Vec3,
    pub image_point: PixelCoord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub extrinsics: Extrinsics,
    /// Sum of squared per-point errors, px².
    pub total_error: f64,
    pub initial_error: f64,
    /// Per-correspondence pixel distances.
    pub per_point_errors: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
}

impl CalibrationResult {
    pub fn mean_error(&self) -> f64 {
        self.per_point_errors.iter().sum::<f64>() / self.per_point_errors.len() as f64
    }
}

pub fn transform_point(p: &Vec3, extr: &Extrinsics) -> Vec3 {
    extr.transform_point(p)
}

/// LiDAR point to continuous pixel position in the bottom-camera raster.
pub fn reproject(p: &Vec3, extr: &Extrinsics, geom: &EquirectGeometry) -> Result<PixelCoord> {
    let sp = cart_to_spherical(&extr.transform_point(p))?;
    spherical_to_pixel(&sp, geom)
}

/// Euclidean pixel distance with the horizontal component taken the short
/// way around the 360° seam.
pub fn wrapped_pixel_distance(a: &PixelCoord, b: &PixelCoord, width: usize) -> f64 {
    let w = width as f64;
    let mut dx = (a.x - b.x).rem_euclid(w);
    if dx > 0.5 * w {
        dx -= w;
    }
    dx.hypot(a.y - b.y)
}

/// Pixel error of every correspondence under `extr`. Rows outside the raster
/// band extrapolate linearly so the objective stays smooth while optimizing.
pub fn residuals(
    corrs: &[Correspondence],
    extr: &Extrinsics,
    geom: &EquirectGeometry,
) -> Result<Vec<f64>> {
    if corrs.is_empty() {
        return Err(Error::InsufficientData("no correspondences".into()));
    }
    let r = extr.rotation_matrix();
    corrs
        .iter()
        .map(|c| {
            let sp = cart_to_spherical(&(r * c.lidar_point + extr.translation))?;
            let px = project_unchecked(sp.theta, sp.phi, geom);
            Ok(wrapped_pixel_distance(&px, &c.image_point, geom.width))
        })
        .collect()
}

fn total_squared(corrs: &[Correspondence], extr: &Extrinsics, geom: &EquirectGeometry) -> f64 {
    match residuals(corrs, extr, geom) {
        Ok(e) => e.iter().map(|v| v * v).sum(),
        Err(_) => f64::INFINITY,
    }
}

fn check_non_collinear(corrs: &[Correspondence]) -> Result<()> {
    if corrs.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 correspondences, got {}",
            corrs.len()
        )));
    }
    let p0 = corrs[0].lidar_point;
    let scale = corrs
        .iter()
        .map(|c| (c.lidar_point - p0).norm())
        .fold(0.0, f64::max);
    let far = corrs
        .iter()
        .max_by(|a, b| {
            (a.lidar_point - p0)
                .norm()
                .total_cmp(&(b.lidar_point - p0).norm())
        })
        .map(|c| c.lidar_point - p0)
        .unwrap_or_else(Vec3::zeros);
    let spread = corrs
        .iter()
        .map(|c| far.cross(&(c.lidar_point - p0)).norm())
        .fold(0.0, f64::max);
    if scale == 0.0 || spread <= 1e-9 * scale * scale {
        return Err(Error::InsufficientData(
            "correspondences are collinear".into(),
        ));
    }
    Ok(())
}

/// Fits extrinsics to `corrs` starting from `init`. The returned total error
/// never exceeds the error at `init`.
pub fn optimize_extrinsics(
    corrs: &[Correspondence],
    init: &Extrinsics,
    geom: &EquirectGeometry,
    opts: &BfgsOptions,
) -> Result<CalibrationResult> {
    check_non_collinear(corrs)?;
    geom.validate()?;

    let objective =
        |x: &DVector<f64>| total_squared(corrs, &Extrinsics::from_params(x.as_slice()), geom);
    let x0 = DVector::from_column_slice(&init.to_params());
    let initial_error = objective(&x0);
    if !initial_error.is_finite() {
        return Err(Error::Degenerate(
            "initial extrinsics place a correspondence at the camera center".into(),
        ));
    }
    let out = bfgs::minimize(objective, x0, opts);

    let fitted = Extrinsics::from_params(out.x.as_slice());
    let extrinsics = Extrinsics::new(fitted.rotation, fitted.translation);
    let per_point_errors = residuals(corrs, &extrinsics, geom)?;
    Ok(CalibrationResult {
        total_error: per_point_errors.iter().map(|e| e * e).sum(),
        initial_error,
        per_point_errors,
        extrinsics,
        iterations: out.iterations,
        converged: out.termination.is_converged(),
        termination: out.termination,
    })
}

/// Mean pixel error and that mean as a percentage of the raster diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionQuality {
    pub avg_pixel_error: f64,
    pub relative_error_percent: f64,
    pub pairs: usize,
}

pub fn projection_quality_report(
    pairs: &[(PixelCoord, PixelCoord)],
    geom: &EquirectGeometry,
) -> Result<ProjectionQuality> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData("no projection pairs".into()));
    }
    let mean = pairs
        .iter()
        .map(|(p, o)| wrapped_pixel_distance(p, o, geom.width))
        .sum::<f64>()
        / pairs.len() as f64;
    let diagonal = (geom.width as f64).hypot(geom.height as f64);
    Ok(ProjectionQuality {
        avg_pixel_error: mean,
        relative_error_percent: mean / diagonal * 100.0,
        pairs: pairs.len(),
    })
}
