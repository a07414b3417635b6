//! Spherical coordinates, equirectangular projection and spherical disparity.
//!
//! Frame convention: z points up, the polar angle θ is measured from +z and
//! the azimuth is φ = atan2(y, x). All angles are degrees. Raster pixel
//! `(col, row)` covers the continuous square `[col, col+1) × [row, row+1)`,
//! so its center sits at `(col + 0.5, row + 0.5)`.

mod disparity;
mod panorama;
mod projection;

pub use disparity::*;
pub use panorama::*;
pub use projection::*;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Reference top-bottom camera baseline, meters.
pub const DEFAULT_BASELINE_M: f64 = 0.191;
/// Reference vertical distance of the LiDAR below the bottom camera, meters.
pub const DEFAULT_LIDAR_OFFSET_M: f64 = 0.450;

/// Sensor-centric spherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    /// Radial distance, meters.
    pub r: f64,
    /// Polar angle from +z, degrees in [0, 180].
    pub theta: f64,
    /// Azimuth, degrees in [-180, 180).
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Self {
        Self { r, theta, phi }
    }

    pub fn is_valid(&self) -> bool {
        self.r.is_finite()
            && self.r >= 0.0
            && (0.0..=180.0).contains(&self.theta)
            && (-180.0..180.0).contains(&self.phi)
    }
}

/// Continuous pixel position: `x` is the column axis, `y` the row axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PixelCoord {
    pub x: f64,
    pub y: f64,
}

impl PixelCoord {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Integer pixel containing this coordinate. The right edge `x = W` wraps
    /// to column 0 and the bottom edge `y = H` belongs to the last row.
    pub fn to_index(self, geom: &EquirectGeometry) -> Option<(usize, usize)> {
        let (w, h) = (geom.width as f64, geom.height as f64);
        if !(self.x.is_finite() && self.y.is_finite()) {
            return None;
        }
        if self.x < 0.0 || self.x > w || self.y < 0.0 || self.y > h {
            return None;
        }
        let col = (self.x.floor() as usize) % geom.width;
        let row = (self.y.floor() as usize).min(geom.height - 1);
        Some((col, row))
    }
}

/// Equirectangular raster covering the polar band `[theta_min, theta_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquirectGeometry {
    pub width: usize,
    pub height: usize,
    pub theta_min: f64,
    pub theta_max: f64,
}

impl EquirectGeometry {
    pub fn new(width: usize, height: usize, theta_min: f64, theta_max: f64) -> Result<Self> {
        let g = Self {
            width,
            height,
            theta_min,
            theta_max,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn full_sphere(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, 0.0, 180.0)
    }

    /// 1920×512 raster over θ ∈ [48°, 144°]: the cropped stereo-pair layout.
    pub fn cropped_dataset() -> Self {
        Self {
            width: 1920,
            height: 512,
            theta_min: 48.0,
            theta_max: 144.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidParameter(format!(
                "raster size {}x{} must be positive",
                self.width, self.height
            )));
        }
        let ok = self.theta_min.is_finite()
            && self.theta_max.is_finite()
            && 0.0 <= self.theta_min
            && self.theta_min < self.theta_max
            && self.theta_max <= 180.0;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "polar band [{}, {}] must satisfy 0 <= min < max <= 180",
                self.theta_min, self.theta_max
            )));
        }
        Ok(())
    }

    /// Degrees of polar angle per row.
    pub fn row_pitch(&self) -> f64 {
        (self.theta_max - self.theta_min) / self.height as f64
    }

    pub fn contains_theta(&self, theta: f64) -> bool {
        theta >= self.theta_min && theta <= self.theta_max
    }

    /// Polar angle at the center of `row`.
    pub fn row_theta(&self, row: usize) -> f64 {
        self.theta_min + (row as f64 + 0.5) * self.row_pitch()
    }

    /// Azimuth at the center of `col`.
    pub fn col_phi(&self, col: usize) -> f64 {
        wrap_azimuth((col as f64 + 0.5) / self.width as f64 * 360.0 - 180.0)
    }
}

/// Physical layout of the top-bottom camera pair and the LiDAR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RigGeometry {
    /// Vertical distance between the two camera centers, meters.
    pub baseline: f64,
    /// Distance of the LiDAR below the bottom camera, meters.
    pub lidar_offset: f64,
}

impl Default for RigGeometry {
    fn default() -> Self {
        Self {
            baseline: DEFAULT_BASELINE_M,
            lidar_offset: DEFAULT_LIDAR_OFFSET_M,
        }
    }
}

impl RigGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.baseline.is_finite() && self.baseline > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "baseline {} must be positive",
                self.baseline
            )));
        }
        if !self.lidar_offset.is_finite() {
            return Err(Error::InvalidParameter(
                "lidar offset must be finite".into(),
            ));
        }
        Ok(())
    }
}

/// Reduces an azimuth to `[-180, 180)`.
#[inline]
pub fn wrap_azimuth(phi: f64) -> f64 {
    let w = phi - 360.0 * ((phi + 180.0) / 360.0).floor();
    // rounding can land exactly on +180
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

/// Signed azimuth difference `a - b` reduced to `[-180, 180]`.
#[inline]
pub fn azimuth_delta(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_azimuth_range() {
        assert_eq!(wrap_azimuth(180.0), -180.0);
        assert_eq!(wrap_azimuth(-180.0), -180.0);
        assert_eq!(wrap_azimuth(540.0), -180.0);
        assert!((wrap_azimuth(190.0) + 170.0).abs() < 1e-12);
        assert!((wrap_azimuth(-190.0) - 170.0).abs() < 1e-12);
    }

    #[test]
    fn azimuth_delta_takes_short_way() {
        assert!((azimuth_delta(179.9, -179.9) + 0.2).abs() < 1e-9);
        assert!((azimuth_delta(-179.9, 179.9) - 0.2).abs() < 1e-9);
        assert_eq!(azimuth_delta(10.0, 10.0), 0.0);
    }

    #[test]
    fn geometry_validation() {
        assert!(EquirectGeometry::new(0, 10, 0.0, 180.0).is_err());
        assert!(EquirectGeometry::new(10, 10, 90.0, 90.0).is_err());
        assert!(EquirectGeometry::new(10, 10, -1.0, 90.0).is_err());
        assert!(EquirectGeometry::new(10, 10, 0.0, 181.0).is_err());
        assert!(EquirectGeometry::cropped_dataset().validate().is_ok());
        assert_eq!(
            EquirectGeometry::cropped_dataset().row_pitch(),
            96.0 / 512.0
        );
    }

    #[test]
    fn pixel_index_edges() {
        let g = EquirectGeometry::full_sphere(4, 2).unwrap();
        assert_eq!(PixelCoord::new(4.0, 2.0).to_index(&g), Some((0, 1)));
        assert_eq!(PixelCoord::new(0.0, 0.0).to_index(&g), Some((0, 0)));
        assert_eq!(PixelCoord::new(3.99, 1.5).to_index(&g), Some((3, 1)));
        assert_eq!(PixelCoord::new(-0.1, 0.0).to_index(&g), None);
        assert_eq!(PixelCoord::new(0.0, f64::NAN).to_index(&g), None);
    }
}
