use nalgebra::{Matrix3, Rotation3};
use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

/// Rigid LiDAR-to-camera transform: `p_cam = R · p_lidar + t`, with `R`
/// stored as an axis-angle vector (radians times unit axis).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrinsics {
    pub rotation: Vec3,
    pub translation: Vec3,
}

impl Default for Extrinsics {
    fn default() -> Self {
        Self::identity()
    }
}

impl Extrinsics {
    pub fn identity() -> Self {
        Self {
            rotation: Vec3::zeros(),
            translation: Vec3::zeros(),
        }
    }

    /// Builds from an arbitrary axis-angle vector, re-normalizing it so the
    /// stored angle lies in `[0, π]`.
    pub fn new(rotation: Vec3, translation: Vec3) -> Self {
        Self::from_matrix(&rotation_from_axis_angle(&rotation), translation)
    }

    pub fn from_translation(translation: Vec3) -> Self {
        Self {
            rotation: Vec3::zeros(),
            translation,
        }
    }

    pub fn from_matrix(rotation: &Matrix3<f64>, translation: Vec3) -> Self {
        Self {
            rotation: axis_angle_from_rotation(rotation),
            translation,
        }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        rotation_from_axis_angle(&self.rotation)
    }

    pub fn transform_point(&self, p: &Vec3) -> Vec3 {
        self.rotation_matrix() * p + self.translation
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation_matrix().transpose();
        Self::from_matrix(&rt, -(rt * self.translation))
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Extrinsics) -> Self {
        let r = self.rotation_matrix();
        Self::from_matrix(
            &(r * other.rotation_matrix()),
            r * other.translation + self.translation,
        )
    }

    pub fn to_params(&self) -> [f64; 6] {
        [
            self.rotation.x,
            self.rotation.y,
            self.rotation.z,
            self.translation.x,
            self.translation.y,
            self.translation.z,
        ]
    }

    /// Raw parameter vector to extrinsics, without angle normalization.
    pub fn from_params(p: &[f64]) -> Self {
        Self {
            rotation: Vec3::new(p[0], p[1], p[2]),
            translation: Vec3::new(p[3], p[4], p[5]),
        }
    }

    pub fn rotation_angle_deg(&self) -> f64 {
        self.rotation.norm().to_degrees()
    }
}

/// Rodrigues' formula.
pub fn rotation_from_axis_angle(w: &Vec3) -> Matrix3<f64> {
    *Rotation3::from_scaled_axis(*w).matrix()
}

/// Inverse of [`rotation_from_axis_angle`], accurate across the whole
/// `[0, π]` angle range.
pub fn axis_angle_from_rotation(r: &Matrix3<f64>) -> Vec3 {
    let skew = Vec3::new(
        r[(2, 1)] - r[(1, 2)],
        r[(0, 2)] - r[(2, 0)],
        r[(1, 0)] - r[(0, 1)],
    );
    let sin = 0.5 * skew.norm();
    let cos = ((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = sin.atan2(cos);
    if angle == 0.0 {
        return Vec3::zeros();
    }
    if cos > 0.0 {
        // angle / sin(angle) is well conditioned away from π
        return skew * (0.5 * angle / sin);
    }
    // Near π the skew part vanishes; recover the axis from a·aᵀ instead.
    let sym = (r + r.transpose()) * 0.5;
    let aat = (sym - Matrix3::identity() * cos) / (1.0 - cos);
    let i = (0..3)
        .max_by(|&a, &b| aat[(a, a)].total_cmp(&aat[(b, b)]))
        .unwrap_or(0);
    let mut axis = aat.column(i).into_owned() / aat[(i, i)].max(f64::MIN_POSITIVE).sqrt();
    axis.normalize_mut();
    if axis.dot(&skew) < 0.0 {
        axis = -axis;
    }
    axis * angle
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn transform_examples() {
        let e = Extrinsics::from_translation(Vec3::new(0.0, 0.0, 0.45));
        assert_abs_diff_eq!(
            e.transform_point(&Vec3::new(1.0, 0.0, 0.0)),
            Vec3::new(1.0, 0.0, 0.45)
        );
        let p = Vec3::new(0.3, -2.0, 7.0);
        assert_eq!(Extrinsics::identity().transform_point(&p), p);
        let rz = Extrinsics::new(
            Vec3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2),
            Vec3::zeros(),
        );
        assert_abs_diff_eq!(
            rz.transform_point(&Vec3::new(1.0, 0.0, 0.0)),
            Vec3::new(0.0, 1.0, 0.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn inverse_and_compose() {
        let e = Extrinsics::new(Vec3::new(0.1, -0.4, 0.7), Vec3::new(1.0, 2.0, -0.5));
        let id = e.compose(&e.inverse());
        assert!(id.rotation.norm() < 1e-12);
        assert!(id.translation.norm() < 1e-12);
    }

    #[test]
    fn log_map_near_pi() {
        let w = Vec3::new(1.0, 2.0, -0.5).normalize() * (std::f64::consts::PI - 1e-9);
        let back = axis_angle_from_rotation(&rotation_from_axis_angle(&w));
        assert!((back - w).norm() < 1e-7);
        let w = Vec3::new(1e-9, -2e-9, 0.0);
        let back = axis_angle_from_rotation(&rotation_from_axis_angle(&w));
        assert!((back - w).norm() < 1e-20);
    }

    proptest! {
        #[test]
        fn axis_angle_round_trip(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0, frac in 0.0f64..0.999) {
            let v = Vec3::new(x, y, z);
            prop_assume!(v.norm() > 1e-3);
            let w = v.normalize() * frac * std::f64::consts::PI;
            let r = rotation_from_axis_angle(&w);
            prop_assert!((r.transpose() * r - Matrix3::identity()).abs().max() < 1e-10);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-10);
            let back = axis_angle_from_rotation(&r);
            prop_assert!((back - w).norm() < 1e-10, "{} vs {}", back, w);
        }
    }
}
