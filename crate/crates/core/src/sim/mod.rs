//! Analytic scene simulator: exact LiDAR sweeps, equirectangular depth and
//! disparity maps and calibration correspondences.

mod scene;

pub use scene::{Primitive, Scene};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{Correspondence, Extrinsics};
use crate::completion::{PointCloud, RigConfig};
use crate::error::{Error, Result};
use crate::geometry::{
    cart_to_spherical, depth_to_disparity, direction, spherical_to_pixel, wrap_azimuth,
    EquirectGeometry, PixelCoord, RigGeometry, SphericalPoint, Vec3,
};
use crate::raster::{DepthMap, DisparityMap, LabelMap, MapKind};

/// Simulated camera pair plus LiDAR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimRig {
    pub geom: EquirectGeometry,
    pub rig: RigGeometry,
    pub lidar: RigConfig,
    /// LiDAR-to-bottom-camera transform.
    pub extrinsics: Extrinsics,
    /// Bottom-camera position in scene coordinates.
    pub camera_center: Vec3,
}

impl Default for SimRig {
    fn default() -> Self {
        let rig = RigGeometry::default();
        Self {
            geom: EquirectGeometry::cropped_dataset(),
            rig,
            lidar: RigConfig::default(),
            extrinsics: Extrinsics::from_translation(Vec3::new(0.0, 0.0, -rig.lidar_offset)),
            camera_center: Vec3::zeros(),
        }
    }
}

impl SimRig {
    pub fn validate(&self) -> Result<()> {
        self.geom.validate()?;
        self.rig.validate()?;
        self.lidar.validate()
    }

    /// LiDAR origin in scene coordinates.
    pub fn lidar_origin(&self) -> Vec3 {
        self.camera_center + self.extrinsics.translation
    }

    /// LiDAR-to-scene transform.
    pub fn lidar_pose(&self) -> Extrinsics {
        Extrinsics {
            rotation: self.extrinsics.rotation,
            translation: self.lidar_origin(),
        }
    }

    /// Polar angle of beam `i`, beams evenly spread over the vertical FOV.
    pub fn beam_theta(&self, i: usize) -> f64 {
        let l = &self.lidar;
        90.0 - l.fov_v / 2.0 + (i as f64 + 0.5) * l.fov_v / l.n_beams as f64
    }
}

/// One ray per (beam, channel). `azimuth_phase` in [0, 1) shifts the
/// channel grid by that fraction of a channel. Points are in the LiDAR frame.
pub fn render_lidar(scene: &Scene, rig: &SimRig, azimuth_phase: f64) -> PointCloud {
    let origin = rig.lidar_origin();
    let rot = rig.extrinsics.rotation_matrix();
    let l = rig.lidar;
    let step = l.fov_h / l.n_channels_h as f64;
    let points = (0..l.n_beams)
        .into_par_iter()
        .flat_map_iter(|i| {
            let theta = rig.beam_theta(i);
            (0..l.n_channels_h).filter_map(move |j| {
                let phi = wrap_azimuth(-l.fov_h / 2.0 + (j as f64 + azimuth_phase) * step);
                let dir = rot * direction(theta, phi);
                scene
                    .raycast(&origin, &dir)
                    .map(|r| SphericalPoint::new(r, theta, phi))
            })
        })
        .collect();
    PointCloud {
        points,
        frame_index: 0,
        pose: Some(rig.lidar_pose()),
    }
}

/// Sweeps taken from successive camera positions. Every frame draws its
/// azimuth phase from `seed`.
pub fn render_sequence(
    scene: &Scene,
    rig: &SimRig,
    camera_centers: &[Vec3],
    seed: u64,
) -> Vec<PointCloud> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    camera_centers
        .iter()
        .enumerate()
        .map(|(f, &c)| {
            let phase: f64 = rng.random();
            let frame_rig = SimRig {
                camera_center: c,
                ..*rig
            };
            let mut cloud = render_lidar(scene, &frame_rig, phase);
            cloud.frame_index = f;
            cloud
        })
        .collect()
}

/// Dense depth through every pixel center of a camera at `camera_center`.
pub fn render_depth_map(scene: &Scene, camera_center: &Vec3, geom: &EquirectGeometry) -> DepthMap {
    let rows: Vec<Vec<Option<f64>>> = (0..geom.height)
        .into_par_iter()
        .map(|row| {
            let theta = geom.row_theta(row);
            (0..geom.width)
                .map(|col| scene.raycast(camera_center, &direction(theta, geom.col_phi(col))))
                .collect()
        })
        .collect();
    let mut map = LabelMap::empty(MapKind::Depth, geom.width, geom.height);
    for (row, vals) in rows.into_iter().enumerate() {
        for (col, v) in vals.into_iter().enumerate() {
            map.set(col, row, v);
        }
    }
    map
}

/// Per-pixel spherical disparity of a bottom-camera depth map.
pub fn gt_disparity_map(depth: &DepthMap, geom: &EquirectGeometry, baseline: f64) -> DisparityMap {
    let mut out = LabelMap::empty(MapKind::Disparity, depth.width(), depth.height());
    for (col, row, r) in depth.labels() {
        out.set(
            col,
            row,
            depth_to_disparity(r, geom.row_theta(row), baseline).ok(),
        );
    }
    out
}

/// `n` LiDAR hits paired with their exact image positions under the rig's
/// extrinsics. `noise_px` is the RMS length of an isotropic Gaussian pixel
/// offset added to each image position.
pub fn make_correspondences(
    scene: &Scene,
    rig: &SimRig,
    n: usize,
    noise_px: f64,
    seed: u64,
) -> Result<Vec<Correspondence>> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "need at least one correspondence".into(),
        ));
    }
    if !(noise_px.is_finite() && noise_px >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise {noise_px} px")));
    }
    let noise = Normal::new(0.0, noise_px / std::f64::consts::SQRT_2)
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let origin = rig.lidar_origin();
    let rot = rig.extrinsics.rotation_matrix();
    let (t_lo, t_hi) = (90.0 - rig.lidar.fov_v / 2.0, 90.0 + rig.lidar.fov_v / 2.0);
    let max_attempts = 1000 * n + 10_000;
    let mut out = Vec::with_capacity(n);
    for _ in 0..max_attempts {
        if out.len() == n {
            break;
        }
        let theta = rng.random_range(t_lo..t_hi);
        let phi = rng.random_range(-180.0..180.0);
        let dir = direction(theta, phi);
        let Some(r) = scene.raycast(&origin, &(rot * dir)) else {
            continue;
        };
        let lidar_point = r * dir;
        let Ok(sp) = cart_to_spherical(&rig.extrinsics.transform_point(&lidar_point)) else {
            continue;
        };
        let Ok(px) = spherical_to_pixel(&sp, &rig.geom) else {
            continue;
        };
        let (dx, dy) = if noise_px > 0.0 {
            (noise.sample(&mut rng), noise.sample(&mut rng))
        } else {
            (0.0, 0.0)
        };
        out.push(Correspondence {
            lidar_point,
            image_point: PixelCoord::new((px.x + dx).rem_euclid(rig.geom.width as f64), px.y + dy),
        });
    }
    if out.len() < n {
        return Err(Error::InsufficientData(format!(
            "scene produced {} visible hits, {n} requested",
            out.len()
        )));
    }
    Ok(out)
}
