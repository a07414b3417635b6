#![allow(dead_code)]

use omnidepth_core::geometry::Vec3;
use omnidepth_core::sim::{Primitive, Scene};

/// Ground plane, a ball, a pillar and a far enclosing dome.
pub fn street_scene() -> Scene {
    Scene::new(vec![
        Primitive::Plane { height: -1.6 },
        Primitive::Sphere {
            center: Vec3::new(4.0, 1.0, -0.6),
            radius: 1.0,
        },
        Primitive::Cylinder {
            cx: -3.0,
            cy: 2.0,
            radius: 0.6,
            z_min: -1.6,
            z_max: 2.0,
        },
        Primitive::Sphere {
            center: Vec3::zeros(),
            radius: 25.0,
        },
    ])
    .unwrap()
}

/// Camera centers walking along +x.
pub fn walk(frames: usize, step: f64) -> Vec<Vec3> {
    (0..frames)
        .map(|i| Vec3::new(step * i as f64, 0.0, 0.0))
        .collect()
}
