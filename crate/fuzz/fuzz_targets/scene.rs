#![no_main]
use libfuzzer_sys::fuzz_target;
use omnidepth_core::geometry::Vec3;
use omnidepth_core::sim::Scene;

fuzz_target!(|data: &str| {
    if let Ok(scene) = data.parse::<Scene>() {
        let again: Scene = scene.to_text().parse().unwrap();
        assert_eq!(scene, again);
        let d = Vec3::new(0.3, -0.4, 0.2).normalize();
        if let Some(t) = scene.raycast(&Vec3::zeros(), &d) {
            assert!(t > 0.0);
        }
    }
});
