mod common;

use omnidepth_core::calibration::{optimize_extrinsics, BfgsOptions, Extrinsics};
use omnidepth_core::geometry::Vec3;
use omnidepth_core::sim::{make_correspondences, SimRig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn perturb(e: &Extrinsics, rng: &mut ChaCha8Rng, max_deg: f64, max_m: f64) -> Extrinsics {
    let rot = random_unit(rng) * rng.random_range(0.0..max_deg).to_radians();
    let delta = Extrinsics::new(rot, random_unit(rng) * rng.random_range(0.0..max_m));
    delta.compose(e)
}

#[test]
fn exact_correspondences_recover_the_mount() {
    let scene = common::street_scene();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..5 {
        let nominal = SimRig::default();
        let truth = perturb(&nominal.extrinsics, &mut rng, 2.0, 0.05);
        let rig = SimRig {
            extrinsics: truth,
            ..nominal
        };
        let corrs = make_correspondences(&scene, &rig, 60, 0.0, case).unwrap();
        let init = perturb(&truth, &mut rng, 5.0, 0.10);
        let fit = optimize_extrinsics(&corrs, &init, &rig.geom, &BfgsOptions::default()).unwrap();
        let err = fit.extrinsics.compose(&truth.inverse());
        assert!(
            err.rotation_angle_deg() < 1e-3,
            "case {case}: {:?}",
            fit.termination
        );
        assert!(err.translation.norm() < 1e-3, "case {case}");
        assert!(fit.total_error <= fit.initial_error);
    }
}
