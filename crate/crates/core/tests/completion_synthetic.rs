mod common;

use omnidepth_core::completion::{
    complete_depth_map, evaluate_completion, holdout_split, interpolate_queries, project_cloud,
    rlp, temporal_aggregate, AggregationMode, CompletionParams, PointCloud, QueryStatus,
};
use omnidepth_core::sim::{render_sequence, SimRig};

fn params() -> CompletionParams {
    CompletionParams {
        m: 1,
        k: 17,
        rip: 0.8,
        n_grid: 200_000,
        ..Default::default()
    }
}

fn sequence(rig: &SimRig) -> Vec<PointCloud> {
    render_sequence(&common::street_scene(), rig, &common::walk(3, 0.15), 11)
}

#[test]
fn held_out_points_are_recovered() {
    let rig = SimRig::default();
    let mut clouds = sequence(&rig);
    let (train, test) = holdout_split(&clouds[1], 0.8, 5).unwrap();
    clouds[1] = train;
    let agg = temporal_aggregate(&clouds, 1, 1, AggregationMode::Transformed).unwrap();
    let ev = evaluate_completion(&agg.cloud, &test, &params()).unwrap();
    assert!(ev.mare < 0.02, "{ev:?}");
    assert!(ev.ir > 0.7, "{ev:?}");
    assert!((ev.arip - 0.8).abs() < 0.05, "{ev:?}");
    assert_eq!(ev.test_points, test.len());
}

#[test]
fn completion_adds_labels_at_target_ratio() {
    let rig = SimRig::default();
    let clouds = sequence(&rig);
    let agg = temporal_aggregate(&clouds, 1, 1, AggregationMode::Transformed).unwrap();
    let p = params().with_rig_for_clouds(&rig.lidar, 3);
    let (sparse, _) = project_cloud(&clouds[1], &rig.geom, &rig.extrinsics);
    let (dense, stats) =
        complete_depth_map(&agg.cloud, &sparse, &rig.geom, &rig.extrinsics, &p).unwrap();
    assert!(dense.labeled_count() > sparse.labeled_count());
    assert!((stats.arip - 0.8).abs() < 0.05, "{stats:?}");
    for (col, row, r) in sparse.labels() {
        assert_eq!(dense.get(col, row), Some(r));
    }
    let report = rlp(&sparse, &dense).unwrap();
    assert!(report.rlp_augmented > report.rlp_original);
}

#[test]
fn averaged_sequence_threshold_stays_near_target() {
    let rig = SimRig::default();
    let clouds = sequence(&rig);
    let mut frames = Vec::new();
    for c in 0..clouds.len() {
        let agg = temporal_aggregate(&clouds, c, 1, AggregationMode::Transformed).unwrap();
        let fused = agg.frames.clone().count();
        let p = params().with_rig_for_clouds(&rig.lidar, fused);
        frames.push(interpolate_queries(&agg.cloud, &p).unwrap());
    }
    let per_frame: Vec<f64> = frames
        .iter()
        .filter_map(|f| f.uncertainty_threshold(0.8))
        .collect();
    assert_eq!(per_frame.len(), 3);
    let t = per_frame.iter().sum::<f64>() / 3.0;
    let (mut kept, mut candidates) = (0usize, 0usize);
    for mut f in frames {
        f.apply_threshold(Some(t));
        for q in &f.results {
            match q.status {
                QueryStatus::Kept => kept += 1,
                QueryStatus::Uncertain => {}
                _ => continue,
            }
            candidates += 1;
        }
    }
    let arip = kept as f64 / candidates as f64;
    assert!((arip - 0.8).abs() < 0.05, "{arip}");
}
