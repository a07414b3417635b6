use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    generate_query_grid, interpolate_depth, ood_distance, uncertainty,
    uncertainty_threshold_for_rip, CompletionParams, InlierMode, PointCloud, QueryPointResult,
    QueryStatus, SphereIndex,
};
use crate::calibration::Extrinsics;
use crate::error::{Error, Result};
use crate::geometry::{cart_to_spherical, spherical_to_cart, spherical_to_pixel, EquirectGeometry};
use crate::metrics;
use crate::raster::{LabelMap, MapKind};

/// Interpolated query lattice of one aggregated cloud, before the
/// uncertainty threshold is chosen.
#[derive(Debug, Clone)]
pub struct FrameQueries {
    pub results: Vec<QueryPointResult>,
    pub aggregated_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CompletionStats {
    pub aggregated_points: usize,
    pub query_points: usize,
    pub ood_rejected: usize,
    pub uncertainty_rejected: usize,
    pub kept: usize,
    pub uncertainty_threshold: Option<f64>,
    /// Kept queries over queries that passed the distance test.
    pub arip: f64,
    pub original_labels: usize,
    pub completed_labels: usize,
    /// Kept queries landing outside the raster band.
    pub outside_raster: usize,
}

/// Interpolates depth at every in-band lattice query and applies the
/// distance test. Runs the queries in parallel; the output order is the
/// lattice order regardless of thread count.
pub fn interpolate_queries(cloud: &PointCloud, params: &CompletionParams) -> Result<FrameQueries> {
    params.validate()?;
    if cloud.is_empty() {
        return Err(Error::InsufficientData("empty point cloud".into()));
    }
    if cloud.len() < params.k {
        return Err(Error::InsufficientData(format!(
            "cloud has {} points, fewer than k = {}",
            cloud.len(),
            params.k
        )));
    }
    let index = SphereIndex::build(cloud.points.clone(), params.k);
    let grid = generate_query_grid(params.n_grid, params.t_theta);
    let t_ood = params.ood_limit();
    let results = grid
        .par_iter()
        .map(|&(theta_q, phi_q)| query_point(&index, theta_q, phi_q, params.k, t_ood))
        .collect::<Result<Vec<_>>>()?;
    Ok(FrameQueries {
        results,
        aggregated_points: cloud.len(),
    })
}

fn query_point(
    index: &SphereIndex,
    theta_q: f64,
    phi_q: f64,
    k: usize,
    t_ood: f64,
) -> Result<QueryPointResult> {
    let neighbors = index.knn(theta_q, phi_q, k)?;
    let interp = interpolate_depth(&neighbors)?;
    let sigma_sq = uncertainty(interp.r_q, &neighbors, &interp.weights)?;
    let d_q = ood_distance(&neighbors);
    Ok(QueryPointResult {
        theta_q,
        phi_q,
        r_q: interp.r_q,
        sigma_sq,
        d_q,
        status: if d_q > t_ood {
            QueryStatus::OutOfDistribution
        } else {
            QueryStatus::Candidate
        },
    })
}

impl FrameQueries {
    fn candidate_sigmas(&self) -> Vec<f64> {
        self.results
            .iter()
            .filter(|q| q.status != QueryStatus::OutOfDistribution)
            .map(|q| q.sigma_sq)
            .collect()
    }

    /// Per-cloud RIP threshold over queries that passed the distance test;
    /// `None` when none did.
    pub fn uncertainty_threshold(&self, rip: f64) -> Option<f64> {
        uncertainty_threshold_for_rip(&self.candidate_sigmas(), rip).ok()
    }

    /// Marks candidates as kept or uncertain.
    pub fn apply_threshold(&mut self, threshold: Option<f64>) {
        for q in &mut self.results {
            if q.status == QueryStatus::OutOfDistribution {
                continue;
            }
            q.status = match threshold {
                Some(t) if q.sigma_sq <= t => QueryStatus::Kept,
                _ => QueryStatus::Uncertain,
            };
        }
    }

    /// Projects kept queries into a copy of `original`. Original labels are
    /// never overwritten; among interpolated values the smallest depth wins.
    pub fn render(
        &self,
        original: &LabelMap,
        geom: &EquirectGeometry,
        extr: &Extrinsics,
        threshold: Option<f64>,
    ) -> Result<(LabelMap, CompletionStats)> {
        if original.kind != MapKind::Depth {
            return Err(Error::InvalidParameter(
                "completion needs a depth map".into(),
            ));
        }
        if original.width() != geom.width || original.height() != geom.height {
            return Err(Error::DimensionMismatch(format!(
                "sparse map {}x{} vs geometry {}x{}",
                original.width(),
                original.height(),
                geom.width,
                geom.height
            )));
        }
        let mut stats = CompletionStats {
            aggregated_points: self.aggregated_points,
            query_points: self.results.len(),
            uncertainty_threshold: threshold,
            original_labels: original.labeled_count(),
            ..Default::default()
        };
        let mut interpolated = LabelMap::empty(MapKind::Depth, geom.width, geom.height);
        let r = extr.rotation_matrix();
        for q in &self.results {
            match q.status {
                QueryStatus::OutOfDistribution => {
                    stats.ood_rejected += 1;
                    continue;
                }
                QueryStatus::Uncertain | QueryStatus::Candidate => {
                    stats.uncertainty_rejected += 1;
                    continue;
                }
                QueryStatus::Kept => stats.kept += 1,
            }
            let lidar = spherical_to_cart(&crate::geometry::SphericalPoint::new(
                q.r_q, q.theta_q, q.phi_q,
            ));
            let Ok(cam) = cart_to_spherical(&(r * lidar + extr.translation)) else {
                stats.outside_raster += 1;
                continue;
            };
            match spherical_to_pixel(&cam, geom)
                .ok()
                .and_then(|px| px.to_index(geom))
            {
                Some((col, row)) => interpolated.set_min(col, row, cam.r),
                None => stats.outside_raster += 1,
            }
        }
        let mut out = original.clone();
        for (col, row, v) in interpolated.labels() {
            if out.get(col, row).is_none() {
                out.set(col, row, Some(v));
            }
        }
        let candidates = stats.kept + stats.uncertainty_rejected;
        stats.arip = if candidates == 0 {
            0.0
        } else {
            stats.kept as f64 / candidates as f64
        };
        stats.completed_labels = out.labeled_count();
        Ok((out, stats))
    }
}

/// Completes one frame using its own RIP threshold.
pub fn complete_depth_map(
    cloud: &PointCloud,
    original: &LabelMap,
    geom: &EquirectGeometry,
    extr: &Extrinsics,
    params: &CompletionParams,
) -> Result<(LabelMap, CompletionStats)> {
    let mut frame = interpolate_queries(cloud, params)?;
    let threshold = frame.uncertainty_threshold(params.rip);
    frame.apply_threshold(threshold);
    frame.render(original, geom, extr, threshold)
}

/// Projects raw LiDAR points into a sparse depth map, keeping the nearest
/// point per pixel. Returns the map and the number of points that missed
/// the raster.
pub fn project_cloud(
    cloud: &PointCloud,
    geom: &EquirectGeometry,
    extr: &Extrinsics,
) -> (LabelMap, usize) {
    let mut map = LabelMap::empty(MapKind::Depth, geom.width, geom.height);
    let mut missed = 0;
    let r = extr.rotation_matrix();
    for p in &cloud.points {
        let cam = cart_to_spherical(&(r * spherical_to_cart(p) + extr.translation));
        let idx = cam.ok().and_then(|sp| {
            spherical_to_pixel(&sp, geom)
                .ok()
                .and_then(|px| px.to_index(geom))
                .map(|ix| (ix, sp.r))
        });
        match idx {
            Some(((col, row), depth)) => map.set_min(col, row, depth),
            None => missed += 1,
        }
    }
    (map, missed)
}

/// Seeded uniform split without replacement; `ratio` of the points go to
/// the first (training) cloud. Both halves keep the input order.
pub fn holdout_split(
    cloud: &PointCloud,
    ratio: f64,
    seed: u64,
) -> Result<(PointCloud, PointCloud)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "split ratio {ratio} must lie in (0, 1)"
        )));
    }
    let n = cloud.len();
    let n_train = (ratio * n as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; n];
    for i in sample(&mut rng, n, n_train) {
        in_train[i] = true;
    }
    let mut train = PointCloud {
        frame_index: cloud.frame_index,
        pose: cloud.pose,
        ..Default::default()
    };
    let mut test = train.clone();
    for (p, t) in cloud.points.iter().zip(in_train) {
        if t {
            train.points.push(*p);
        } else {
            test.points.push(*p);
        }
    }
    Ok((train, test))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompletionEvaluation {
    pub mae: f64,
    pub rmse: f64,
    pub mare: f64,
    pub ir: f64,
    pub arip: f64,
    pub evaluated: usize,
    pub test_points: usize,
    pub ood_rejected: usize,
}

/// Interpolates every test point from the training cloud, applies the RIP
/// uncertainty filter and scores the survivors against their measured depth.
/// Test points are measured positions, so the distance filter applies only
/// when `params.t_ood` is set explicitly.
pub fn evaluate_completion(
    train: &PointCloud,
    test: &PointCloud,
    params: &CompletionParams,
) -> Result<CompletionEvaluation> {
    params.validate()?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::InsufficientData(
            "training and test clouds must both be non-empty".into(),
        ));
    }
    if train.len() < params.k {
        return Err(Error::InsufficientData(format!(
            "training cloud has {} points, fewer than k = {}",
            train.len(),
            params.k
        )));
    }
    let index = SphereIndex::build(train.points.clone(), params.k);
    let t_ood = params.t_ood.unwrap_or(f64::INFINITY);
    let results = test
        .points
        .par_iter()
        .map(|p| query_point(&index, p.theta, p.phi, params.k, t_ood))
        .collect::<Result<Vec<_>>>()?;
    let mut frame = FrameQueries {
        results,
        aggregated_points: train.len(),
    };
    let threshold = frame.uncertainty_threshold(params.rip);
    frame.apply_threshold(threshold);

    let mut estimates = Vec::new();
    let mut truths = Vec::new();
    let mut ood = 0;
    let mut candidates = 0;
    for (q, p) in frame.results.iter().zip(&test.points) {
        match q.status {
            QueryStatus::OutOfDistribution => ood += 1,
            QueryStatus::Kept => {
                candidates += 1;
                estimates.push(q.r_q);
                truths.push(p.r);
            }
            _ => candidates += 1,
        }
    }
    if estimates.is_empty() {
        return Err(Error::InsufficientData(
            "no test point survived filtering".into(),
        ));
    }
    let n = estimates.len() as f64;
    let (mut abs, mut sq, mut rel) = (0.0, 0.0, 0.0);
    for (e, t) in estimates.iter().zip(&truths) {
        let d = (e - t).abs();
        abs += d;
        sq += d * d;
        rel += d / t;
    }
    let ir = match params.inlier_mode {
        InlierMode::Relative => metrics::inlier_ratio(&estimates, &truths, params.t_inlier)?,
        InlierMode::Absolute => {
            metrics::inlier_ratio_absolute(&estimates, &truths, params.t_inlier)?
        }
    };
    Ok(CompletionEvaluation {
        mae: abs / n,
        rmse: (sq / n).sqrt(),
        mare: rel / n,
        ir,
        arip: estimates.len() as f64 / candidates as f64,
        evaluated: estimates.len(),
        test_points: test.len(),
        ood_rejected: ood,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RlpReport {
    pub rlp_original: f64,
    pub rlp_augmented: f64,
    /// First and last row holding an original label.
    pub h_min: usize,
    pub h_max: usize,
}

/// Ratio of labeled pixels inside the labelable row band of `original`.
/// Completed labels outside that band do not count.
pub fn rlp(original: &LabelMap, completed: &LabelMap) -> Result<RlpReport> {
    if original.width() != completed.width() || original.height() != completed.height() {
        return Err(Error::DimensionMismatch(format!(
            "original {}x{} vs completed {}x{}",
            original.width(),
            original.height(),
            completed.width(),
            completed.height()
        )));
    }
    let mut rows = original.labels().map(|(_, row, _)| row);
    let first = rows
        .next()
        .ok_or_else(|| Error::InsufficientData("original map has no labels".into()))?;
    let (h_min, h_max) = rows.fold((first, first), |(lo, hi), r| (lo.min(r), hi.max(r)));
    if h_max == h_min {
        return Err(Error::Degenerate(
            "original labels occupy a single row; labelable band has zero height".into(),
        ));
    }
    let area = (original.width() * (h_max - h_min)) as f64;
    let in_band = |m: &LabelMap| {
        m.labels()
            .filter(|&(_, row, _)| row >= h_min && row <= h_max)
            .count() as f64
    };
    Ok(RlpReport {
        rlp_original: in_band(original) / area,
        rlp_augmented: in_band(completed) / area,
        h_min,
        h_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SphericalPoint;

    fn grid_cloud(r: impl Fn(f64, f64) -> f64) -> PointCloud {
        let mut points = Vec::new();
        for b in 0..64 {
            let theta = 68.8 + (b as f64 + 0.5) * 42.4 / 64.0;
            for c in 0..1024 {
                let phi = -180.0 + c as f64 * 360.0 / 1024.0;
                points.push(SphericalPoint::new(r(theta, phi), theta, phi));
            }
        }
        PointCloud {
            points,
            frame_index: 0,
            pose: None,
        }
    }

    fn small_params() -> CompletionParams {
        CompletionParams {
            m: 0,
            k: 4,
            n_grid: 200_000,
            ..Default::default()
        }
    }

    #[test]
    fn rip_zero_returns_original() {
        let cloud = grid_cloud(|_, _| 5.0);
        let geom = EquirectGeometry::new(480, 128, 48.0, 144.0).unwrap();
        let (sparse, _) = project_cloud(&cloud, &geom, &Extrinsics::identity());
        let params = CompletionParams {
            rip: 0.0,
            ..small_params()
        };
        let (out, stats) =
            complete_depth_map(&cloud, &sparse, &geom, &Extrinsics::identity(), &params).unwrap();
        assert_eq!(out, sparse);
        assert_eq!(stats.kept, 0);
    }

    #[test]
    fn never_overwrites_original_labels() {
        let cloud = grid_cloud(|_, _| 5.0);
        let geom = EquirectGeometry::new(480, 128, 48.0, 144.0).unwrap();
        let mut sparse = LabelMap::empty(MapKind::Depth, 480, 128);
        for col in 0..480 {
            sparse.set(col, 64, Some(1.0));
        }
        let (out, stats) = complete_depth_map(
            &cloud,
            &sparse,
            &geom,
            &Extrinsics::identity(),
            &small_params(),
        )
        .unwrap();
        for col in 0..480 {
            assert_eq!(out.get(col, 64), Some(1.0));
        }
        assert!(stats.completed_labels > stats.original_labels);
        for (col, row, v) in out.labels() {
            if row != 64 {
                assert!((v - 5.0).abs() < 1e-9, "({col},{row}) = {v}");
            }
        }
    }

    #[test]
    fn lowering_rip_never_keeps_more() {
        let cloud = grid_cloud(|t, p| 3.0 + 0.01 * t + (p.to_radians() * 3.0).sin());
        let mut frame = interpolate_queries(&cloud, &small_params()).unwrap();
        let mut prev = usize::MAX;
        for rip in [1.0, 0.9, 0.8, 0.5, 0.2, 0.0] {
            let t = frame.uncertainty_threshold(rip);
            frame.apply_threshold(t);
            let kept = frame
                .results
                .iter()
                .filter(|q| q.status == QueryStatus::Kept)
                .count();
            assert!(kept <= prev);
            prev = kept;
        }
    }

    #[test]
    fn empty_cloud_is_an_error() {
        let geom = EquirectGeometry::new(48, 16, 48.0, 144.0).unwrap();
        let sparse = LabelMap::empty(MapKind::Depth, 48, 16);
        let res = complete_depth_map(
            &PointCloud::default(),
            &sparse,
            &geom,
            &Extrinsics::identity(),
            &small_params(),
        );
        assert!(res.is_err());
    }

    #[test]
    fn split_counts_and_disjointness() {
        let cloud = grid_cloud(|t, _| t);
        let (a, b) = holdout_split(&cloud, 0.8, 1).unwrap();
        assert_eq!(a.len() + b.len(), cloud.len());
        assert_eq!(a.len(), (0.8 * cloud.len() as f64).round() as usize);
        let (a2, _) = holdout_split(&cloud, 0.8, 1).unwrap();
        assert_eq!(a, a2);
        let (a3, _) = holdout_split(&cloud, 0.8, 2).unwrap();
        assert_ne!(a, a3);
        assert!(holdout_split(&cloud, 1.0, 1).is_err());

        let small = PointCloud {
            points: (0..100)
                .map(|i| SphericalPoint::new(1.0, 90.0, i as f64))
                .collect(),
            ..Default::default()
        };
        let (tr, te) = holdout_split(&small, 0.8, 9).unwrap();
        assert_eq!((tr.len(), te.len()), (80, 20));
        let mut all: Vec<f64> = tr.points.iter().chain(&te.points).map(|p| p.phi).collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..100).map(|i| i as f64).collect::<Vec<_>>());
    }

    #[test]
    fn duplicated_test_points_are_exact() {
        let cloud = grid_cloud(|t, p| 2.0 + 0.05 * t + 0.001 * p);
        let (train, _) = holdout_split(&cloud, 0.8, 3).unwrap();
        let test = PointCloud {
            points: train.points[..500].to_vec(),
            ..Default::default()
        };
        let ev = evaluate_completion(&train, &test, &small_params()).unwrap();
        assert_eq!(ev.mae, 0.0);
        assert_eq!(ev.ir, 1.0);
    }

    #[test]
    fn held_out_distance_filter_only_when_explicit() {
        let cloud = grid_cloud(|t, _| 2.0 + 0.05 * t);
        let (train, test) = holdout_split(&cloud, 0.8, 4).unwrap();
        let ev = evaluate_completion(&train, &test, &small_params()).unwrap();
        assert_eq!(ev.ood_rejected, 0);
        let strict = CompletionParams {
            t_ood: Some(1e-6),
            ..small_params()
        };
        assert!(evaluate_completion(&train, &test, &strict).is_err());
    }

    #[test]
    fn rlp_formula() {
        let mut orig = LabelMap::empty(MapKind::Depth, 10, 10);
        let mut n = 0;
        'outer: for row in 2..=7 {
            for col in 0..10 {
                if row == 2 && col > 0 || row == 7 && col > 0 {
                    continue;
                }
                orig.set(col, row, Some(1.0));
                n += 1;
                if n == 25 {
                    break 'outer;
                }
            }
        }
        orig.set(0, 7, Some(1.0));
        let n_labels = orig.labeled_count();
        let r = rlp(&orig, &orig).unwrap();
        assert_eq!((r.h_min, r.h_max), (2, 7));
        assert_eq!(r.rlp_original, n_labels as f64 / 50.0);
        assert_eq!(r.rlp_original, r.rlp_augmented);

        let mut completed = orig.clone();
        completed.set(5, 0, Some(3.0)); // outside the band: dropped
        assert_eq!(
            rlp(&orig, &completed).unwrap().rlp_augmented,
            r.rlp_original
        );
        assert!(rlp(&LabelMap::empty(MapKind::Depth, 10, 10), &orig).is_err());
    }
}
