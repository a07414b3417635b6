use std::path::Path;

use anyhow::{bail, Context, Result};
use log::{info, warn};
use omnidepth_core::calibration::{
    optimize_extrinsics, projection_quality_report, reproject, Extrinsics, ProjectionQuality,
    Termination,
};
use omnidepth_core::completion::{
    average_threshold, interpolate_queries, project_cloud, rlp, temporal_aggregate,
    AggregationMode, CompletionParams, CompletionStats, PointCloud, RlpReport,
};
use omnidepth_core::geometry::{
    depth_to_disparity, disparity_to_depth, disparity_to_depth_clamped, EquirectGeometry, Vec3,
};
use omnidepth_core::io::{
    decode_points, encode_png16, encode_points_binary, encode_raster, format_correspondences,
    format_poses, parse_correspondences, parse_poses, PipelineConfig,
};
use omnidepth_core::metrics::{self, Aggregation, Sample, TaggedReport};
use omnidepth_core::raster::{LabelMap, MapKind};
use omnidepth_core::sim::{
    gt_disparity_map, make_correspondences, render_depth_map, render_sequence, Scene, SimRig,
};
use omnidepth_core::Error as CoreError;
use serde::Serialize;

use crate::args::*;
use crate::colormap;
use crate::files::{self, NumericalError, UsageError};

fn extrinsics_or_nominal(cfg: &PipelineConfig, path: Option<&Path>) -> Result<Extrinsics> {
    match path {
        Some(p) => files::read_extrinsics(p),
        None => Ok(cfg.nominal_extrinsics()),
    }
}

fn check_geometry(map: &LabelMap, geom: &EquirectGeometry, path: &Path) -> Result<()> {
    if map.width() != geom.width || map.height() != geom.height {
        return Err(CoreError::DimensionMismatch(format!(
            "{} is {}x{} but the configured raster is {}x{}",
            path.display(),
            map.width(),
            map.height(),
            geom.width,
            geom.height
        ))
        .into());
    }
    Ok(())
}

#[derive(Serialize)]
struct CalibrationReport {
    extrinsics: Extrinsics,
    rotation_deg: f64,
    total_error: f64,
    initial_error: f64,
    mean_error: f64,
    iterations: usize,
    termination: Termination,
    converged: bool,
    quality: ProjectionQuality,
    per_point_errors: Vec<f64>,
}

pub fn calibrate(cfg: &PipelineConfig, a: &CalibrateArgs) -> Result<()> {
    let corrs = parse_correspondences(&files::read(&a.correspondences)?)
        .with_context(|| format!("parsing {}", a.correspondences.display()))?;
    if corrs.len() < 3 {
        bail!(UsageError(format!(
            "{} holds {} correspondences; at least 3 are needed",
            a.correspondences.display(),
            corrs.len()
        )));
    }
    let init = extrinsics_or_nominal(cfg, a.init.as_deref())?;
    let geom = cfg.geometry;
    let fit = optimize_extrinsics(&corrs, &init, &geom, &cfg.calibration)?;
    let pairs: Vec<_> = corrs
        .iter()
        .filter_map(|c| {
            reproject(&c.lidar_point, &fit.extrinsics, &geom)
                .ok()
                .map(|p| (p, c.image_point))
        })
        .collect();
    let quality = projection_quality_report(&pairs, &geom)?;
    info!(
        "E = {:.6} px² after {} iterations ({:?})",
        fit.total_error, fit.iterations, fit.termination
    );
    let report = CalibrationReport {
        rotation_deg: fit.extrinsics.rotation_angle_deg(),
        extrinsics: fit.extrinsics,
        total_error: fit.total_error,
        initial_error: fit.initial_error,
        mean_error: fit.mean_error(),
        iterations: fit.iterations,
        termination: fit.termination,
        converged: fit.converged,
        quality,
        per_point_errors: fit.per_point_errors.clone(),
    };
    files::write_json(&a.output, &report)?;
    if !fit.converged {
        bail!(NumericalError(format!(
            "optimizer stopped without converging ({:?})",
            fit.termination
        )));
    }
    Ok(())
}

fn load_cloud(path: &Path, frame: usize) -> Result<PointCloud> {
    let pts = decode_points(&files::read(path)?)
        .with_context(|| format!("decoding {}", path.display()))?;
    Ok(PointCloud::from_cartesian(&pts, frame))
}

pub fn project(cfg: &PipelineConfig, a: &ProjectArgs) -> Result<()> {
    let cloud = load_cloud(&a.cloud, 0)?;
    if cloud.is_empty() {
        warn!("{} holds no points; the map is empty", a.cloud.display());
    }
    let extr = extrinsics_or_nominal(cfg, a.extrinsics.as_deref())?;
    let (map, missed) = project_cloud(&cloud, &cfg.geometry, &extr);
    info!(
        "{} points, {} labeled pixels, {missed} outside the raster",
        cloud.len(),
        map.labeled_count()
    );
    let png = match &a.png {
        Some(p) => {
            let (bytes, saturated) = encode_png16(&map)?;
            if saturated > 0 {
                warn!("{saturated} pixels saturated in the PNG export");
            }
            Some((p, bytes))
        }
        None => None,
    };
    files::write(&a.output, &encode_raster(&map))?;
    if let Some((p, bytes)) = png {
        files::write(p, &bytes)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FrameReport {
    file: String,
    fused_clouds: usize,
    t_ood: f64,
    stats: CompletionStats,
    rlp: Option<RlpReport>,
}

#[derive(Serialize)]
struct CompletionReport {
    params: CompletionParams,
    aggregation: AggregationMode,
    threshold_scope: String,
    sequence_threshold: Option<f64>,
    mean_arip: f64,
    frames: Vec<FrameReport>,
}

pub fn complete(cfg: &PipelineConfig, a: &CompleteArgs) -> Result<()> {
    let mut params = cfg.completion;
    params.m = a.m.unwrap_or(params.m);
    params.k = a.k.unwrap_or(params.k);
    params.rip = a.rip.unwrap_or(params.rip);
    params.n_grid = a.n_grid.unwrap_or(params.n_grid);
    params.validate().map_err(|e| UsageError(e.to_string()))?;

    let cloud_files = files::list_files(&a.clouds, &["bin", "txt", "xyz"])?;
    let sparse_files = files::list_files(&a.sparse, &["omdr"])?;
    if cloud_files.is_empty() {
        bail!(UsageError(format!(
            "no point clouds in {}",
            a.clouds.display()
        )));
    }
    if cloud_files.len() != sparse_files.len() {
        return Err(CoreError::DimensionMismatch(format!(
            "{} clouds but {} sparse maps",
            cloud_files.len(),
            sparse_files.len()
        ))
        .into());
    }
    let extr = extrinsics_or_nominal(cfg, a.extrinsics.as_deref())?;
    let mut clouds = cloud_files
        .iter()
        .enumerate()
        .map(|(i, p)| load_cloud(p, i))
        .collect::<Result<Vec<_>>>()?;
    let sparse = sparse_files
        .iter()
        .map(|p| {
            let m = files::read_raster(p)?;
            check_geometry(&m, &cfg.geometry, p)?;
            if m.kind != MapKind::Depth {
                bail!(UsageError(format!("{} is not a depth map", p.display())));
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>>>()?;
    let mode = match &a.poses {
        Some(p) => {
            let poses = parse_poses(&files::read(p)?)
                .with_context(|| format!("parsing {}", p.display()))?;
            if poses.len() != clouds.len() {
                return Err(CoreError::DimensionMismatch(format!(
                    "{} poses for {} clouds",
                    poses.len(),
                    clouds.len()
                ))
                .into());
            }
            for (c, pose) in clouds.iter_mut().zip(poses) {
                c.pose = Some(pose);
            }
            AggregationMode::Transformed
        }
        None if cfg.aggregation == AggregationMode::Transformed => {
            bail!(UsageError("transformed aggregation needs --poses".into()))
        }
        None => AggregationMode::NoMovement,
    };

    // frames near the sequence ends fuse fewer clouds; a derived distance
    // limit follows the actual count
    let aggregate = |i: usize| -> Result<(PointCloud, CompletionParams, usize)> {
        let agg = temporal_aggregate(&clouds, i, params.m, mode)?;
        let fused = agg.frames.clone().count();
        Ok((
            agg.cloud,
            params.with_rig_for_clouds(&cfg.lidar, fused),
            fused,
        ))
    };

    let sequence_threshold = match a.threshold {
        ThresholdScope::Frame => None,
        ThresholdScope::Sequence => {
            let mut per_frame = Vec::new();
            for i in 0..clouds.len() {
                let (cloud, p, _) = aggregate(i)?;
                let q = interpolate_queries(&cloud, &p)?;
                if let Some(t) = q.uncertainty_threshold(params.rip) {
                    per_frame.push(t);
                }
            }
            average_threshold(&per_frame)
        }
    };

    let mut outputs = Vec::with_capacity(clouds.len());
    let mut reports = Vec::with_capacity(clouds.len());
    for i in 0..clouds.len() {
        let (cloud, p, fused) = aggregate(i)?;
        let mut q = interpolate_queries(&cloud, &p)?;
        let t = match a.threshold {
            ThresholdScope::Frame => q.uncertainty_threshold(params.rip),
            ThresholdScope::Sequence => sequence_threshold,
        };
        q.apply_threshold(t);
        let (map, stats) = q.render(&sparse[i], &cfg.geometry, &extr, t)?;
        info!(
            "frame {i}: {} -> {} labels, ARIP {:.3}",
            stats.original_labels, stats.completed_labels, stats.arip
        );
        reports.push(FrameReport {
            file: files::file_name(&sparse_files[i]),
            fused_clouds: fused,
            t_ood: p.ood_limit(),
            stats,
            rlp: rlp(&sparse[i], &map).ok(),
        });
        outputs.push(map);
    }
    let report = CompletionReport {
        params,
        aggregation: mode,
        threshold_scope: format!("{:?}", a.threshold).to_lowercase(),
        sequence_threshold,
        mean_arip: reports.iter().map(|r| r.stats.arip).sum::<f64>() / reports.len() as f64,
        frames: reports,
    };
    files::create_dir(&a.output)?;
    for (map, src) in outputs.iter().zip(&sparse_files) {
        files::write(&a.output.join(files::file_name(src)), &encode_raster(map))?;
    }
    files::write_json(&a.output.join("stats.json"), &report)
}

#[derive(Serialize)]
struct EvaluationReport {
    aggregation: Aggregation,
    images: Vec<String>,
    #[serde(flatten)]
    report: TaggedReport,
}

pub fn evaluate(_cfg: &PipelineConfig, a: &EvaluateArgs) -> Result<()> {
    if a.lrce && a.gt_completed.is_none() {
        bail!(UsageError(
            "--lrce needs completed ground-truth maps (--gt-completed)".into()
        ));
    }
    let preds = files::list_files(&a.pred, &["omdr"])?;
    if preds.is_empty() {
        bail!(UsageError(format!("no rasters in {}", a.pred.display())));
    }
    let tags_path = a.gt.join("tags.txt");
    let tags = if tags_path.is_file() {
        files::parse_tags(&String::from_utf8_lossy(&files::read(&tags_path)?))
    } else {
        Default::default()
    };
    let mut loaded = Vec::with_capacity(preds.len());
    for p in &preds {
        let name = files::file_name(p);
        let pred = files::read_raster(p)?;
        let gt = files::read_raster(&a.gt.join(&name))?;
        if pred.kind != gt.kind {
            return Err(CoreError::DimensionMismatch(format!(
                "{name}: prediction is {} but ground truth is {}",
                pred.kind.tag(),
                gt.kind.tag()
            ))
            .into());
        }
        let completed = match (&a.gt_completed, a.lrce) {
            (Some(dir), true) => Some(files::read_raster(&dir.join(&name))?),
            _ => None,
        };
        loaded.push((name, pred, gt, completed));
    }
    let samples: Vec<Sample> = loaded
        .iter()
        .map(|(name, pred, gt, completed)| Sample {
            pred,
            gt,
            gt_completed: completed.as_ref(),
            tag: tags.get(&files::file_stem(Path::new(name))).cloned(),
        })
        .collect();
    let aggregation = if a.pooled {
        Aggregation::Pooled
    } else {
        Aggregation::PerImage
    };
    let report = metrics::evaluate(&samples, aggregation, a.lrce)?;
    let out = EvaluationReport {
        aggregation,
        images: loaded.iter().map(|l| l.0.clone()).collect(),
        report,
    };
    files::write_json(&a.output, &out)
}

#[derive(Serialize)]
struct ConversionSummary {
    converted: usize,
    /// Disparities raised to the clamp floor before inversion.
    clamped: usize,
    /// Pixels whose value has no valid conversion.
    dropped: usize,
}

pub fn convert(cfg: &PipelineConfig, a: &ConvertArgs) -> Result<()> {
    let input = files::read_raster(&a.input)?;
    let geom = cfg.geometry;
    check_geometry(&input, &geom, &a.input)?;
    let baseline = a.baseline.unwrap_or(cfg.rig.baseline);
    if !(baseline.is_finite() && baseline > 0.0) {
        bail!(UsageError(format!("baseline {baseline} must be positive")));
    }
    let (from, to) = match a.to {
        Target::Depth => (MapKind::Disparity, MapKind::Depth),
        Target::Disparity => (MapKind::Depth, MapKind::Disparity),
    };
    if input.kind != from {
        bail!(UsageError(format!(
            "{} is a {} map; expected {}",
            a.input.display(),
            input.kind.tag(),
            from.tag()
        )));
    }
    let mut out = LabelMap::empty(to, input.width(), input.height());
    let mut summary = ConversionSummary {
        converted: 0,
        clamped: 0,
        dropped: 0,
    };
    for (col, row, v) in input.labels() {
        let theta = geom.row_theta(row);
        let value = match a.to {
            Target::Disparity => depth_to_disparity(v, theta, baseline).ok(),
            Target::Depth if a.clamp => {
                disparity_to_depth_clamped(v, theta, baseline, &cfg.disparity.clamp)
                    .ok()
                    .map(|c| {
                        summary.clamped += c.clamped as usize;
                        c.depth
                    })
            }
            Target::Depth => {
                if v < cfg.disparity.clamp.min_deg {
                    summary.clamped += 1;
                }
                disparity_to_depth(v, theta, baseline).ok()
            }
        };
        match value {
            Some(_) => summary.converted += 1,
            None => summary.dropped += 1,
        }
        out.set(col, row, value);
    }
    if summary.clamped > 0 {
        warn!(
            "{} disparities below the {}° floor",
            summary.clamped, cfg.disparity.clamp.min_deg
        );
    }
    files::write(&a.output, &encode_raster(&out))?;
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

pub fn simulate(cfg: &PipelineConfig, a: &SimulateArgs) -> Result<()> {
    let text = files::read(&a.scene)?;
    let scene: Scene = String::from_utf8_lossy(&text)
        .parse()
        .with_context(|| format!("parsing {}", a.scene.display()))?;
    if a.frames == 0 {
        bail!(UsageError("--frames must be at least 1".into()));
    }
    let step = match &a.step {
        Some(v) if v.len() == 3 && v.iter().all(|x| x.is_finite()) => Vec3::new(v[0], v[1], v[2]),
        Some(_) => bail!(UsageError("--step takes three finite values x,y,z".into())),
        None => Vec3::zeros(),
    };
    let rig = SimRig {
        geom: cfg.geometry,
        rig: cfg.rig,
        lidar: cfg.lidar,
        extrinsics: extrinsics_or_nominal(cfg, a.extrinsics.as_deref())?,
        camera_center: Vec3::zeros(),
    };
    rig.validate().map_err(|e| UsageError(e.to_string()))?;
    let centers: Vec<Vec3> = (0..a.frames).map(|i| step * i as f64).collect();
    let clouds = render_sequence(&scene, &rig, &centers, cfg.seed);
    let corrs = if a.correspondences > 0 {
        Some(make_correspondences(
            &scene,
            &rig,
            a.correspondences,
            a.noise_px,
            cfg.seed.wrapping_add(1),
        )?)
    } else {
        None
    };

    let dirs = ["clouds", "sparse", "depth", "disparity"].map(|d| a.output.join(d));
    for d in &dirs {
        files::create_dir(d)?;
    }
    let mut poses = Vec::with_capacity(a.frames);
    for (i, (cloud, center)) in clouds.iter().zip(&centers).enumerate() {
        let name = format!("frame_{i:04}");
        let (sparse, _) = project_cloud(cloud, &rig.geom, &rig.extrinsics);
        let depth = render_depth_map(&scene, center, &rig.geom);
        let disparity = gt_disparity_map(&depth, &rig.geom, rig.rig.baseline);
        files::write(
            &dirs[0].join(format!("{name}.bin")),
            &encode_points_binary(&cloud.to_cartesian()),
        )?;
        files::write(
            &dirs[1].join(format!("{name}.omdr")),
            &encode_raster(&sparse),
        )?;
        files::write(
            &dirs[2].join(format!("{name}.omdr")),
            &encode_raster(&depth),
        )?;
        files::write(
            &dirs[3].join(format!("{name}.omdr")),
            &encode_raster(&disparity),
        )?;
        poses.push(cloud.pose.unwrap_or_default());
    }
    files::write(&a.output.join("poses.txt"), format_poses(&poses).as_bytes())?;
    files::write_json(&a.output.join("extrinsics.json"), &rig.extrinsics)?;
    if let Some(c) = corrs {
        files::write(
            &a.output.join("correspondences.txt"),
            format_correspondences(&c).as_bytes(),
        )?;
    }
    Ok(())
}

pub fn colorize(a: &ColorizeArgs) -> Result<()> {
    let map = files::read_raster(&a.input)?;
    if let (Some(lo), Some(hi)) = (a.min, a.max) {
        if lo == hi {
            bail!(UsageError(format!("--min and --max are both {lo}")));
        }
    }
    let img = colormap::colorize(&map, a.colormap, a.min, a.max, a.inverse)
        .map_err(|e| UsageError(e.to_string()))?;
    let mut bytes = Vec::new();
    img.write_to(
        &mut std::io::Cursor::new(&mut bytes),
        image::ImageFormat::Png,
    )?;
    files::write(&a.output, &bytes)
}
