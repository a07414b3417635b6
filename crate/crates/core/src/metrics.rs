//! Benchmark metrics over masked rasters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::LabelMap;

/// How pixel errors are combined across images.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    /// Mean over each image's valid pixels, then mean over images.
    #[default]
    PerImage,
    /// One mean over every valid pixel of every image.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PixelErrors {
    pub mae: f64,
    pub rmse: f64,
    pub mare: f64,
    pub image_count: usize,
    pub evaluated_pixel_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LrceResult {
    pub lrce: f64,
    /// Images with at least one valid edge pair.
    pub image_count: usize,
    pub pair_count: usize,
    /// Rows labeled at both gt edges but not at both prediction edges.
    pub skipped_pairs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mae: f64,
    pub rmse: f64,
    pub mare: f64,
    pub lrce: Option<f64>,
    pub image_count: usize,
    pub evaluated_pixel_count: usize,
    pub lrce_skipped_pairs: usize,
}

fn check_shape(pred: &LabelMap, gt: &LabelMap, i: usize) -> Result<()> {
    if pred.width() != gt.width() || pred.height() != gt.height() {
        return Err(Error::DimensionMismatch(format!(
            "image {i}: prediction {}x{} vs ground truth {}x{}",
            pred.width(),
            pred.height(),
            gt.width(),
            gt.height()
        )));
    }
    Ok(())
}

/// Sums of |e|, e², |e|/gt and the pixel count over pixels labeled in both.
fn image_sums(pred: &LabelMap, gt: &LabelMap) -> (f64, f64, f64, usize) {
    let mut s = (0.0, 0.0, 0.0, 0);
    for (col, row, y) in gt.labels() {
        if let Some(p) = pred.get(col, row) {
            let e = (p - y).abs();
            s.0 += e;
            s.1 += e * e;
            s.2 += e / y;
            s.3 += 1;
        }
    }
    s
}

/// MAE, RMSE and MARE over `(prediction, ground truth)` pairs.
pub fn pixel_errors(pairs: &[(&LabelMap, &LabelMap)], mode: Aggregation) -> Result<PixelErrors> {
    if pairs.is_empty() {
        return Err(Error::InsufficientData("no images to evaluate".into()));
    }
    let mut per_image = Vec::with_capacity(pairs.len());
    for (i, (pred, gt)) in pairs.iter().enumerate() {
        check_shape(pred, gt, i)?;
        let s = image_sums(pred, gt);
        if s.3 == 0 {
            return Err(Error::InsufficientData(format!(
                "image {i} has no pixel labeled in both prediction and ground truth"
            )));
        }
        per_image.push(s);
    }
    let total: usize = per_image.iter().map(|s| s.3).sum();
    let (mae, rmse, mare) = match mode {
        Aggregation::PerImage => {
            let n = per_image.len() as f64;
            let mut acc = (0.0, 0.0, 0.0);
            for &(a, q, r, c) in &per_image {
                let c = c as f64;
                acc.0 += a / c;
                acc.1 += (q / c).sqrt();
                acc.2 += r / c;
            }
            (acc.0 / n, acc.1 / n, acc.2 / n)
        }
        Aggregation::Pooled => {
            let n = total as f64;
            let sum = per_image
                .iter()
                .fold((0.0, 0.0, 0.0), |a, s| (a.0 + s.0, a.1 + s.1, a.2 + s.2));
            (sum.0 / n, (sum.1 / n).sqrt(), sum.2 / n)
        }
    };
    Ok(PixelErrors {
        mae,
        rmse,
        mare,
        image_count: pairs.len(),
        evaluated_pixel_count: total,
    })
}

pub fn masked_mae(pairs: &[(&LabelMap, &LabelMap)]) -> Result<f64> {
    Ok(pixel_errors(pairs, Aggregation::PerImage)?.mae)
}

pub fn masked_rmse(pairs: &[(&LabelMap, &LabelMap)]) -> Result<f64> {
    Ok(pixel_errors(pairs, Aggregation::PerImage)?.rmse)
}

pub fn masked_mare(pairs: &[(&LabelMap, &LabelMap)]) -> Result<f64> {
    Ok(pixel_errors(pairs, Aggregation::PerImage)?.mare)
}

/// Left-right consistency error across the 360° seam. The ground truth
/// should be a completed map so that enough rows carry both edge labels.
pub fn lrce(pairs: &[(&LabelMap, &LabelMap)]) -> Result<LrceResult> {
    let mut per_image = Vec::new();
    let mut pair_count = 0;
    let mut skipped = 0;
    for (i, (pred, gt)) in pairs.iter().enumerate() {
        check_shape(pred, gt, i)?;
        let last = gt.width() - 1;
        let (mut sum, mut n) = (0.0, 0usize);
        for row in 0..gt.height() {
            let (Some(gl), Some(gr)) = (gt.get(0, row), gt.get(last, row)) else {
                continue;
            };
            match (pred.get(0, row), pred.get(last, row)) {
                (Some(pl), Some(pr)) => {
                    sum += ((gl - gr).abs() - (pl - pr).abs()).abs();
                    n += 1;
                }
                _ => skipped += 1,
            }
        }
        if n > 0 {
            per_image.push(sum / n as f64);
            pair_count += n;
        }
    }
    if per_image.is_empty() {
        return Err(Error::InsufficientData(
            "no row is labeled at both edges in ground truth and prediction".into(),
        ));
    }
    Ok(LrceResult {
        lrce: per_image.iter().sum::<f64>() / per_image.len() as f64,
        image_count: per_image.len(),
        pair_count,
        skipped_pairs: skipped,
    })
}

fn check_lists(estimates: &[f64], truths: &[f64]) -> Result<()> {
    if estimates.is_empty() {
        return Err(Error::InsufficientData(
            "inlier ratio of an empty set".into(),
        ));
    }
    if estimates.len() != truths.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} estimates vs {} truths",
            estimates.len(),
            truths.len()
        )));
    }
    Ok(())
}

/// Fraction of estimates whose relative error is below `t_inlier`.
pub fn inlier_ratio(estimates: &[f64], truths: &[f64], t_inlier: f64) -> Result<f64> {
    check_lists(estimates, truths)?;
    let n = estimates
        .iter()
        .zip(truths)
        .filter(|(e, t)| ((*e - *t) / *t).abs() < t_inlier)
        .count();
    Ok(n as f64 / estimates.len() as f64)
}

/// Fraction of estimates whose absolute error is below `t_inlier`.
pub fn inlier_ratio_absolute(estimates: &[f64], truths: &[f64], t_inlier: f64) -> Result<f64> {
    check_lists(estimates, truths)?;
    let n = estimates
        .iter()
        .zip(truths)
        .filter(|(e, t)| (*e - *t).abs() < t_inlier)
        .count();
    Ok(n as f64 / estimates.len() as f64)
}

/// One evaluated frame.
pub struct Sample<'a> {
    pub pred: &'a LabelMap,
    pub gt: &'a LabelMap,
    /// Completed ground truth for the seam metric.
    pub gt_completed: Option<&'a LabelMap>,
    pub tag: Option<String>,
}

/// Full report plus one report per scene tag.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TaggedReport {
    pub overall: MetricsReport,
    pub by_tag: BTreeMap<String, MetricsReport>,
}

fn report_for(samples: &[&Sample], mode: Aggregation, with_lrce: bool) -> Result<MetricsReport> {
    let pairs: Vec<_> = samples.iter().map(|s| (s.pred, s.gt)).collect();
    let px = pixel_errors(&pairs, mode)?;
    let mut report = MetricsReport {
        mae: px.mae,
        rmse: px.rmse,
        mare: px.mare,
        lrce: None,
        image_count: px.image_count,
        evaluated_pixel_count: px.evaluated_pixel_count,
        lrce_skipped_pairs: 0,
    };
    if with_lrce {
        let mut seam = Vec::with_capacity(samples.len());
        for (i, s) in samples.iter().enumerate() {
            let gt = s.gt_completed.ok_or_else(|| {
                Error::InvalidParameter(format!("image {i} has no completed ground truth"))
            })?;
            seam.push((s.pred, gt));
        }
        let l = lrce(&seam)?;
        report.lrce = Some(l.lrce);
        report.lrce_skipped_pairs = l.skipped_pairs;
    }
    Ok(report)
}

/// Evaluates all samples, then each scene tag separately.
pub fn evaluate(samples: &[Sample], mode: Aggregation, with_lrce: bool) -> Result<TaggedReport> {
    let all: Vec<&Sample> = samples.iter().collect();
    let overall = report_for(&all, mode, with_lrce)?;
    let mut groups: BTreeMap<&str, Vec<&Sample>> = BTreeMap::new();
    for s in samples {
        if let Some(tag) = &s.tag {
            groups.entry(tag).or_default().push(s);
        }
    }
    let mut by_tag = BTreeMap::new();
    for (tag, group) in groups {
        by_tag.insert(tag.to_string(), report_for(&group, mode, with_lrce)?);
    }
    Ok(TaggedReport { overall, by_tag })
}
