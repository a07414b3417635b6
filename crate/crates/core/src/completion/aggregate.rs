use serde::{Deserialize, Serialize};

use super::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{cart_to_spherical, spherical_to_cart};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    /// Concatenate raw sensor-frame points.
    #[default]
    NoMovement,
    /// Move every cloud into the center cloud's frame using the supplied poses.
    Transformed,
}

#[derive(Debug, Clone)]
pub struct Aggregated {
    pub cloud: PointCloud,
    /// Frame indices (positions in the input sequence) that were fused.
    pub frames: std::ops::RangeInclusive<usize>,
    /// The requested window ran past a sequence end.
    pub truncated: bool,
}

/// Fuses clouds `center − m ..= center + m`, truncated at the sequence ends.
pub fn temporal_aggregate(
    clouds: &[PointCloud],
    center: usize,
    m: usize,
    mode: AggregationMode,
) -> Result<Aggregated> {
    if center >= clouds.len() {
        return Err(Error::InvalidParameter(format!(
            "center frame {center} outside sequence of {} clouds",
            clouds.len()
        )));
    }
    let lo = center.saturating_sub(m);
    let hi = (center + m).min(clouds.len() - 1);
    let truncated = center < m || center + m >= clouds.len();

    let center_pose_inv = match mode {
        AggregationMode::NoMovement => None,
        AggregationMode::Transformed => Some(
            clouds[center]
                .pose
                .ok_or_else(|| Error::InvalidParameter(format!("cloud {center} has no pose")))?
                .inverse(),
        ),
    };

    let mut points = Vec::with_capacity(clouds[lo..=hi].iter().map(|c| c.points.len()).sum());
    for (j, cloud) in clouds.iter().enumerate().take(hi + 1).skip(lo) {
        match &center_pose_inv {
            None => points.extend_from_slice(&cloud.points),
            Some(_) if j == center => points.extend_from_slice(&cloud.points),
            Some(inv) => {
                let pose = cloud
                    .pose
                    .ok_or_else(|| Error::InvalidParameter(format!("cloud {j} has no pose")))?;
                let to_center = inv.compose(&pose);
                let r = to_center.rotation_matrix();
                for p in &cloud.points {
                    let q = r * spherical_to_cart(p) + to_center.translation;
                    // a point that lands on the sensor origin carries no direction
                    if let Ok(sp) = cart_to_spherical(&q) {
                        points.push(sp);
                    }
                }
            }
        }
    }

    Ok(Aggregated {
        cloud: PointCloud {
            points,
            frame_index: clouds[center].frame_index,
            pose: clouds[center].pose,
        },
        frames: lo..=hi,
        truncated,
    })
}
