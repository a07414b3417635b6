use super::knn::Neighbor;
use super::RigConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Interpolation {
    pub r_q: f64,
    /// One weight per neighbor, summing to 1.
    pub weights: Vec<f64>,
}

/// Inverse-distance weighted depth. Neighbors at distance zero take all the
/// weight (shared equally among them).
pub fn interpolate_depth(neighbors: &[Neighbor]) -> Result<Interpolation> {
    if neighbors.is_empty() {
        return Err(Error::InsufficientData(
            "no neighbors to interpolate".into(),
        ));
    }
    let exact = neighbors.iter().filter(|n| n.distance == 0.0).count();
    let weights: Vec<f64> = if exact > 0 {
        let w = 1.0 / exact as f64;
        neighbors
            .iter()
            .map(|n| if n.distance == 0.0 { w } else { 0.0 })
            .collect()
    } else {
        let inv: Vec<f64> = neighbors.iter().map(|n| 1.0 / n.distance).collect();
        let total: f64 = inv.iter().sum();
        inv.into_iter().map(|v| v / total).collect()
    };
    let r_q = if exact == 1 {
        neighbors
            .iter()
            .find(|n| n.distance == 0.0)
            .map(|n| n.point.r)
            .unwrap_or_default()
    } else {
        weights
            .iter()
            .zip(neighbors)
            .map(|(w, n)| w * n.point.r)
            .sum()
    };
    Ok(Interpolation { r_q, weights })
}

/// Relative weighted variance `Σ w_i ((r_q − r_i) / r_q)²`.
pub fn uncertainty(r_q: f64, neighbors: &[Neighbor], weights: &[f64]) -> Result<f64> {
    if !(r_q > 0.0 && r_q.is_finite()) {
        return Err(Error::Degenerate(format!(
            "interpolated depth {r_q} must be positive"
        )));
    }
    Ok(weights
        .iter()
        .zip(neighbors)
        .map(|(w, n)| {
            let rel = (r_q - n.point.r) / r_q;
            w * rel * rel
        })
        .sum())
}

/// Mean angular distance to the neighbors, degrees.
pub fn ood_distance(neighbors: &[Neighbor]) -> f64 {
    if neighbors.is_empty() {
        return 0.0;
    }
    neighbors.iter().map(|n| n.distance).sum::<f64>() / neighbors.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OodThreshold {
    /// Mean distance from the middle of a LiDAR grid cell to its
    /// `neighbors_per_scan` nearest grid points, degrees.
    pub t_ood: f64,
    pub delta_theta: f64,
    pub delta_phi: f64,
    /// Neighbors contributed per fused scan, `k / (2m + 1)`.
    pub neighbors_per_scan: f64,
}

/// Out-of-distribution threshold from the LiDAR's angular resolution.
///
/// Each of the `2m + 1` fused scans is assumed to supply `k / (2m + 1)` of
/// the `k` neighbors. The worst-placed query sits in the middle of a grid
/// cell; the threshold is its mean distance to that many nearest grid
/// points, the last one weighted by the fractional part. Up to four
/// neighbors per scan this is the half-diagonal of a cell.
pub fn derive_ood_threshold(rig: &RigConfig, m: usize, k: usize) -> OodThreshold {
    derive_ood_threshold_for_clouds(rig, 2 * m + 1, k)
}

/// [`derive_ood_threshold`] for an arbitrary number of fused clouds, as at
/// the ends of a sequence where the aggregation window is cut short.
pub fn derive_ood_threshold_for_clouds(rig: &RigConfig, clouds: usize, k: usize) -> OodThreshold {
    let delta_theta = rig.fov_v / rig.n_beams as f64;
    let delta_phi = rig.fov_h / rig.n_channels_h as f64;
    let n = k as f64 / clouds.max(1) as f64;
    let half_diagonal = (0.25 * delta_theta * delta_theta + 0.25 * delta_phi * delta_phi).sqrt();
    let t_ood = if n <= 4.0 {
        half_diagonal
    } else {
        // grid points (i + ½)Δθ, (j + ½)Δφ around the cell center
        let aspect = delta_theta.max(delta_phi) / delta_theta.min(delta_phi);
        let reach = (n.sqrt() * aspect).ceil() as i64 + 2;
        let mut d: Vec<f64> = (-reach..reach)
            .flat_map(|i| (-reach..reach).map(move |j| (i, j)))
            .map(|(i, j)| ((i as f64 + 0.5) * delta_theta).hypot((j as f64 + 0.5) * delta_phi))
            .collect();
        d.sort_by(f64::total_cmp);
        let whole = n.floor() as usize;
        let frac = n - whole as f64;
        (d[..whole].iter().sum::<f64>() + frac * d[whole]) / n
    };
    OodThreshold {
        t_ood,
        delta_theta,
        delta_phi,
        neighbors_per_scan: n,
    }
}

/// Polar margin outside a LiDAR vertical field of view `fov_v` centered on the horizon.
pub fn derive_theta_limit(fov_v: f64) -> Result<f64> {
    if !(fov_v > 0.0 && fov_v <= 180.0) {
        return Err(Error::InvalidParameter(format!(
            "vertical field of view {fov_v}° must lie in (0, 180]"
        )));
    }
    Ok((180.0 - fov_v) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SphericalPoint;

    fn nb(distance: f64, r: f64) -> Neighbor {
        Neighbor {
            id: 0,
            distance,
            point: SphericalPoint::new(r, 90.0, 0.0),
        }
    }

    #[test]
    fn constant_field() {
        let n = [nb(0.1, 2.0), nb(0.5, 2.0), nb(0.3, 2.0)];
        let i = interpolate_depth(&n).unwrap();
        assert!((i.r_q - 2.0).abs() < 1e-15);
        assert_eq!(uncertainty(i.r_q, &n, &i.weights).unwrap(), 0.0);
    }

    #[test]
    fn inverse_distance_weights() {
        let n = [nb(1.0, 3.0), nb(2.0, 6.0)];
        let i = interpolate_depth(&n).unwrap();
        assert!((i.weights[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((i.weights[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((i.r_q - 4.0).abs() < 1e-14);
    }

    #[test]
    fn exact_hit() {
        let n = [nb(0.2, 9.0), nb(0.0, 5.0), nb(0.4, 1.0)];
        let i = interpolate_depth(&n).unwrap();
        assert_eq!(i.r_q, 5.0);
        assert_eq!(i.weights, vec![0.0, 1.0, 0.0]);
        assert!(interpolate_depth(&[]).is_err());
    }

    #[test]
    fn uncertainty_examples() {
        let n = [nb(1.0, 2.0), nb(1.0, 4.0)];
        let s = uncertainty(3.0, &n, &[0.5, 0.5]).unwrap();
        assert!((s - 1.0 / 9.0).abs() < 1e-15);
        let n10 = [nb(1.0, 20.0), nb(1.0, 40.0)];
        let s10 = uncertainty(30.0, &n10, &[0.5, 0.5]).unwrap();
        assert!((s - s10).abs() < 1e-15);
        assert!(uncertainty(0.0, &n, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn ood_examples() {
        assert!((ood_distance(&[nb(0.1, 1.0), nb(0.3, 1.0)]) - 0.2).abs() < 1e-15);
        assert_eq!(ood_distance(&[nb(0.0, 1.0), nb(0.0, 1.0)]), 0.0);
    }

    #[test]
    fn thresholds() {
        let t = derive_ood_threshold(&RigConfig::default(), 4, 17);
        assert!((t.t_ood - 0.375).abs() < 1e-3);
        assert!((t.neighbors_per_scan - 17.0 / 9.0).abs() < 1e-15);
        let rig = RigConfig {
            fov_v: 180.0,
            n_beams: 180,
            fov_h: 360.0,
            n_channels_h: 360,
            frame_rate_hz: 10.0,
        };
        let t = derive_ood_threshold(&rig, 0, 1);
        assert!((t.t_ood - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((derive_theta_limit(42.4).unwrap() - 68.8).abs() < 1e-12);
        assert_eq!(derive_theta_limit(180.0).unwrap(), 0.0);
        assert_eq!(derive_theta_limit(90.0).unwrap(), 45.0);
        assert!(derive_theta_limit(0.0).is_err());
    }

    #[test]
    fn denser_neighbor_demand_widens_threshold() {
        let rig = RigConfig::default();
        let half = derive_ood_threshold(&rig, 4, 17).t_ood;
        // up to four neighbors per scan all sit on the cell corners
        assert_eq!(derive_ood_threshold(&rig, 1, 12).t_ood, half);
        // by hand: 4 corners at the half-diagonal, then 2 points at
        // (Δθ/2, 3Δφ/2), weighted 1 and 2/3 for n = 17/3
        let (dt, dp): (f64, f64) = (42.4 / 64.0, 360.0 / 1024.0);
        let next = (0.5 * dt).hypot(1.5 * dp);
        let expect = (4.0 * half + next + (2.0 / 3.0) * next) / (17.0 / 3.0);
        let t = derive_ood_threshold(&rig, 1, 17).t_ood;
        assert!((t - expect).abs() < 1e-12, "{t} vs {expect}");
        let mut prev = 0.0;
        for k in 1..200 {
            let t = derive_ood_threshold(&rig, 0, k).t_ood;
            assert!(t >= prev);
            prev = t;
        }
    }

    #[test]
    fn lattice_mean_matches_wide_enumeration() {
        let rig = RigConfig::default();
        let (dt, dp): (f64, f64) = (42.4 / 64.0, 360.0 / 1024.0);
        let mut all: Vec<f64> = (-60i64..60)
            .flat_map(|i| (-60i64..60).map(move |j| (i, j)))
            .map(|(i, j)| ((i as f64 + 0.5) * dt).hypot((j as f64 + 0.5) * dp))
            .collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(
            derive_ood_threshold_for_clouds(&rig, 3, 17),
            derive_ood_threshold(&rig, 1, 17)
        );
        for k in [5usize, 17, 40, 100, 333] {
            let n = k as f64;
            let w = n.floor() as usize;
            let expect = (all[..w].iter().sum::<f64>() + (n - w as f64) * all[w]) / n;
            let t = derive_ood_threshold(&rig, 0, k).t_ood;
            assert!((t - expect).abs() < 1e-12, "k={k}");
        }
    }
}
