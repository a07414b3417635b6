//! k-nearest-neighbor search over spherical (θ, φ) positions.
//!
//! Distances are planar in (θ, φ) degrees with the azimuth difference
//! wrapped to [-180°, 180°]. Points are bucketed on a regular θ × φ cell
//! grid whose azimuth axis is a ring; a query visits Chebyshev rings of cells
//! around its own cell until no unvisited cell can hold a closer point.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::geometry::{azimuth_delta, SphericalPoint};

/// Planar angular distance between two (θ, φ) directions, degrees.
#[inline]
pub fn angular_distance(theta_q: f64, phi_q: f64, theta_p: f64, phi_p: f64) -> f64 {
    let dt = theta_q - theta_p;
    let dp = azimuth_delta(phi_q, phi_p);
    (dt * dt + dp * dp).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    /// Insertion index of the point in the indexed cloud.
    pub id: usize,
    pub distance: f64,
    pub point: SphericalPoint,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    theta: f64,
    phi: f64,
    id: u32,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    distance: f64,
    id: u32,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.id.cmp(&other.id))
    }
}

/// Immutable bucket-grid index; safe to share across threads.
#[derive(Debug, Clone)]
pub struct SphereIndex {
    points: Vec<SphericalPoint>,
    entries: Vec<Entry>,
    cell_start: Vec<u32>,
    n_theta: usize,
    n_phi: usize,
    cell_theta: f64,
    cell_phi: f64,
}

impl SphereIndex {
    /// Builds with a cell size sized for roughly `k_hint` points per cell.
    pub fn build(points: Vec<SphericalPoint>, k_hint: usize) -> Self {
        let cell = auto_cell_size(&points, k_hint);
        Self::with_cell_size(points, cell)
    }

    pub fn with_cell_size(points: Vec<SphericalPoint>, cell_deg: f64) -> Self {
        assert!(
            points.len() < u32::MAX as usize,
            "index holds at most u32::MAX points"
        );
        let cell_deg = cell_deg.clamp(1e-3, 180.0);
        let n_theta = (180.0 / cell_deg).ceil().max(1.0) as usize;
        let n_phi = (360.0 / cell_deg).ceil().max(1.0) as usize;
        let mut idx = SphereIndex {
            points: Vec::new(),
            entries: Vec::new(),
            cell_start: Vec::new(),
            n_theta,
            n_phi,
            cell_theta: 180.0 / n_theta as f64,
            cell_phi: 360.0 / n_phi as f64,
        };

        let cells: Vec<usize> = points
            .iter()
            .map(|p| {
                let (t, f) = idx.cell_of(p.theta, p.phi);
                t * n_phi + f
            })
            .collect();
        let mut counts = vec![0u32; n_theta * n_phi + 1];
        for &c in &cells {
            counts[c + 1] += 1;
        }
        for i in 1..counts.len() {
            counts[i] += counts[i - 1];
        }
        let mut cursor = counts.clone();
        let mut entries = vec![
            Entry {
                theta: 0.0,
                phi: 0.0,
                id: 0
            };
            points.len()
        ];
        // stable fill keeps insertion order inside each cell
        for (id, (p, &c)) in points.iter().zip(&cells).enumerate() {
            entries[cursor[c] as usize] = Entry {
                theta: p.theta,
                phi: p.phi,
                id: id as u32,
            };
            cursor[c] += 1;
        }
        idx.points = points;
        idx.entries = entries;
        idx.cell_start = counts;
        idx
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SphericalPoint] {
        &self.points
    }

    pub fn cell_size(&self) -> (f64, f64) {
        (self.cell_theta, self.cell_phi)
    }

    fn cell_of(&self, theta: f64, phi: f64) -> (usize, usize) {
        let t = ((theta / self.cell_theta).floor().max(0.0) as usize).min(self.n_theta - 1);
        let f = ((phi + 180.0) / self.cell_phi).floor();
        let f = (f as i64).rem_euclid(self.n_phi as i64) as usize;
        (t, f)
    }

    fn ring_dist(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b);
        d.min(self.n_phi - d)
    }

    /// The `k` nearest points ordered by ascending distance, ties broken by
    /// insertion order.
    pub fn knn(&self, theta: f64, phi: f64, k: usize) -> Result<Vec<Neighbor>> {
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.points.len() < k {
            return Err(Error::InsufficientData(format!(
                "cloud has {} points, fewer than k = {k}",
                self.points.len()
            )));
        }
        let (t0, f0) = self.cell_of(theta, phi);
        let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
        let max_theta_ring = t0.max(self.n_theta - 1 - t0);
        let full_phi_ring = self.n_phi / 2;
        let min_cell = self.cell_theta.min(self.cell_phi);

        let mut ring = 0usize;
        loop {
            let t_lo = t0.saturating_sub(ring);
            let t_hi = (t0 + ring).min(self.n_theta - 1);
            let phi_all = 2 * ring + 1 >= self.n_phi;
            let prev_phi_all = ring > 0 && 2 * (ring - 1) + 1 >= self.n_phi;
            let n_phi = self.n_phi as i64;
            let lo = (f0 as i64 - ring as i64).rem_euclid(n_phi) as usize;
            let hi = (f0 as i64 + ring as i64).rem_euclid(n_phi) as usize;
            let edge_new = !prev_phi_all && (ring == 0 || self.ring_dist(lo, f0) == ring);
            for t in t_lo..=t_hi {
                let row = t * self.n_phi;
                if t0.abs_diff(t) == ring {
                    if phi_all {
                        for f in 0..self.n_phi {
                            self.scan_cell(row + f, theta, phi, k, &mut heap);
                        }
                    } else {
                        for d in -(ring as i64)..=ring as i64 {
                            let f = (f0 as i64 + d).rem_euclid(n_phi) as usize;
                            self.scan_cell(row + f, theta, phi, k, &mut heap);
                        }
                    }
                } else if edge_new {
                    // only the two azimuth edges of this row are new
                    self.scan_cell(row + lo, theta, phi, k, &mut heap);
                    if hi != lo {
                        self.scan_cell(row + hi, theta, phi, k, &mut heap);
                    }
                }
            }

            let covered = ring >= max_theta_ring && phi_all;
            // Unvisited cells are more than `ring` cells away on some axis,
            // hence at least ring·cell degrees from the query.
            let bound = ring as f64 * min_cell * (1.0 - 1e-12);
            if covered || (heap.len() == k && heap.peek().is_some_and(|c| c.distance < bound)) {
                break;
            }
            ring += 1;
            if ring > max_theta_ring.max(full_phi_ring) + 1 {
                break;
            }
        }

        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        Ok(out
            .into_iter()
            .map(|c| Neighbor {
                id: c.id as usize,
                distance: c.distance,
                point: self.points[c.id as usize],
            })
            .collect())
    }

    fn scan_cell(
        &self,
        cell: usize,
        theta: f64,
        phi: f64,
        k: usize,
        heap: &mut BinaryHeap<Candidate>,
    ) {
        let (s, e) = (
            self.cell_start[cell] as usize,
            self.cell_start[cell + 1] as usize,
        );
        for entry in &self.entries[s..e] {
            let cand = Candidate {
                distance: angular_distance(theta, phi, entry.theta, entry.phi),
                id: entry.id,
            };
            if heap.len() < k {
                heap.push(cand);
            } else if heap.peek().is_some_and(|top| cand < *top) {
                heap.pop();
                heap.push(cand);
            }
        }
    }
}

fn auto_cell_size(points: &[SphericalPoint], k_hint: usize) -> f64 {
    if points.is_empty() {
        return 10.0;
    }
    let (lo, hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.theta), hi.max(p.theta))
        });
    let band = (hi - lo).max(1.0);
    (band * 360.0 * k_hint.max(1) as f64 / points.len() as f64)
        .sqrt()
        .clamp(0.05, 30.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(points: &[SphericalPoint], theta: f64, phi: f64, k: usize) -> Vec<(usize, f64)> {
        let mut all: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (angular_distance(theta, phi, p.theta, p.phi), i))
            .collect();
        all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        all.into_iter().take(k).map(|(d, i)| (i, d)).collect()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(angular_distance(30.0, 40.0, 30.0, 40.0), 0.0);
        let d = angular_distance(90.0, 0.0, 90.0 + 0.33125, 0.17578125);
        assert!((d - 0.375_000_813_8).abs() < 1e-9);
        let d = angular_distance(90.0, 179.9, 90.0, -179.9);
        assert!((d - 0.2).abs() < 1e-9);
    }

    #[test]
    fn coincident_query() {
        let pts = vec![
            SphericalPoint::new(1.0, 80.0, 10.0),
            SphericalPoint::new(2.0, 85.0, 12.0),
        ];
        let idx = SphereIndex::build(pts, 1);
        let n = idx.knn(85.0, 12.0, 1).unwrap();
        assert_eq!(n[0].id, 1);
        assert_eq!(n[0].distance, 0.0);
        assert!(idx.knn(85.0, 12.0, 3).is_err());
        assert!(idx.knn(85.0, 12.0, 0).is_err());
    }

    #[test]
    fn wraps_across_seam() {
        let pts = vec![
            SphericalPoint::new(1.0, 90.0, -179.99),
            SphericalPoint::new(1.0, 90.0, 0.0),
            SphericalPoint::new(1.0, 90.0, 170.0),
        ];
        let idx = SphereIndex::with_cell_size(pts, 1.0);
        let n = idx.knn(90.0, 179.99, 1).unwrap();
        assert_eq!(n[0].id, 0);
        assert!((n[0].distance - 0.02).abs() < 1e-9);
    }

    #[test]
    fn ties_follow_insertion_order() {
        let pts = vec![
            SphericalPoint::new(1.0, 91.0, 0.0),
            SphericalPoint::new(2.0, 89.0, 0.0),
            SphericalPoint::new(3.0, 90.0, 1.0),
            SphericalPoint::new(4.0, 90.0, -1.0),
        ];
        let idx = SphereIndex::with_cell_size(pts, 0.7);
        let ids: Vec<_> = idx
            .knn(90.0, 0.0, 3)
            .unwrap()
            .iter()
            .map(|n| n.id)
            .collect();
        assert_eq!(ids, vec![0, 1, 2]);
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..200 {
            let n = rng.random_range(1..120);
            let pts: Vec<_> = (0..n)
                .map(|_| {
                    SphericalPoint::new(
                        rng.random_range(0.5..50.0),
                        rng.random_range(0.0..180.0),
                        rng.random_range(-180.0..180.0),
                    )
                })
                .collect();
            let cell = [0.3, 2.0, 17.0, 90.0][trial % 4];
            let idx = SphereIndex::with_cell_size(pts.clone(), cell);
            for _ in 0..5 {
                let k = rng.random_range(1..=n.min(20));
                let (t, f) = (
                    rng.random_range(0.0..180.0),
                    rng.random_range(-180.0..180.0),
                );
                let got: Vec<_> = idx
                    .knn(t, f, k)
                    .unwrap()
                    .iter()
                    .map(|x| (x.id, x.distance))
                    .collect();
                assert_eq!(got, brute(&pts, t, f, k));
            }
        }
    }
}
