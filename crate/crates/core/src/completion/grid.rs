//! Deterministic near-uniform query directions on the sphere.

/// Golden angle in degrees, 180·(3 − √5).
const GOLDEN_ANGLE_DEG: f64 = 137.507_764_050_037_85;

/// `i`-th of `n` Fibonacci-lattice directions as `(θ, φ)` in degrees.
/// Points are equally spaced in cos θ, which makes the lattice equal-area.
#[inline]
pub fn fibonacci_point(i: usize, n: usize) -> (f64, f64) {
    let z = 1.0 - (2 * i + 1) as f64 / n as f64;
    let theta = z.clamp(-1.0, 1.0).acos().to_degrees();
    let phi = (i as f64 * GOLDEN_ANGLE_DEG).rem_euclid(360.0) - 180.0;
    (theta, phi)
}

/// Fibonacci lattice of `n_grid` points restricted to θ ∈ [t_θ, 180° − t_θ].
pub fn generate_query_grid(n_grid: usize, t_theta: f64) -> Vec<(f64, f64)> {
    if n_grid == 0 {
        return Vec::new();
    }
    let (lo, hi) = (t_theta, 180.0 - t_theta);
    // θ grows with i, so only an index window can fall in the band; widen
    // it by one on each side and let the exact test decide.
    let n = n_grid as f64;
    let index_of = |theta: f64| (n * (1.0 - theta.to_radians().cos()) - 1.0) / 2.0;
    let first = index_of(lo).floor().max(1.0) as usize - 1;
    let last = (index_of(hi).ceil() as usize + 1).min(n_grid - 1);
    (first..=last)
        .map(|i| fibonacci_point(i, n_grid))
        .filter(|&(t, _)| t >= lo && t <= hi)
        .collect()
}

/// Expected fraction of an equal-area lattice inside the band.
pub fn band_fraction(t_theta: f64) -> f64 {
    (t_theta.to_radians().cos() - (180.0 - t_theta).to_radians().cos()) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_angle_constant() {
        assert!((GOLDEN_ANGLE_DEG - 180.0 * (3.0 - 5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn window_matches_full_filter() {
        for &(n, t) in &[
            (1000usize, 68.8),
            (12345, 30.0),
            (7, 80.0),
            (1, 0.0),
            (50_000, 89.9),
        ] {
            let full: Vec<_> = (0..n)
                .map(|i| fibonacci_point(i, n))
                .filter(|&(th, _)| th >= t && th <= 180.0 - t)
                .collect();
            assert_eq!(generate_query_grid(n, t), full, "n={n} t={t}");
        }
    }

    #[test]
    fn whole_sphere_keeps_everything() {
        assert_eq!(generate_query_grid(5000, 0.0).len(), 5000);
    }

    #[test]
    fn band_count_matches_solid_angle() {
        let n = 1_000_000;
        let kept = generate_query_grid(n, 68.8).len() as f64;
        assert!((band_fraction(68.8) - 0.361_624_570_082_092_3).abs() < 1e-12);
        assert!((kept - 361_600.0).abs() / 361_600.0 < 0.01, "kept {kept}");
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            generate_query_grid(10_000, 60.0),
            generate_query_grid(10_000, 60.0)
        );
    }
}
