//! Shared fixtures for the `geometry` benchmarks.

use heis_tube::{LevelSurface, Patch, Point, SeedGrid};

/// ℍ¹ paraboloid `t = |z|²` over a patch away from its vertex.
pub fn paraboloid_h1() -> (LevelSurface, Patch) {
    (
        LevelSurface::paraboloid(1, 1.0),
        Patch::graph_box(2, &[0.3, -0.4], &[0.9, 0.5], 0.0).expect("valid patch"),
    )
}

/// ℍ² paraboloid over a patch away from its vertex.
pub fn paraboloid_h2() -> (LevelSurface, Patch) {
    (
        LevelSurface::paraboloid(2, 1.0),
        Patch::graph_box(4, &[0.2, -0.5, 0.1, -0.4], &[0.8, 0.3, 0.6, 0.2], 0.0).expect("valid patch"),
    )
}

/// `t − x₁y₁ = 0` with the seed lattice used for projections.
pub fn saddle_seeds() -> (LevelSurface, SeedGrid) {
    let s = LevelSurface::saddle_t_xy(1);
    let patch = Patch::graph_box(2, &[-2.0, -3.0], &[2.0, 3.0], 0.0).expect("valid patch");
    let seeds = SeedGrid::new(&s, &patch, 24).expect("regular lattice");
    (s, seeds)
}

/// Deterministic spread of points in ℍⁿ.
pub fn sample_points(n: usize, count: usize) -> Vec<Point> {
    (0..count)
        .map(|k| {
            let a = k as f64 * 0.618_033_988_749_895;
            let z: Vec<f64> = (0..2 * n).map(|i| (a * (i + 1) as f64).sin()).collect();
            Point::new(&z, (1.7 * a).cos())
        })
        .collect()
}
