use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use heis_tube::{
    cc_distance, det_b, frame_at, project_to_surface, tube_volume_h1, tube_volume_hn, Point, ProjectionOptions,
    SurfaceQuadrature, EPS_SING,
};
use heis_tube_bench::{paraboloid_h1, paraboloid_h2, saddle_seeds, sample_points};

fn distance(c: &mut Criterion) {
    for n in [1, 3] {
        let pts = sample_points(n, 64);
        c.bench_function(&format!("cc_distance/h{n}"), |b| {
            b.iter(|| pts.windows(2).map(|w| cc_distance(&w[0], &w[1])).sum::<f64>())
        });
    }
}

fn surface_frame(c: &mut Criterion) {
    let (s, patch) = paraboloid_h2();
    let q = patch.point(&s, &[0.5, -0.1, 0.3, -0.1]).unwrap();
    c.bench_function("frame_at/h2", |b| {
        b.iter(|| frame_at(&s, black_box(&q), EPS_SING).unwrap())
    });
    c.bench_function("det_b/h2", |b| b.iter(|| det_b(&s, black_box(&q), 0.2).unwrap()));
}

fn projection(c: &mut Criterion) {
    let (s, seeds) = saddle_seeds();
    let p = Point::new(&[0.4, -0.7], 1.1);
    let opts = ProjectionOptions::default();
    c.bench_function("project/saddle", |b| {
        b.iter(|| project_to_surface(&s, black_box(&p), &seeds, &opts).unwrap())
    });
}

fn tube(c: &mut Criterion) {
    let radii = [0.05, 0.1, 0.2];
    let quad = SurfaceQuadrature::default();
    let (s1, p1) = paraboloid_h1();
    c.bench_function("tube_volume_h1/paraboloid", |b| {
        b.iter(|| tube_volume_h1(&s1, &p1, quad, &radii).unwrap())
    });
    let (s2, p2) = paraboloid_h2();
    let coarse = SurfaceQuadrature { nodes: 5, panels: 1 };
    let mut g = c.benchmark_group("tube_volume_hn");
    g.sample_size(10);
    g.bench_function("paraboloid_h2", |b| {
        b.iter(|| tube_volume_hn(&s2, &p2, coarse, &radii).unwrap())
    });
    g.finish();
}

criterion_group!(benches, distance, surface_frame, projection, tube);
criterion_main!(benches);
