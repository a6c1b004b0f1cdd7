use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use etdrk_bench::{fh_context, gl_context, smooth_field};
use etdrk_core::{phi_batch, polynomial_abs_max, Field, Mesh2D, SpectralPlan};
use std::hint::black_box;

fn bench_phi(c: &mut Criterion) {
    let zs: Vec<f64> = (0..16_384).map(|k| -1e-6 * 1.001f64.powi(k)).collect();
    let mut group = c.benchmark_group("phi_batch_16k");
    for j in [0, 1, 4, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(j), &j, |b, &j| b.iter(|| phi_batch(j, black_box(&zs)).unwrap()));
    }
    group.finish();
}

fn bench_transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("dct_round_trip");
    for n in [64, 128, 256] {
        let mesh = Mesh2D::square_2pi(n).unwrap();
        let plan = SpectralPlan::new(mesh, 0.1, 2.0).unwrap();
        let u = smooth_field(mesh);
        group.bench_with_input(BenchmarkId::from_parameter(n), &u, |b, u| {
            b.iter(|| plan.from_spectral(&plan.to_spectral(black_box(u)).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step_gl_128");
    group.sample_size(20);
    for order in [2, 3, 5] {
        for rescaled in [false, true] {
            let ctx = gl_context(128, order, 0.01, rescaled);
            let u = smooth_field(*ctx.plan().mesh());
            let id = format!("r{order}_{}", if rescaled { "rescaled" } else { "standard" });
            group.bench_function(id, |b| b.iter(|| ctx.step(black_box(&u)).unwrap()));
        }
    }
    group.finish();

    // Large steps on saturated data keep the rescale factor active at many points.
    let mut group = c.benchmark_group("step_fh_128_tau1");
    group.sample_size(10);
    for order in [3, 7] {
        let ctx = fh_context(128, order, 1.0);
        let beta = ctx.reaction().beta();
        let mesh = *ctx.plan().mesh();
        let u = Field::from_fn(mesh, |x, y| 0.99 * beta * (7.0 * x).sin().signum() * (5.0 * y).cos().abs().sqrt());
        group.bench_function(format!("r{order}"), |b| b.iter(|| ctx.step(black_box(&u)).unwrap()));
    }
    group.finish();
}

fn bench_poly_max(c: &mut Criterion) {
    let coeffs: Vec<[f64; 7]> = (0..1024)
        .map(|k| {
            let t = k as f64 * 0.618_033_988_75;
            std::array::from_fn(|i| ((i as f64 + 1.0) * t).sin())
        })
        .collect();
    c.bench_function("polynomial_abs_max_deg6_x1024", |b| {
        b.iter(|| coeffs.iter().map(|c| polynomial_abs_max(black_box(c)).0).sum::<f64>())
    });
}

criterion_group!(benches, bench_phi, bench_transform, bench_step, bench_poly_max);
criterion_main!(benches);
