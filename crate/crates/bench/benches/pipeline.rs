use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use renorm_bench::{disk_grid, disk_map, search_problem, torus_map, RESOLUTIONS};
use renorm_core::{
    build_polar_grid, decompose, detect_map, minimize_positions, renormalized_energy, torus_decompose, torus_energy,
    GreenKernel,
};

fn disk(c: &mut Criterion) {
    let map = disk_map();
    let mut group = c.benchmark_group("disk");
    group.sample_size(10);
    for res in RESOLUTIONS {
        let id = format!("{}x{}", res.0, res.1);
        let grid = disk_grid(&map, res);
        group.bench_with_input(BenchmarkId::new("decompose", &id), &grid, |b, grid| {
            b.iter(|| decompose(black_box(&map), grid.clone()).unwrap())
        });
        let parts = decompose(&map, grid.clone()).unwrap();
        group.bench_with_input(BenchmarkId::new("energy", &id), &parts, |b, parts| {
            b.iter(|| renormalized_energy(black_box(&map), parts).unwrap())
        });
        let plain = build_polar_grid(res.0, res.1, &[]).unwrap();
        group.bench_with_input(BenchmarkId::new("detect", &id), &plain, |b, grid| {
            b.iter(|| detect_map(grid, black_box(&map)).unwrap())
        });
    }
    group.finish();
}

fn torus(c: &mut Criterion) {
    let map = torus_map();
    let mut group = c.benchmark_group("torus");
    group.sample_size(10);
    for n in [64, 128, 256] {
        group.bench_with_input(BenchmarkId::new("energy_theta", n), &n, |b, &n| {
            b.iter(|| torus_energy(&torus_decompose(black_box(&map), GreenKernel::Theta).unwrap(), n).unwrap())
        });
    }
    group.bench_function("energy_fourier_32/64", |b| {
        b.iter(|| {
            torus_energy(&torus_decompose(black_box(&map), GreenKernel::Fourier { cutoff: 32 }).unwrap(), 64).unwrap()
        })
    });
    group.finish();
}

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("minimize");
    group.sample_size(10);
    let one = search_problem(vec![1], 1);
    group.bench_function("evaluation", |b| b.iter(|| one.energy(black_box(&[Complex64::new(0.2, -0.1)]))));
    group.bench_function("single_start", |b| b.iter(|| minimize_positions(black_box(&one)).unwrap()));
    let pair = search_problem(vec![1, 1, -1], 4);
    group.bench_function("three_vortices_four_starts", |b| b.iter(|| minimize_positions(black_box(&pair)).unwrap()));
    group.finish();
}

criterion_group!(benches, disk, torus, search);
criterion_main!(benches);
