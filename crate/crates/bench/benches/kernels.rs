use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mfcd_core::dynamics;
use mfcd_core::meanfield;
use mfcd_core::propagate::{self, Workspace};
use mfcd_core::spin;
use mfcd_core::{Assist, EvolveOptions, ModelParams, Schedule};
use num_complex::Complex64;

fn bench_expmv(c: &mut Criterion) {
    let mut group = c.benchmark_group("expmv");
    for n in [100, 1000] {
        let params = ModelParams::new(1.0, 1e-3, n).unwrap();
        let t = spin::assemble_tridiagonal(params.spin_size(), &params, 1.0, 0.3).unwrap();
        let mut ws = Workspace::new(n + 1);
        let mut psi = vec![Complex64::new(0.0, 0.0); n + 1];
        psi[0] = Complex64::new(1.0, 0.0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| propagate::expmv(&t, black_box(1e-4), &mut psi, &mut ws))
        });
    }
    group.finish();
}

fn bench_solve_mz(c: &mut Criterion) {
    let params = ModelParams::new(1.0, 1e-3, 1000).unwrap();
    c.bench_function("solve_mz", |b| b.iter(|| meanfield::solve_mz(&params, black_box(0.8)).unwrap()));
}

fn bench_evolve(c: &mut Criterion) {
    let params = ModelParams::new(1.0, 1e-3, 100).unwrap();
    let schedule = Schedule::quintic(0.1).unwrap();
    let options = EvolveOptions { n_outputs: 11, ..EvolveOptions::default() };
    let mut group = c.benchmark_group("evolve");
    group.sample_size(10);
    group.bench_function("mean-field N=100 t_f=0.1", |b| {
        b.iter(|| dynamics::evolve(&params, &schedule, Assist::MeanField, &options).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_expmv, bench_solve_mz, bench_evolve);
criterion_main!(benches);
