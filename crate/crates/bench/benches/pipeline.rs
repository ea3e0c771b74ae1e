use std::hint::black_box;

use bellsim_bench::{cat_pps, cat_run};
use bellsim_core::bell::{chsh_spec, correlation_qm, joint_probabilities, sample_shots, MeasurementDirection};
use bellsim_core::lrhvm::{bulk_chsh_curve, polarization_sweep};
use bellsim_core::readout::{measure_pauli_expectations, tomography_reconstruct};
use bellsim_core::PureState;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn bulk_curve(c: &mut Criterion) {
    let mut group = c.benchmark_group("bulk_chsh_curve");
    for points in [19, 181] {
        let run = cat_run(points);
        group.bench_with_input(BenchmarkId::from_parameter(points), &run, |b, run| {
            b.iter(|| bulk_chsh_curve(black_box(run)).unwrap())
        });
    }
    group.finish();
}

fn correlation_paths(c: &mut Criterion) {
    let mut group = c.benchmark_group("correlation");
    for n in [2, 4, 6] {
        let rho = cat_pps(n, 1e-6);
        let dirs: Vec<_> = (0..n)
            .map(|q| MeasurementDirection::new(0.2 * q as f64 + 0.1, 0.3))
            .collect();
        group.bench_with_input(BenchmarkId::new("trace", n), &n, |b, _| {
            b.iter(|| correlation_qm(black_box(&rho), black_box(&dirs)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("readout", n), &n, |b, _| {
            b.iter(|| joint_probabilities(black_box(&rho), black_box(&dirs)).unwrap())
        });
    }
    group.finish();
}

fn sweep_and_shots(c: &mut Criterion) {
    let cat = PureState::cat(2).unwrap();
    let eps: Vec<f64> = (1..=20).map(|k| 0.05 * k as f64).collect();
    let theta = 22.5_f64.to_radians();
    c.bench_function("polarization_sweep_20", |b| {
        b.iter(|| polarization_sweep(black_box(&cat), black_box(&eps), theta).unwrap())
    });

    let rho = cat_pps(2, 1.0);
    let spec = chsh_spec(theta);
    let dist = joint_probabilities(&rho, &spec.term_directions(&spec.terms()[0])).unwrap();
    c.bench_function("sample_shots_1e6", |b| {
        b.iter(|| sample_shots(black_box(&dist), 1_000_000, 9).unwrap())
    });
}

fn tomography(c: &mut Criterion) {
    let mut group = c.benchmark_group("tomography");
    for n in [1, 2, 3] {
        let rho = cat_pps(n, 0.5);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| {
                let expectations = measure_pauli_expectations(black_box(&rho), None).unwrap();
                tomography_reconstruct(&expectations).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bulk_curve, correlation_paths, sweep_and_shots, tomography);
criterion_main!(benches);
