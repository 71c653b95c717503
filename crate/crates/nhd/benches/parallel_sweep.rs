//! Parallel vs sequential throughput on the two workloads that dominate a
//! real sweep: dilation-operator construction and shot sampling.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use nhd::circuit::{sample_shots, MeasurementBasis, PauliAxis, StateVector};
use nhd::dilation::two_ancilla_target;
use nhd::exec;
use nhd::metric::{linspace, Hamiltonian};

fn build_ops(points: Vec<f64>, parallel: bool) -> f64 {
    let worker = |t: f64| {
        let h = Hamiltonian::gain_loss_qubit(1.2);
        nhd::dilation::two_ancilla_u_tot(&h, t, 0.0)
            .map(|op| op.unitarity_defect)
            .unwrap_or(f64::INFINITY)
    };
    let defects = if parallel { exec::map(points, worker) } else { exec::map_seq(points, worker) };
    defects.into_iter().fold(0.0, f64::max)
}

fn sample_grid(points: Vec<(f64, u64)>, parallel: bool) -> u64 {
    let worker = |(t, seed): (f64, u64)| {
        let h = Hamiltonian::gain_loss_qubit(0.9);
        let psi0 = [num_complex::Complex64::new(1.0, 0.0), num_complex::Complex64::new(0.0, 0.0)];
        let target = two_ancilla_target(&h, t, 0.0, &psi0).expect("valid grid point");
        let state = StateVector::new(target.state).expect("normalised register");
        let basis = MeasurementBasis::system_axis(PauliAxis::Y, 3);
        let record = sample_shots(&state, &basis, 4096, seed).expect("sampling");
        record.counts.values().sum::<u64>()
    };
    let counts = if parallel { exec::map(points, worker) } else { exec::map_seq(points, worker) };
    counts.into_iter().sum()
}

fn bench_operator_sweep(c: &mut Criterion) {
    let grid = linspace(0.0, 5.0, 64);
    let mut group = c.benchmark_group("operator_sweep");
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(build_ops(black_box(grid.clone()), true)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(build_ops(black_box(grid.clone()), false)))
    });
    group.finish();
}

fn bench_shot_sweep(c: &mut Criterion) {
    let points: Vec<(f64, u64)> =
        linspace(0.0, 5.0, 32).into_iter().enumerate().map(|(i, t)| (t, i as u64)).collect();
    let mut group = c.benchmark_group("shot_sweep");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(sample_grid(black_box(points.clone()), true)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(sample_grid(black_box(points.clone()), false)))
    });
    group.finish();
}

criterion_group!(benches, bench_operator_sweep, bench_shot_sweep);
criterion_main!(benches);
