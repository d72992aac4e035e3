use std::f64::consts::PI;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use steklov_lab::assembly::{assemble_stiffness_with, discrete_problem, schur_reduce};
use steklov_lab::eigensolve::solve_problem;
use steklov_lab::experiments::{stability_sweep, PerturbationMode, StabilityConfig};
use steklov_lab::geometry::{ArcSet, BoundaryCurve};
use steklov_lab::meshing::mesh_domain;
use steklov_lab::optimizer::{optimize_arcs, Objective, OptimConfig};
use steklov_lab::Execution;

const POLICIES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn half_circle() -> ArcSet {
    ArcSet::new(BoundaryCurve::circle(1.0).unwrap().shared(), [(0.0, PI)]).unwrap()
}

fn assembly(c: &mut Criterion) {
    let arcs = half_circle();
    let mesh = mesh_domain(arcs.curve(), &arcs, 0.01).unwrap();
    let mut g = c.benchmark_group("stiffness assembly");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| assemble_stiffness_with(&mesh, exec).unwrap()));
    }
    g.finish();
}

fn eigenvector_extension(c: &mut Criterion) {
    let arcs = half_circle();
    let mesh = Arc::new(mesh_domain(arcs.curve(), &arcs, 0.02).unwrap());
    let p = schur_reduce(discrete_problem(mesh, Execution::Sequential).unwrap()).unwrap();
    let mut g = c.benchmark_group("eigensolve with harmonic extension, k = 8");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| solve_problem(&p, 8, exec).unwrap()));
    }
    g.finish();
}

fn stability(c: &mut Criterion) {
    let cfg = StabilityConfig {
        arcs: half_circle(),
        k: 1,
        h: 0.1,
        epsilons: StabilityConfig::geometric_grid(6),
        mode: PerturbationMode::EndpointShift,
        signal_ratio: 10.0,
    };
    let mut g = c.benchmark_group("stability sweep");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| stability_sweep(&cfg, exec).unwrap()));
    }
    g.finish();
}

fn optimizer_restarts(c: &mut Criterion) {
    let curve = BoundaryCurve::unit_square().shared();
    let cfg = OptimConfig {
        objective: Objective::Minimize,
        k: 1,
        m: 0.25,
        components: 1,
        h_target: 0.1,
        budget: 15,
        tolerance: 1e-6,
        restarts: 4,
        seed: 7,
        optimize_phase: None,
        morph: None,
    };
    let mut g = c.benchmark_group("optimizer restarts");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| optimize_arcs(&curve, &cfg, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, assembly, eigenvector_extension, stability, optimizer_restarts);
criterion_main!(benches);
