//! Microbenchmarks for the hot paths: statevector simulation, gradient
//! plan construction and evaluation, the adjoint full-gradient sweep,
//! and Pauli-sum grouping.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qgrad::benchmarks::{hst_pqc, ising_target, qnn_gates, qnn_pqc, Topology};
use qgrad::{build_plan, exact_gradient, partition, GradMethod, GroupingCriterion, Pqc};

/// The 4-qubit classifier circuit at a fixed input: three gates whose
/// generators have 1, 16, and 16 terms — a realistic mixed workload.
fn classifier() -> (Pqc, Vec<f64>) {
    let pqc = qnn_pqc(&[0.4, 1.1, 2.2, 0.9]).unwrap();
    (pqc, vec![0.3, -0.4, 0.25])
}

/// The 6-qubit compilation PQC (overlap test against a seeded target).
fn compiler() -> (Pqc, Vec<f64>) {
    let (target, _) = ising_target(3, 2, 42).unwrap();
    let pqc = hst_pqc(&target, 2, Topology::Ring).unwrap();
    (pqc, vec![0.2, -0.1, 0.15, 0.05])
}

fn bench_eval(c: &mut Criterion) {
    let (pqc, theta) = classifier();
    c.bench_function("eval/classifier_4q", |b| {
        b.iter(|| pqc.eval(black_box(&theta)).unwrap())
    });
    let (pqc, theta) = compiler();
    c.bench_function("eval/compiler_6q", |b| {
        b.iter(|| pqc.eval(black_box(&theta)).unwrap())
    });
}

fn bench_plans(c: &mut Criterion) {
    let (pqc, theta) = classifier();
    let mut build = c.benchmark_group("plan_build");
    for method in GradMethod::HARDWARE {
        // Parameter 2 carries the 16-term diagonal generator.
        if method == GradMethod::Psr {
            continue; // not feasible on the 17-level spectrum
        }
        build.bench_function(method.to_string(), |b| {
            b.iter(|| build_plan(black_box(&pqc), &theta, 2, method).unwrap())
        });
    }
    build.finish();

    let mut eval = c.benchmark_group("plan_eval");
    for method in [GradMethod::Ht, GradMethod::Rht, GradMethod::Dht] {
        let plan = build_plan(&pqc, &theta, 2, method).unwrap();
        eval.bench_function(method.to_string(), |b| {
            b.iter(|| black_box(&plan).evaluate().unwrap())
        });
    }
    eval.finish();
}

fn bench_gradient(c: &mut Criterion) {
    let (pqc, theta) = compiler();
    c.bench_function("exact_gradient/compiler_6q", |b| {
        b.iter(|| exact_gradient(black_box(&pqc), &theta).unwrap())
    });
}

fn bench_grouping(c: &mut Criterion) {
    // The 16-term diagonal generator of the classifier's second gate.
    let gates = qnn_gates().unwrap();
    let sum = gates[1].generator();
    let mut group = c.benchmark_group("partition_16_terms");
    for (name, criterion) in [
        ("full_commutativity", GroupingCriterion::FullCommutativity),
        ("qubit_wise", GroupingCriterion::QubitWise),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| partition(black_box(sum), criterion).unwrap())
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_eval,
    bench_plans,
    bench_gradient,
    bench_grouping
);
criterion_main!(benches);
