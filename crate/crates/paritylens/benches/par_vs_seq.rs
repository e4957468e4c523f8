//! Compares the worker-pool implementations against their single-threaded
//! twins: exhaustive enumeration, Monte Carlo simulation, and the policy
//! feasibility scan. Both members of each pair produce identical results;
//! only wall-clock time differs.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use paritylens::fairness::Criterion as Goal;
use paritylens::impossibility::{enumerate_verify, enumerate_verify_sequential, EnumBounds};
use paritylens::rational::rat;
use paritylens::sdmodel::{
    feasibility_search, simulate, simulate_sequential, EmployerPayoffs, FeasibilityOptions,
    HiringPolicy, PhelpsianScenario,
};
use std::hint::black_box;
use std::time::Duration;

fn blind_scenario() -> PhelpsianScenario {
    PhelpsianScenario::prevalence(
        rat(2, 5),
        rat(3, 5),
        rat(1, 2),
        EmployerPayoffs::new(rat(1, 1), rat(-2, 1)).expect("valid payoffs"),
    )
    .expect("valid scenario")
}

fn bench_enumeration(c: &mut Criterion) {
    let bounds = EnumBounds {
        x_arity: 2,
        mass_denominator: 4,
        prob_denominator: 2,
    };
    let mut group = c.benchmark_group("enumerate_26730_pairs");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    group.bench_function(BenchmarkId::new("pool", "default"), |b| {
        b.iter(|| enumerate_verify(black_box(&bounds)).expect("bounds accepted"))
    });
    group.bench_function(BenchmarkId::new("sequential", "twin"), |b| {
        b.iter(|| enumerate_verify_sequential(black_box(&bounds)).expect("bounds accepted"))
    });
    group.finish();
}

fn bench_simulation(c: &mut Criterion) {
    let s = blind_scenario();
    let pol = HiringPolicy::new(rat(1, 4), rat(1, 3)).expect("valid policy");
    let n = 2_000_000u64;
    let mut group = c.benchmark_group("simulate_2M_records");
    group.sample_size(10).measurement_time(Duration::from_secs(20));
    group.bench_function(BenchmarkId::new("pool", "default"), |b| {
        b.iter(|| simulate(black_box(&s), black_box(&pol), n, 7))
    });
    group.bench_function(BenchmarkId::new("sequential", "twin"), |b| {
        b.iter(|| simulate_sequential(black_box(&s), black_box(&pol), n, 7))
    });
    group.finish();
}

fn bench_feasibility(c: &mut Criterion) {
    let s = blind_scenario();
    let opts = FeasibilityOptions::default();
    let mut group = c.benchmark_group("feasibility_101_grid");
    for (name, goal) in [
        ("error-rate-balance", Goal::ErrorRateBalance),
        ("pos-pred-parity", Goal::PosPredParity),
        ("predictive-parity", Goal::PredictiveParity),
    ] {
        group.bench_function(name, |b| {
            b.iter(|| feasibility_search(black_box(&s), goal, black_box(&opts)).expect("search"))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_enumeration, bench_simulation, bench_feasibility);
criterion_main!(benches);
