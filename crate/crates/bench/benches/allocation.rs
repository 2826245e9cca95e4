use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use vecc_bench::{fixture, scenario};
use vecc_core::oracle::{solve_dp, AllocationProblem, DEFAULT_ELIGIBILITY_BOUND};
use vecc_core::{run_single, run_sfa_with_demands};

fn demand(c: &mut Criterion) {
    let config = scenario(20, 30);
    let (vehicles, _) = fixture(&config, 1);
    c.bench_function("demand/30_users", |b| {
        b.iter(|| vehicles.iter().map(|v| v.demand(black_box(config.rb_capacity))).collect::<Vec<_>>())
    });
}

fn protocol(c: &mut Criterion) {
    let mut group = c.benchmark_group("sfa");
    for users in [30, 120, 480] {
        let config = scenario(10, users);
        let (_, demands) = fixture(&config, 2);
        group.bench_with_input(BenchmarkId::from_parameter(users), &demands, |b, d| {
            b.iter(|| run_sfa_with_demands(d, config.rb_capacity, black_box(9)).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle_dp");
    for users in [12, 24] {
        let config = scenario(10, users);
        let (vehicles, demands) = fixture(&config, 3);
        let problem = AllocationProblem::from_vehicles(&vehicles, &demands, config.rb_capacity).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(users), &problem, |b, p| {
            b.iter(|| solve_dp(p, DEFAULT_ELIGIBILITY_BOUND).unwrap())
        });
    }
    group.finish();
}

fn full_run(c: &mut Criterion) {
    let config = scenario(20, 30);
    c.bench_function("run_single/30_users", |b| b.iter(|| run_single(&config, black_box(4)).unwrap()));
}

criterion_group!(benches, demand, protocol, oracle, full_run);
criterion_main!(benches);
