use std::hint::black_box;

use accelerq::hyperopt::{optimize, HyperparamSpec, SearchConfig};
use accelerq::qcels::qcels_solve;
use accelerq::qsci::{adapt_qsci_solve, build_operator_pool, pool_gradients};
use accelerq::sim::hartree_fock_reference;
use accelerq::surrogate::train_gbt;
use accelerq::{ExecutionMode, GbtConfig, ShotBudget};
use accelerq_bench::{hubbard, ising};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn dense_oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact_ground_state");
    g.sample_size(10);
    for n in [6, 8, 10] {
        let h = ising(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| {
            b.iter(|| h.exact_ground_state().unwrap().energy)
        });
    }
    g.finish();
}

fn trotter(c: &mut Criterion) {
    let mut g = c.benchmark_group("trotter_evolve");
    for n in [8, 12, 16] {
        let h = ising(n);
        let psi = hartree_fock_reference(&h).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| {
            b.iter(|| {
                let mut s = psi.clone();
                s.trotter_evolve(h, 0.3, 6);
                black_box(s)
            })
        });
    }
    g.finish();
}

fn solvers(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_exact");
    g.sample_size(10);
    let h = hubbard(3);
    g.bench_function("qcels_hubbard6", |b| {
        b.iter(|| {
            let mut budget = ShotBudget::default();
            qcels_solve(
                &h,
                &Default::default(),
                &mut budget,
                ExecutionMode::Exact,
                0,
            )
            .unwrap()
            .estimate
            .value
        })
    });
    g.bench_function("adapt_qsci_hubbard6", |b| {
        b.iter(|| {
            let mut budget = ShotBudget::default();
            adapt_qsci_solve(
                &h,
                &Default::default(),
                &mut budget,
                ExecutionMode::Exact,
                0,
            )
            .unwrap()
            .estimate
            .value
        })
    });
    let h = ising(10);
    let pool = build_operator_pool(10);
    let psi = hartree_fock_reference(&h).unwrap();
    g.bench_function("pool_gradients_ising10", |b| {
        b.iter(|| pool_gradients(&h, &pool, &psi))
    });
    g.finish();
}

fn surrogate(c: &mut Criterion) {
    let mut g = c.benchmark_group("surrogate");
    g.sample_size(10);
    let x: Vec<Vec<f64>> = (0..800)
        .map(|i| {
            let t = i as f64;
            vec![
                (t * 0.37).sin(),
                (t * 0.11).cos(),
                (t * 0.07).sin(),
                t % 5.0,
            ]
        })
        .collect();
    let y: Vec<f64> = x.iter().map(|r| r[0] * r[1] + r[2]).collect();
    let cfg = GbtConfig::default();
    g.bench_function("train_800x4", |b| {
        b.iter(|| train_gbt(&x, &y, &cfg).unwrap().0)
    });
    let spec = HyperparamSpec::qcels();
    let f = |v: &[f64]| (v[0] - 0.1).powi(2) + (v[4] - 0.7).powi(2);
    g.bench_function("optimize_default_config", |b| {
        b.iter(|| {
            optimize(&f, &spec, &SearchConfig::default(), &[])
                .unwrap()
                .best_score
        })
    });
    g.finish();
}

criterion_group!(benches, dense_oracle, trotter, solvers, surrogate);
criterion_main!(benches);
