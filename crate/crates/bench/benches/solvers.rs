use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use mnl_core::estimation::{fit_mle_stats, ChoiceStats, MleSettings};
use mnl_core::harness::{generate_instance, instance_seed, Gamma, GAMMA_1, GAMMA_3, GAMMA_4};
use mnl_core::lp::{plan_distribution, solve_compact, UcbTerms};
use mnl_core::mnl::sample_purchase;
use mnl_core::policy::{run_ucb_policy, PolicyConfig};
use mnl_core::{Assortment, ProblemInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(gamma: &Gamma, horizon: usize) -> ProblemInstance {
    generate_instance(gamma, instance_seed(1, gamma, 0)).unwrap().with_horizon(horizon)
}

fn compact_lp(c: &mut Criterion) {
    let mut group = c.benchmark_group("compact_lp");
    for gamma in [GAMMA_1, GAMMA_3, GAMMA_4] {
        let inst = instance(&gamma, 1000);
        let none = UcbTerms::none(gamma.n);
        group.bench_with_input(BenchmarkId::new("plain", gamma.n), &inst, |b, inst| {
            b.iter(|| plan_distribution(black_box(&inst.true_pref), &none, inst).unwrap())
        });
    }
    let inst = instance(&GAMMA_1, 1000);
    let optimistic = UcbTerms { eps: vec![0.05; GAMMA_1.n], omega: 0.1 };
    group.bench_function("optimistic/10", |b| {
        b.iter(|| solve_compact(black_box(&inst.true_pref), &optimistic, &inst).unwrap())
    });
    group.finish();
}

fn mle(c: &mut Criterion) {
    let mut group = c.benchmark_group("mle");
    for gamma in [GAMMA_1, GAMMA_4] {
        let inst = instance(&gamma, 1000);
        let n = gamma.n;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut stats = ChoiceStats::new(n);
        for t in 0..5000 {
            let s = if t < 1000 {
                Assortment::singleton(t % n)
            } else {
                Assortment::from_mask(rng.random::<u64>() & ((1u64 << n.min(63)) - 1), n)
            };
            let p = sample_purchase(&s, &inst.true_pref, &mut rng).unwrap();
            stats.record(&s, p).unwrap();
        }
        group.bench_with_input(BenchmarkId::new("newton", n), &stats, |b, stats| {
            b.iter(|| fit_mle_stats(black_box(stats), gamma.r, &MleSettings::default()).unwrap())
        });
    }
    group.finish();
}

fn policy(c: &mut Criterion) {
    let mut group = c.benchmark_group("policy_run");
    group.sample_size(10);
    let inst = instance(&GAMMA_3, 5000);
    for alpha in [0.0, 0.5] {
        group.bench_with_input(BenchmarkId::new("gamma3_T5000", alpha), &alpha, |b, &alpha| {
            b.iter(|| run_ucb_policy(&inst, &PolicyConfig::with_alpha(alpha, 7)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, compact_lp, mle, policy);
criterion_main!(benches);
