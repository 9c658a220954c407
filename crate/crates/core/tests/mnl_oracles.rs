mod common;

use mnl_core::mnl::{choice_probabilities, expected_consumption, expected_revenue, sample_purchase};
use mnl_core::{Assortment, PreferenceVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn assortment_strategy(n: usize) -> impl Strategy<Value = Assortment> {
    proptest::collection::vec(any::<bool>(), n)
        .prop_map(|mask| Assortment::new(mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect()))
}

fn phi(i: usize, s: &Assortment, v: &[f64]) -> f64 {
    let mut denom = 1.0;
    for &j in s.members() {
        denom += v[j];
    }
    if s.contains(i) {
        v[i] / denom
    } else {
        0.0
    }
}

proptest! {
    #[test]
    fn probabilities_sum_to_one(
        v in proptest::collection::vec(1e-3f64..1e3, 1..12),
        bits in any::<u64>(),
    ) {
        let n = v.len();
        let s = Assortment::from_mask(bits & ((1 << n) - 1), n);
        let pv = PreferenceVector::new(v).unwrap();
        let p = choice_probabilities(&s, &pv).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|&x| (0.0..=1.0).contains(&x)));
        for i in 0..n {
            if !s.contains(i) {
                prop_assert_eq!(p[i + 1], 0.0);
            }
        }
    }

    #[test]
    fn revenue_and_consumption_match_direct_sum(
        n in 1usize..=5,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = common::random_instance(&mut rng, n, 3, 4.0);
        let v = inst.true_pref.values().to_vec();
        for mask in 0..(1u64 << n) {
            let s = Assortment::from_mask(mask, n);
            let direct: f64 = (0..n).map(|i| inst.revenue[i] * phi(i, &s, &v)).sum();
            prop_assert!((expected_revenue(&s, &inst.true_pref, &inst).unwrap() - direct).abs() <= 1e-12);
            for k in 0..3 {
                let direct: f64 = (0..n).map(|i| inst.consumption[i][k] * phi(i, &s, &v)).sum();
                let got = expected_consumption(&s, k, &inst.true_pref, &inst).unwrap();
                prop_assert!((got - direct).abs() <= 1e-12);
                prop_assert!((0.0..=1.0).contains(&got));
            }
        }
    }

    #[test]
    fn sampled_item_belongs_to_offer(s in assortment_strategy(8), seed in any::<u64>()) {
        let v = PreferenceVector::new(vec![0.5, 1.0, 2.0, 3.0, 0.2, 1.5, 0.9, 4.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            if let Some(i) = sample_purchase(&s, &v, &mut rng).unwrap() {
                prop_assert!(s.contains(i));
            }
        }
    }
}

fn weighted_gap(s: &Assortment, b: &[f64], v: &[f64], w: &[f64]) -> f64 {
    s.members().iter().map(|&i| b[i] * (phi(i, s, v) - phi(i, s, w))).sum()
}

fn log_gaps(s: &Assortment, v: &[f64], w: &[f64]) -> Vec<f64> {
    s.members().iter().map(|&i| (v[i] / w[i]).ln().abs()).collect()
}

// The per-item weighted form fails once weights differ: moving only an
// item with a tiny weight shifts the share of a heavily weighted one.
#[test]
fn per_item_weighted_form_has_counterexample() {
    let s = Assortment::new(vec![0, 1]);
    let (v, w, b) = ([1.0, 1.0], [1.0, 100.0], [0.9, 0.01]);
    let lhs = weighted_gap(&s, &b, &v, &w);
    let rhs: f64 = s.members().iter().map(|&i| b[i] * (v[i] / w[i]).ln().abs()).sum();
    assert!(lhs > 0.28 && rhs < 0.05);
}

#[test]
fn log_lipschitz_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..5000 {
        let n = rng.random_range(1..=10);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0f64..3.0).exp()).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0f64..3.0).exp()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let s = Assortment::from_mask(rng.random::<u64>() & ((1 << n) - 1), n);
        let lhs = weighted_gap(&s, &b, &v, &w);
        let gaps = log_gaps(&s, &v, &w);
        // 1-Lipschitz in the sup norm of log v, hence also in the l1 norm
        let sup = gaps.iter().copied().fold(0.0, f64::max);
        assert!(lhs <= sup + 1e-12, "{lhs} > {sup}");
        assert!(lhs <= gaps.iter().sum::<f64>() + 1e-12);
        // with a common weight the weighted form holds as written
        let c = b[0];
        let lhs_c = weighted_gap(&s, &vec![c; n], &v, &w);
        assert!(lhs_c <= c * gaps.iter().sum::<f64>() + 1e-12);
    }
}

fn chi_square_p_value(s: &Assortment, v: &PreferenceVector, seed: u64, draws: usize) -> f64 {
    let p = choice_probabilities(s, v).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; p.len()];
    for _ in 0..draws {
        counts[sample_purchase(s, v, &mut rng).unwrap().map_or(0, |i| i + 1)] += 1;
    }
    let cells: Vec<usize> = (0..p.len()).filter(|&c| p[c] > 0.0).collect();
    let stat: f64 = cells
        .iter()
        .map(|&c| {
            let e = p[c] * draws as f64;
            (counts[c] as f64 - e).powi(2) / e
        })
        .sum();
    let dof = (cells.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

#[test]
fn sampler_passes_goodness_of_fit() {
    let v = PreferenceVector::new(vec![0.3, 1.0, 2.5, 0.8, 4.0]).unwrap();
    let cases = [Assortment::new(vec![0, 1, 2, 3, 4]), Assortment::new(vec![1, 3]), Assortment::singleton(4)];
    for (seed, s) in cases.iter().enumerate() {
        let p = chi_square_p_value(s, &v, seed as u64 + 7, 100_000);
        assert!(p > 0.001, "p-value {p} for {s}");
    }
}

#[test]
fn empirical_frequencies() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v = PreferenceVector::new(vec![1.0, 1.0]).unwrap();
    let draws = 100_000;
    let one = Assortment::singleton(0);
    let bought = (0..draws).filter(|_| sample_purchase(&one, &v, &mut rng).unwrap() == Some(0)).count();
    assert!((0.49..=0.51).contains(&(bought as f64 / draws as f64)));

    let both = Assortment::new(vec![0, 1]);
    let mut counts = [0usize; 3];
    for _ in 0..draws {
        counts[sample_purchase(&both, &v, &mut rng).unwrap().map_or(0, |i| i + 1)] += 1;
    }
    for c in counts {
        assert!((c as f64 / draws as f64 - 1.0 / 3.0).abs() <= 0.01);
    }

    let empty = Assortment::empty();
    assert!((0..1000).all(|_| sample_purchase(&empty, &v, &mut rng).unwrap().is_none()));
}
