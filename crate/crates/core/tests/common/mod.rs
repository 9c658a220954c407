#![allow(dead_code)]

use mnl_core::lp::UcbTerms;
use mnl_core::{PreferenceVector, ProblemInstance};
use rand::Rng;

pub fn random_instance<R: Rng>(rng: &mut R, n: usize, k: usize, util_bound: f64) -> ProblemInstance {
    let revenue = (0..n).map(|_| rng.random::<f64>()).collect();
    let consumption = (0..n).map(|_| (0..k).map(|_| rng.random::<f64>()).collect()).collect();
    let capacity = (0..k).map(|_| rng.random_range(0.05..0.8)).collect();
    let log_r = util_bound.ln();
    let v = (0..n).map(|_| rng.random_range(-log_r..log_r).exp()).collect();
    ProblemInstance::new(revenue, consumption, capacity, 1000, PreferenceVector::new(v).unwrap(), util_bound).unwrap()
}

/// Synthetic optimism: `eps_i` in (0, 0.1], `omega` in [0, 0.2].
pub fn random_terms<R: Rng>(rng: &mut R, n: usize) -> UcbTerms {
    UcbTerms {
        eps: (0..n).map(|_| 0.1 - rng.random_range(0.0..0.1)).collect(),
        omega: rng.random_range(0.0..=0.2),
    }
}

pub fn random_pref<R: Rng>(rng: &mut R, n: usize, util_bound: f64) -> PreferenceVector {
    let log_r = util_bound.ln();
    PreferenceVector::new((0..n).map(|_| rng.random_range(-log_r..=log_r).exp()).collect()).unwrap()
}
