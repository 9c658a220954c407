//! The optimistic assortment LP written over every assortment explicitly.
//!
//! Exponential in `N`, so it is only used as an oracle for small instances
//! and, restricted to a handful of columns, to shrink a sampling
//! distribution to a basic one.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mnl::{Assortment, PreferenceVector, ProblemInstance};

use super::compact::{recover_distribution, solve_compact};
use super::simplex::{LinearProgram, Relation};
use super::UcbTerms;

/// Largest `N` for which all `2^N` assortments are enumerated.
pub const ENUMERATION_LIMIT: usize = 20;

/// Weighted assortments with weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssortmentDistribution {
    atoms: Vec<(Assortment, f64)>,
}

impl AssortmentDistribution {
    pub fn new(atoms: Vec<(Assortment, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput("distribution needs at least one atom".into()));
        }
        if atoms.iter().any(|(_, w)| !(*w > 0.0)) {
            return Err(Error::InvalidInput("atom weights must be positive".into()));
        }
        let total: f64 = atoms.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
        }
        for (a, (s, _)) in atoms.iter().enumerate() {
            if atoms[..a].iter().any(|(t, _)| t == s) {
                return Err(Error::InvalidInput(format!("assortment {s} listed twice")));
            }
        }
        Ok(AssortmentDistribution { atoms })
    }

    /// Point mass on one assortment.
    pub fn degenerate(s: Assortment) -> Self {
        AssortmentDistribution { atoms: vec![(s, 1.0)] }
    }

    pub fn atoms(&self) -> &[(Assortment, f64)] {
        &self.atoms
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    /// Index of an atom drawn by inverse CDF with one uniform.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, (_, w)) in self.atoms.iter().enumerate() {
            acc += w;
            if u < acc {
                return a;
            }
        }
        self.atoms.len() - 1
    }
}

/// Reward and per-resource consumption of one assortment column.
fn column(s: &Assortment, v: &PreferenceVector, terms: &UcbTerms, inst: &ProblemInstance) -> (f64, Vec<f64>) {
    let denom = v.denominator(s);
    let mut reward = 0.0;
    let mut usage = vec![0.0; inst.n_resources];
    for &i in s.members() {
        let phi = v[i] / denom;
        reward += inst.revenue[i] * (phi + terms.eps[i]);
        for (k, u) in usage.iter_mut().enumerate() {
            *u += inst.consumption[i][k] * (phi - terms.eps[i]);
        }
    }
    (reward, usage)
}

fn check(v: &PreferenceVector, terms: &UcbTerms, inst: &ProblemInstance) -> Result<()> {
    if v.len() != inst.n_products {
        return Err(Error::DimensionMismatch { expected: inst.n_products, actual: v.len() });
    }
    terms.validate(inst.n_products)
}

/// Objective of the optimistic LP at a distribution.
pub fn ucb_objective(
    dist: &AssortmentDistribution,
    v: &PreferenceVector,
    terms: &UcbTerms,
    inst: &ProblemInstance,
) -> Result<f64> {
    check(v, terms, inst)?;
    Ok(dist.atoms.iter().map(|(s, w)| w * column(s, v, terms, inst).0).sum())
}

/// Left-hand side of each (optimistic) resource row at a distribution.
pub fn ucb_resource_usage(
    dist: &AssortmentDistribution,
    v: &PreferenceVector,
    terms: &UcbTerms,
    inst: &ProblemInstance,
) -> Result<Vec<f64>> {
    check(v, terms, inst)?;
    let mut total = vec![0.0; inst.n_resources];
    for (s, w) in &dist.atoms {
        let (_, usage) = column(s, v, terms, inst);
        for (t, u) in total.iter_mut().zip(usage) {
            *t += w * u;
        }
    }
    Ok(total)
}

/// Solves the LP restricted to the given columns; returns the solution,
/// plus the basic solution's column weights.
fn solve_over_columns(
    columns: &[Assortment],
    v: &PreferenceVector,
    terms: &UcbTerms,
    inst: &ProblemInstance,
) -> Result<(super::simplex::LpSolution, LinearProgram)> {
    let k = inst.n_resources;
    let mut lp = LinearProgram::new(columns.len());
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
    for (c, s) in columns.iter().enumerate() {
        let (reward, usage) = column(s, v, terms, inst);
        lp.set_objective(c, reward);
        for (kk, u) in usage.into_iter().enumerate() {
            rows[kk].push((c, u));
        }
    }
    for (kk, row) in rows.iter().enumerate() {
        lp.add_constraint(row, Relation::Le, (1.0 - terms.omega) * inst.capacity_rate[kk]);
    }
    let ones: Vec<(usize, f64)> = (0..columns.len()).map(|c| (c, 1.0)).collect();
    lp.add_constraint(&ones, Relation::Eq, 1.0);
    let sol = lp.solve()?;
    Ok((sol, lp))
}

fn distribution_from_weights(columns: &[Assortment], weights: &[f64]) -> Result<AssortmentDistribution> {
    let mut atoms: Vec<(Assortment, f64)> = columns
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w >= 1e-12)
        .map(|(s, &w)| (s.clone(), w))
        .collect();
    let total: f64 = atoms.iter().map(|(_, w)| w).sum();
    for (_, w) in &mut atoms {
        *w /= total;
    }
    AssortmentDistribution::new(atoms)
}

/// Optimum of the explicit LP over all `2^N` assortments.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumeratedSolution {
    pub objective: f64,
    /// Basic optimal distribution (at most `K + 1` atoms).
    pub distribution: AssortmentDistribution,
    pub duals_resource: Vec<f64>,
    /// Every basic variable (weights and resource slacks) is strictly
    /// positive, so the resource duals are unique.
    pub nondegenerate: bool,
}

pub fn enumerate_ucb_lp(v: &PreferenceVector, terms: &UcbTerms, inst: &ProblemInstance) -> Result<EnumeratedSolution> {
    check(v, terms, inst)?;
    let n = inst.n_products;
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { n, limit: ENUMERATION_LIMIT });
    }
    let columns: Vec<Assortment> = (0..1u64 << n).map(|mask| Assortment::from_mask(mask, n)).collect();
    let (sol, lp) = solve_over_columns(&columns, v, terms, inst)?;
    let k = inst.n_resources;
    let positive_weights = sol.x.iter().filter(|&&w| w > 1e-9).count();
    let positive_slacks = (0..k)
        .filter(|&kk| lp.constraints()[kk].rhs - lp.row_activity(kk, &sol.x) > 1e-9)
        .count();
    Ok(EnumeratedSolution {
        objective: sol.objective,
        distribution: distribution_from_weights(&columns, &sol.x)?,
        duals_resource: sol.duals[..k].to_vec(),
        nondegenerate: positive_weights + positive_slacks == k + 1,
    })
}

/// Re-solves the LP on the support of `dist` only, returning a basic
/// optimum of that restricted problem: at most `K + 1` atoms, all taken from
/// the input support, objective no worse than the input's.
pub fn reduce_support(
    dist: &AssortmentDistribution,
    v: &PreferenceVector,
    terms: &UcbTerms,
    inst: &ProblemInstance,
) -> Result<AssortmentDistribution> {
    check(v, terms, inst)?;
    if dist.support_size() <= inst.n_resources + 1 {
        return Ok(dist.clone());
    }
    let columns: Vec<Assortment> = dist.atoms.iter().map(|(s, _)| s.clone()).collect();
    let (sol, _) = solve_over_columns(&columns, v, terms, inst)?;
    distribution_from_weights(&columns, &sol.x)
}

/// `T * OPT(LP(v*))` via the compact LP.
pub fn fluid_benchmark(inst: &ProblemInstance) -> Result<f64> {
    fluid_benchmark_compact(inst)
}

pub fn fluid_benchmark_compact(inst: &ProblemInstance) -> Result<f64> {
    let sol = solve_compact(&inst.true_pref, &UcbTerms::none(inst.n_products), inst)?;
    Ok(inst.horizon as f64 * sol.objective)
}

pub fn fluid_benchmark_enumerated(inst: &ProblemInstance) -> Result<f64> {
    let sol = enumerate_ucb_lp(&inst.true_pref, &UcbTerms::none(inst.n_products), inst)?;
    Ok(inst.horizon as f64 * sol.objective)
}

/// Compact solve, recovery and support reduction: the per-epoch sampling law.
pub fn plan_distribution(
    v: &PreferenceVector,
    terms: &UcbTerms,
    inst: &ProblemInstance,
) -> Result<(f64, AssortmentDistribution)> {
    let sol = solve_compact(v, terms, inst)?;
    let dist = recover_distribution(&sol, v)?;
    let reduced = reduce_support(&dist, v, terms, inst)?;
    Ok((sol.objective, reduced))
}
