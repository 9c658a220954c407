//! Multinomial-logit choice model.
//!
//! Products are numbered `1..=N` in every external surface (CLI output,
//! history exports, error messages) with `0` meaning "no purchase". Inside
//! this crate product `i` is stored at 0-based slot `i - 1`; vectors that
//! include the no-purchase outcome (see [`choice_probabilities`]) put it at
//! slot 0 and product `i` at slot `i`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The retailer's world: products, resources, horizon and true preferences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub n_products: usize,
    pub n_resources: usize,
    /// `revenue[i]` is the price of product `i + 1`, in `[0, 1]`.
    pub revenue: Vec<f64>,
    /// `consumption[i][k]` units of resource `k` used by one sale of product `i + 1`.
    pub consumption: Vec<Vec<f64>>,
    /// Per-period capacity `c(k)`; the initial stock is `horizon * c(k)`.
    pub capacity_rate: Vec<f64>,
    pub horizon: usize,
    pub true_pref: PreferenceVector,
    /// Known bound `R`: every preference lies in `[1/R, R]`.
    pub utility_bound: f64,
}

impl ProblemInstance {
    pub fn new(
        revenue: Vec<f64>,
        consumption: Vec<Vec<f64>>,
        capacity_rate: Vec<f64>,
        horizon: usize,
        true_pref: PreferenceVector,
        utility_bound: f64,
    ) -> Result<Self> {
        let inst = ProblemInstance {
            n_products: revenue.len(),
            n_resources: capacity_rate.len(),
            revenue,
            consumption,
            capacity_rate,
            horizon,
            true_pref,
            utility_bound,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_products;
        let k = self.n_resources;
        if n == 0 || k == 0 {
            return Err(Error::InvalidInput("need at least one product and one resource".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidInput("horizon must be positive".into()));
        }
        check_len(n, self.revenue.len())?;
        check_len(n, self.consumption.len())?;
        check_len(n, self.true_pref.len())?;
        check_len(k, self.capacity_rate.len())?;
        if !(self.utility_bound >= 1.0) || !self.utility_bound.is_finite() {
            return Err(Error::InvalidInput("utility bound R must be >= 1".into()));
        }
        for (i, &r) in self.revenue.iter().enumerate() {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::InvalidInput(format!("revenue of product {} not in [0,1]", i + 1)));
            }
        }
        for (i, row) in self.consumption.iter().enumerate() {
            check_len(k, row.len())?;
            if row.iter().any(|a| !(0.0..=1.0).contains(a)) {
                return Err(Error::InvalidInput(format!(
                    "consumption of product {} not in [0,1]",
                    i + 1
                )));
            }
        }
        if self.capacity_rate.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidInput("capacity rates must be positive".into()));
        }
        let lo = 1.0 / self.utility_bound;
        let hi = self.utility_bound;
        // small slack so exp(log R) round-off does not reject generated instances
        let tol = 1e-12 * hi;
        for (i, &v) in self.true_pref.values().iter().enumerate() {
            if v < lo - tol || v > hi + tol {
                return Err(Error::InvalidInput(format!(
                    "true preference of product {} outside [1/R, R]",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// Initial stock `C(k) = T c(k)`.
    pub fn initial_inventory(&self) -> Vec<f64> {
        self.capacity_rate.iter().map(|&c| c * self.horizon as f64).collect()
    }

    /// `max_i a(i, k)` for every resource.
    pub fn max_consumption(&self) -> Vec<f64> {
        (0..self.n_resources)
            .map(|k| self.consumption.iter().map(|row| row[k]).fold(0.0, f64::max))
            .collect()
    }

    pub fn min_capacity_rate(&self) -> f64 {
        self.capacity_rate.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Same world with a different horizon.
    pub fn with_horizon(&self, horizon: usize) -> Self {
        ProblemInstance { horizon, ..self.clone() }
    }
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// A set of offered products, stored sorted and 0-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assortment(Vec<usize>);

impl Assortment {
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        Assortment(members)
    }

    /// Builds from 1-based product numbers, rejecting 0 and anything above `n`.
    pub fn from_external(numbers: &[usize], n: usize) -> Result<Self> {
        let mut members = Vec::with_capacity(numbers.len());
        for &p in numbers {
            if p == 0 || p > n {
                return Err(Error::InvalidInput(format!("product {p} outside 1..={n}")));
            }
            members.push(p - 1);
        }
        Ok(Assortment::new(members))
    }

    pub fn empty() -> Self {
        Assortment(Vec::new())
    }

    pub fn singleton(i: usize) -> Self {
        Assortment(vec![i])
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    /// Assortment encoded by the bits of `mask` (bit `i` selects slot `i`).
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Assortment((0..n).filter(|&i| mask >> i & 1 == 1).collect())
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        match self.0.last() {
            Some(&i) if i >= n => Err(Error::InvalidInput(format!(
                "assortment contains product {} but only {n} products exist",
                i + 1
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Assortment {
    /// Comma-joined 1-based numbers, `-` for the empty set.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        for (pos, i) in self.0.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        Ok(())
    }
}

/// Strictly positive MNL preference weights, one per product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceVector(Vec<f64>);

impl PreferenceVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "preference of product {} must be positive and finite",
                i + 1
            )));
        }
        Ok(PreferenceVector(values))
    }

    pub fn from_theta(theta: &[f64]) -> Result<Self> {
        PreferenceVector::new(theta.iter().map(|t| t.exp()).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `1 + sum of the weights in S`.
    pub fn denominator(&self, s: &Assortment) -> f64 {
        1.0 + s.members().iter().map(|&i| self.0[i]).sum::<f64>()
    }
}

impl std::ops::Index<usize> for PreferenceVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Purchase probabilities for every outcome: slot 0 is no purchase,
/// slot `i` is product `i` (1-based).
pub fn choice_probabilities(s: &Assortment, v: &PreferenceVector) -> Result<Vec<f64>> {
    s.check_dim(v.len())?;
    let denom = v.denominator(s);
    let mut p = vec![0.0; v.len() + 1];
    p[0] = 1.0 / denom;
    for &i in s.members() {
        p[i + 1] = v[i] / denom;
    }
    Ok(p)
}

fn weighted_choice(s: &Assortment, v: &PreferenceVector, weight: impl Fn(usize) -> f64) -> f64 {
    let denom = v.denominator(s);
    s.members().iter().map(|&i| weight(i) * v[i]).sum::<f64>() / denom
}

fn check_instance(s: &Assortment, v: &PreferenceVector, inst: &ProblemInstance) -> Result<()> {
    check_len(inst.n_products, v.len())?;
    s.check_dim(inst.n_products)
}

/// `R(S | v) = sum_{i in S} r(i) phi(i, S | v)`.
pub fn expected_revenue(s: &Assortment, v: &PreferenceVector, inst: &ProblemInstance) -> Result<f64> {
    check_instance(s, v, inst)?;
    Ok(weighted_choice(s, v, |i| inst.revenue[i]))
}

/// `A(S, k | v) = sum_{i in S} a(i, k) phi(i, S | v)`.
pub fn expected_consumption(
    s: &Assortment,
    k: usize,
    v: &PreferenceVector,
    inst: &ProblemInstance,
) -> Result<f64> {
    check_instance(s, v, inst)?;
    if k >= inst.n_resources {
        return Err(Error::InvalidInput(format!("resource {k} out of range")));
    }
    Ok(weighted_choice(s, v, |i| inst.consumption[i][k]))
}

/// Draws the customer's choice with one uniform via inverse CDF over
/// (no purchase, members in ascending order). `None` is no purchase.
pub fn sample_purchase<R: Rng + ?Sized>(
    s: &Assortment,
    v: &PreferenceVector,
    rng: &mut R,
) -> Result<Option<usize>> {
    s.check_dim(v.len())?;
    let u: f64 = rng.random();
    if s.is_empty() {
        return Ok(None);
    }
    let target = u * v.denominator(s);
    let mut acc = 1.0;
    if target < acc {
        return Ok(None);
    }
    for &i in s.members() {
        acc += v[i];
        if target < acc {
            return Ok(Some(i));
        }
    }
    Ok(s.members().last().copied())
}

/// Revenue-ordered search: the best of the nested sets of the top-`j`
/// products by revenue, which contains the unconstrained optimum.
pub fn best_revenue_ordered(v: &PreferenceVector, inst: &ProblemInstance) -> (Assortment, f64) {
    let mut order: Vec<usize> = (0..inst.n_products).collect();
    order.sort_by(|&a, &b| inst.revenue[b].total_cmp(&inst.revenue[a]).then(a.cmp(&b)));
    let mut best = (Assortment::empty(), 0.0);
    for j in 1..=order.len() {
        let s = Assortment::new(order[..j].to_vec());
        let rev = weighted_choice(&s, v, |i| inst.revenue[i]);
        if rev > best.1 + 1e-15 {
            best = (s, rev);
        }
    }
    best
}
