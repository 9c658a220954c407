//! Maximum-likelihood estimation of MNL preferences and the confidence
//! machinery that inflates revenue and deflates consumption in the
//! optimistic LP.
//!
//! The likelihood is parameterized by `theta = log v` and restricted to the
//! box `[-log R, log R]^N`. All evaluations run on [`ChoiceStats`], which
//! aggregates records that share an assortment: the negative log-likelihood
//! only depends on how often each assortment was shown and how often each of
//! its members was bought.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mnl::{Assortment, PreferenceVector, ProblemInstance};

/// One period of the sales log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaleRecord {
    pub period: usize,
    pub assortment: Assortment,
    /// 0-based product slot, `None` for no purchase.
    pub purchase: Option<usize>,
}

/// Ordered log of offered assortments and observed choices.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SalesHistory {
    records: Vec<SaleRecord>,
}

impl SalesHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, period: usize, assortment: Assortment, purchase: Option<usize>) -> Result<()> {
        if let Some(last) = self.records.last() {
            if period <= last.period {
                return Err(Error::InvalidInput(format!(
                    "period {period} does not follow period {}",
                    last.period
                )));
            }
        }
        if let Some(i) = purchase {
            if !assortment.contains(i) {
                return Err(Error::InvalidInput(format!(
                    "purchased product {} not in offered assortment {assortment}",
                    i + 1
                )));
            }
        }
        self.records.push(SaleRecord { period, assortment, purchase });
        Ok(())
    }

    pub fn records(&self) -> &[SaleRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn exposure_counts(&self, n: usize) -> ExposureCounts {
        let mut counts = vec![0u64; n];
        for rec in &self.records {
            for &i in rec.assortment.members() {
                counts[i] += 1;
            }
        }
        ExposureCounts { counts }
    }

    /// Line-oriented export: `period assortment purchase` per line, with the
    /// assortment as comma-joined 1-based numbers (`-` when empty) and the
    /// purchase as a 1-based number (`0` for no purchase).
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for rec in &self.records {
            out.push_str(&format!(
                "{} {} {}\n",
                rec.period,
                rec.assortment,
                rec.purchase.map_or(0, |i| i + 1)
            ));
        }
        out
    }

    pub fn from_lines(text: &str, n: usize) -> Result<Self> {
        let mut h = SalesHistory::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
            let mut fields = line.split_whitespace();
            let (Some(p), Some(s), Some(i), None) = (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(bad("expected three fields"));
            };
            let period: usize = p.parse().map_err(|_| bad("bad period"))?;
            let numbers: Vec<usize> = if s == "-" {
                Vec::new()
            } else {
                s.split(',')
                    .map(|x| x.parse().map_err(|_| bad("bad assortment")))
                    .collect::<Result<_>>()?
            };
            let assortment = Assortment::from_external(&numbers, n)?;
            let purchase: usize = i.parse().map_err(|_| bad("bad purchase"))?;
            h.push(period, assortment, purchase.checked_sub(1))?;
        }
        Ok(h)
    }
}

/// `counts[i]`: number of periods in which product slot `i` was offered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExposureCounts {
    pub counts: Vec<u64>,
}

impl ExposureCounts {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

#[derive(Debug, Clone)]
struct ChoiceGroup {
    assortment: Assortment,
    offers: u64,
    /// aligned with `assortment.members()`
    purchases: Vec<u64>,
}

/// Sufficient statistics of a sales log for the MNL likelihood.
///
/// Groups are kept in first-seen order so floating-point sums are
/// reproducible run to run.
#[derive(Debug, Clone)]
pub struct ChoiceStats {
    n: usize,
    groups: Vec<ChoiceGroup>,
    index: HashMap<Assortment, usize>,
    exposures: Vec<u64>,
}

impl ChoiceStats {
    pub fn new(n: usize) -> Self {
        ChoiceStats { n, groups: Vec::new(), index: HashMap::new(), exposures: vec![0; n] }
    }

    pub fn from_history(h: &SalesHistory, n: usize) -> Result<Self> {
        let mut stats = ChoiceStats::new(n);
        for rec in h.records() {
            stats.record(&rec.assortment, rec.purchase)?;
        }
        Ok(stats)
    }

    pub fn n_products(&self) -> usize {
        self.n
    }

    pub fn record(&mut self, s: &Assortment, purchase: Option<usize>) -> Result<()> {
        s.check_dim(self.n)?;
        let g = match self.index.get(s) {
            Some(&g) => g,
            None => {
                self.groups.push(ChoiceGroup {
                    assortment: s.clone(),
                    offers: 0,
                    purchases: vec![0; s.len()],
                });
                self.index.insert(s.clone(), self.groups.len() - 1);
                self.groups.len() - 1
            }
        };
        let group = &mut self.groups[g];
        if let Some(i) = purchase {
            let pos = group
                .assortment
                .members()
                .binary_search(&i)
                .map_err(|_| Error::InvalidInput(format!("purchase {} not offered", i + 1)))?;
            group.purchases[pos] += 1;
        }
        group.offers += 1;
        for &i in s.members() {
            self.exposures[i] += 1;
        }
        Ok(())
    }

    pub fn exposure_counts(&self) -> ExposureCounts {
        ExposureCounts { counts: self.exposures.clone() }
    }

    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, actual: theta.len() });
        }
        Ok(())
    }

    pub fn neg_log_likelihood(&self, theta: &[f64]) -> Result<f64> {
        self.check_theta(theta)?;
        Ok(self.nll_unchecked(theta))
    }

    fn nll_unchecked(&self, theta: &[f64]) -> f64 {
        let mut total = 0.0;
        for g in &self.groups {
            let members = g.assortment.members();
            let shift = members.iter().map(|&i| theta[i]).fold(0.0, f64::max);
            let lse = shift
                + ((-shift).exp() + members.iter().map(|&i| (theta[i] - shift).exp()).sum::<f64>()).ln();
            total += g.offers as f64 * lse;
            for (&i, &m) in members.iter().zip(&g.purchases) {
                total -= m as f64 * theta[i];
            }
        }
        total
    }

    /// Choice probabilities of the members of `s` under `theta`, computed
    /// with a max-shift so large utilities do not overflow.
    fn member_probs(s: &Assortment, theta: &[f64], out: &mut Vec<f64>) {
        let members = s.members();
        let shift = members.iter().map(|&i| theta[i]).fold(0.0, f64::max);
        out.clear();
        out.extend(members.iter().map(|&i| (theta[i] - shift).exp()));
        let denom = (-shift).exp() + out.iter().sum::<f64>();
        for p in out.iter_mut() {
            *p /= denom;
        }
    }

    pub fn nll_gradient(&self, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_theta(theta)?;
        Ok(self.grad_unchecked(theta))
    }

    fn grad_unchecked(&self, theta: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.n];
        let mut probs = Vec::new();
        for g in &self.groups {
            Self::member_probs(&g.assortment, theta, &mut probs);
            let offers = g.offers as f64;
            for ((&i, &m), &p) in g.assortment.members().iter().zip(&g.purchases).zip(&probs) {
                grad[i] += offers * p - m as f64;
            }
        }
        grad
    }

    /// Sum over records of `diag(phi) - phi phi^T` on the offered products.
    pub fn nll_hessian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.check_theta(theta)?;
        Ok(self.hess_unchecked(theta))
    }

    fn hess_unchecked(&self, theta: &[f64]) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n, self.n);
        let mut probs = Vec::new();
        for g in &self.groups {
            Self::member_probs(&g.assortment, theta, &mut probs);
            let offers = g.offers as f64;
            let members = g.assortment.members();
            for (a, &i) in members.iter().enumerate() {
                h[(i, i)] += offers * probs[a];
                for (b, &j) in members.iter().enumerate().skip(a) {
                    h[(i, j)] -= offers * probs[a] * probs[b];
                }
            }
        }
        h.fill_lower_triangle_with_upper_triangle();
        h
    }
}

pub fn neg_log_likelihood(h: &SalesHistory, theta: &[f64]) -> Result<f64> {
    ChoiceStats::from_history(h, theta.len())?.neg_log_likelihood(theta)
}

pub fn nll_gradient(h: &SalesHistory, theta: &[f64]) -> Result<Vec<f64>> {
    ChoiceStats::from_history(h, theta.len())?.nll_gradient(theta)
}

pub fn nll_hessian(h: &SalesHistory, theta: &[f64]) -> Result<DMatrix<f64>> {
    ChoiceStats::from_history(h, theta.len())?.nll_hessian(theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MleSettings {
    pub max_iter: usize,
    /// Stop once the projected gradient norm is at most this.
    pub grad_tol: f64,
    pub ridge: f64,
}

impl Default for MleSettings {
    fn default() -> Self {
        MleSettings { max_iter: 200, grad_tol: 1e-8, ridge: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MleFit {
    pub pref: PreferenceVector,
    pub theta: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub projected_grad_norm: f64,
}

fn projected_gradient(theta: &[f64], grad: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    theta
        .iter()
        .zip(grad)
        .map(|(&t, &g)| {
            if (t <= lo && g > 0.0) || (t >= hi && g < 0.0) {
                0.0
            } else {
                g
            }
        })
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Box-constrained MLE of `theta = log v` on `[-log R, log R]^N`.
///
/// Projected damped Newton from `theta = 0`: variables sitting on a bound
/// with the gradient pushing outward are frozen, the Newton system is solved
/// on the rest (with a small ridge), and the step is projected back onto the
/// box under Armijo backtracking. A projected-gradient step is used when the
/// Newton direction fails to decrease the objective.
pub fn fit_mle_stats(stats: &ChoiceStats, utility_bound: f64, settings: &MleSettings) -> Result<MleFit> {
    let n = stats.n_products();
    if let Some(i) = stats.exposures.iter().position(|&c| c == 0) {
        return Err(Error::EstimationUndefined { product: i + 1 });
    }
    let hi = utility_bound.ln();
    let lo = -hi;
    let project = |t: f64| t.clamp(lo, hi);
    const ARMIJO: f64 = 1e-4;

    let mut theta = vec![0.0; n];
    let mut f = stats.nll_unchecked(&theta);
    let mut grad = stats.grad_unchecked(&theta);
    let mut pg = norm(&projected_gradient(&theta, &grad, lo, hi));
    let mut iterations = 0;

    while pg > settings.grad_tol && iterations < settings.max_iter {
        iterations += 1;
        let free: Vec<usize> = (0..n)
            .filter(|&i| !((theta[i] <= lo && grad[i] > 0.0) || (theta[i] >= hi && grad[i] < 0.0)))
            .collect();

        let mut direction = vec![0.0; n];
        let hess = stats.hess_unchecked(&theta);
        let m = free.len();
        let mut sub = DMatrix::zeros(m, m);
        let mut rhs = DVector::zeros(m);
        for (a, &i) in free.iter().enumerate() {
            rhs[a] = -grad[i];
            for (b, &j) in free.iter().enumerate() {
                sub[(a, b)] = hess[(i, j)];
            }
            sub[(a, a)] += settings.ridge;
        }
        let newton_ok = match sub.cholesky() {
            Some(chol) => {
                let d = chol.solve(&rhs);
                for (a, &i) in free.iter().enumerate() {
                    direction[i] = d[a];
                }
                d.iter().all(|x| x.is_finite())
            }
            None => false,
        };

        let mut accepted = None;
        if newton_ok {
            accepted = line_search(stats, &theta, &direction, &grad, f, ARMIJO, project);
        }
        if accepted.is_none() {
            let steepest: Vec<f64> = grad.iter().map(|g| -g).collect();
            accepted = line_search(stats, &theta, &steepest, &grad, f, ARMIJO, project);
        }
        let Some((next, f_next)) = accepted else {
            // no descent possible at floating-point resolution
            break;
        };
        theta = next;
        f = f_next;
        grad = stats.grad_unchecked(&theta);
        pg = norm(&projected_gradient(&theta, &grad, lo, hi));
    }

    Ok(MleFit {
        pref: PreferenceVector::from_theta(&theta)?,
        converged: pg <= settings.grad_tol,
        theta,
        iterations,
        projected_grad_norm: pg,
    })
}

fn line_search(
    stats: &ChoiceStats,
    theta: &[f64],
    direction: &[f64],
    grad: &[f64],
    f: f64,
    armijo: f64,
    project: impl Fn(f64) -> f64,
) -> Option<(Vec<f64>, f64)> {
    let mut step = 1.0;
    for _ in 0..60 {
        let trial: Vec<f64> = theta.iter().zip(direction).map(|(t, d)| project(t + step * d)).collect();
        let decrease: f64 = grad.iter().zip(trial.iter().zip(theta)).map(|(g, (a, b))| g * (a - b)).sum();
        if decrease < 0.0 {
            let f_trial = stats.nll_unchecked(&trial);
            if f_trial <= f + armijo * decrease {
                return Some((trial, f_trial));
            }
        } else if trial == theta {
            return None;
        }
        step *= 0.5;
    }
    None
}

/// MLE with default solver settings on a raw sales history.
pub fn fit_mle(h: &SalesHistory, n: usize, utility_bound: f64) -> Result<MleFit> {
    let stats = ChoiceStats::from_history(h, n)?;
    fit_mle_stats(&stats, utility_bound, &MleSettings::default())
}

/// Which log argument to use inside the confidence scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PsiVariant {
    /// `log(2 sqrt(T) q (K+1) N / delta)`
    #[default]
    WithResources,
    /// `log(2 sqrt(T) q N / delta)`, the form used by the gradient concentration event.
    WithoutResources,
}

/// Confidence scale `Psi = R (1 + N R)^2 / 2 * sqrt(2 + 4 log(...))`.
pub fn compute_psi(r: f64, n: usize, t: usize, q: usize, k: usize, delta: f64) -> f64 {
    compute_psi_variant(r, n, t, q, k, delta, PsiVariant::WithResources)
}

pub fn compute_psi_variant(r: f64, n: usize, t: usize, q: usize, k: usize, delta: f64, variant: PsiVariant) -> f64 {
    let resources = match variant {
        PsiVariant::WithResources => (k + 1) as f64,
        PsiVariant::WithoutResources => 1.0,
    };
    let arg = 2.0 * (t as f64).sqrt() * q as f64 * resources * n as f64 / delta;
    let scale = r * (1.0 + n as f64 * r).powi(2) / 2.0;
    scale * (2.0 + 4.0 * arg.ln()).sqrt()
}

/// `eps(n) = (sqrt(N) + 1) Psi / sqrt(n)`.
pub fn confidence_radius(exposures: u64, psi: f64, n_products: usize) -> Result<f64> {
    if exposures == 0 {
        return Err(Error::UndefinedRadius);
    }
    Ok(((n_products as f64).sqrt() + 1.0) * psi / (exposures as f64).sqrt())
}

/// The four summands of the capacity tightening, kept separate for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaTerms {
    pub estimation: f64,
    pub concentration: f64,
    pub warm_start_concentration: f64,
    pub warm_start: f64,
    /// `1 / (T min_k c(k))`
    pub prefactor: f64,
}

impl OmegaTerms {
    pub fn value(&self) -> f64 {
        self.prefactor * (self.estimation + self.concentration + self.warm_start_concentration + self.warm_start)
    }

    /// Values at or above 1 make the tightened capacities non-positive.
    pub fn exceeds_one(&self) -> bool {
        self.value() >= 1.0
    }
}

pub fn omega_terms(inst: &ProblemInstance, tau: usize, q: usize, psi: f64, delta: f64) -> OmegaTerms {
    let n = inst.n_products as f64;
    let t = inst.horizon as f64;
    let k = inst.n_resources as f64;
    let tau_f = tau as f64;
    let tail = (2.0 * t * (4.0 * (k + 1.0) / delta).ln()).sqrt();
    OmegaTerms {
        estimation: 4.0 * (n.sqrt() + 1.0) * (1.0 + n * t / (tau_f * q as f64)).sqrt() * psi * (n * n * t).sqrt(),
        concentration: tail,
        warm_start_concentration: 2.0 * n * n * psi / tau_f.sqrt() * tail,
        warm_start: tau_f,
        prefactor: 1.0 / (t * inst.min_capacity_rate()),
    }
}

/// Capacity tightening `omega`, returned as-is even when it exceeds 1.
pub fn compute_omega(inst: &ProblemInstance, tau: usize, q: usize, psi: f64, delta: f64) -> f64 {
    omega_terms(inst, tau, q, psi, delta).value()
}

/// High-probability regret bound, reported as a diagnostic only.
pub fn regret_bound(inst: &ProblemInstance, tau: usize, q: usize, psi: f64, delta: f64) -> f64 {
    let terms = omega_terms(inst, tau, q, psi, delta);
    let n = inst.n_products as f64;
    (1.0 + 1.0 / inst.min_capacity_rate())
        * (terms.estimation + terms.warm_start_concentration + (n + 1.0) * terms.concentration + terms.warm_start)
}

/// Whether, and how strongly, the LP is made optimistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceParams {
    pub psi: f64,
    pub delta: f64,
    pub omega: f64,
    pub enabled: bool,
}

impl ConfidenceParams {
    pub fn disabled() -> Self {
        ConfidenceParams { psi: 0.0, delta: 0.05, omega: 0.0, enabled: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega < 1.0) || self.omega < 0.0 {
            return Err(Error::InvalidInput(format!("omega {} not in [0, 1)", self.omega)));
        }
        if self.enabled && !(self.psi > 0.0) {
            return Err(Error::InvalidInput("psi must be positive when enabled".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singleton_history(n_offers: usize, n_buys: usize) -> SalesHistory {
        let mut h = SalesHistory::new();
        for t in 0..n_offers {
            h.push(t + 1, Assortment::singleton(0), (t < n_buys).then_some(0)).unwrap();
        }
        h
    }

    #[test]
    fn empty_history_is_flat() {
        let h = SalesHistory::new();
        assert_eq!(neg_log_likelihood(&h, &[0.3, -0.2]).unwrap(), 0.0);
        assert_eq!(nll_gradient(&h, &[0.3, -0.2]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(nll_hessian(&h, &[0.3, -0.2]).unwrap(), DMatrix::zeros(2, 2));
    }

    #[test]
    fn single_record_values() {
        let h = singleton_history(1, 1);
        assert!((neg_log_likelihood(&h, &[0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!((nll_gradient(&h, &[0.0]).unwrap()[0] + 0.5).abs() < 1e-15);
        assert!((nll_hessian(&h, &[0.0]).unwrap()[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn no_purchase_only_adds_log_denominator() {
        let mut h = SalesHistory::new();
        h.push(1, Assortment::new(vec![0, 1]), None).unwrap();
        let theta = [0.4, -1.1];
        let expected = (1.0 + 0.4f64.exp() + (-1.1f64).exp()).ln();
        assert!((neg_log_likelihood(&h, &theta).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn large_theta_does_not_overflow() {
        let h = singleton_history(3, 1);
        let f = neg_log_likelihood(&h, &[800.0]).unwrap();
        assert!(f.is_finite());
        assert!((f - (3.0 * 800.0 - 800.0)).abs() < 1e-9);
    }

    #[test]
    fn history_rejects_bad_records() {
        let mut h = SalesHistory::new();
        h.push(2, Assortment::singleton(0), None).unwrap();
        assert!(h.push(2, Assortment::singleton(0), None).is_err());
        assert!(h.push(3, Assortment::singleton(0), Some(1)).is_err());
    }

    #[test]
    fn history_line_format() {
        let mut h = SalesHistory::new();
        h.push(1, Assortment::new(vec![0, 2]), Some(2)).unwrap();
        h.push(2, Assortment::empty(), None).unwrap();
        let text = h.to_lines();
        assert_eq!(text, "1 1,3 3\n2 - 0\n");
        assert_eq!(SalesHistory::from_lines(&text, 3).unwrap(), h);
        assert!(SalesHistory::from_lines("1 1,9 0\n", 3).is_err());
    }

    #[test]
    fn singleton_closed_form() {
        for (n, m, r, want) in [(100, 50, 10.0, 1.0), (100, 80, 10.0, 4.0), (40, 10, 10.0, 1.0 / 3.0)] {
            let fit = fit_mle(&singleton_history(n, m), 1, r).unwrap();
            assert!(fit.converged);
            assert!((fit.pref[0] - want).abs() < 1e-8, "{} vs {want}", fit.pref[0]);
        }
    }

    #[test]
    fn boundary_mle_clamps_to_box() {
        let fit = fit_mle(&singleton_history(20, 20), 1, 3.0).unwrap();
        assert!((fit.pref[0] - 3.0).abs() < 1e-12);
        let fit = fit_mle(&singleton_history(20, 0), 1, 3.0).unwrap();
        assert!((fit.pref[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!(fit.converged);
    }

    #[test]
    fn unexposed_product_is_an_error() {
        let err = fit_mle(&singleton_history(5, 2), 3, 3.0).unwrap_err();
        assert_eq!(err, Error::EstimationUndefined { product: 2 });
    }

    #[test]
    fn psi_direct_substitution() {
        let want = 2.0 * (2.0 + 4.0 * 2f64.ln()).sqrt();
        assert!((compute_psi(1.0, 1, 1, 1, 1, 2.0) - want).abs() < 1e-14);
    }

    #[test]
    fn psi_is_monotone() {
        let base = compute_psi(3.0, 10, 1000, 31, 5, 0.05);
        assert!(compute_psi(3.0, 10, 2000, 31, 5, 0.05) > base);
        assert!(compute_psi(3.0, 10, 1000, 31, 5, 0.01) > base);
        assert!(compute_psi_variant(3.0, 10, 1000, 31, 5, 0.05, PsiVariant::WithoutResources) < base);
    }

    #[test]
    fn radius_examples() {
        assert_eq!(confidence_radius(1, 1.0, 4).unwrap(), 3.0);
        assert_eq!(confidence_radius(9, 1.0, 4).unwrap(), 1.0);
        assert_eq!(confidence_radius(0, 1.0, 4), Err(Error::UndefinedRadius));
        for n in [1u64, 7, 33, 1000] {
            let a = confidence_radius(n, 2.5, 10).unwrap();
            let b = confidence_radius(4 * n, 2.5, 10).unwrap();
            assert!((b - a / 2.0).abs() < 1e-14 * a);
        }
    }

    #[test]
    fn confidence_params_validation() {
        assert!(ConfidenceParams::disabled().validate().is_ok());
        let p = ConfidenceParams { psi: 0.0, delta: 0.1, omega: 0.2, enabled: true };
        assert!(p.validate().is_err());
        let p = ConfidenceParams { psi: 1.0, delta: 0.1, omega: 1.0, enabled: true };
        assert!(p.validate().is_err());
    }
}
