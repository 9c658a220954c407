//! Epoch-based UCB policy with a hard cap on assortment switches.
//!
//! After a warm start that shows every product alone, the remaining horizon
//! is cut into `q = floor((L - N) / (K + 1))` epochs of equal length. Each
//! epoch re-fits the preferences, solves the (optionally optimistic) LP,
//! draws one assortment per period from the resulting distribution and then
//! shows each drawn assortment in a single consecutive block. A basic LP
//! solution has at most `K + 1` atoms, so an epoch costs at most `K + 1`
//! switches and the whole run at most `N + (K + 1) q <= L`.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::SimState;
use crate::error::{Error, Result};
use crate::estimation::{
    compute_omega, compute_psi_variant, fit_mle_stats, ChoiceStats, ConfidenceParams, MleSettings, PsiVariant,
};
use crate::lp::{plan_distribution, UcbTerms};
use crate::mnl::{Assortment, ProblemInstance};

/// Largest capacity tightening actually applied when confidence terms are on.
pub const OMEGA_CAP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SwitchBudget {
    /// Explicit switch limit `L`.
    Limit(usize),
    /// `L = N + (K + 1) ceil(T^alpha)`, so that `q = ceil(T^alpha)`.
    Alpha(f64),
}

/// Where the per-epoch preference vector comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PreferenceSource {
    #[default]
    Estimated,
    /// Use the true preferences (a full-information reference run).
    Known,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub budget: SwitchBudget,
    /// Warm-start length; `None` picks `ceil(sqrt(T))` rounded up to a multiple of `N`.
    pub tau: Option<usize>,
    pub delta: f64,
    /// Apply the confidence radii and capacity tightening in the LP.
    pub conf_enabled: bool,
    pub psi_variant: PsiVariant,
    pub seed: u64,
    pub mle: MleSettings,
    pub preferences: PreferenceSource,
}

impl PolicyConfig {
    pub fn with_alpha(alpha: f64, seed: u64) -> Self {
        PolicyConfig {
            budget: SwitchBudget::Alpha(alpha),
            tau: None,
            delta: 0.05,
            conf_enabled: false,
            psi_variant: PsiVariant::default(),
            seed,
            mle: MleSettings::default(),
            preferences: PreferenceSource::Estimated,
        }
    }

    pub fn switch_limit(&self, inst: &ProblemInstance) -> usize {
        match self.budget {
            SwitchBudget::Limit(l) => l,
            SwitchBudget::Alpha(alpha) => {
                inst.n_products + (inst.n_resources + 1) * ceil_power(inst.horizon, alpha)
            }
        }
    }

    pub fn warm_start_len(&self, inst: &ProblemInstance) -> usize {
        self.tau.unwrap_or_else(|| default_tau(inst.horizon, inst.n_products))
    }
}

/// `ceil(t^alpha)`, snapping to the nearest integer when within round-off.
pub fn ceil_power(t: usize, alpha: f64) -> usize {
    let x = (t as f64).powf(alpha);
    let r = x.round();
    if (x - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// `ceil(sqrt(T))` rounded up to a multiple of `N`.
pub fn default_tau(horizon: usize, n: usize) -> usize {
    let root = ceil_power(horizon, 0.5);
    root.div_ceil(n).max(1) * n
}

/// Epoch boundaries `T_0 = tau < T_1 < ... < T_q = T`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochSchedule {
    /// `q(L, K)` as computed from the budget.
    pub q_budget: usize,
    /// Epochs actually run: `q(L, K)` capped at `T - tau` so no epoch is empty.
    pub q: usize,
    pub tau: usize,
    pub epoch_len: usize,
    /// `T_1, ..., T_q`; the last one is stretched to `T` to absorb the
    /// `(T - tau) mod q` leftover periods.
    pub boundaries: Vec<usize>,
}

impl EpochSchedule {
    /// `T_l = l * floor((T - tau) / q) + tau` before the leftover is appended.
    pub fn nominal_boundary(&self, epoch: usize) -> usize {
        self.tau + epoch * self.epoch_len
    }

    /// Periods `(start, end]` of epoch `l` (1-based).
    pub fn epoch_range(&self, epoch: usize) -> (usize, usize) {
        let start = if epoch == 1 { self.tau } else { self.boundaries[epoch - 2] };
        (start, self.boundaries[epoch - 1])
    }
}

pub fn make_schedule(horizon: usize, tau: usize, limit: usize, n: usize, k: usize) -> Result<EpochSchedule> {
    let q_signed = (limit as i64 - n as i64).div_euclid(k as i64 + 1);
    if q_signed < 1 {
        return Err(Error::InvalidBudget(q_signed));
    }
    if tau >= horizon {
        return Err(Error::InvalidInput(format!("warm start {tau} must be shorter than the horizon {horizon}")));
    }
    let q_budget = q_signed as usize;
    let q = q_budget.min(horizon - tau);
    let epoch_len = (horizon - tau) / q;
    let mut boundaries: Vec<usize> = (1..=q).map(|l| tau + l * epoch_len).collect();
    *boundaries.last_mut().expect("q >= 1") = horizon;
    Ok(EpochSchedule { q_budget, q, tau, epoch_len, boundaries })
}

/// Learning-phase condition `tau sqrt(log(4 N K / delta)) <= T c(k)` for all `k`.
pub fn warm_start_condition(inst: &ProblemInstance, tau: usize, delta: f64) -> bool {
    let lhs = tau as f64 * (4.0 * (inst.n_products * inst.n_resources) as f64 / delta).ln().max(0.0).sqrt();
    inst.capacity_rate.iter().all(|&c| lhs <= inst.horizon as f64 * c)
}

/// Shows `{1}`, then `{2}`, ... for `floor(tau / N)` periods each, the first
/// `tau mod N` products getting one extra period. Returns `false` if the
/// sale stopped before the warm start finished.
pub fn warm_start<R: rand::Rng + ?Sized>(
    state: &mut SimState,
    stats: &mut ChoiceStats,
    inst: &ProblemInstance,
    tau: usize,
    rng: &mut R,
) -> Result<bool> {
    let n = inst.n_products;
    for i in 0..n {
        let block = tau / n + usize::from(i < tau % n);
        let s = Assortment::singleton(i);
        for _ in 0..block {
            if state.stopped {
                return Ok(false);
            }
            let purchase = state.offer(inst, &s, rng)?;
            stats.record(&s, purchase)?;
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochDiagnostics {
    pub epoch: usize,
    pub v_hat: Vec<f64>,
    /// Exposure counts the estimate was fitted on.
    pub exposures: Vec<u64>,
    pub lp_objective: f64,
    pub support_size: usize,
    pub epoch_revenue: f64,
    pub inventory: Vec<f64>,
    pub omega_applied: f64,
    pub mle_iterations: usize,
    pub mle_converged: bool,
    /// Assortments in offering order with their period counts.
    pub offered: Vec<(Assortment, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub state: SimState,
    pub schedule: EpochSchedule,
    pub switch_limit: usize,
    pub epochs: Vec<EpochDiagnostics>,
    pub warm_start_completed: bool,
    pub warm_start_condition: bool,
    /// Period after which the sale stopped, if it did.
    pub depletion_period: Option<usize>,
    /// Notable adjustments (omega clamps and fallbacks).
    pub events: Vec<String>,
}

impl SimResult {
    pub fn revenue(&self) -> f64 {
        self.state.cum_revenue
    }
}

pub fn run_ucb_policy(inst: &ProblemInstance, cfg: &PolicyConfig) -> Result<SimResult> {
    inst.validate()?;
    let n = inst.n_products;
    let k = inst.n_resources;
    let t = inst.horizon;
    let tau = cfg.warm_start_len(inst);
    if tau < n {
        return Err(Error::InvalidInput(format!("warm start {tau} shorter than the {n} products")));
    }
    let limit = cfg.switch_limit(inst);
    let schedule = make_schedule(t, tau, limit, n, k)?;
    let condition = warm_start_condition(inst, tau, cfg.delta);
    if !condition {
        warn!("warm start of {tau} periods may exhaust a resource (T = {t})");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = SimState::new(inst);
    let mut stats = ChoiceStats::new(n);
    let mut events = Vec::new();
    let warm_ok = warm_start(&mut state, &mut stats, inst, tau, &mut rng)?;
    let mut epochs = Vec::with_capacity(schedule.q);

    let (psi, omega) = if cfg.conf_enabled {
        let psi = compute_psi_variant(inst.utility_bound, n, t, schedule.q, k, cfg.delta, cfg.psi_variant);
        let raw = compute_omega(inst, tau, schedule.q, psi, cfg.delta);
        if raw > OMEGA_CAP {
            events.push(format!("omega {raw:.4e} clamped to {OMEGA_CAP}"));
        }
        (psi, raw.min(OMEGA_CAP))
    } else {
        (0.0, 0.0)
    };

    if warm_ok {
        for epoch in 1..=schedule.q {
            if state.stopped {
                break;
            }
            let (v_hat, mle_iterations, mle_converged) = match cfg.preferences {
                PreferenceSource::Estimated => {
                    let fit = fit_mle_stats(&stats, inst.utility_bound, &cfg.mle)?;
                    (fit.pref, fit.iterations, fit.converged)
                }
                PreferenceSource::Known => (inst.true_pref.clone(), 0, true),
            };
            let counts = stats.exposure_counts();
            let conf = ConfidenceParams { psi, delta: cfg.delta, omega, enabled: cfg.conf_enabled };
            let terms = UcbTerms::from_confidence(&counts, &conf)?;
            let (lp_objective, dist, omega_applied) = match plan_distribution(&v_hat, &terms, inst) {
                Ok((obj, dist)) => (obj, dist, terms.omega),
                Err(Error::Infeasible) if terms.omega > 0.0 => {
                    events.push(format!("epoch {epoch}: infeasible with omega {omega}, retried with 0"));
                    let relaxed = UcbTerms { omega: 0.0, ..terms };
                    let (obj, dist) = plan_distribution(&v_hat, &relaxed, inst)?;
                    (obj, dist, 0.0)
                }
                Err(e) => return Err(e),
            };
            assert!(dist.support_size() <= k + 1, "epoch support {} exceeds K + 1", dist.support_size());

            let (start, end) = schedule.epoch_range(epoch);
            let offered = draw_blocks(&dist, end - start, &mut rng);
            let revenue_before = state.cum_revenue;
            'offer: for (s, count) in &offered {
                for _ in 0..*count {
                    if state.stopped {
                        break 'offer;
                    }
                    let purchase = state.offer(inst, s, &mut rng)?;
                    stats.record(s, purchase)?;
                }
            }
            epochs.push(EpochDiagnostics {
                epoch,
                v_hat: v_hat.values().to_vec(),
                exposures: counts.counts,
                lp_objective,
                support_size: dist.support_size(),
                epoch_revenue: state.cum_revenue - revenue_before,
                inventory: state.inventory.clone(),
                omega_applied,
                mle_iterations,
                mle_converged,
                offered,
            });
        }
    }

    assert!(state.switches <= limit, "{} switches exceed the limit {limit}", state.switches);
    let depletion_period = state.stopped.then_some(state.period);
    Ok(SimResult {
        state,
        schedule,
        switch_limit: limit,
        epochs,
        warm_start_completed: warm_ok,
        warm_start_condition: condition,
        depletion_period,
        events,
    })
}

/// Draws `periods` i.i.d. assortments from `dist` and returns each drawn
/// assortment with its count, ordered by the draw that first produced it.
fn draw_blocks<R: rand::Rng + ?Sized>(
    dist: &crate::lp::AssortmentDistribution,
    periods: usize,
    rng: &mut R,
) -> Vec<(Assortment, usize)> {
    let atoms = dist.atoms();
    let mut counts = vec![0usize; atoms.len()];
    let mut first_seen: Vec<usize> = Vec::with_capacity(atoms.len());
    for _ in 0..periods {
        let a = dist.sample_index(rng);
        if counts[a] == 0 {
            first_seen.push(a);
        }
        counts[a] += 1;
    }
    first_seen.into_iter().map(|a| (atoms[a].0.clone(), counts[a])).collect()
}
