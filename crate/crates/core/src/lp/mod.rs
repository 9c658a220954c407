//! Linear programming: a dense bounded-variable simplex, the compact
//! reformulation of the optimistic assortment LP with distribution
//! recovery, and the explicit enumeration over all assortments used as an
//! oracle and for support reduction.

mod compact;
mod enumerate;
mod simplex;

pub use compact::{
    build_compact_lp, recover_distribution, solve_compact, solve_lp_basic, CompactLayout, CompactSolution,
};
pub use enumerate::{
    enumerate_ucb_lp, fluid_benchmark, fluid_benchmark_compact, fluid_benchmark_enumerated, reduce_support,
    plan_distribution, ucb_objective, ucb_resource_usage, AssortmentDistribution, EnumeratedSolution,
    ENUMERATION_LIMIT,
};
pub use simplex::{LinearProgram, LpSolution, Relation, SimplexSettings};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::{confidence_radius, ConfidenceParams, ExposureCounts};

/// Optimism terms of the UCB-LP: per-product radii `eps_i` added to revenue
/// and subtracted from consumption, and the capacity tightening `omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcbTerms {
    pub eps: Vec<f64>,
    pub omega: f64,
}

impl UcbTerms {
    /// No optimism: the plain fluid LP.
    pub fn none(n: usize) -> Self {
        UcbTerms { eps: vec![0.0; n], omega: 0.0 }
    }

    /// `eps_i = eps(n_i)` and the configured omega when enabled, zeros otherwise.
    pub fn from_confidence(counts: &ExposureCounts, conf: &ConfidenceParams) -> Result<Self> {
        if !conf.enabled {
            return Ok(UcbTerms::none(counts.len()));
        }
        conf.validate()?;
        let n = counts.len();
        let eps = counts
            .counts
            .iter()
            .map(|&c| confidence_radius(c, conf.psi, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(UcbTerms { eps, omega: conf.omega })
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.eps.len() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: self.eps.len() });
        }
        if self.eps.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
            return Err(Error::InvalidInput("confidence radii must be finite and non-negative".into()));
        }
        if !(0.0..1.0).contains(&self.omega) {
            return Err(Error::InvalidInput(format!("omega {} not in [0, 1)", self.omega)));
        }
        Ok(())
    }
}
