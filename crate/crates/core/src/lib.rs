//! Online assortment selection under a multinomial-logit choice model with
//! non-replenishable resources and a cap on how often the displayed
//! assortment may change.
//!
//! The crate is organized bottom-up:
//!
//! - [`mnl`]: choice probabilities, expected revenue and consumption, sampling.
//! - [`estimation`]: maximum-likelihood preferences and confidence radii.
//! - [`lp`]: simplex solver, compact LP, distribution recovery, enumeration oracle.
//! - [`environment`]: the market simulator with inventory and switch tracking.
//! - [`policy`]: the epoch-based UCB policy.
//! - [`harness`]: instance generation, experiment sweeps, CSV/JSON output.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod environment;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod lp;
pub mod mnl;
pub mod policy;

pub use error::{Error, Result};
pub use mnl::{Assortment, PreferenceVector, ProblemInstance};
