//! Proportional tax `v'(X_tau) * alpha`, held fixed between switching times,
//! with myopic agents best-responding to it.

mod monotonicity;
mod run;

pub use monotonicity::{critical_tax_monotonicity, CriticalTaxEntry, MonotonicityReport, MONOTONICITY_SLACK};
pub use run::{default_dt, run_taxation, Band, TaxOptions, TaxRun};

use crate::bio_model::{ModelError, ValidatedCommunity};
use crate::convex_kit::agent_best_response;
use crate::hjb::{HjbError, ValueTable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TaxError {
    #[error("horizon {horizon} ends before stabilization and leaves a tail bound {truncation_bound} above eps/10")]
    HorizonTooShort { horizon: f64, truncation_bound: f64 },
    #[error("invalid taxation input: {0}")]
    BadInput(String),
    #[error("more than {0} tax switches")]
    SwitchLimit(usize),
    #[error("community {index} does not extend the previous one")]
    NotNested { index: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hjb(#[from] HjbError),
}

/// `psi(x, alpha) = -beta v(x) + (b(x) - sum alpha_i) v'(x) + sum f_i(alpha_i)`.
///
/// Never positive, and zero when every `alpha_i` is a best response to `v'(x)`.
pub fn psi(vt: &ValueTable, c: &ValidatedCommunity, x: f64, alpha: &[f64]) -> f64 {
    let p = vt.slope_at(x);
    let total: f64 = alpha.iter().sum();
    let revenue: f64 = c.agents.iter().zip(alpha).map(|(a, &u)| a.eval(u)).sum();
    -c.beta * vt.value_at(x) + (c.model.rate(x) - total) * p + revenue
}

/// Least maximizers of `f_i(u) - z u` on each agent's grid.
pub fn myopic_response(c: &ValidatedCommunity, z: f64) -> Vec<f64> {
    c.agents.iter().map(|a| agent_best_response(&a.samples, z)).collect()
}
