use serde::Serialize;

use super::TaxError;
use crate::bio_model::{validate_community, Community, GrowthModel};

/// Allowed decrease between consecutive critical taxes.
pub const MONOTONICITY_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalTaxEntry {
    pub n_agents: usize,
    /// Superdifferential of `F~` at `b(x^)`; a single point unless `kink`.
    pub lower: f64,
    pub upper: f64,
    pub kink: bool,
}

impl CriticalTaxEntry {
    pub fn tax(&self) -> Option<f64> {
        (!self.kink).then_some(0.5 * (self.lower + self.upper))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub entries: Vec<CriticalTaxEntry>,
    /// Critical taxes never decrease (beyond the slack) between neighbours
    /// where both exist.
    pub non_decreasing: bool,
    /// For neighbours where either side is kinked: whether the smaller
    /// community's upper slope stays below the larger one's lower slope.
    /// Reported only.
    pub kink_pairs: Vec<(usize, bool)>,
}

/// Critical tax `F~'(b(x^))` along a chain of communities, each extending
/// the previous by appending agents.
pub fn critical_tax_monotonicity(
    chain: &[Community],
    model: &GrowthModel,
    kink_tol: f64,
) -> Result<MonotonicityReport, TaxError> {
    for (i, w) in chain.windows(2).enumerate() {
        let (small, large) = (&w[0], &w[1]);
        let nested = large.agents.len() >= small.agents.len()
            && large.agents[..small.agents.len()] == small.agents[..]
            && large.beta == small.beta;
        if !nested {
            return Err(TaxError::NotNested { index: i + 1 });
        }
    }
    let mut entries = Vec::with_capacity(chain.len());
    for c in chain {
        let v = validate_community(c, model)?;
        let sd = v.critical_superdiff();
        entries.push(CriticalTaxEntry {
            n_agents: v.n(),
            lower: sd.lower,
            upper: sd.upper,
            kink: sd.width() > kink_tol,
        });
    }
    let mut non_decreasing = true;
    let mut kink_pairs = vec![];
    for (i, w) in entries.windows(2).enumerate() {
        match (w[0].tax(), w[1].tax()) {
            (Some(a), Some(b)) => non_decreasing &= b >= a - MONOTONICITY_SLACK,
            _ => kink_pairs.push((i + 1, w[0].upper <= w[1].lower + MONOTONICITY_SLACK)),
        }
    }
    Ok(MonotonicityReport { entries, non_decreasing, kink_pairs })
}
