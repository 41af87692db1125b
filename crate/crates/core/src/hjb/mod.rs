//! Stationary HJB equation `beta v = b v' + F^(v')`, solved by anchoring at the
//! golden-rule point and marching outwards.

mod closed_form;
mod hamiltonian;
mod solver;
mod table;

pub use closed_form::closed_form_linear;
pub use hamiltonian::{Branch, BranchRoot, Hamiltonian, P_MAX};
pub use solver::{solve_value, solve_value_from, SolverOptions};
pub use table::ValueTable;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HjbError {
    #[error("no root of the HJB equation on the branch (b = {b}, v = {v}); v' would exceed the cap")]
    BranchRootNotBracketed { b: f64, v: f64 },
    #[error("v' is not decreasing near x = {x}")]
    NonConcaveValueDetected { x: f64 },
    #[error("closed form needs every agent to have the same linear revenue")]
    NotLinearIdenticalCommunity,
    #[error("F~ has a kink at b(x^): critical tax is any value in [{lower}, {upper}]")]
    KinkAtCriticalIntensity { lower: f64, upper: f64 },
    #[error("bad solver options: {0}")]
    BadOptions(String),
}

/// `max |beta v - b v' - F^(v')|` over the table nodes, recomputed from `v` and `p`.
pub fn hjb_residual(vt: &ValueTable) -> f64 {
    vt.xs
        .iter()
        .zip(vt.v.iter().zip(&vt.p))
        .map(|(&x, (&v, &p))| vt.ham.residual(vt.model.rate(x), v, p).abs())
        .fold(0.0, f64::max)
}

/// `v'(x^) = F~'(b(x^))`, or the superdifferential when `F~` is kinked there.
pub fn critical_tax(vt: &ValueTable) -> Result<f64, HjbError> {
    if vt.kink {
        Err(HjbError::KinkAtCriticalIntensity { lower: vt.critical.lower, upper: vt.critical.upper })
    } else {
        Ok(vt.p[vt.hat_index])
    }
}
