//! Population growth, agent revenues and the controlled state equation.

mod community;
mod dynamics;
mod growth;
mod revenue;

pub use community::{
    choose_lattice, validate_community, AgentSpec, Community, CommunityRevenue, ValidatedCommunity, ValidationErrors,
    DEFAULT_CELLS_PER_UNIT,
};
pub use dynamics::{integrate_dynamics, integrate_feedback, rk4_step, Trajectory};
pub use growth::{golden_rule, GrowthModel, GOLDEN_RULE_TOL};
pub use revenue::{AgentRevenue, RevenueSpec};

use crate::convex_kit::ConvexError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("no interior golden-rule point: beta = {beta} >= b'(0) = {slope_at_zero}")]
    NoInteriorGoldenRule { beta: f64, slope_at_zero: f64 },
    #[error("max growth {max_growth} is not below the sum of least maximizers {sum_delta_star}")]
    AssumptionOneViolated { max_growth: f64, sum_delta_star: f64 },
    #[error("agent {agent}: revenue {value} < 0 at u = {u}")]
    RevenueNegative { agent: usize, u: f64, value: f64 },
    #[error("agent {agent}: revenue at 0 is {value}, expected 0")]
    RevenueNonzeroAtOrigin { agent: usize, value: f64 },
    #[error("agent {agent}: revenue is not finite on [0, alpha_max]")]
    RevenueNotFinite { agent: usize },
    #[error("agent {agent}: piecewise revenue ends at {end}, before alpha_max = {alpha_max}")]
    RevenueDomainTooShort { agent: usize, end: f64, alpha_max: f64 },
    #[error("agent {agent}: alpha_max must be positive and finite, got {alpha_max}")]
    NonPositiveCapacity { agent: usize, alpha_max: f64 },
    #[error("discount rate beta = {beta} must be below b'(0) = {slope_at_zero}")]
    DiscountTooLarge { beta: f64, slope_at_zero: f64 },
    #[error("discount rate must be positive and finite, got {0}")]
    NonPositiveDiscount(f64),
    #[error("growth rate must be positive and finite, got {0}")]
    NonPositiveGrowthRate(f64),
    #[error("community has no agents")]
    EmptyCommunity,
    #[error("cells_per_unit must be at least 1, got {0}")]
    BadResolution(usize),
    #[error("invalid community: {0}")]
    Validation(ValidationErrors),
    #[error(transparent)]
    Convex(#[from] ConvexError),
}
