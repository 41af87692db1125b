//! Cooperative harvesting of a single fish population by `n` agents.
//!
//! The crate computes the cooperative value function by solving the stationary
//! Hamilton-Jacobi-Bellman equation `beta v = b v' + F^(v')`, builds optimal,
//! relaxed and pulse harvesting strategies, and simulates a proportional tax
//! `v'(x) * alpha` under which myopic agents reproduce near-optimal behaviour.
//!
//! Module map:
//!
//! * [`bio_model`]: growth law, agent revenues, community validation, state integration.
//! * [`convex_kit`]: grid functions, sup-convolution, concave hulls, conjugates.
//! * [`hjb`]: value-function solver, closed form for linear agents, critical tax.
//! * [`strategies`]: feedback, static, relaxed and pulse strategies with payoffs.
//! * [`tax_engine`]: step-by-step positional control driven by the marginal value.
//! * [`cli_io`]: JSON scenario configs, command dispatch, CSV/JSON results.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bio_model;
pub mod cli_io;
pub mod convex_kit;
pub mod hjb;
pub mod quadrature;
pub mod strategies;
pub mod tax_engine;

pub use bio_model::{
    golden_rule, integrate_dynamics, validate_community, AgentRevenue, Community, GrowthModel, ModelError, RevenueSpec,
    Trajectory, ValidatedCommunity,
};
pub use convex_kit::{ConcaveGridFunction, Conjugate, GridFunction, SuperdiffInterval};
pub use hjb::{closed_form_linear, critical_tax, hjb_residual, solve_value, SolverOptions, ValueTable};
