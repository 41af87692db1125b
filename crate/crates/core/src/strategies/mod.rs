//! Harvesting strategies and their discounted payoffs.

mod feedback;
mod pulse;
mod split;

use std::sync::Arc;

use serde::Serialize;

pub use feedback::{feedback_trajectory, value_process, ARRIVAL_TOL};
pub use pulse::{build_pulse, build_pulse_or_static, pulse_payoff_closed_form, PulseSpec};
pub use split::split_to_agents;

use crate::bio_model::{integrate_dynamics, Trajectory, ValidatedCommunity};
use crate::convex_kit::{ChatterTriple, ConvexError};
use crate::hjb::ValueTable;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrategyError {
    #[error("F~ = F at b(x^) = {b_hat}: no pulse is needed, the static harvest b(x^) is optimal")]
    DegenerateChatter { b_hat: f64 },
    #[error("epsilon = {eps} is too large: {reason}")]
    EpsilonTooLarge { eps: f64, reason: String },
    #[error("intensity {0} lies outside [0, q_max]")]
    PointOutsideDomain(f64),
    #[error("a start away from x^ needs a value table for the feedback prefix")]
    MissingPrefix,
    #[error(transparent)]
    Convex(#[from] ConvexError),
}

#[derive(Debug, Clone)]
pub enum Strategy {
    /// Constant aggregate harvest.
    Static { q: f64 },
    /// `q = argmax (F~(q) - v'(X) q)`, pinned to `b(x^)` once `x^` is reached.
    Feedback(Arc<ValueTable>),
    /// Feedback until `x^`, then the two-point relaxation `kappa d_p1 + (1 - kappa) d_p2`.
    RelaxedMix { table: Arc<ValueTable>, triple: ChatterTriple },
    /// Periodic `p1, p2, p1` harvest around `x^`, after a feedback prefix when
    /// the start is elsewhere.
    Pulse { spec: PulseSpec, prefix: Option<Arc<ValueTable>> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffEstimate {
    pub value: f64,
    /// Upper bound on the discarded tail `F~max e^(-beta T) / beta`.
    pub truncation_bound: f64,
    pub horizon: f64,
}

/// Horizon `T` whose tail bound `F~max e^(-beta T) / beta` equals `tol`.
pub fn default_horizon(c: &ValidatedCommunity, tol: f64) -> f64 {
    let top = c.revenue_max();
    if top <= c.beta * tol {
        0.0
    } else {
        (top / (c.beta * tol)).ln() / c.beta
    }
}

pub fn truncation_bound(c: &ValidatedCommunity, horizon: f64) -> f64 {
    c.revenue_max() * (-c.beta * horizon).exp() / c.beta
}

/// Trajectory of `s` from `x`, with `payoff` filled in. Revenue rates are
/// `F(q_t)`, or the `kappa`-weighted mix on a relaxed tail.
pub fn simulate(
    c: &ValidatedCommunity,
    s: &Strategy,
    x: f64,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory, StrategyError> {
    let f = &c.revenue.f;
    let (mut tr, rates): (Trajectory, Vec<f64>) = match s {
        Strategy::Static { q } => {
            let tr = integrate_dynamics(&c.model, |_| *q, x, horizon, dt);
            let rates = tr.controls.iter().map(|&q| f.eval(q)).collect();
            (tr, rates)
        }
        Strategy::Feedback(vt) => {
            let tr = feedback_trajectory(vt, x, horizon, dt);
            let rates = tr.controls.iter().map(|&q| f.eval(q)).collect();
            (tr, rates)
        }
        Strategy::RelaxedMix { table, triple } => {
            let tr = feedback_trajectory(table, x, horizon, dt);
            let mix = triple.kappa * f.eval(triple.p1) + (1.0 - triple.kappa) * f.eval(triple.p2);
            let from = arrival_index(&tr, table.x_hat).unwrap_or(tr.len());
            let rates = (0..tr.len()).map(|k| if k >= from { mix } else { f.eval(tr.controls[k]) }).collect();
            (tr, rates)
        }
        Strategy::Pulse { spec, prefix } => {
            let tr = pulse::pulse_trajectory(c, spec, prefix.as_deref(), x, horizon, dt)?;
            let rates = tr.controls.iter().map(|&q| f.eval(q)).collect();
            (tr, rates)
        }
    };
    tr.payoff = Some(discounted_trapezoid(&tr.times, &rates, c.beta));
    Ok(tr)
}

/// Discounted payoff of `s` from `x` on `[0, horizon]`.
pub fn payoff(
    c: &ValidatedCommunity,
    s: &Strategy,
    x: f64,
    horizon: f64,
    dt: f64,
) -> Result<PayoffEstimate, StrategyError> {
    let tr = simulate(c, s, x, horizon, dt)?;
    Ok(PayoffEstimate { value: tr.payoff.unwrap_or(0.0), truncation_bound: truncation_bound(c, horizon), horizon })
}

/// Last sample taken at the arrival time, the first time pinned exactly at `x^`.
pub(crate) fn arrival_index(tr: &Trajectory, x_hat: f64) -> Option<usize> {
    let first = tr.states.iter().position(|&s| s == x_hat)?;
    let t = tr.times[first];
    Some(first + tr.times[first..].iter().take_while(|&&s| s == t).count() - 1)
}

/// Trapezoid rule for `int e^(-beta t) rate(t) dt`; repeated times carry jumps.
pub(crate) fn discounted_trapezoid(times: &[f64], rates: &[f64], beta: f64) -> f64 {
    let g: Vec<f64> = times.iter().zip(rates).map(|(&t, &r)| (-beta * t).exp() * r).collect();
    times.windows(2).zip(g.windows(2)).map(|(t, g)| 0.5 * (t[1] - t[0]) * (g[0] + g[1])).sum()
}
