use serde::Serialize;

use super::{feedback_trajectory, PayoffEstimate, Strategy, StrategyError, ARRIVAL_TOL};
use crate::bio_model::{rk4_step, Trajectory, ValidatedCommunity};
use crate::convex_kit::chatter_decompose;
use crate::hjb::ValueTable;
use crate::quadrature::{adaptive_simpson, bisect_increasing};

const QUAD_TOL: f64 = 1e-13;

/// Periodic harvest `p1` for `tau1`, `p2` for `tau2`, `p1` for `tau3`, taking
/// the state `x^ -> x^ + g -> x^ - eps -> x^`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseSpec {
    pub x_hat: f64,
    pub p1: f64,
    pub p2: f64,
    pub kappa: f64,
    pub eps: f64,
    pub g: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub f_p1: f64,
    pub f_p2: f64,
    /// `|lhs - rhs|` of the equation defining `g`, re-evaluated at the root.
    pub identity_residual: f64,
}

impl PulseSpec {
    pub fn period(&self) -> f64 {
        self.tau1 + self.tau2 + self.tau3
    }

    /// `(harvest, duration)` for the three phases of one period.
    pub fn phases(&self) -> [(f64, f64); 3] {
        [(self.p1, self.tau1), (self.p2, self.tau2), (self.p1, self.tau3)]
    }
}

/// Pulse around `x^` with lower excursion `eps`.
pub fn build_pulse(c: &ValidatedCommunity, eps: f64) -> Result<PulseSpec, StrategyError> {
    let m = c.model;
    let (x_hat, b_hat) = (c.x_hat, c.b_hat);
    let triple = chatter_decompose(&c.revenue.f, &c.revenue.hull, b_hat)?;
    if triple.is_degenerate() {
        return Err(StrategyError::DegenerateChatter { b_hat });
    }
    let (p1, p2) = (triple.p1, triple.p2);
    let too_large = |reason: String| Err(StrategyError::EpsilonTooLarge { eps, reason });
    if !(eps > 0.0) || eps >= x_hat {
        return too_large(format!("need 0 < eps < x^ = {x_hat}"));
    }
    if m.rate(x_hat - eps) <= p1 {
        return too_large(format!("b(x^ - eps) = {} does not exceed p1 = {p1}", m.rate(x_hat - eps)));
    }

    let rho = |x: f64| 1.0 / ((m.rate(x) - p1) * (p2 - m.rate(x)));
    let lhs = adaptive_simpson(|x| (b_hat - m.rate(x)) * rho(x), x_hat - eps, x_hat, QUAD_TOL);
    let rhs = |g: f64| adaptive_simpson(|x| (m.rate(x) - b_hat) * rho(x), x_hat, x_hat + g, QUAD_TOL);

    // b exceeds b(x^) on (x^, 1 - x^); rho blows up where b reaches p2.
    let mut g_cap = 1.0 - 2.0 * x_hat;
    let peak = 0.5;
    if m.rate(peak) >= p2 {
        let x_sing = bisect_increasing(|x| m.rate(x) - p2, x_hat, peak, 1e-15);
        g_cap = g_cap.min(x_sing - x_hat);
    }
    let g_hi = g_cap * (1.0 - 1e-9);
    if !(rhs(g_hi) >= lhs) {
        return too_large(format!("no upper excursion balances it below x^ + {g_cap}"));
    }
    let g = bisect_increasing(|g| rhs(g) - lhs, 0.0, g_hi, 1e-15);
    let identity_residual = (rhs(g) - lhs).abs();

    let tau1 = adaptive_simpson(|x| 1.0 / (m.rate(x) - p1), x_hat, x_hat + g, QUAD_TOL);
    let tau2 = adaptive_simpson(|x| 1.0 / (p2 - m.rate(x)), x_hat - eps, x_hat + g, QUAD_TOL);
    let tau3 = adaptive_simpson(|x| 1.0 / (m.rate(x) - p1), x_hat - eps, x_hat, QUAD_TOL);
    Ok(PulseSpec {
        x_hat,
        p1,
        p2,
        kappa: triple.kappa,
        eps,
        g,
        tau1,
        tau2,
        tau3,
        f_p1: c.revenue.f.eval(p1),
        f_p2: c.revenue.f.eval(p2),
        identity_residual,
    })
}

/// [`build_pulse`], falling back to the static harvest `b(x^)` when `F~ = F` there.
pub fn build_pulse_or_static(c: &ValidatedCommunity, eps: f64) -> Result<Strategy, StrategyError> {
    match build_pulse(c, eps) {
        Ok(spec) => Ok(Strategy::Pulse { spec, prefix: None }),
        Err(StrategyError::DegenerateChatter { b_hat }) => Ok(Strategy::Static { q: b_hat }),
        Err(e) => Err(e),
    }
}

/// Exact discounted payoff of the periodic harvest started at `x^`, summed as
/// a geometric series over periods.
pub fn pulse_payoff_closed_form(s: &PulseSpec, beta: f64) -> PayoffEstimate {
    // 1 - e^(-beta t)
    let lost = |t: f64| -(-beta * t).exp_m1();
    let (t1, t12, t) = (s.tau1, s.tau1 + s.tau2, s.period());
    let one_period = lost(t1) * s.f_p1 + (lost(t12) - lost(t1)) * s.f_p2 + (lost(t) - lost(t12)) * s.f_p1;
    PayoffEstimate { value: one_period / (beta * lost(t)), truncation_bound: 0.0, horizon: f64::INFINITY }
}

/// Feedback prefix to `x^` when needed, then the periodic tail with steps
/// aligned to the switch times. Each switch is sampled twice, once per harvest.
pub(crate) fn pulse_trajectory(
    c: &ValidatedCommunity,
    spec: &PulseSpec,
    prefix: Option<&ValueTable>,
    x: f64,
    horizon: f64,
    dt: f64,
) -> Result<Trajectory, StrategyError> {
    assert!(dt > 0.0, "dt must be positive");
    let mut tr = if (x - spec.x_hat).abs() < ARRIVAL_TOL {
        Trajectory {
            times: vec![],
            states: vec![],
            controls: vec![],
            agent_controls: None,
            payoff: None,
            extinction_time: f64::INFINITY,
        }
    } else {
        let vt = prefix.ok_or(StrategyError::MissingPrefix)?;
        let mut head = feedback_trajectory(vt, x, horizon, dt);
        match super::arrival_index(&head, spec.x_hat) {
            Some(k) => {
                head.times.truncate(k + 1);
                head.states.truncate(k + 1);
                head.controls.truncate(k + 1);
            }
            None => return Ok(head),
        }
        head
    };
    let mut t = tr.times.last().copied().unwrap_or(0.0);
    let mut y = spec.x_hat;
    let phases = spec.phases();
    let mut phase = 0;
    while t < horizon {
        let (q, dur) = phases[phase];
        phase = (phase + 1) % 3;
        let end = (t + dur).min(horizon);
        let n = ((end - t) / dt).ceil().max(1.0) as usize;
        let h = (end - t) / n as f64;
        tr.times.push(t);
        tr.states.push(y);
        tr.controls.push(q);
        for i in 0..n {
            let ti = t + i as f64 * h;
            y = rk4_step(&c.model, &|_, _| q, ti, y, h).clamp(0.0, 1.0);
            tr.times.push(if i + 1 == n { end } else { t + (i + 1) as f64 * h });
            tr.states.push(y);
            tr.controls.push(q);
        }
        t = end;
    }
    Ok(tr)
}
