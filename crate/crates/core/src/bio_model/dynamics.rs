use serde::Serialize;

use super::GrowthModel;

/// Sampled solution of `X' = b(X) - q_t`.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<f64>,
    /// Aggregate harvest at each sample time.
    pub controls: Vec<f64>,
    /// Per-agent intensities, when known.
    pub agent_controls: Option<Vec<Vec<f64>>>,
    pub payoff: Option<f64>,
    /// First time `X` reaches 0, or `+inf`.
    pub extinction_time: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> f64 {
        *self.states.last().unwrap_or(&f64::NAN)
    }

    pub fn went_extinct(&self) -> bool {
        self.extinction_time.is_finite()
    }
}

/// One classical RK4 step for `X' = b(X) - q(t, X)`, with the harvest floored at 0.
pub fn rk4_step<Q: Fn(f64, f64) -> f64>(m: &GrowthModel, q: &Q, t: f64, x: f64, h: f64) -> f64 {
    let rhs = |t: f64, x: f64| m.rate(x) - q(t, x).max(0.0);
    let k1 = rhs(t, x);
    let k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1);
    let k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2);
    let k4 = rhs(t + h, x + h * k3);
    x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Open-loop integration with a time-dependent harvest.
pub fn integrate_dynamics<C: Fn(f64) -> f64>(
    m: &GrowthModel,
    control: C,
    x0: f64,
    horizon: f64,
    dt: f64,
) -> Trajectory {
    integrate_feedback(m, |t, _| control(t), x0, horizon, dt)
}

/// Fixed-step RK4 with a harvest that may depend on the state. The last step is
/// shortened to land on `horizon`. When `X` crosses 0 the crossing time is
/// interpolated linearly, and afterwards the state stays at 0 with no harvest.
pub fn integrate_feedback<Q: Fn(f64, f64) -> f64>(m: &GrowthModel, q: Q, x0: f64, horizon: f64, dt: f64) -> Trajectory {
    assert!(dt > 0.0, "dt must be positive");
    let x0 = x0.clamp(0.0, 1.0);
    let steps = (horizon / dt).ceil().max(0.0) as usize;
    let mut times = Vec::with_capacity(steps + 2);
    let mut states = Vec::with_capacity(steps + 2);
    let mut controls = Vec::with_capacity(steps + 2);
    let mut extinction_time = if x0 <= 0.0 { 0.0 } else { f64::INFINITY };
    let mut x = x0;
    times.push(0.0);
    states.push(x);
    controls.push(if x > 0.0 { q(0.0, x).max(0.0) } else { 0.0 });
    for k in 0..steps {
        let t = k as f64 * dt;
        let t_next = if k + 1 == steps { horizon } else { (k + 1) as f64 * dt };
        if extinction_time.is_finite() {
            times.push(t_next);
            states.push(0.0);
            controls.push(0.0);
            continue;
        }
        let h = t_next - t;
        let raw = rk4_step(m, &q, t, x, h);
        if raw <= 0.0 {
            let tau = t + h * x / (x - raw);
            extinction_time = tau;
            if tau < t_next {
                times.push(tau);
                states.push(0.0);
                controls.push(0.0);
            }
            times.push(t_next);
            states.push(0.0);
            controls.push(0.0);
            x = 0.0;
        } else {
            x = raw.min(1.0);
            times.push(t_next);
            states.push(x);
            controls.push(q(t_next, x).max(0.0));
        }
    }
    Trajectory { times, states, controls, agent_controls: None, payoff: None, extinction_time }
}
