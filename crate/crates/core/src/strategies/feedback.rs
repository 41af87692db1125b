use crate::bio_model::{rk4_step, Trajectory, ValidatedCommunity};
use crate::hjb::ValueTable;
use crate::quadrature::bisect_increasing;

/// Distance to `x^` at which the feedback path is pinned to the golden rule.
pub const ARRIVAL_TOL: f64 = 1e-6;

/// Optimal feedback [`ValueTable::feedback_harvest`] from `x`, switching to
/// the static harvest `b(x^)` once `Y` is within [`ARRIVAL_TOL`] of `x^` or
/// steps across it. Samples after arrival sit exactly at `x^`.
pub fn feedback_trajectory(vt: &ValueTable, x: f64, horizon: f64, dt: f64) -> Trajectory {
    assert!(dt > 0.0, "dt must be positive");
    let m = vt.model;
    let x_hat = vt.x_hat;
    let b_hat = m.rate(x_hat);
    let control = |y: f64| vt.feedback_harvest(y);

    let mut y = x.clamp(0.0, 1.0);
    let mut arrived = (y - x_hat).abs() < ARRIVAL_TOL;
    if arrived {
        y = x_hat;
    }
    let steps = (horizon / dt).ceil().max(0.0) as usize;
    let mut times = vec![0.0];
    let mut states = vec![y];
    let mut controls = vec![if arrived { b_hat } else { control(y) }];
    for k in 0..steps {
        let t = k as f64 * dt;
        let t_next = if k + 1 == steps { horizon } else { (k + 1) as f64 * dt };
        if !arrived {
            let h = t_next - t;
            // stages past x^ keep the one-sided limit of the approach control
            let side = (y - x_hat).signum();
            let limit_q = control(x_hat + side * 1e-9);
            let stage = |_: f64, z: f64| if (z - x_hat) * side > 0.0 { control(z.clamp(0.0, 1.0)) } else { limit_q };
            let step = |len: f64| rk4_step(&m, &stage, t, y, len).clamp(0.0, 1.0);
            let next = step(h);
            let crossed = (next - x_hat) * side <= 0.0;
            if crossed || (next - x_hat).abs() < ARRIVAL_TOL {
                let t_arr = if crossed {
                    t + bisect_increasing(|len| (x_hat - step(len)) * side, 0.0, h, 1e-15)
                } else {
                    t_next
                };
                // arrival is sampled with the approach harvest, then again with b(x^)
                times.push(t_arr);
                states.push(x_hat);
                controls.push(limit_q);
                if t_arr < t_next {
                    times.push(t_arr);
                    states.push(x_hat);
                    controls.push(b_hat);
                }
                arrived = true;
                y = x_hat;
            } else {
                y = next;
            }
        }
        times.push(t_next);
        states.push(y);
        controls.push(if arrived { b_hat } else { control(y) });
    }
    Trajectory { times, states, controls, agent_controls: None, payoff: None, extinction_time: f64::INFINITY }
}

/// `W(t) = int_0^t e^(-beta s) F(q_s) ds + e^(-beta t) v(X_t)` at each sample.
/// Constant along an optimal path.
pub fn value_process(vt: &ValueTable, c: &ValidatedCommunity, tr: &Trajectory) -> Vec<f64> {
    let beta = c.beta;
    let g: Vec<f64> =
        tr.times.iter().zip(&tr.controls).map(|(&t, &q)| (-beta * t).exp() * c.revenue.f.eval(q)).collect();
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(tr.len());
    for k in 0..tr.len() {
        if k > 0 {
            acc += 0.5 * (tr.times[k] - tr.times[k - 1]) * (g[k] + g[k - 1]);
        }
        out.push(acc + (-beta * tr.times[k]).exp() * vt.value_at(tr.states[k]));
    }
    out
}
