use serde::Serialize;

use super::{myopic_response, psi, TaxError};
use crate::bio_model::{rk4_step, Trajectory, ValidatedCommunity};
use crate::hjb::ValueTable;
use crate::strategies::truncation_bound;

const MAX_SWITCHES: usize = 1_000_000;

/// Which band exit ends a tax period, by the side of `x^` it started on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Band {
    /// Started below `x^`: leaving means rising above `x^ + delta`.
    Below,
    /// Started above `x^`: leaving means falling below `x^ - delta`.
    Above,
    /// Started at `x^`: leaving means exiting `(x^ - delta, x^ + delta)`.
    At,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxOptions {
    pub eps: f64,
    pub delta: f64,
    pub horizon: f64,
    /// Integration step; `None` uses [`default_dt`].
    pub dt: Option<f64>,
}

/// Outcome of the switching scheme.
#[derive(Debug, Clone, Serialize)]
pub struct TaxRun {
    pub switch_times: Vec<f64>,
    pub switch_states: Vec<f64>,
    pub bands: Vec<Band>,
    /// `z_k = v'(x_k)`.
    pub taxes: Vec<f64>,
    /// Per-agent intensities, one row per tax period.
    pub actions: Vec<Vec<f64>>,
    /// `psi(x_k, alpha_k)` at each switch.
    pub psi_at_switch: Vec<f64>,
    pub trajectory: Trajectory,
    /// Tax in force at each trajectory sample.
    pub tax_path: Vec<f64>,
    /// Realized discounted revenue on `[0, horizon]`.
    pub payoff: f64,
    pub truncation_bound: f64,
    pub value_at_start: f64,
    /// `payoff >= v(x0) - eps - truncation_bound`.
    pub eps_optimal: bool,
    /// First sample time after which `|X - x^| < delta` for the rest of the run.
    pub stabilization_time: Option<f64>,
    /// Smallest gap between consecutive switches.
    pub min_gap: f64,
    /// `F~` has a kink at `b(x^)`.
    pub kink: bool,
}

/// `min(grid spacing, 1e-3 / r)`.
pub fn default_dt(vt: &ValueTable) -> f64 {
    let spacing = vt.xs.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    spacing.min(1e-3 / vt.model.intrinsic_rate())
}

pub fn run_taxation(vt: &ValueTable, c: &ValidatedCommunity, x0: f64, opts: &TaxOptions) -> Result<TaxRun, TaxError> {
    let TaxOptions { eps, delta, horizon, .. } = *opts;
    let dt = opts.dt.unwrap_or_else(|| default_dt(vt));
    if !(x0 > vt.x_min() && x0 < 1.0) {
        return Err(TaxError::BadInput(format!("x0 = {x0} must lie in (x_min, 1)")));
    }
    if !(eps > 0.0 && delta > 0.0 && horizon > 0.0 && dt > 0.0) {
        return Err(TaxError::BadInput("eps, delta, horizon and dt must be positive".into()));
    }
    let (m, beta, x_hat) = (c.model, c.beta, vt.x_hat);

    let mut run = TaxRun {
        switch_times: vec![],
        switch_states: vec![],
        bands: vec![],
        taxes: vec![],
        actions: vec![],
        psi_at_switch: vec![],
        trajectory: Trajectory {
            times: vec![],
            states: vec![],
            controls: vec![],
            agent_controls: None,
            payoff: None,
            extinction_time: f64::INFINITY,
        },
        tax_path: vec![],
        payoff: 0.0,
        truncation_bound: truncation_bound(c, horizon),
        value_at_start: vt.value_at(x0),
        eps_optimal: false,
        stabilization_time: None,
        min_gap: f64::INFINITY,
        kink: vt.kink,
    };

    let (mut t, mut x) = (0.0, x0);
    while t < horizon {
        if run.switch_times.len() >= MAX_SWITCHES {
            return Err(TaxError::SwitchLimit(MAX_SWITCHES));
        }
        let z = vt.slope_at(x);
        let alpha = myopic_response(c, z);
        let q: f64 = alpha.iter().sum();
        let rate: f64 = c.agents.iter().zip(&alpha).map(|(a, &u)| a.eval(u)).sum();
        let band = if x < x_hat {
            Band::Below
        } else if x > x_hat {
            Band::Above
        } else {
            Band::At
        };
        if let Some(&last) = run.switch_times.last() {
            run.min_gap = run.min_gap.min(t - last);
        }
        run.switch_times.push(t);
        run.switch_states.push(x);
        run.bands.push(band);
        run.taxes.push(z);
        run.psi_at_switch.push(psi(vt, c, x, &alpha));
        run.actions.push(alpha.clone());
        record(&mut run, t, x, q, z);

        // > 0 once the period must end
        let trigger = |y: f64| {
            let exit = match band {
                Band::Below => y - (x_hat + delta),
                Band::Above => (x_hat - delta) - y,
                Band::At => (y - x_hat).abs() - delta,
            };
            let slack = -beta * eps - psi(vt, c, y, &alpha);
            (exit, slack)
        };
        let start = t;
        let step = |x: f64, h: f64| rk4_step(&m, &|_, _| q, 0.0, x, h).clamp(0.0, 1.0);
        let mut prev = trigger(x);
        loop {
            let h = dt.min(horizon - t);
            let next_x = step(x, h);
            let next = trigger(next_x);
            let fired = |a: f64, b: f64, strict: bool| if strict { b > 0.0 && a <= 0.0 } else { b >= 0.0 && a < 0.0 };
            let exit_fired = fired(prev.0, next.0, band != Band::At);
            let psi_fired = fired(prev.1, next.1, true);
            if exit_fired || psi_fired || next_x <= 0.0 {
                // linear interpolation of the earliest crossing inside the step
                let theta = |a: f64, b: f64| if b > a { (-a / (b - a)).clamp(0.0, 1.0) } else { 1.0 };
                let mut frac: f64 = 1.0;
                if exit_fired {
                    frac = frac.min(theta(prev.0, next.0));
                }
                if psi_fired {
                    frac = frac.min(theta(prev.1, next.1));
                }
                let hc = h * frac;
                let xc = step(x, hc);
                run.payoff += rate * discount_between(beta, t, t + hc);
                t += hc;
                x = xc;
                if x <= 0.0 {
                    run.trajectory.extinction_time = t;
                }
                record(&mut run, t, x, q, z);
                break;
            }
            run.payoff += rate * discount_between(beta, t, t + h);
            t += h;
            x = next_x;
            prev = next;
            record(&mut run, t, x, q, z);
            if t >= horizon {
                break;
            }
        }
        if t <= start {
            // a zero-length period would repeat forever
            return Err(TaxError::BadInput(format!("switching stalled at t = {t}, x = {x}")));
        }
        if x <= 0.0 {
            break;
        }
    }

    run.stabilization_time = stabilization_time(&run.trajectory, x_hat, delta);
    run.eps_optimal = run.payoff >= run.value_at_start - eps - run.truncation_bound;
    if run.stabilization_time.is_none() && run.truncation_bound > eps / 10.0 {
        return Err(TaxError::HorizonTooShort { horizon, truncation_bound: run.truncation_bound });
    }
    Ok(run)
}

fn record(run: &mut TaxRun, t: f64, x: f64, q: f64, z: f64) {
    run.trajectory.times.push(t);
    run.trajectory.states.push(x);
    run.trajectory.controls.push(q);
    run.tax_path.push(z);
}

/// `int_a^b e^(-beta t) dt`.
fn discount_between(beta: f64, a: f64, b: f64) -> f64 {
    (-beta * a).exp() * -(-beta * (b - a)).exp_m1() / beta
}

fn stabilization_time(tr: &Trajectory, x_hat: f64, delta: f64) -> Option<f64> {
    let last_out = tr.states.iter().rposition(|&x| (x - x_hat).abs() >= delta);
    match last_out {
        None => tr.times.first().copied(),
        Some(k) if k + 1 < tr.len() => Some(tr.times[k + 1]),
        Some(_) => None,
    }
}
