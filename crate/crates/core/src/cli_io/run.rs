use std::sync::Arc;

use serde_json::{json, Map, Value};

use super::{CliError, ScenarioConfig};
use crate::bio_model::{validate_community, ValidatedCommunity};
use crate::hjb::{hjb_residual, solve_value, ValueTable};
use crate::strategies::{
    build_pulse, default_horizon, pulse_payoff_closed_form, simulate, truncation_bound, value_process, Strategy,
    StrategyError,
};
use crate::tax_engine::{critical_tax_monotonicity, run_taxation, TaxOptions};

const TAIL_TOL: f64 = 1e-6;
const SIM_DT: f64 = 1e-2;
const DEFAULT_PULSE_EPS: f64 = 0.01;
const DEFAULT_TAX_EPS: f64 = 0.05;
const DEFAULT_TAX_DELTA: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Solve,
    Simulate,
    Pulse,
    TaxSim,
    CriticalTax,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Simulate => "simulate",
            Command::Pulse => "pulse",
            Command::TaxSim => "tax-sim",
            Command::CriticalTax => "critical-tax",
            Command::Validate => "validate",
        }
    }
}

/// Columnar table written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct ResultBundle {
    pub command: Command,
    pub config: ScenarioConfig,
    pub summary: Map<String, Value>,
    pub tables: Vec<Table>,
}

impl ResultBundle {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

pub fn run_command(cmd: Command, cfg: &ScenarioConfig) -> Result<ResultBundle, CliError> {
    let c = cfg.validate()?;
    let mut summary = Map::new();
    let mut tables = vec![];
    community_summary(&c, &mut summary);
    let name = cmd.name();
    match cmd {
        Command::Validate => {}
        Command::Solve => {
            let vt = solve(&c, cfg, name)?;
            value_summary(&vt, &mut summary);
            tables.push(value_table(&vt));
        }
        Command::Simulate => {
            let vt = Arc::new(solve(&c, cfg, name)?);
            let x0 = required(cfg.scenario.x0, name, "x0")?;
            let horizon = cfg.scenario.horizon.unwrap_or_else(|| default_horizon(&c, TAIL_TOL));
            let dt = cfg.scenario.dt.unwrap_or(SIM_DT);
            let tr = simulate(&c, &Strategy::Feedback(vt.clone()), x0, horizon, dt)
                .map_err(|source| CliError::Strategy { command: name, source })?;
            let w = value_process(&vt, &c, &tr);
            let w0 = w[0];
            let drift = w.iter().map(|&x| (x - w0).abs()).fold(0.0, f64::max) / w0.abs().max(f64::MIN_POSITIVE);
            let payoff = tr.payoff.unwrap_or(0.0);
            let v0 = vt.value_at(x0);
            value_summary(&vt, &mut summary);
            put(&mut summary, "x0", x0);
            put(&mut summary, "horizon", horizon);
            put(&mut summary, "dt", dt);
            put(&mut summary, "payoff", payoff);
            put(&mut summary, "value_at_x0", v0);
            put(&mut summary, "relative_gap", (v0 - payoff) / v0);
            put(&mut summary, "truncation_bound", truncation_bound(&c, horizon));
            put(&mut summary, "value_process_drift", drift);
            summary.insert("extinct".into(), json!(tr.went_extinct()));
            let tax: Vec<f64> = tr.states.iter().map(|&x| vt.slope_at(x)).collect();
            tables.push(value_table(&vt));
            tables.push(trajectory_table(&tr.times, &tr.states, &tr.controls, &tax));
        }
        Command::Pulse => {
            let eps = cfg.scenario.epsilon.unwrap_or(DEFAULT_PULSE_EPS);
            let x0 = cfg.scenario.x0.unwrap_or(c.x_hat);
            let vt = Arc::new(solve(&c, cfg, name)?);
            let horizon = cfg.scenario.horizon.unwrap_or_else(|| default_horizon(&c, TAIL_TOL));
            put(&mut summary, "epsilon", eps);
            put(&mut summary, "x0", x0);
            put(&mut summary, "horizon", horizon);
            put(&mut summary, "relaxed_value", c.revenue.hull.eval(c.b_hat) / c.beta);
            let strategy = match build_pulse(&c, eps) {
                Ok(spec) => {
                    let closed = pulse_payoff_closed_form(&spec, c.beta);
                    summary.insert("pulse".into(), json!(spec));
                    put(&mut summary, "closed_form_payoff", closed.value);
                    put(&mut summary, "switch_fraction", (spec.tau1 + spec.tau3) / spec.period());
                    Strategy::Pulse { spec, prefix: Some(vt.clone()) }
                }
                // F~ = F at b(x^): the feedback strategy already holds b(x^) there
                Err(StrategyError::DegenerateChatter { .. }) => {
                    summary.insert("pulse".into(), Value::Null);
                    Strategy::Feedback(vt.clone())
                }
                Err(source) => return Err(CliError::Strategy { command: name, source }),
            };
            let dt = cfg.scenario.dt.unwrap_or(match &strategy {
                Strategy::Pulse { spec, .. } => SIM_DT.min(spec.period() / 100.0),
                _ => SIM_DT,
            });
            let tr = simulate(&c, &strategy, x0, horizon, dt)
                .map_err(|source| CliError::Strategy { command: name, source })?;
            put(&mut summary, "dt", dt);
            put(&mut summary, "payoff", tr.payoff.unwrap_or(0.0));
            put(&mut summary, "truncation_bound", truncation_bound(&c, horizon));
            let tax: Vec<f64> = tr.states.iter().map(|&x| vt.slope_at(x)).collect();
            tables.push(trajectory_table(&tr.times, &tr.states, &tr.controls, &tax));
        }
        Command::TaxSim => {
            let vt = solve(&c, cfg, name)?;
            let s = &cfg.scenario;
            let x0 = required(s.x0, name, "x0")?;
            let eps = s.epsilon.unwrap_or(DEFAULT_TAX_EPS);
            let opts = TaxOptions {
                eps,
                delta: s.delta.unwrap_or(DEFAULT_TAX_DELTA),
                horizon: s.horizon.unwrap_or_else(|| default_horizon(&c, eps / 10.0)),
                dt: s.dt,
            };
            let run = run_taxation(&vt, &c, x0, &opts).map_err(|source| CliError::Tax { command: name, source })?;
            value_summary(&vt, &mut summary);
            put(&mut summary, "x0", x0);
            put(&mut summary, "epsilon", opts.eps);
            put(&mut summary, "delta", opts.delta);
            put(&mut summary, "horizon", opts.horizon);
            put(&mut summary, "payoff", run.payoff);
            put(&mut summary, "value_at_x0", run.value_at_start);
            put(&mut summary, "epsilon_gap", run.value_at_start - run.payoff);
            put(&mut summary, "truncation_bound", run.truncation_bound);
            summary.insert("epsilon_optimal".into(), json!(run.eps_optimal));
            summary.insert("stabilization_time".into(), json!(run.stabilization_time));
            summary.insert("switches".into(), json!(run.switch_times.len()));
            put(&mut summary, "min_switch_gap", run.min_gap);
            let tr = &run.trajectory;
            tables.push(value_table(&vt));
            tables.push(trajectory_table(&tr.times, &tr.states, &tr.controls, &run.tax_path));
            let rows = (0..run.switch_times.len())
                .map(|k| {
                    let total: f64 = run.actions[k].iter().sum();
                    vec![run.switch_times[k], run.switch_states[k], run.taxes[k], total, run.psi_at_switch[k]]
                })
                .collect();
            tables.push(Table { name: "tax_switches", columns: vec!["t", "X", "tax", "q", "psi"], rows });
        }
        Command::CriticalTax => {
            let full = cfg.community();
            let sizes = cfg.scenario.community_nesting.clone().unwrap_or_else(|| (1..=full.agents.len()).collect());
            let chain: Vec<_> = sizes.iter().map(|&k| full.prefix(k)).collect();
            for (k, sub) in sizes.iter().zip(&chain) {
                validate_community(sub, &cfg.model()).map_err(|e| CliError::Scenario {
                    command: name,
                    message: format!("sub-community of the first {k} agent(s): {e}"),
                })?;
            }
            let report = critical_tax_monotonicity(&chain, &cfg.model(), cfg.solver.kink_tol)
                .map_err(|source| CliError::Tax { command: name, source })?;
            summary.insert("non_decreasing".into(), json!(report.non_decreasing));
            summary.insert("kink_pairs".into(), json!(report.kink_pairs));
            let rows = report
                .entries
                .iter()
                .map(|e| {
                    let kink = if e.kink { 1.0 } else { 0.0 };
                    vec![e.n_agents as f64, e.lower, e.upper, e.tax().unwrap_or(f64::NAN), kink]
                })
                .collect();
            tables.push(Table {
                name: "critical_tax",
                columns: vec!["n_agents", "lower", "upper", "tax", "kink"],
                rows,
            });
        }
    }
    Ok(ResultBundle { command: cmd, config: cfg.clone(), summary, tables })
}

fn solve(c: &ValidatedCommunity, cfg: &ScenarioConfig, command: &'static str) -> Result<ValueTable, CliError> {
    solve_value(c, &cfg.solver).map_err(|source| CliError::Hjb { command, source })
}

fn required(v: Option<f64>, command: &'static str, field: &str) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Scenario { command, message: format!("scenario.{field} is required") })
}

fn put(summary: &mut Map<String, Value>, key: &str, x: f64) {
    summary.insert(key.into(), json!(x));
}

fn community_summary(c: &ValidatedCommunity, s: &mut Map<String, Value>) {
    s.insert("n_agents".into(), json!(c.n()));
    put(s, "beta", c.beta);
    put(s, "x_hat", c.x_hat);
    put(s, "b_hat", c.b_hat);
    put(s, "lattice_step", c.step);
    s.insert("capacities_snapped".into(), json!(c.snapped));
    let sd = c.critical_superdiff();
    put(s, "critical_superdiff_lower", sd.lower);
    put(s, "critical_superdiff_upper", sd.upper);
}

fn value_summary(vt: &ValueTable, s: &mut Map<String, Value>) {
    put(s, "v_hat", vt.v_hat());
    s.insert("critical_tax".into(), json!((!vt.kink).then_some(vt.p[vt.hat_index])));
    s.insert("kink".into(), json!(vt.kink));
    put(s, "max_residual", hjb_residual(vt));
    s.insert("n_nodes".into(), json!(vt.len()));
}

fn value_table(vt: &ValueTable) -> Table {
    let rows = (0..vt.len()).map(|i| vec![vt.xs[i], vt.v[i], vt.p[i], vt.residuals[i]]).collect();
    Table { name: "value_function", columns: vec!["x", "v", "v_prime", "residual"], rows }
}

fn trajectory_table(t: &[f64], x: &[f64], q: &[f64], tax: &[f64]) -> Table {
    let rows = (0..t.len()).map(|k| vec![t[k], x[k], q[k], tax[k]]).collect();
    Table { name: "trajectory", columns: vec!["t", "X", "q", "tax"], rows }
}
