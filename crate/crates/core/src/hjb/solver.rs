use serde::{Deserialize, Serialize};

use super::hamiltonian::{Branch, Hamiltonian};
use super::{HjbError, ValueTable};
use crate::bio_model::{GrowthModel, ValidatedCommunity};
use crate::convex_kit::{conjugate, Conjugate, GridFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Nodes on `[x_min, 1]`, golden-rule point included.
    pub n_nodes: usize,
    pub x_min: f64,
    /// Superdifferential width at `b(x^)` above which `F~` counts as kinked.
    pub kink_tol: f64,
    /// Target for `h * beta / |b - q|` per RK4 substep.
    pub stiffness_target: f64,
    pub max_substeps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { n_nodes: 4097, x_min: 1e-3, kink_tol: 1e-9, stiffness_target: 0.5, max_substeps: 4096 }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), HjbError> {
        if self.n_nodes < 5 {
            return Err(HjbError::BadOptions(format!("n_nodes must be at least 5, got {}", self.n_nodes)));
        }
        if !(self.x_min > 0.0 && self.x_min < 0.5) {
            return Err(HjbError::BadOptions(format!("x_min must lie in (0, 0.5), got {}", self.x_min)));
        }
        if !(self.stiffness_target > 0.0) || self.max_substeps == 0 {
            return Err(HjbError::BadOptions("stiffness_target and max_substeps must be positive".into()));
        }
        Ok(())
    }
}

/// Value function of the community, anchored at the golden-rule point.
pub fn solve_value(c: &ValidatedCommunity, opts: &SolverOptions) -> Result<ValueTable, HjbError> {
    solve_with_conjugate(&c.model, c.beta, c.x_hat, c.revenue.conj.clone(), opts)
}

/// Same as [`solve_value`] but driven by an arbitrary revenue sample; only its
/// conjugate is used, so `F` and `F~` give the same table.
pub fn solve_value_from(
    c: &ValidatedCommunity,
    revenue: &GridFunction,
    opts: &SolverOptions,
) -> Result<ValueTable, HjbError> {
    solve_with_conjugate(&c.model, c.beta, c.x_hat, conjugate(revenue), opts)
}

/// Node positions: `k_left` equal cells on `[x_min, x^]`, the rest on `[x^, 1]`.
pub(crate) fn split_grid(x_min: f64, x_hat: f64, n_nodes: usize) -> (Vec<f64>, usize) {
    let cells = n_nodes - 1;
    let h = (1.0 - x_min) / cells as f64;
    let k_left = (((x_hat - x_min) / h).round() as usize).clamp(1, cells - 1);
    let k_right = cells - k_left;
    let mut xs = Vec::with_capacity(n_nodes);
    for k in 0..k_left {
        xs.push(x_min + (x_hat - x_min) * k as f64 / k_left as f64);
    }
    xs.push(x_hat);
    for k in 1..k_right {
        xs.push(x_hat + (1.0 - x_hat) * k as f64 / k_right as f64);
    }
    xs.push(1.0);
    (xs, k_left)
}

fn solve_with_conjugate(
    model: &GrowthModel,
    beta: f64,
    x_hat: f64,
    conj: Conjugate,
    opts: &SolverOptions,
) -> Result<ValueTable, HjbError> {
    opts.validate()?;
    if x_hat <= opts.x_min {
        return Err(HjbError::BadOptions(format!("x_min = {} is not below x^ = {x_hat}", opts.x_min)));
    }
    let ham = Hamiltonian::new(beta, conj);
    let (xs, hat) = split_grid(opts.x_min, x_hat, opts.n_nodes);
    let b_hat = model.rate(x_hat);
    let critical = ham.superdiff(b_hat);
    let kink = critical.width() > opts.kink_tol;
    let v_hat = ham.hull_value(b_hat) / beta;

    let mut v = vec![0.0; xs.len()];
    v[hat] = v_hat;
    let march = Marcher { model, ham: &ham, opts };
    for k in (0..hat).rev() {
        v[k] = march.step(xs[k + 1], v[k + 1], xs[k], Branch::Left)?;
    }
    for k in hat + 1..xs.len() {
        v[k] = march.step(xs[k - 1], v[k - 1], xs[k], Branch::Right)?;
    }

    let mut p = vec![0.0; xs.len()];
    for k in 0..xs.len() {
        p[k] = if k == hat {
            critical.midpoint()
        } else {
            let br = if k < hat { Branch::Left } else { Branch::Right };
            ham.root(model.rate(xs[k]), v[k], br)?.p
        };
    }
    if let Some(k) = (1..p.len()).find(|&k| p[k] > p[k - 1] + 1e-12 * p[k - 1].abs().max(1.0)) {
        return Err(HjbError::NonConcaveValueDetected { x: xs[k] });
    }
    let residuals = (0..xs.len())
        .map(|k| {
            if k == hat {
                // any slope in the superdifferential attains the minimum F~(b^)
                ham.residual(b_hat, v[k], critical.upper).abs()
            } else {
                ham.residual(model.rate(xs[k]), v[k], p[k]).abs()
            }
        })
        .collect();
    Ok(ValueTable { xs, v, p, residuals, x_hat, hat_index: hat, critical, kink, model: *model, ham })
}

struct Marcher<'a> {
    model: &'a GrowthModel,
    ham: &'a Hamiltonian,
    opts: &'a SolverOptions,
}

impl Marcher<'_> {
    fn slope(&self, x: f64, v: f64, branch: Branch) -> Result<(f64, f64), HjbError> {
        let b = self.model.rate(x);
        let r = self.ham.root(b, v, branch)?;
        Ok((r.p, self.ham.beta / (b - r.active_q).abs().max(f64::MIN_POSITIVE)))
    }

    /// RK4 for `v' = p(x, v)` from `x0` to `x1`, split into substeps when
    /// `beta / |b - q|` makes a single step unstable.
    fn step(&self, x0: f64, v0: f64, x1: f64, branch: Branch) -> Result<f64, HjbError> {
        let (_, stiff) = self.slope(x0, v0, branch)?;
        let h_total = x1 - x0;
        let n = ((h_total.abs() * stiff / self.opts.stiffness_target).ceil() as usize).clamp(1, self.opts.max_substeps);
        let h = h_total / n as f64;
        let mut v = v0;
        for i in 0..n {
            let x = x0 + h_total * i as f64 / n as f64;
            let k1 = self.slope(x, v, branch)?.0;
            let k2 = self.slope(x + 0.5 * h, v + 0.5 * h * k1, branch)?.0;
            let k3 = self.slope(x + 0.5 * h, v + 0.5 * h * k2, branch)?.0;
            let k4 = self.slope(x + h, v + h * k3, branch)?.0;
            v += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        Ok(v)
    }
}
