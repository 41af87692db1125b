use super::hamiltonian::Hamiltonian;
use super::solver::split_grid;
use super::{HjbError, SolverOptions, ValueTable};
use crate::bio_model::{RevenueSpec, ValidatedCommunity};
use crate::quadrature::adaptive_simpson;

const QUAD_TOL: f64 = 1e-14;

/// Two-branch closed form for a community whose revenues are all `c u`.
///
/// Left of `x^` the harvest is 0 and `beta v = b v'`; right of it every agent
/// harvests at capacity `Q` and `beta v = (b - Q) v' + c Q`.
pub fn closed_form_linear(c: &ValidatedCommunity, opts: &SolverOptions) -> Result<ValueTable, HjbError> {
    opts.validate()?;
    let slope = common_linear_slope(c).ok_or(HjbError::NotLinearIdenticalCommunity)?;
    let (model, beta, x_hat) = (c.model, c.beta, c.x_hat);
    let q_bar = c.q_max;
    let b_hat = c.b_hat;
    let (xs, hat) = split_grid(opts.x_min, x_hat, opts.n_nodes);

    let mut v = vec![0.0; xs.len()];
    let mut p = vec![0.0; xs.len()];
    v[hat] = slope * b_hat / beta;
    p[hat] = slope;
    let mut integral = 0.0;
    for k in (0..hat).rev() {
        integral += adaptive_simpson(|y| beta / model.rate(y), xs[k], xs[k + 1], QUAD_TOL);
        v[k] = slope * b_hat / beta * (-integral).exp();
        p[k] = beta * v[k] / model.rate(xs[k]);
    }
    let mut integral = 0.0;
    for k in hat + 1..xs.len() {
        integral += adaptive_simpson(|y| beta / (model.rate(y) - q_bar), xs[k - 1], xs[k], QUAD_TOL);
        let b = model.rate(xs[k]);
        v[k] = slope / beta * (b_hat - q_bar) * integral.exp() + slope * q_bar / beta;
        p[k] = (beta * v[k] - slope * q_bar) / (b - q_bar);
    }

    let ham = Hamiltonian::new(beta, c.revenue.conj.clone());
    let residuals =
        xs.iter().zip(v.iter().zip(&p)).map(|(&x, (&vk, &pk))| ham.residual(model.rate(x), vk, pk).abs()).collect();
    let critical = ham.superdiff(b_hat);
    Ok(ValueTable {
        xs,
        v,
        p,
        residuals,
        x_hat,
        hat_index: hat,
        kink: critical.width() > opts.kink_tol,
        critical,
        model,
        ham,
    })
}

fn common_linear_slope(c: &ValidatedCommunity) -> Option<f64> {
    let mut slopes = c.agents.iter().map(|a| match a.spec {
        RevenueSpec::Linear { slope } => Some(slope),
        _ => None,
    });
    let first = slopes.next()??;
    slopes.all(|s| s == Some(first)).then_some(first)
}
