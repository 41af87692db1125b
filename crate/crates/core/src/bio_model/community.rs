use std::fmt;

use serde::{Deserialize, Serialize};

use super::{golden_rule, AgentRevenue, GrowthModel, ModelError, RevenueSpec};
use crate::convex_kit::{
    concave_hull, inf_convolution_traced, ConcaveGridFunction, Conjugate, FoldTrace, GridFunction, SuperdiffInterval,
};

pub const DEFAULT_CELLS_PER_UNIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub revenue: RevenueSpec,
    pub alpha_max: f64,
}

/// Agents plus discount rate, as declared. Revenues are sampled on a lattice
/// of roughly `cells_per_unit` cells per unit of harvesting intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Community {
    pub agents: Vec<AgentSpec>,
    pub beta: f64,
    #[serde(default = "default_cells")]
    pub cells_per_unit: usize,
}

fn default_cells() -> usize {
    DEFAULT_CELLS_PER_UNIT
}

impl Community {
    pub fn new(agents: Vec<AgentSpec>, beta: f64) -> Self {
        Self { agents, beta, cells_per_unit: DEFAULT_CELLS_PER_UNIT }
    }

    pub fn with_resolution(mut self, cells_per_unit: usize) -> Self {
        self.cells_per_unit = cells_per_unit;
        self
    }

    /// `n` identical agents.
    pub fn identical(n: usize, revenue: RevenueSpec, alpha_max: f64, beta: f64) -> Self {
        Self::new(vec![AgentSpec { revenue, alpha_max }; n], beta)
    }

    /// The sub-community made of the first `k` agents.
    pub fn prefix(&self, k: usize) -> Self {
        Self { agents: self.agents[..k.min(self.agents.len())].to_vec(), ..self.clone() }
    }
}

/// Aggregate revenue `F`, its concave hull `F~`, and the conjugate `F^`.
#[derive(Debug, Clone)]
pub struct CommunityRevenue {
    pub f: GridFunction,
    pub trace: FoldTrace,
    pub hull: ConcaveGridFunction,
    pub conj: Conjugate,
}

impl CommunityRevenue {
    pub fn build(agents: &[AgentRevenue]) -> Result<Self, ModelError> {
        let samples: Vec<GridFunction> = agents.iter().map(|a| a.samples.clone()).collect();
        let (f, trace) = inf_convolution_traced(&samples)?;
        let hull = concave_hull(&f);
        let conj = Conjugate::from_hull(&hull);
        Ok(Self { f, trace, hull, conj })
    }
}

/// A community that passed every standing assumption, with its lattice
/// samples, golden-rule point and aggregate revenue.
#[derive(Debug, Clone)]
pub struct ValidatedCommunity {
    pub model: GrowthModel,
    pub beta: f64,
    pub step: f64,
    pub agents: Vec<AgentRevenue>,
    pub q_max: f64,
    pub x_hat: f64,
    pub b_hat: f64,
    pub revenue: CommunityRevenue,
    /// True when some capacity had to be rounded to the lattice.
    pub snapped: bool,
}

impl ValidatedCommunity {
    pub fn n(&self) -> usize {
        self.agents.len()
    }

    /// `F~max = F^(0) = sum_i f_i(delta*_i)`.
    pub fn revenue_max(&self) -> f64 {
        self.revenue.conj.eval(0.0)
    }

    /// Superdifferential of `F~` at `b(x^)`.
    pub fn critical_superdiff(&self) -> SuperdiffInterval {
        self.revenue.hull.superdifferential(self.b_hat)
    }
}

/// Everything wrong with a community, in declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationErrors(pub Vec<ModelError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} problem(s):", self.0.len())?;
        for e in &self.0 {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}

impl ValidationErrors {
    pub fn issues(&self) -> &[ModelError] {
        &self.0
    }
}

/// Picks `M` in `[m0, 2 m0)` making every capacity a whole number of cells of
/// width `1/M`; falls back to `m0` with rounding.
pub fn choose_lattice(alphas: &[f64], m0: usize) -> (usize, bool) {
    let fits = |m: usize| {
        alphas.iter().all(|&a| {
            let c = a * m as f64;
            (c - c.round()).abs() <= 1e-9 * c.max(1.0)
        })
    };
    match (m0..2 * m0).find(|&m| fits(m)) {
        Some(m) => (m, false),
        None => (m0, true),
    }
}

pub fn validate_community(c: &Community, model: &GrowthModel) -> Result<ValidatedCommunity, ModelError> {
    let mut issues = Vec::new();
    let r = model.intrinsic_rate();
    if !(r > 0.0) || !r.is_finite() {
        issues.push(ModelError::NonPositiveGrowthRate(r));
    }
    if !(c.beta > 0.0) || !c.beta.is_finite() {
        issues.push(ModelError::NonPositiveDiscount(c.beta));
    } else if c.beta >= model.slope(0.0) {
        issues.push(ModelError::DiscountTooLarge { beta: c.beta, slope_at_zero: model.slope(0.0) });
    }
    if c.agents.is_empty() {
        issues.push(ModelError::EmptyCommunity);
    }
    if c.cells_per_unit < 1 {
        issues.push(ModelError::BadResolution(c.cells_per_unit));
    }
    for (i, a) in c.agents.iter().enumerate() {
        if !(a.alpha_max > 0.0) || !a.alpha_max.is_finite() {
            issues.push(ModelError::NonPositiveCapacity { agent: i, alpha_max: a.alpha_max });
        }
        if let Some(end) = a.revenue.domain_end() {
            if end < a.alpha_max * (1.0 - 1e-12) {
                issues.push(ModelError::RevenueDomainTooShort { agent: i, end, alpha_max: a.alpha_max });
            }
        }
    }
    if !issues.is_empty() {
        return Err(ModelError::Validation(ValidationErrors(issues)));
    }

    let alphas: Vec<f64> = c.agents.iter().map(|a| a.alpha_max).collect();
    let (m, snapped) = choose_lattice(&alphas, c.cells_per_unit);
    let step = 1.0 / m as f64;
    let mut agents = Vec::with_capacity(c.agents.len());
    for (i, a) in c.agents.iter().enumerate() {
        let cells = ((a.alpha_max * m as f64).round() as usize).max(1);
        let f0 = a.revenue.eval(0.0);
        if f0 != 0.0 {
            issues.push(ModelError::RevenueNonzeroAtOrigin { agent: i, value: f0 });
        }
        match AgentRevenue::sample(a.revenue.clone(), step, cells) {
            Ok(sampled) => {
                if let Some(k) = sampled.samples.values().iter().position(|&v| v < 0.0) {
                    issues.push(ModelError::RevenueNegative {
                        agent: i,
                        u: sampled.samples.node(k),
                        value: sampled.samples.value(k),
                    });
                }
                agents.push(sampled);
            }
            Err(_) => issues.push(ModelError::RevenueNotFinite { agent: i }),
        }
    }
    if issues.is_empty() {
        let sum_delta: f64 = agents.iter().map(|a| a.delta_star).sum();
        if !(model.max_rate() < sum_delta) {
            issues.push(ModelError::AssumptionOneViolated { max_growth: model.max_rate(), sum_delta_star: sum_delta });
        }
    }
    if !issues.is_empty() {
        return Err(ModelError::Validation(ValidationErrors(issues)));
    }

    let x_hat = golden_rule(model, c.beta)?;
    let revenue = CommunityRevenue::build(&agents)?;
    Ok(ValidatedCommunity {
        model: *model,
        beta: c.beta,
        step,
        q_max: revenue.f.end(),
        x_hat,
        b_hat: model.rate(x_hat),
        agents,
        revenue,
        snapped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(alpha: f64) -> AgentSpec {
        AgentSpec { revenue: RevenueSpec::Linear { slope: 1.0 }, alpha_max: alpha }
    }

    fn issues(e: ModelError) -> Vec<ModelError> {
        match e {
            ModelError::Validation(v) => v.0,
            other => vec![other],
        }
    }

    #[test]
    fn single_linear_agent_is_valid() {
        let m = GrowthModel::verhulst(1.0);
        let v = validate_community(&Community::new(vec![linear(1.0)], 0.05), &m).unwrap();
        assert_eq!(v.agents[0].delta_star, 1.0);
        assert_eq!(v.q_max, 1.0);
        assert!((v.x_hat - 0.475).abs() < 1e-12);
        assert!(!v.snapped);
        assert_eq!(v.agents[0].samples.len(), 4097);
    }

    #[test]
    fn small_capacity_violates_assumption_one() {
        let m = GrowthModel::verhulst(1.0);
        let e = validate_community(&Community::new(vec![linear(0.2)], 0.05), &m).unwrap_err();
        let all = issues(e);
        assert_eq!(all.len(), 1);
        match &all[0] {
            ModelError::AssumptionOneViolated { max_growth, sum_delta_star } => {
                assert_eq!(*max_growth, 0.25);
                assert!((sum_delta_star - 0.2).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn collects_every_problem() {
        let m = GrowthModel::verhulst(1.0);
        let c = Community::new(
            vec![
                AgentSpec { revenue: RevenueSpec::Quadratic { a: 1.0, b: 2.0 }, alpha_max: 1.0 },
                AgentSpec { revenue: RevenueSpec::Piecewise { points: vec![[0.0, 0.1], [1.0, 1.0]] }, alpha_max: 1.0 },
            ],
            0.05,
        );
        let all = issues(validate_community(&c, &m).unwrap_err());
        assert!(all.iter().any(|e| matches!(e, ModelError::RevenueNegative { agent: 0, .. })));
        assert!(all.iter().any(|e| matches!(e, ModelError::RevenueNonzeroAtOrigin { agent: 1, .. })));
        let all = issues(validate_community(&Community::new(vec![linear(1.0)], 2.0), &m).unwrap_err());
        assert!(matches!(all[0], ModelError::DiscountTooLarge { .. }));
    }

    #[test]
    fn lattice_fits_decimal_capacities() {
        let (m, snapped) = choose_lattice(&[0.2, 0.3], 4096);
        assert_eq!(m, 4100);
        assert!(!snapped);
        let (m, snapped) = choose_lattice(&[std::f64::consts::PI / 10.0], 64);
        assert_eq!(m, 64);
        assert!(snapped);
    }

    #[test]
    fn quadratic_delta_star() {
        let m = GrowthModel::verhulst(1.0);
        let c = Community::identical(2, RevenueSpec::Quadratic { a: 1.0, b: 1.0 }, 1.0, 0.05);
        let v = validate_community(&c, &m).unwrap();
        assert!((v.agents[0].delta_star - 0.5).abs() < 1e-12);
    }
}
