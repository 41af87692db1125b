use serde::{Deserialize, Serialize};

use crate::convex_kit::{ConvexError, GridFunction};

/// Closed-form revenue families accepted in configs. Each is sampled once
/// onto the community lattice; the piecewise-linear sample is what every
/// other module sees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RevenueSpec {
    /// `slope * u`
    Linear { slope: f64 },
    /// `a u - b u^2`
    Quadratic { a: f64, b: f64 },
    /// `scale * u^p`
    Power {
        p: f64,
        #[serde(default = "unit")]
        scale: f64,
    },
    /// Linear interpolation through `(u, f)` pairs sorted by `u`.
    Piecewise { points: Vec<[f64; 2]> },
}

fn unit() -> f64 {
    1.0
}

impl RevenueSpec {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            RevenueSpec::Linear { slope } => slope * u,
            RevenueSpec::Quadratic { a, b } => a * u - b * u * u,
            RevenueSpec::Power { p, scale } => scale * u.max(0.0).powf(*p),
            RevenueSpec::Piecewise { points } => piecewise(points, u),
        }
    }

    /// Upper end of the interval the spec is defined on, if bounded.
    pub fn domain_end(&self) -> Option<f64> {
        match self {
            RevenueSpec::Piecewise { points } => points.last().map(|p| p[0]),
            _ => None,
        }
    }
}

fn piecewise(points: &[[f64; 2]], u: f64) -> f64 {
    match points {
        [] => f64::NAN,
        [only] => only[1],
        _ => {
            let k = points.partition_point(|p| p[0] <= u).clamp(1, points.len() - 1);
            let ([u0, f0], [u1, f1]) = (points[k - 1], points[k]);
            if u1 == u0 {
                return f1;
            }
            f0 + (f1 - f0) * (u - u0) / (u1 - u0)
        }
    }
}

/// One agent: its declared revenue, capacity, and the lattice sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRevenue {
    pub spec: RevenueSpec,
    /// Capacity as sampled (a whole number of lattice cells).
    pub alpha_max: f64,
    pub samples: GridFunction,
    /// Least maximizer of the sampled revenue.
    pub delta_star: f64,
}

impl AgentRevenue {
    pub fn sample(spec: RevenueSpec, step: f64, cells: usize) -> Result<Self, ConvexError> {
        let samples = GridFunction::on_lattice(step, cells.max(1), |u| spec.eval(u))?;
        let delta_star = samples.node(samples.least_argmax_tilted(0.0, 0.0));
        Ok(Self { alpha_max: samples.end(), spec, samples, delta_star })
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.samples.eval(u)
    }

    pub fn max_revenue(&self) -> f64 {
        self.samples.max_value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_evaluate() {
        assert_eq!(RevenueSpec::Linear { slope: 2.0 }.eval(0.3), 0.6);
        assert_eq!(RevenueSpec::Quadratic { a: 2.0, b: 1.0 }.eval(0.5), 0.75);
        assert_eq!(RevenueSpec::Power { p: 2.0, scale: 1.0 }.eval(0.5), 0.25);
        let pw = RevenueSpec::Piecewise { points: vec![[0.0, 0.0], [0.5, 1.0], [1.0, 0.5]] };
        assert_eq!(pw.eval(0.25), 0.5);
        assert_eq!(pw.eval(0.75), 0.75);
        assert_eq!(pw.domain_end(), Some(1.0));
    }

    #[test]
    fn delta_star_is_least_maximizer() {
        let a = AgentRevenue::sample(RevenueSpec::Quadratic { a: 2.0, b: 2.0 }, 1.0 / 64.0, 64).unwrap();
        assert!((a.delta_star - 0.5).abs() < 1e-12);
        let a = AgentRevenue::sample(RevenueSpec::Linear { slope: 1.0 }, 1.0 / 64.0, 64).unwrap();
        assert_eq!(a.delta_star, 1.0);
        // flat top: least point wins
        let flat = RevenueSpec::Piecewise { points: vec![[0.0, 0.0], [0.25, 1.0], [1.0, 1.0]] };
        let a = AgentRevenue::sample(flat, 1.0 / 64.0, 64).unwrap();
        assert_eq!(a.delta_star, 0.25);
    }
}
