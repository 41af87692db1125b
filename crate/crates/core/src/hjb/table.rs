use serde::Serialize;

use super::hamiltonian::{Branch, Hamiltonian};
use crate::bio_model::GrowthModel;
use crate::convex_kit::SuperdiffInterval;

/// Tabulated value function on `[x_min, 1]`, with the golden-rule point as a node.
#[derive(Debug, Clone, Serialize)]
pub struct ValueTable {
    pub xs: Vec<f64>,
    pub v: Vec<f64>,
    /// `v'` at the nodes; the golden-rule node holds the superdifferential midpoint.
    pub p: Vec<f64>,
    /// `|beta v - b p - F^(p)|` at the nodes, as computed by the producer.
    pub residuals: Vec<f64>,
    pub x_hat: f64,
    pub hat_index: usize,
    /// Superdifferential of `F~` at `b(x^)`.
    pub critical: SuperdiffInterval,
    /// True when `F~` has a kink at `b(x^)`.
    pub kink: bool,
    #[serde(skip)]
    pub model: GrowthModel,
    #[serde(skip)]
    pub ham: Hamiltonian,
}

impl ValueTable {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn beta(&self) -> f64 {
        self.ham.beta
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn v_hat(&self) -> f64 {
        self.v[self.hat_index]
    }

    /// One-sided slopes at the golden-rule node: `(from the left, from the right)`.
    fn hat_slopes(&self) -> (f64, f64) {
        if self.kink {
            (self.critical.upper, self.critical.lower)
        } else {
            let p = self.p[self.hat_index];
            (p, p)
        }
    }

    /// Cubic Hermite interpolation of `(v, v')`. Below `x_min` a monotone cubic
    /// joins `(0, 0)`; above 1 the value is held.
    pub fn value_at(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x >= self.xs[n - 1] {
            return self.v[n - 1];
        }
        if x < self.xs[0] {
            return self.extension(x);
        }
        let k = (self.xs.partition_point(|&g| g <= x).max(1) - 1).min(n - 2);
        let (x0, x1) = (self.xs[k], self.xs[k + 1]);
        let (mut m0, mut m1) = (self.p[k], self.p[k + 1]);
        let (left, right) = self.hat_slopes();
        if k == self.hat_index {
            m0 = right;
        }
        if k + 1 == self.hat_index {
            m1 = left;
        }
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.v[k]
            + (t3 - 2.0 * t2 + t) * h * m0
            + (-2.0 * t3 + 3.0 * t2) * self.v[k + 1]
            + (t3 - t2) * h * m1
    }

    fn extension(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (x1, v1, m1) = (self.xs[0], self.v[0], self.p[0]);
        let d = v1 / x1;
        let m0 = (3.0 * d - 2.0 * m1).clamp(0.0, 3.0 * d);
        let t = x / x1;
        let (t2, t3) = (t * t, t * t * t);
        (t3 - 2.0 * t2 + t) * x1 * m0 + (-2.0 * t3 + 3.0 * t2) * v1 + (t3 - t2) * x1 * m1
    }

    /// Marginal value `v'(x)`, recovered from [`Self::value_at`] through the
    /// HJB equation so that `beta v = b v' + F^(v')` holds exactly off the nodes.
    pub fn slope_at(&self, x: f64) -> f64 {
        let x = x.min(1.0);
        if x == self.x_hat {
            return self.p[self.hat_index];
        }
        let branch = if x < self.x_hat { Branch::Left } else { Branch::Right };
        let b = self.model.rate(x);
        match self.ham.root(b, self.value_at(x), branch) {
            Ok(r) => r.p,
            Err(_) => self.p[if x < self.x_hat { 0 } else { self.len() - 1 }],
        }
    }

    /// Aggregate harvest `argmax (F~(q) - v'(x) q)`. On a slope tie the demand
    /// is an interval and the endpoint driving the state toward `x^` is taken.
    pub fn feedback_harvest(&self, x: f64) -> f64 {
        let d = self.ham.conj.demand(self.slope_at(x));
        if x < self.x_hat {
            d.low
        } else if x > self.x_hat {
            d.high
        } else {
            d.midpoint()
        }
    }

    /// `b(x) - q` under [`Self::feedback_harvest`].
    pub fn drift(&self, x: f64) -> f64 {
        self.model.rate(x) - self.feedback_harvest(x)
    }
}
