use serde::{Deserialize, Serialize};

use super::ConvexError;

/// A continuous piecewise-linear function sampled at uniform nodes
/// `start + k * step`, `k = 0..len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self, ConvexError> {
        if values.len() < 2 {
            return Err(ConvexError::TooFewNodes(values.len()));
        }
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() {
            return Err(ConvexError::BadStep(step));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(ConvexError::NonFiniteValue(k));
        }
        Ok(Self { start, step, values })
    }

    /// Samples `f` at `n` uniform nodes spanning `[a, b]`.
    pub fn uniform<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> Result<Self, ConvexError> {
        if n < 2 {
            return Err(ConvexError::TooFewNodes(n));
        }
        let step = (b - a) / (n - 1) as f64;
        let values = (0..n).map(|k| f(node_at(a, step, k, n, b))).collect();
        Self::new(a, step, values)
    }

    /// Samples `f` on `0, step, ..., cells * step`.
    pub fn on_lattice<F: Fn(f64) -> f64>(step: f64, cells: usize, f: F) -> Result<Self, ConvexError> {
        Self::new(0.0, step, (0..=cells).map(|k| f(k as f64 * step)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn end(&self) -> f64 {
        self.start + self.cells() as f64 * self.step
    }

    pub fn node(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.node(k))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Slope of the cell `[node(k), node(k+1)]`.
    pub fn slope(&self, k: usize) -> f64 {
        (self.values[k + 1] - self.values[k]) / self.step
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.cells()).map(|k| self.slope(k)).collect()
    }

    /// Interpolated value; `None` outside the domain (beyond a relative slack
    /// of `1e-12` cells).
    pub fn try_eval(&self, x: f64) -> Option<f64> {
        let t = (x - self.start) / self.step;
        let cells = self.cells() as f64;
        if t < -1e-12 || t > cells + 1e-12 || t.is_nan() {
            return None;
        }
        let t = t.clamp(0.0, cells);
        let k = (t.floor() as usize).min(self.cells() - 1);
        let w = t - k as f64;
        Some(self.values[k] + w * (self.values[k + 1] - self.values[k]))
    }

    /// Interpolated value with the argument clamped into the domain.
    pub fn eval(&self, x: f64) -> f64 {
        let x = x.clamp(self.start, self.end());
        self.try_eval(x).unwrap_or(self.values[0])
    }

    /// Index of the node closest to `x`, if `x` sits on a node within `tol` cells.
    pub fn node_index(&self, x: f64, tol: f64) -> Option<usize> {
        let t = (x - self.start) / self.step;
        let k = t.round();
        if (t - k).abs() <= tol && k >= 0.0 && k <= self.cells() as f64 {
            Some(k as usize)
        } else {
            None
        }
    }

    /// True when successive cell slopes are non-increasing, up to
    /// `rel_tol * (1 + |slope|)`.
    pub fn is_concave(&self, rel_tol: f64) -> bool {
        let s = self.slopes();
        s.windows(2).all(|w| w[1] <= w[0] + rel_tol * (1.0 + w[0].abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Smallest node index whose value is within `tol` of the maximum of
    /// `values[k] - z * node(k)`.
    pub fn least_argmax_tilted(&self, z: f64, tol: f64) -> usize {
        let best = (0..self.len()).map(|k| self.values[k] - z * self.node(k)).fold(f64::NEG_INFINITY, f64::max);
        let slack = tol * (1.0 + best.abs());
        (0..self.len()).find(|&k| self.values[k] - z * self.node(k) >= best - slack).unwrap_or(0)
    }
}

fn node_at(a: f64, step: f64, k: usize, n: usize, b: f64) -> f64 {
    if k + 1 == n {
        b
    } else {
        a + k as f64 * step
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_between_nodes() {
        let g = GridFunction::uniform(0.0, 1.0, 5, |x| x * x).unwrap();
        assert_eq!(g.len(), 5);
        assert!((g.eval(0.125) - 0.5 * (0.0 + 0.0625)).abs() < 1e-15);
        assert_eq!(g.eval(1.0), 1.0);
        assert!(g.try_eval(1.5).is_none());
        assert!(g.try_eval(-0.1).is_none());
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(matches!(GridFunction::new(0.0, 1.0, vec![1.0]), Err(ConvexError::TooFewNodes(1))));
        assert!(GridFunction::new(0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(matches!(GridFunction::new(0.0, 1.0, vec![1.0, f64::NAN]), Err(ConvexError::NonFiniteValue(1))));
    }

    #[test]
    fn concavity_check() {
        let concave = GridFunction::uniform(0.0, 1.0, 33, |x| 2.0 * x - x * x).unwrap();
        let convex = GridFunction::uniform(0.0, 1.0, 33, |x| x * x).unwrap();
        let linear = GridFunction::uniform(0.0, 0.3, 33, |x| 2.0 * x).unwrap();
        assert!(concave.is_concave(1e-12));
        assert!(!convex.is_concave(1e-12));
        assert!(linear.is_concave(1e-12));
    }

    #[test]
    fn least_argmax_breaks_ties_low() {
        let g = GridFunction::uniform(0.0, 1.0, 11, |x| x).unwrap();
        assert_eq!(g.least_argmax_tilted(1.0, 1e-12), 0);
        assert_eq!(g.least_argmax_tilted(0.5, 1e-12), 10);
        assert_eq!(g.least_argmax_tilted(2.0, 1e-12), 0);
    }
}
