use serde::{Deserialize, Serialize};

use super::{concave_hull, ConcaveGridFunction, ConvexError, GridFunction};

/// Relative tolerance for treating a tilt `z` as equal to a hull slope.
pub const SLOPE_TIE_TOL: f64 = 1e-12;

/// `F^(z) = max_q (F(q) - z q)`, held exactly through the hull vertices of `F`.
///
/// Between consecutive hull slopes a single vertex is optimal, so `F^` is
/// convex, piecewise linear and non-increasing in `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conjugate {
    qs: Vec<f64>,
    vals: Vec<f64>,
    slopes: Vec<f64>,
}

/// Aggregate harvesting intensities maximizing `F~(q) - z q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DemandInterval {
    pub low: f64,
    pub high: f64,
}

impl DemandInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.low + self.high)
    }

    pub fn contains(&self, q: f64, tol: f64) -> bool {
        q >= self.low - tol && q <= self.high + tol
    }
}

pub fn conjugate(f: &GridFunction) -> Conjugate {
    Conjugate::from_hull(&concave_hull(f))
}

impl Conjugate {
    pub fn from_hull(hull: &ConcaveGridFunction) -> Self {
        let (qs, vals) = hull.vertex_points();
        let slopes = hull.segment_slopes();
        Self { qs, vals, slopes }
    }

    /// Hull vertex abscissae.
    pub fn vertex_q(&self) -> &[f64] {
        &self.qs
    }

    pub fn vertex_value(&self) -> &[f64] {
        &self.vals
    }

    /// Hull segment slopes; `slopes()[t]` joins vertices `t` and `t + 1`.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Number of hull segments whose slope exceeds `z` (beyond the tie tolerance).
    fn rising(&self, z: f64) -> usize {
        self.slopes.partition_point(|&s| s > z + SLOPE_TIE_TOL * (1.0 + s.abs()))
    }

    fn rising_or_flat(&self, z: f64) -> usize {
        self.slopes.partition_point(|&s| s >= z - SLOPE_TIE_TOL * (1.0 + s.abs()))
    }

    pub fn eval(&self, z: f64) -> f64 {
        let j = self.rising(z);
        self.vals[j] - z * self.qs[j]
    }

    /// `argmax_q (F~(q) - z q)`; equals `-∂F^(z)`.
    pub fn demand(&self, z: f64) -> DemandInterval {
        DemandInterval { low: self.qs[self.rising(z)], high: self.qs[self.rising_or_flat(z)] }
    }

    /// `F^` sampled at `n` uniform tilts on `[z_lo, z_hi]`.
    pub fn sample(&self, z_lo: f64, z_hi: f64, n: usize) -> Result<GridFunction, ConvexError> {
        GridFunction::uniform(z_lo, z_hi, n, |z| self.eval(z))
    }

    pub fn max_value(&self) -> f64 {
        self.vals.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `argmax_q (F~(q) - z q)` as an interval of maximizing nodes/segments.
pub fn demand_map(hull: &ConcaveGridFunction, z: f64) -> DemandInterval {
    Conjugate::from_hull(hull).demand(z)
}

/// Least node `u` maximizing `f(u) - z u`: a myopic agent's response to tax `z`.
pub fn agent_best_response(f: &GridFunction, z: f64) -> f64 {
    f.node(f.least_argmax_tilted(z, SLOPE_TIE_TOL))
}
