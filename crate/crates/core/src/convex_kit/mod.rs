//! Convex-analysis kernels on piecewise-linear grid functions.

mod conjugate;
mod convolution;
mod grid;
mod hull;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conjugate::{agent_best_response, conjugate, demand_map, Conjugate, DemandInterval, SLOPE_TIE_TOL};
pub use convolution::{inf_convolution, inf_convolution_traced, sup_convolve_pair, FoldTrace};
pub use grid::GridFunction;
pub use hull::{chatter_decompose, concave_hull, ChatterTriple, ConcaveGridFunction, VERTEX_SNAP_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConvexError {
    #[error("a grid function needs at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("grid step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("non-finite value at node {0}")]
    NonFiniteValue(usize),
    #[error("no agents to convolve")]
    EmptyAgentList,
    #[error("functions must start at 0 and share one lattice step")]
    IncompatibleGrids,
    #[error("point {0} lies outside the function domain")]
    PointOutsideDomain(f64),
}

/// Superdifferential `[lower, upper]` of a concave function at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperdiffInterval {
    pub lower: f64,
    pub upper: f64,
}

impl SuperdiffInterval {
    pub fn new(lower: f64, upper: f64) -> Self {
        debug_assert!(upper >= lower);
        Self { lower, upper }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn is_point(&self, tol: f64) -> bool {
        self.width() <= tol
    }

    pub fn contains(&self, s: f64, tol: f64) -> bool {
        s >= self.lower - tol && s <= self.upper + tol
    }

    /// Superdifferential of `-g` from that of `g`.
    pub fn negated(&self) -> Self {
        Self { lower: -self.upper, upper: -self.lower }
    }
}
