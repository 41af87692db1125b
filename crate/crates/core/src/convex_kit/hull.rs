use serde::{Deserialize, Serialize};

use super::{ConvexError, GridFunction, SuperdiffInterval};

/// Points closer than this to a hull vertex are treated as sitting on it.
pub const VERTEX_SNAP_TOL: f64 = 1e-10;

/// Least concave majorant of a [`GridFunction`], kept on the same nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcaveGridFunction {
    grid: GridFunction,
    vertices: Vec<usize>,
}

/// Upper hull by monotone chain over the node set; collinear nodes are dropped
/// from the vertex list and filled back in by interpolation.
pub fn concave_hull(f: &GridFunction) -> ConcaveGridFunction {
    let ys = f.values();
    let mut hull: Vec<usize> = Vec::with_capacity(f.len());
    for k in 0..f.len() {
        while hull.len() >= 2 {
            let (i0, i1) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (i1 - i0) as f64 * (ys[k] - ys[i0]) - (ys[i1] - ys[i0]) * (k - i0) as f64;
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }
    let mut values = ys.to_vec();
    for w in hull.windows(2) {
        let (a, b) = (w[0], w[1]);
        let span = (b - a) as f64;
        for (k, v) in values.iter_mut().enumerate().take(b).skip(a + 1) {
            let t = (k - a) as f64 / span;
            *v = ys[a] + t * (ys[b] - ys[a]);
        }
    }
    ConcaveGridFunction {
        grid: GridFunction::new(f.start(), f.step(), values).expect("same shape as input"),
        vertices: hull,
    }
}

impl ConcaveGridFunction {
    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }

    pub fn eval(&self, q: f64) -> f64 {
        self.grid.eval(q)
    }

    /// Node indices of the hull vertices, increasing.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn vertex_points(&self) -> (Vec<f64>, Vec<f64>) {
        self.vertices.iter().map(|&k| (self.grid.node(k), self.grid.value(k))).unzip()
    }

    /// Slopes of the hull segments, strictly decreasing up to rounding.
    pub fn segment_slopes(&self) -> Vec<f64> {
        self.vertices
            .windows(2)
            .map(|w| (self.grid.value(w[1]) - self.grid.value(w[0])) / ((w[1] - w[0]) as f64 * self.grid.step()))
            .collect()
    }

    /// Index `t` of the segment `[vertex t, vertex t+1]` containing `q`, and
    /// whether `q` coincides with vertex `t` or `t+1`.
    fn locate(&self, q: f64) -> (usize, Option<usize>) {
        let pos = (q - self.grid.start()) / self.grid.step();
        let segs = self.vertices.len() - 1;
        let t = self.vertices.partition_point(|&k| (k as f64) <= pos).saturating_sub(1).min(segs.saturating_sub(1));
        let tol = (VERTEX_SNAP_TOL / self.grid.step()).max(1e-9);
        let hit = [t, t + 1]
            .into_iter()
            .filter(|&i| i < self.vertices.len())
            .find(|&i| (self.vertices[i] as f64 - pos).abs() <= tol);
        (t, hit)
    }

    /// `[right slope, left slope]` of the hull at `q`; infinite at the
    /// domain ends where one side is missing.
    pub fn superdifferential(&self, q: f64) -> SuperdiffInterval {
        let slopes = self.segment_slopes();
        if slopes.is_empty() {
            return SuperdiffInterval::new(f64::NEG_INFINITY, f64::INFINITY);
        }
        let (t, hit) = self.locate(q);
        match hit {
            Some(v) => {
                let lower = if v < slopes.len() { slopes[v] } else { f64::NEG_INFINITY };
                let upper = if v > 0 { slopes[v - 1] } else { f64::INFINITY };
                SuperdiffInterval::new(lower, upper)
            }
            None => SuperdiffInterval::new(slopes[t], slopes[t]),
        }
    }
}

/// Two-point relaxation `p = kappa p1 + (1 - kappa) p2` with
/// `F~(p) = kappa F(p1) + (1 - kappa) F(p2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChatterTriple {
    pub p1: f64,
    pub p2: f64,
    pub kappa: f64,
}

impl ChatterTriple {
    pub fn is_degenerate(&self) -> bool {
        self.p1 == self.p2
    }
}

/// Splits `p` into the endpoints of the hull bridge containing it, or returns
/// `(p, p, 1)` when the hull touches `F` at `p`.
pub fn chatter_decompose(f: &GridFunction, hull: &ConcaveGridFunction, p: f64) -> Result<ChatterTriple, ConvexError> {
    let fp = f.try_eval(p).ok_or(ConvexError::PointOutsideDomain(p))?;
    let hp = hull.eval(p);
    let touch = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + b.abs());
    if touch(fp, hp) {
        return Ok(ChatterTriple { p1: p, p2: p, kappa: 1.0 });
    }
    let (t, _) = hull.locate(p);
    let (va, vb) = (hull.vertices[t], hull.vertices[t + 1]);
    // Narrow to the nodes nearest p where F meets the hull.
    let pos = (p - f.start()) / f.step();
    let below = pos.floor() as usize;
    let left = (va..=below.min(vb)).rev().find(|&k| touch(f.value(k), hull.grid.value(k))).unwrap_or(va);
    let right = ((below + 1).max(va)..=vb).find(|&k| touch(f.value(k), hull.grid.value(k))).unwrap_or(vb);
    let (p1, p2) = (f.node(left), f.node(right));
    Ok(ChatterTriple { p1, p2, kappa: (p2 - p) / (p2 - p1) })
}
