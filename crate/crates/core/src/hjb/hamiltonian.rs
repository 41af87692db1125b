use super::HjbError;
use crate::convex_kit::{Conjugate, SuperdiffInterval, VERTEX_SNAP_TOL};

/// Largest marginal value accepted from a branch root.
pub const P_MAX: f64 = 1e6;

/// Side of the golden-rule point a state lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `x < x^`: the population grows, so `p` sits above the superdifferential at `b(x)`.
    Left,
    /// `x > x^`: the population shrinks, so `p` sits below it.
    Right,
}

/// Root of `beta v = b p + F^(p)` on one branch, with the hull vertex that
/// attains `F^(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchRoot {
    pub p: f64,
    pub active_q: f64,
    /// True when `beta v < F~(b)` and `p` was pinned to the branch end.
    pub clamped: bool,
}

/// `G(p) = b p + F^(p) = max_j (F~_j + (b - q_j) p)` over hull vertices `j`.
///
/// On each branch `G` is monotone and piecewise linear in `p`, so the root is
/// found exactly by a binary search over the breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub beta: f64,
    pub conj: Conjugate,
}

impl Hamiltonian {
    pub fn new(beta: f64, conj: Conjugate) -> Self {
        Self { beta, conj }
    }

    /// `b p + F^(p)`.
    pub fn g(&self, b: f64, p: f64) -> f64 {
        b * p + self.conj.eval(p)
    }

    /// `beta v - b p - F^(p)`.
    pub fn residual(&self, b: f64, v: f64, p: f64) -> f64 {
        self.beta * v - self.g(b, p)
    }

    /// `F~(b)` from the hull vertices.
    pub fn hull_value(&self, b: f64) -> f64 {
        let (qs, fv) = (self.conj.vertex_q(), self.conj.vertex_value());
        let j = qs.partition_point(|&q| q <= b).clamp(1, qs.len() - 1) - 1;
        let s = self.conj.slopes();
        fv[j] + (b - qs[j]) * s[j]
    }

    /// Superdifferential of `F~` at `b`, snapping to a vertex within
    /// [`VERTEX_SNAP_TOL`].
    pub fn superdiff(&self, b: f64) -> SuperdiffInterval {
        let (qs, s) = (self.conj.vertex_q(), self.conj.slopes());
        let k = qs.partition_point(|&q| q < b - VERTEX_SNAP_TOL);
        let hit = k < qs.len() && (qs[k] - b).abs() <= VERTEX_SNAP_TOL;
        if hit {
            let lower = if k < s.len() { s[k] } else { f64::NEG_INFINITY };
            let upper = if k > 0 { s[k - 1] } else { f64::INFINITY };
            SuperdiffInterval::new(lower, upper)
        } else {
            let t = k.clamp(1, qs.len() - 1) - 1;
            SuperdiffInterval::new(s[t], s[t])
        }
    }

    pub fn root(&self, b: f64, v: f64, branch: Branch) -> Result<BranchRoot, HjbError> {
        let target = self.beta * v;
        let root = match branch {
            Branch::Left => self.left_root(b, target),
            Branch::Right => self.right_root(b, target),
        };
        match root {
            Some(r) if r.p.is_finite() && r.p <= P_MAX => Ok(r),
            _ => Err(HjbError::BranchRootNotBracketed { b, v }),
        }
    }

    fn left_root(&self, b: f64, target: f64) -> Option<BranchRoot> {
        let (qs, fv, s) = (self.conj.vertex_q(), self.conj.vertex_value(), self.conj.slopes());
        let below = qs.partition_point(|&q| q < b);
        if below == 0 || below == qs.len() {
            return None;
        }
        let js = below - 1;
        if target <= fv[js] + (b - qs[js]) * s[js] {
            return Some(BranchRoot { p: s[js], active_q: qs[js], clamped: true });
        }
        // G at the top of piece j is decreasing in j and infinite for j = 0.
        let upper_end = |j: usize| fv[j] + (b - qs[j]) * s[j - 1];
        let j = first_false(1, js + 1, |j| upper_end(j) >= target) - 1;
        let hi = if j > 0 { s[j - 1] } else { f64::INFINITY };
        let p = ((target - fv[j]) / (b - qs[j])).clamp(s[j], hi);
        Some(BranchRoot { p, active_q: qs[j], clamped: false })
    }

    fn right_root(&self, b: f64, target: f64) -> Option<BranchRoot> {
        let (qs, fv, s) = (self.conj.vertex_q(), self.conj.vertex_value(), self.conj.slopes());
        let ks = qs.partition_point(|&q| q <= b);
        if ks == 0 || ks == qs.len() {
            return None;
        }
        if target <= fv[ks] + (b - qs[ks]) * s[ks - 1] {
            return Some(BranchRoot { p: s[ks - 1], active_q: qs[ks], clamped: true });
        }
        // G at the bottom of piece k is increasing in k and infinite on the last piece.
        let last = qs.len() - 1;
        let lower_end = |k: usize| fv[k] + (b - qs[k]) * s[k];
        let k = first_false(ks, last, |k| lower_end(k) < target);
        let lo = if k < last { s[k] } else { f64::NEG_INFINITY };
        let p = ((fv[k] - target) / (qs[k] - b)).clamp(lo, s[k - 1]);
        Some(BranchRoot { p, active_q: qs[k], clamped: false })
    }
}

/// Smallest `i` in `[lo, hi)` with `!pred(i)`, or `hi`; `pred` must hold on a prefix.
fn first_false<P: Fn(usize) -> bool>(mut lo: usize, mut hi: usize, pred: P) -> usize {
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}
