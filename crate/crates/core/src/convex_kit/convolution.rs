//! Sup-convolution of revenue functions sampled on a shared lattice.
//!
//! `F(q) = max { f_1(a_1) + ... + f_n(a_n) : a_1 + ... + a_n = q }` is built by a
//! left fold of pairwise convolutions. Every pair is searched exhaustively over
//! node splits, except when both operands are concave: then the split is
//! obtained by merging cell slopes in decreasing order, which attains the
//! same maximum.

use super::{ConvexError, GridFunction};

const CONCAVE_TOL: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;

/// Optimal splits recorded while folding. `splits[k][j]` is the node index
/// assigned to the prefix `f_1 ⊕ ... ⊕ f_{k+1}` when the fold with
/// `f_{k+2}` is evaluated at node `j`.
#[derive(Debug, Clone, Default)]
pub struct FoldTrace {
    pub splits: Vec<Vec<usize>>,
    pub cells: Vec<usize>,
}

/// Sup-convolution of the given functions; all must start at 0 and share one
/// lattice step.
pub fn inf_convolution(fs: &[GridFunction]) -> Result<GridFunction, ConvexError> {
    inf_convolution_traced(fs).map(|(f, _)| f)
}

pub fn inf_convolution_traced(fs: &[GridFunction]) -> Result<(GridFunction, FoldTrace), ConvexError> {
    let first = fs.first().ok_or(ConvexError::EmptyAgentList)?;
    check_lattice(first, first)?;
    let mut trace = FoldTrace { splits: Vec::with_capacity(fs.len().saturating_sub(1)), cells: vec![first.cells()] };
    let mut acc = first.clone();
    for f in &fs[1..] {
        check_lattice(&acc, f)?;
        let (next, split) = sup_convolve_pair(&acc, f);
        trace.splits.push(split);
        trace.cells.push(f.cells());
        acc = next;
    }
    Ok((acc, trace))
}

fn check_lattice(a: &GridFunction, b: &GridFunction) -> Result<(), ConvexError> {
    if b.start() != 0.0 || a.start() != 0.0 {
        return Err(ConvexError::IncompatibleGrids);
    }
    if (a.step() - b.step()).abs() > 1e-12 * a.step() {
        return Err(ConvexError::IncompatibleGrids);
    }
    Ok(())
}

/// Pairwise sup-convolution; returns the result and, per output node, the
/// node index taken from `a`. Ties go to the smallest share of `a`.
pub fn sup_convolve_pair(a: &GridFunction, b: &GridFunction) -> (GridFunction, Vec<usize>) {
    if a.is_concave(CONCAVE_TOL) && b.is_concave(CONCAVE_TOL) {
        merge_concave(a, b)
    } else {
        exhaustive(a, b)
    }
}

fn exhaustive(a: &GridFunction, b: &GridFunction) -> (GridFunction, Vec<usize>) {
    let (ma, mb) = (a.cells(), b.cells());
    let (av, bv) = (a.values(), b.values());
    let mut values = Vec::with_capacity(ma + mb + 1);
    let mut split = Vec::with_capacity(ma + mb + 1);
    for j in 0..=ma + mb {
        let lo = j.saturating_sub(mb);
        let hi = j.min(ma);
        let mut best_i = lo;
        let mut best = av[lo] + bv[j - lo];
        for i in lo + 1..=hi {
            let val = av[i] + bv[j - i];
            if val > best + TIE_TOL * (1.0 + best.abs()) {
                best = val;
                best_i = i;
            }
        }
        values.push(best);
        split.push(best_i);
    }
    (GridFunction::new(0.0, a.step(), values).expect("non-empty lattice"), split)
}

fn merge_concave(a: &GridFunction, b: &GridFunction) -> (GridFunction, Vec<usize>) {
    let (ma, mb) = (a.cells(), b.cells());
    let (sa, sb) = (a.slopes(), b.slopes());
    let (av, bv) = (a.values(), b.values());
    let mut values = Vec::with_capacity(ma + mb + 1);
    let mut split = Vec::with_capacity(ma + mb + 1);
    let (mut i, mut k) = (0usize, 0usize);
    values.push(av[0] + bv[0]);
    split.push(0);
    for _ in 0..ma + mb {
        let take_a = i < ma && (k == mb || sa[i] > sb[k] + CONCAVE_TOL * (1.0 + sb[k].abs()));
        if take_a {
            i += 1;
        } else {
            k += 1;
        }
        values.push(av[i] + bv[k]);
        split.push(i);
    }
    (GridFunction::new(0.0, a.step(), values).expect("non-empty lattice"), split)
}

impl FoldTrace {
    /// Per-agent node indices realizing the folded maximum at node `j`.
    pub fn split_indices(&self, j: usize) -> Vec<usize> {
        let n = self.cells.len();
        let mut out = vec![0; n];
        let mut rest = j;
        for level in (0..self.splits.len()).rev() {
            let prefix = self.splits[level][rest];
            out[level + 1] = rest - prefix;
            rest = prefix;
        }
        out[0] = rest;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lattice(step: f64, alpha: f64, f: impl Fn(f64) -> f64) -> GridFunction {
        let cells = (alpha / step).round() as usize;
        GridFunction::on_lattice(step, cells, f).unwrap()
    }

    #[test]
    fn two_linear_agents() {
        let step = 0.1 / 64.0;
        let f1 = lattice(step, 0.2, |u| u);
        let f2 = lattice(step, 0.3, |u| 2.0 * u);
        let big = inf_convolution(&[f1, f2]).unwrap();
        assert!((big.end() - 0.5).abs() < 1e-12);
        assert!((big.eval(0.4) - 0.7).abs() < 1e-12);
        assert!((big.eval(0.3) - 0.6).abs() < 1e-12);
        assert!((big.eval(0.1) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn single_agent_is_identity() {
        let f = lattice(1.0 / 32.0, 1.0, |u| (u * 7.0).sin().abs());
        assert_eq!(inf_convolution(std::slice::from_ref(&f)).unwrap(), f);
    }

    #[test]
    fn identical_concave_agents_split_equally() {
        let f = lattice(1.0 / 64.0, 1.0, |u| 2.0 * u - u * u);
        let big = inf_convolution(&[f.clone(), f]).unwrap();
        for k in (0..big.len()).step_by(2) {
            let q = big.node(k);
            assert!((big.value(k) - (2.0 * q - q * q / 2.0)).abs() < 1e-12, "q = {q}");
        }
    }

    #[test]
    fn empty_list_is_rejected() {
        assert!(matches!(inf_convolution(&[]), Err(ConvexError::EmptyAgentList)));
    }

    #[test]
    fn mismatched_steps_are_rejected() {
        let a = lattice(0.1, 1.0, |u| u);
        let b = lattice(0.05, 1.0, |u| u);
        assert!(matches!(inf_convolution(&[a, b]), Err(ConvexError::IncompatibleGrids)));
    }

    #[test]
    fn trace_recovers_split() {
        let step = 0.1 / 16.0;
        let f1 = lattice(step, 0.2, |u| u);
        let f2 = lattice(step, 0.3, |u| 2.0 * u);
        let (big, trace) = inf_convolution_traced(&[f1.clone(), f2.clone()]).unwrap();
        let j = big.node_index(0.4, 1e-9).unwrap();
        let idx = trace.split_indices(j);
        assert_eq!(idx.iter().sum::<usize>(), j);
        assert!((f1.node(idx[0]) - 0.1).abs() < 1e-12);
        assert!((f2.node(idx[1]) - 0.3).abs() < 1e-12);
    }
}
