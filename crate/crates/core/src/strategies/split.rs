use super::StrategyError;
use crate::bio_model::ValidatedCommunity;

/// Per-agent intensities attaining `F(q)`, backtracked through the
/// sup-convolution fold. Off the lattice the splits of the two neighbouring
/// nodes are blended, which is exact when they differ in a single agent.
pub fn split_to_agents(c: &ValidatedCommunity, q: f64) -> Result<Vec<f64>, StrategyError> {
    let f = &c.revenue.f;
    let slack = 1e-12 * f.end().max(1.0);
    if !(q >= -slack && q <= f.end() + slack) {
        return Err(StrategyError::PointOutsideDomain(q));
    }
    let pos = (q.clamp(0.0, f.end()) / f.step()).max(0.0);
    let lo = (pos.floor() as usize).min(f.cells());
    let theta = pos - lo as f64;
    let at = |j: usize| -> Vec<f64> { c.revenue.trace.split_indices(j).iter().map(|&k| k as f64 * c.step).collect() };
    if theta <= 1e-9 || lo == f.cells() {
        return Ok(at(lo));
    }
    if theta >= 1.0 - 1e-9 {
        return Ok(at(lo + 1));
    }
    let (a, b) = (at(lo), at(lo + 1));
    Ok(a.iter().zip(&b).map(|(x, y)| (1.0 - theta) * x + theta * y).collect())
}
