use serde::{Deserialize, Serialize};

use super::ModelError;

/// Absolute tolerance on the golden-rule state.
pub const GOLDEN_RULE_TOL: f64 = 1e-12;

/// Population growth law on `[0, 1]`.
///
/// Only the scaled Verhulst family `b(x) = r x (1 - x)` is provided. Another
/// strictly concave law with `b(0) = b(1) = 0` slots in as a new variant; the
/// rest of the crate only calls [`rate`](Self::rate), [`slope`](Self::slope)
/// and [`max_rate`](Self::max_rate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum GrowthModel {
    Verhulst { r: f64 },
}

impl GrowthModel {
    pub fn verhulst(r: f64) -> Self {
        GrowthModel::Verhulst { r }
    }

    /// `b(x)`
    pub fn rate(&self, x: f64) -> f64 {
        match *self {
            GrowthModel::Verhulst { r } => r * x * (1.0 - x),
        }
    }

    /// `b'(x)`
    pub fn slope(&self, x: f64) -> f64 {
        match *self {
            GrowthModel::Verhulst { r } => r * (1.0 - 2.0 * x),
        }
    }

    /// `max b` over `[0, 1]`.
    pub fn max_rate(&self) -> f64 {
        match *self {
            GrowthModel::Verhulst { r } => r / 4.0,
        }
    }

    /// Lipschitz constant `sup |b'|` on `[0, 1]`.
    pub fn lipschitz(&self) -> f64 {
        self.slope(0.0).abs().max(self.slope(1.0).abs())
    }

    pub fn intrinsic_rate(&self) -> f64 {
        match *self {
            GrowthModel::Verhulst { r } => r,
        }
    }
}

/// Unique `x` in `(0, 1)` with `b'(x) = beta`, by bisection on the decreasing `b'`.
pub fn golden_rule(model: &GrowthModel, beta: f64) -> Result<f64, ModelError> {
    let s0 = model.slope(0.0);
    if !(beta < s0) {
        return Err(ModelError::NoInteriorGoldenRule { beta, slope_at_zero: s0 });
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > GOLDEN_RULE_TOL {
        let mid = 0.5 * (lo + hi);
        if model.slope(mid) > beta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verhulst_shape() {
        let m = GrowthModel::verhulst(1.0);
        assert_eq!(m.rate(0.0), 0.0);
        assert_eq!(m.rate(1.0), 0.0);
        assert_eq!(m.max_rate(), 0.25);
        for k in 1..100 {
            let x = k as f64 / 100.0;
            assert!(m.rate(x) > 0.0);
            assert!(m.slope(x + 0.005) < m.slope(x));
        }
    }

    #[test]
    fn golden_rule_examples() {
        let m = GrowthModel::verhulst(1.0);
        assert!((golden_rule(&m, 0.05).unwrap() - 0.475).abs() < 1e-12);
        assert!((golden_rule(&m, 0.0).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(golden_rule(&m, 1.5), Err(ModelError::NoInteriorGoldenRule { .. })));
        assert!(golden_rule(&m, 1.0).is_err());
    }

    #[test]
    fn golden_rule_root_is_tight() {
        let m = GrowthModel::verhulst(2.5);
        let x = golden_rule(&m, 0.3).unwrap();
        assert!((m.slope(x) - 0.3).abs() <= 2.5 * 2.0 * GOLDEN_RULE_TOL);
    }
}
