use crate::error::{Error, Result};
use crate::model::CoefficientSet;
use crate::solver::EnsembleStats;

/// `E |Z(t)|_E^p` per snapshot with a no-growth verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCurve {
    pub p: f64,
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
    /// Maximum of the curve over `[T/4, T/2]`.
    pub early_max: f64,
    /// Maximum of the curve over `[T/2, T]`.
    pub late_max: f64,
    /// `late_max / early_max`.
    pub growth_ratio: f64,
    /// `late_max <= 2 early_max`.
    pub flat_tail: bool,
    /// Both self-limitation coefficients are bounded away from zero.
    pub in_hypothesis: bool,
}

pub fn moment_bound_curve(
    stats: &EnsembleStats,
    coeffs: &CoefficientSet,
    p: f64,
) -> Result<MomentCurve> {
    if !(p > 0.0) {
        return Err(Error::Config(format!(
            "moment order must be positive, got {p}"
        )));
    }
    let summary = stats.mean_sup_norm_p(p);
    let horizon = stats.times.last().copied().unwrap_or(0.0);
    let max_over = |lo: f64, hi: f64| {
        stats
            .times
            .iter()
            .zip(&summary.mean)
            .filter(|(t, _)| **t >= lo - 1e-12 && **t <= hi + 1e-12)
            .map(|(_, m)| *m)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let early_max = max_over(horizon / 4.0, horizon / 2.0);
    let late_max = max_over(horizon / 2.0, horizon);
    if !early_max.is_finite() || !late_max.is_finite() {
        return Err(Error::Estimation(
            "moment curve needs snapshots in [T/4, T/2] and [T/2, T]".into(),
        ));
    }
    let growth_ratio = if early_max > 0.0 {
        late_max / early_max
    } else if late_max > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(MomentCurve {
        p,
        times: summary.times,
        mean: summary.mean,
        se: summary.se,
        early_max,
        late_max,
        growth_ratio,
        flat_tail: late_max <= 2.0 * early_max,
        in_hypothesis: coeffs.a1.min() > 0.0 && coeffs.a2.min() > 0.0,
    })
}
