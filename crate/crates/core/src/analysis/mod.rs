//! Estimators and verdicts computed from ensembles and trajectories.

mod audit;
mod density;
mod extinction;
mod holder;
mod moments;
mod stationarity;

pub use audit::{mild_log_functional_audit, AuditReport, AuditRow, DEFAULT_AUDIT_LAG};
pub use density::{density_smoke_test, DensityReport, KdePoint, MIN_DENSITY_SAMPLES};
pub use extinction::{extinction_report, ExtinctionReport};
pub use holder::{
    fbm_path, holder_estimate, holder_estimate_ensemble, Direction, HolderEstimate,
    BOOTSTRAP_RESAMPLES, MIN_LAGS, MIN_LAG_DECADES,
};
pub use moments::{moment_bound_curve, MomentCurve};
pub use stationarity::{
    stationarity_report, StationarityReport, WindowSummary, STATIONARITY_ALPHA,
};

/// One row of `verdicts.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub check: String,
    /// Short name of the property being checked.
    pub property: String,
    pub pass: bool,
    pub statistic: f64,
    pub threshold: f64,
}

impl Verdict {
    pub fn new(
        check: impl Into<String>,
        property: impl Into<String>,
        pass: bool,
        statistic: f64,
        threshold: f64,
    ) -> Self {
        Self {
            check: check.into(),
            property: property.into(),
            pass,
            statistic,
            threshold,
        }
    }
}
