//! Audit of the regularized log-mass functional along a trajectory.
//!
//! For a snapshot `U = U(s)`, lag `tau = t - s`, and orthonormal cosine
//! modes `e_k`,
//!
//! ```text
//! M_eta = sum_k ( int e^{tau Delta}(U e_k) )^2 / ( eta + int e^{tau Delta} U )^2
//! drift = int e^{tau Delta}( U (m1 - a1 U - b1 V) ) / ( eta + int e^{tau Delta} U )
//! ```
//!
//! `M_eta` tends to a limit of at least 1 as `eta -> 0`, and `drift` never
//! exceeds `sup m1` for nonnegative states.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernel::HeatSemigroup;
use crate::model::CoefficientSet;
use crate::solver::Trajectory;
use crate::transform::eigenfunction;

/// Default lag `t - s`.
pub const DEFAULT_AUDIT_LAG: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct AuditRow {
    pub time: f64,
    pub eta: f64,
    pub m_eta: f64,
    pub drift_ratio: f64,
    pub drift_bound: f64,
    pub drift_term_bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub lag: f64,
    pub n_modes: usize,
    pub rows: Vec<AuditRow>,
    /// Each snapshot's `M_eta` is nondecreasing as `eta` decreases through
    /// the sweep.
    pub monotone_in_eta: bool,
}

impl AuditReport {
    /// Smallest `M_eta` over snapshots at the given `eta`.
    pub fn min_m_eta(&self, eta: f64) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.eta == eta)
            .map(|r| r.m_eta)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_drift_excess(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.drift_ratio - r.drift_bound)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Audits every snapshot of `trajectory` whose time is in `probe_times`
/// (all snapshots when empty), for each `eta` in `etas`, using `n_modes`
/// cosine modes (at most the grid size).
pub fn mild_log_functional_audit(
    trajectory: &Trajectory,
    coeffs: &CoefficientSet,
    etas: &[f64],
    probe_times: &[f64],
    lag: f64,
    n_modes: usize,
) -> Result<AuditReport> {
    if etas.is_empty() {
        return Err(Error::Config("audit needs at least one eta".into()));
    }
    if let Some(e) = etas.iter().find(|e| !(**e >= 0.0)) {
        return Err(Error::Domain(format!("eta must be nonnegative, got {e}")));
    }
    let n = coeffs.grid_size();
    if n_modes == 0 || n_modes > n {
        return Err(Error::Config(format!("audit modes must lie in 1..={n}")));
    }
    let mut sg = HeatSemigroup::new(n);
    let centers: Vec<f64> = GridFunction::zeros(n).centers().collect();
    let modes: Vec<Vec<f64>> = (0..n_modes)
        .map(|k| centers.iter().map(|&x| eigenfunction(k, x)).collect())
        .collect();
    let sup_m = coeffs.m1.max();

    let mut rows = Vec::new();
    let mut monotone = true;
    for (time, field) in &trajectory.snapshots {
        if !probe_times.is_empty() && !probe_times.iter().any(|t| (t - time).abs() < 1e-9) {
            continue;
        }
        crate::error::check_grid(n, field.grid_size())?;
        let u = &field.u;
        let denom_mass = sg.apply(lag, u)?.integral();
        let mut numer = 0.0;
        for e in &modes {
            let ue = GridFunction::new(u.values().iter().zip(e).map(|(a, b)| a * b).collect())?;
            let c = sg.apply(lag, &ue)?.integral();
            numer += c * c;
        }
        let reaction: Vec<f64> = (0..n)
            .map(|j| coeffs.reaction_at(j, u.values()[j], field.v.values()[j]).0)
            .collect();
        let drift_mass = sg.apply(lag, &GridFunction::new(reaction)?)?.integral();

        let mut previous: Option<(f64, f64)> = None;
        let mut sorted: Vec<f64> = etas.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        for &eta in &sorted {
            let d = eta + denom_mass;
            if d == 0.0 {
                return Err(Error::Domain(format!(
                    "zero mass at t = {time} with eta = 0"
                )));
            }
            let m_eta = numer / (d * d);
            let drift_ratio = drift_mass / d;
            if let Some((_, prev_m)) = previous {
                if m_eta < prev_m {
                    monotone = false;
                }
            }
            previous = Some((eta, m_eta));
            rows.push(AuditRow {
                time: *time,
                eta,
                m_eta,
                drift_ratio,
                drift_bound: sup_m,
                drift_term_bound_ok: drift_ratio <= sup_m + 1e-9,
            });
        }
    }
    if rows.is_empty() {
        return Err(Error::Config("no snapshot matches the probe times".into()));
    }
    Ok(AuditReport {
        lag,
        n_modes,
        rows,
        monotone_in_eta: monotone,
    })
}
