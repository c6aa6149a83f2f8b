use crate::error::{Error, Result};
use crate::model::{CoefficientSet, Species};
use crate::solver::EnsembleStats;
use crate::stats::{bootstrap_se, fit_line, mean};

/// Decay of `E ln(eta + mass)` against the extinction rate
/// `R = sup m - inf sigma^2 / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtinctionReport {
    pub species: Species,
    pub times: Vec<f64>,
    pub mean_log_mass: Vec<f64>,
    pub se: Vec<f64>,
    pub eta: f64,
    pub tail_window: (f64, f64),
    pub slope: f64,
    /// Path-level bootstrap standard error of the slope.
    pub slope_se: f64,
    pub r_bound: f64,
    /// `ln(eta + mass(U0))`.
    pub initial_log_mass: f64,
    pub slope_ok: bool,
    /// `E ln(eta + mass(t)) <= initial + R t + 3 SE(t)` at every snapshot.
    pub bound_ok: bool,
    /// Largest value of `E ln(eta + mass(t)) - initial - R t - 3 SE(t)`.
    pub worst_bound_margin: f64,
    /// The initial mass is zero, so the log-mass is pinned at `ln eta`.
    pub degenerate: bool,
    pub pass: bool,
}

/// Requires a snapshot at time 0 and at least two snapshots in the tail
/// window.
pub fn extinction_report(
    stats: &EnsembleStats,
    coeffs: &CoefficientSet,
    species: Species,
    tail_window: (f64, f64),
    resamples: usize,
    seed: u64,
) -> Result<ExtinctionReport> {
    if stats.times.first() != Some(&0.0) {
        return Err(Error::Estimation(
            "extinction report needs a snapshot at time 0".into(),
        ));
    }
    let tail: Vec<usize> = (0..stats.times.len())
        .filter(|&i| {
            stats.times[i] >= tail_window.0 - 1e-12 && stats.times[i] <= tail_window.1 + 1e-12
        })
        .collect();
    if tail.len() < 2 {
        return Err(Error::Estimation(format!(
            "tail window [{}, {}] holds {} snapshots, need 2",
            tail_window.0,
            tail_window.1,
            tail.len()
        )));
    }
    let summary = stats.mean_ln_mass(species);
    let r_bound = coeffs.extinction_rate(species);
    let initial_log_mass = summary.mean[0];
    let initial_mass = stats
        .records
        .values()
        .next()
        .map(|r| r.mass(species)[0])
        .unwrap_or(0.0);
    let degenerate = initial_mass == 0.0;

    let xs: Vec<f64> = tail.iter().map(|&i| stats.times[i]).collect();
    let ys: Vec<f64> = tail.iter().map(|&i| summary.mean[i]).collect();
    let slope = fit_line(&xs, &ys)
        .ok_or_else(|| Error::Estimation("tail regression failed".into()))?
        .slope;

    let per_path: Vec<&[f64]> = stats.records.values().map(|r| r.ln_mass(species)).collect();
    let slope_se = bootstrap_se(per_path.len(), resamples, seed, |idx| {
        let ys: Vec<f64> = tail
            .iter()
            .map(|&i| mean(&idx.iter().map(|&k| per_path[k][i]).collect::<Vec<_>>()))
            .collect();
        fit_line(&xs, &ys).map(|f| f.slope).unwrap_or(f64::NAN)
    });

    let slope_ok = slope <= r_bound + 3.0 * slope_se;
    let worst_bound_margin = stats
        .times
        .iter()
        .enumerate()
        .map(|(i, &t)| summary.mean[i] - initial_log_mass - r_bound * t - 3.0 * summary.se[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let bound_ok = worst_bound_margin <= 1e-12;

    Ok(ExtinctionReport {
        species,
        times: stats.times.clone(),
        mean_log_mass: summary.mean,
        se: summary.se,
        eta: stats.eta,
        tail_window,
        slope,
        slope_se,
        r_bound,
        initial_log_mass,
        slope_ok,
        bound_ok,
        worst_bound_margin,
        degenerate,
        pass: slope_ok && bound_ok && !degenerate,
    })
}
