//! Windowed stationarity diagnostics.
//!
//! After a burn-in of the first quarter of the horizon, the remaining
//! snapshots are split into equal disjoint windows. Site marginals from the
//! last snapshot of each window are pooled into an early half and a late
//! half of the windows and compared with a two-sample KS test.

use crate::error::{Error, Result};
use crate::solver::EnsembleStats;
use crate::stats::{mean, KsTest};

/// Level of the per-site KS tests.
pub const STATIONARITY_ALPHA: f64 = 0.05;
/// Fraction of probe sites that must pass.
const PASS_FRACTION: f64 = 0.8;
const MIN_WINDOWS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSummary {
    pub start: f64,
    pub end: f64,
    pub mean_mass_u: f64,
    pub mean_mass_v: f64,
    pub mean_sup_norm: f64,
    /// Mean of `U` at each probe site.
    pub site_means: Vec<f64>,
    pub holder_norm_proxy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub burn_in: f64,
    pub windows: Vec<WindowSummary>,
    pub probe_cells: Vec<usize>,
    /// Early-versus-late KS test per probe site.
    pub site_ks: Vec<KsTest>,
    pub pass_fraction: f64,
    pub pass: bool,
}

pub fn stationarity_report(
    stats: &EnsembleStats,
    probe_cells: &[usize],
    n_windows: usize,
) -> Result<StationarityReport> {
    if n_windows < MIN_WINDOWS || !n_windows.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "need an even number of at least {MIN_WINDOWS} windows, got {n_windows}"
        )));
    }
    let n_probes = stats
        .records
        .values()
        .next()
        .map(|r| r.probes.first().map_or(0, |p| p.len()))
        .ok_or_else(|| Error::Estimation("empty ensemble".into()))?;
    if n_probes == 0 || n_probes != probe_cells.len() {
        return Err(Error::Config(
            "ensemble did not record the requested probe sites".into(),
        ));
    }
    let horizon = *stats.times.last().unwrap_or(&0.0);
    let burn_in = 0.25 * horizon;
    let after: Vec<usize> = (0..stats.times.len())
        .filter(|&i| stats.times[i] > burn_in + 1e-12)
        .collect();
    if after.len() < n_windows {
        return Err(Error::Config(format!(
            "{} snapshots after burn-in cannot fill {n_windows} windows",
            after.len()
        )));
    }
    let per_window = after.len() / n_windows;
    let width = (horizon - burn_in) / n_windows as f64;

    let mut windows = Vec::with_capacity(n_windows);
    let mut ends = Vec::with_capacity(n_windows);
    for w in 0..n_windows {
        let idx = &after[w * per_window..(w + 1) * per_window];
        ends.push(*idx.last().expect("nonempty window"));
        let avg = |f: &dyn Fn(&crate::solver::PathRecord, usize) -> f64| {
            let vals: Vec<f64> = stats
                .records
                .values()
                .flat_map(|r| idx.iter().map(move |&i| (r, i)))
                .map(|(r, i)| f(r, i))
                .collect();
            mean(&vals)
        };
        windows.push(WindowSummary {
            start: burn_in + w as f64 * width,
            end: burn_in + (w + 1) as f64 * width,
            mean_mass_u: avg(&|r, i| r.mass_u[i]),
            mean_mass_v: avg(&|r, i| r.mass_v[i]),
            mean_sup_norm: avg(&|r, i| r.sup_norm[i]),
            site_means: (0..n_probes).map(|s| avg(&|r, i| r.probes[i][s])).collect(),
            holder_norm_proxy: avg(&|r, i| r.holder_proxy[i]),
        });
    }

    let half = n_windows / 2;
    let site_ks: Vec<KsTest> = (0..n_probes)
        .map(|s| {
            let pool = |ws: &[usize]| -> Vec<f64> {
                stats
                    .records
                    .values()
                    .flat_map(|r| ws.iter().map(move |&i| r.probes[i][s]))
                    .collect()
            };
            KsTest::run(
                &pool(&ends[..half]),
                &pool(&ends[half..]),
                STATIONARITY_ALPHA,
            )
        })
        .collect();
    let passed = site_ks.iter().filter(|k| k.passes()).count();
    let pass_fraction = passed as f64 / n_probes as f64;
    Ok(StationarityReport {
        burn_in,
        windows,
        probe_cells: probe_cells.to_vec(),
        site_ks,
        pass_fraction,
        pass: pass_fraction >= PASS_FRACTION,
    })
}
