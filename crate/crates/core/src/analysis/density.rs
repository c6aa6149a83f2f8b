//! Smoke test for absolute continuity of a one-point marginal.
//!
//! Exact zeros (produced by the positivity clamp) are reported and set
//! aside. Among the remaining samples, values equal up to a relative
//! `1e-12` form one atom; the largest atom's share of all samples is the
//! largest jump of the empirical CDF.

use crate::error::{Error, Result};
use crate::stats::variance;

pub const MIN_DENSITY_SAMPLES: usize = 2000;
const TIE_TOLERANCE: f64 = 1e-12;
const KDE_POINTS: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdePoint {
    pub x: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityReport {
    pub n: usize,
    /// Share of samples that are exactly zero (excluded from the atom check).
    pub atom_fraction_at_zero_excluded: f64,
    /// Samples that tie with another sample.
    pub repeated_values: usize,
    /// Largest empirical CDF jump among the nonzero samples.
    pub max_gap_statistic: f64,
    /// `3 / sqrt(n)`.
    pub threshold: f64,
    pub has_atom: bool,
    pub kde_bandwidth: f64,
    pub kde: Vec<KdePoint>,
}

pub fn density_smoke_test(samples: &[f64]) -> Result<DensityReport> {
    let n = samples.len();
    if n < MIN_DENSITY_SAMPLES {
        return Err(Error::Underpowered {
            what: "density smoke test samples",
            required: MIN_DENSITY_SAMPLES,
            got: n,
        });
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("density samples must be finite".into()));
    }
    let zeros = samples.iter().filter(|&&x| x == 0.0).count();
    let mut pos: Vec<f64> = samples.iter().copied().filter(|&x| x != 0.0).collect();
    pos.sort_by(f64::total_cmp);

    let mut repeated = 0;
    let mut largest = if pos.is_empty() { 0 } else { 1 };
    let mut run = 1;
    for i in 1..pos.len() {
        let tie = (pos[i] - pos[i - 1]).abs() <= TIE_TOLERANCE * pos[i].abs().max(pos[i - 1].abs());
        if tie {
            run += 1;
            repeated += if run == 2 { 2 } else { 1 };
        } else {
            run = 1;
        }
        largest = largest.max(run);
    }
    let max_gap = largest as f64 / n as f64;
    let threshold = 3.0 / (n as f64).sqrt();

    let bandwidth = silverman_bandwidth(&pos);
    let kde = if bandwidth > 0.0 {
        let lo = pos[0] - 3.0 * bandwidth;
        let hi = pos[pos.len() - 1] + 3.0 * bandwidth;
        let norm = 1.0 / (n as f64 * bandwidth * (2.0 * std::f64::consts::PI).sqrt());
        (0..KDE_POINTS)
            .map(|i| {
                let x = lo + (hi - lo) * i as f64 / (KDE_POINTS - 1) as f64;
                let density = pos
                    .iter()
                    .map(|s| (-0.5 * ((x - s) / bandwidth).powi(2)).exp())
                    .sum::<f64>()
                    * norm;
                KdePoint { x, density }
            })
            .collect()
    } else {
        Vec::new()
    };

    Ok(DensityReport {
        n,
        atom_fraction_at_zero_excluded: zeros as f64 / n as f64,
        repeated_values: repeated,
        max_gap_statistic: max_gap,
        threshold,
        has_atom: max_gap >= threshold,
        kde_bandwidth: bandwidth,
        kde,
    })
}

/// `0.9 min(sd, IQR / 1.34) n^{-1/5}`; zero for degenerate samples.
fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n < 2 || sorted[n - 1] - sorted[0] <= TIE_TOLERANCE * sorted[n - 1].abs() {
        return 0.0;
    }
    let sd = variance(sorted).sqrt();
    let q = |p: f64| sorted[((n - 1) as f64 * p).round() as usize];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (n as f64).powf(-0.2)
}
