//! Hölder exponents from increment moments.
//!
//! For increments `D(l)` at lag `l`, the exponent is the slope of
//! `ln E|D(l)|^p` against `ln l`, divided by `p`.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::solver::{EnsembleStats, IncrementTable};
use crate::stats::{bootstrap_se, fit_line};

/// Fewest lags accepted by the regression.
pub const MIN_LAGS: usize = 5;
/// Smallest accepted `log10(max lag / min lag)`.
pub const MIN_LAG_DECADES: f64 = 1.5;
/// Path-level bootstrap resamples for the confidence band.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Space,
    Time,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderEstimate {
    pub direction: Direction,
    pub p: f64,
    pub lags: Vec<f64>,
    /// `E|D(l)|^p` per lag.
    pub moments: Vec<f64>,
    pub log_log_slope: f64,
    pub r2: f64,
    /// Standard error of the exponent (bootstrap when available, otherwise
    /// the regression standard error).
    pub se: f64,
    /// Exponent plus or minus two standard errors.
    pub confidence_band: (f64, f64),
}

impl HolderEstimate {
    pub fn exponent(&self) -> f64 {
        self.log_log_slope
    }
}

fn slope_of(lags: &[f64], moments: &[f64], p: f64) -> Result<(f64, f64, f64)> {
    if moments.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
        return Err(Error::Estimation(
            "degenerate increments: a lag has zero or undefined moment".into(),
        ));
    }
    let xs: Vec<f64> = lags.iter().map(|l| l.ln()).collect();
    let ys: Vec<f64> = moments.iter().map(|m| m.ln()).collect();
    let fit = fit_line(&xs, &ys).ok_or_else(|| Error::Estimation("regression failed".into()))?;
    Ok((fit.slope / p, fit.r2, fit.slope_se / p))
}

fn check_lags(lags: &[f64]) -> Result<()> {
    if lags.len() < MIN_LAGS {
        return Err(Error::Estimation(format!(
            "need at least {MIN_LAGS} lags, got {}",
            lags.len()
        )));
    }
    let lo = lags.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lags.iter().copied().fold(0.0, f64::max);
    if !(lo > 0.0) || (hi / lo).log10() < MIN_LAG_DECADES - 1e-9 {
        return Err(Error::Estimation(format!(
            "lags span {:.3} decades, need {MIN_LAG_DECADES}",
            (hi / lo).log10()
        )));
    }
    Ok(())
}

/// Exponent from a single increment table.
pub fn holder_estimate(table: &IncrementTable, direction: Direction) -> Result<HolderEstimate> {
    check_lags(&table.lags)?;
    let moments = table.moments();
    let (beta, r2, se) = slope_of(&table.lags, &moments, table.p)?;
    Ok(HolderEstimate {
        direction,
        p: table.p,
        lags: table.lags.clone(),
        moments,
        log_log_slope: beta,
        r2,
        se,
        confidence_band: (beta - 2.0 * se, beta + 2.0 * se),
    })
}

/// Exponent from an ensemble, with a path-level bootstrap band.
pub fn holder_estimate_ensemble(
    stats: &EnsembleStats,
    direction: Direction,
    resamples: usize,
    seed: u64,
) -> Result<HolderEstimate> {
    let time = direction == Direction::Time;
    let total = stats.increment_table(time, None)?;
    let mut est = holder_estimate(&total, direction)?;
    let keys: Vec<u64> = stats.records.keys().copied().collect();
    let tables: Vec<IncrementTable> = keys
        .iter()
        .map(|k| stats.increment_table(time, Some(&[*k])))
        .collect::<Result<_>>()?;
    if keys.len() > 1 && resamples >= 2 {
        let p = total.p;
        let lags = total.lags.clone();
        let se = bootstrap_se(keys.len(), resamples, seed, |idx| {
            let mut sums = vec![0.0; lags.len()];
            let mut counts = vec![0u64; lags.len()];
            for &i in idx {
                for l in 0..lags.len() {
                    sums[l] += tables[i].sums[l];
                    counts[l] += tables[i].counts[l];
                }
            }
            let m: Vec<f64> = sums
                .iter()
                .zip(&counts)
                .map(|(s, &c)| s / c as f64)
                .collect();
            slope_of(&lags, &m, p).map(|r| r.0).unwrap_or(f64::NAN)
        });
        if se.is_finite() {
            est.se = se;
            est.confidence_band = (est.log_log_slope - 2.0 * se, est.log_log_slope + 2.0 * se);
        }
    }
    Ok(est)
}

/// Fractional Brownian motion with Hurst index `hurst` at `n + 1` equispaced
/// points of `[0, 1]`, by circulant embedding of the increment covariance.
pub fn fbm_path<R: Rng + ?Sized>(n: usize, hurst: f64, rng: &mut R) -> Result<Vec<f64>> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Domain(format!(
            "Hurst index must lie in (0, 1), got {hurst}"
        )));
    }
    if n < 2 {
        return Err(Error::Domain("need at least two increments".into()));
    }
    let two_h = 2.0 * hurst;
    let gamma = |k: usize| {
        let k = k as f64;
        0.5 * ((k + 1.0).powf(two_h) - 2.0 * k.powf(two_h) + (k - 1.0).abs().powf(two_h))
    };
    let m = 2 * n;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|j| {
            let k = if j <= n { j } else { m - j };
            Complex::new(gamma(k), 0.0)
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    if row.iter().any(|c| c.re < -1e-10) {
        return Err(Error::Internal(
            "circulant embedding is not nonnegative".into(),
        ));
    }
    let mut w: Vec<Complex<f64>> = row
        .iter()
        .enumerate()
        .map(|(j, lam)| {
            let s = (lam.re.max(0.0) / m as f64).sqrt();
            let (a, b): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            if j == 0 || j == n {
                Complex::new(s * a, 0.0)
            } else {
                Complex::new(s * a, s * b) * std::f64::consts::FRAC_1_SQRT_2
            }
        })
        .collect();
    // Hermitian completion gives a real output with the target covariance.
    for j in 1..n {
        w[m - j] = w[j].conj();
    }
    fft.process(&mut w);
    let scale = (n as f64).powf(-hurst);
    let mut path = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    path.push(0.0);
    for c in w.iter().take(n) {
        acc += c.re * scale;
        path.push(acc);
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamId;

    #[test]
    fn brownian_increments_have_unit_scale() {
        let mut rng = StreamId::new(1, 0, 0, 0).rng();
        let n = 1024;
        let mut sq = 0.0;
        let reps = 200;
        for _ in 0..reps {
            let p = fbm_path(n, 0.5, &mut rng).unwrap();
            sq += p[n] * p[n];
        }
        let var = sq / reps as f64;
        assert!((var - 1.0).abs() < 0.25, "Var B(1) = {var}");
    }

    #[test]
    fn rejects_short_or_narrow_lag_sets() {
        let t = IncrementTable::new(vec![1.0, 2.0, 3.0], 2.0);
        assert!(holder_estimate(&t, Direction::Space).is_err());
        let t = IncrementTable::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2.0);
        assert!(holder_estimate(&t, Direction::Space).is_err());
    }

    #[test]
    fn exact_power_law_is_recovered() {
        let lags: Vec<f64> = (0..8).map(|i| 0.001 * 2f64.powi(i)).collect();
        let mut t = IncrementTable::new(lags.clone(), 4.0);
        for (i, l) in lags.iter().enumerate() {
            t.sums[i] = l.powf(4.0 * 0.3);
            t.counts[i] = 1;
        }
        let e = holder_estimate(&t, Direction::Time).unwrap();
        assert!((e.exponent() - 0.3).abs() < 1e-12);
        assert!((e.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_increments_are_degenerate() {
        let lags: Vec<f64> = (0..8).map(|i| 0.001 * 2f64.powi(i)).collect();
        let mut t = IncrementTable::new(lags, 4.0);
        t.counts.iter_mut().for_each(|c| *c = 10);
        assert!(matches!(
            holder_estimate(&t, Direction::Space),
            Err(Error::Estimation(_))
        ));
    }
}
