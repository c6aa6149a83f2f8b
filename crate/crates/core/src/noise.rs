//! Space-time white noise on [0, 1] in two representations.
//!
//! * **Sheet increments**: the noise measure of each space-time cell
//!   `[t_i, t_i + dt) x cell_j`, an `N(0, dt * h)` variable, independent across
//!   cells. Integrals against it are discrete Walsh integrals.
//! * **Spectral**: increments `d beta_k ~ N(0, dt)` of independent Brownian
//!   motions driving the Neumann eigenmodes `e_k`, optionally scaled by
//!   weights `lambda_k` (colored noise).
//!
//! For a deterministic integrand both give the same Gaussian law; see
//! [`representation_equivalence_check`].

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::StreamId;
use crate::stats::{self, KsTest};
use crate::transform::eigenfunction;

/// Significance level of the equivalence KS test.
pub const EQUIVALENCE_ALPHA: f64 = 0.01;
/// Spectral modes per grid cell used by the equivalence check.
pub const MODES_PER_CELL: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseRepresentation {
    SheetIncrements,
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePlan {
    pub representation: NoiseRepresentation,
    /// Mode count `K` (spectral only).
    pub n_modes: usize,
    /// `lambda_k` for `k = 0..K`; all ones is white noise.
    pub weights: Vec<f64>,
    pub master_seed: u64,
    pub path_index: u64,
}

impl NoisePlan {
    pub fn sheet(master_seed: u64) -> Self {
        Self {
            representation: NoiseRepresentation::SheetIncrements,
            n_modes: 0,
            weights: Vec::new(),
            master_seed,
            path_index: 0,
        }
    }

    /// White spectral noise on `n_modes` modes.
    pub fn spectral(n_modes: usize, master_seed: u64) -> Result<Self> {
        Self::spectral_weighted(vec![1.0; n_modes], master_seed)
    }

    pub fn spectral_weighted(weights: Vec<f64>, master_seed: u64) -> Result<Self> {
        let plan = Self {
            representation: NoiseRepresentation::Spectral,
            n_modes: weights.len(),
            weights,
            master_seed,
            path_index: 0,
        };
        plan.validate()?;
        Ok(plan)
    }

    /// Same plan addressed to another path.
    pub fn for_path(&self, path_index: u64) -> Self {
        Self {
            path_index,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.representation == NoiseRepresentation::Spectral {
            if self.n_modes == 0 {
                return Err(Error::Config(
                    "spectral noise needs at least one mode".into(),
                ));
            }
            if self.weights.len() < self.n_modes {
                return Err(Error::domain(format!(
                    "{} weights supplied for {} modes",
                    self.weights.len(),
                    self.n_modes
                )));
            }
            if let Some(k) = self
                .weights
                .iter()
                .position(|w| !(*w > 0.0 && w.is_finite()))
            {
                return Err(Error::domain(format!(
                    "weight {k} is not a positive number"
                )));
            }
        }
        Ok(())
    }

    pub fn is_white(&self) -> bool {
        self.representation == NoiseRepresentation::SheetIncrements
            || self.weights.iter().all(|&w| w == 1.0)
    }

    pub fn stream(&self, species: u64, step: u64) -> StreamId {
        StreamId::new(self.master_seed, self.path_index, species, step)
    }

    /// Sheet increments of one species at one step, drawn from the
    /// `(seed, path, species, step)` stream.
    pub fn sheet_panel(
        &self,
        grid_size: usize,
        dt: f64,
        species: u64,
        step: u64,
    ) -> Result<SheetIncrementPanel> {
        let mut rng = self.stream(species, step).rng();
        Ok(SheetIncrementPanel {
            dw: sample_sheet_increments(grid_size, dt, &mut rng)?,
            step_index: step,
            species_index: species,
        })
    }

    /// Weighted mode increments of one species at one step.
    pub fn spectral_increments(&self, dt: f64, species: u64, step: u64) -> Result<Vec<f64>> {
        let mut rng = self.stream(species, step).rng();
        sample_spectral_increments(self.n_modes, dt, &self.weights, &mut rng)
    }
}

/// Fraction of `sum_{k<=K} lambda_k^p` contributed by the last decade of
/// modes `(K/10, K]`. A summable weight sequence drives this toward 0.
pub fn summability_tail(weights: &[f64], p: f64) -> f64 {
    let k = weights.len();
    let total: f64 = weights.iter().map(|w| w.powf(p)).sum();
    let tail: f64 = weights[k / 10..].iter().map(|w| w.powf(p)).sum();
    if total == 0.0 {
        0.0
    } else {
        tail / total
    }
}

/// Tail threshold below which a weight sequence counts as summable for the
/// declared exponent.
pub const SUMMABILITY_TAIL: f64 = 1e-6;

/// True when the last decade of `lambda_k^p` is a negligible share of the
/// truncated sum.
pub fn is_summable(weights: &[f64], p: f64) -> bool {
    summability_tail(weights, p) < SUMMABILITY_TAIL
}

/// Power-law weights `lambda_k = (k + 1)^{-gamma}`, `k = 0..n_modes`.
pub fn power_law_weights(n_modes: usize, gamma: f64) -> Vec<f64> {
    (0..n_modes)
        .map(|k| ((k + 1) as f64).powf(-gamma))
        .collect()
}

/// Noise measure of the `N` cells of one time step for one species.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetIncrementPanel {
    pub dw: Vec<f64>,
    pub step_index: u64,
    pub species_index: u64,
}

/// `grid_size` independent `N(0, dt * h)` draws, `h = 1 / grid_size`.
pub fn sample_sheet_increments<R: Rng + ?Sized>(
    grid_size: usize,
    dt: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if grid_size == 0 {
        return Err(Error::domain("grid size must be at least 1"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    let mut out = vec![0.0; grid_size];
    fill_sheet_increments(rng, dt, &mut out);
    Ok(out)
}

/// In-place form of [`sample_sheet_increments`]; `out.len()` is the grid size.
#[inline]
pub fn fill_sheet_increments<R: Rng + ?Sized>(rng: &mut R, dt: f64, out: &mut [f64]) {
    fill_normals(rng, out, (dt / out.len() as f64).sqrt());
}

/// Entry `k` is `lambda_k * N(0, dt)`.
pub fn sample_spectral_increments<R: Rng + ?Sized>(
    n_modes: usize,
    dt: f64,
    weights: &[f64],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n_modes == 0 {
        return Err(Error::domain("mode count must be at least 1"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if weights.len() < n_modes {
        return Err(Error::domain(format!(
            "{} weights supplied for {n_modes} modes",
            weights.len()
        )));
    }
    let mut out = vec![0.0; n_modes];
    fill_spectral_increments(rng, dt, weights, &mut out);
    Ok(out)
}

/// In-place form of [`sample_spectral_increments`]; `out.len()` is `K`.
#[inline]
pub fn fill_spectral_increments<R: Rng + ?Sized>(
    rng: &mut R,
    dt: f64,
    weights: &[f64],
    out: &mut [f64],
) {
    fill_normals(rng, out, dt.sqrt());
    for (v, w) in out.iter_mut().zip(weights) {
        *v *= w;
    }
}

/// Overwrites `out` with independent `N(0, sd^2)` draws.
#[inline]
pub fn fill_normals<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64], sd: f64) {
    for v in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *v = sd * z;
    }
}

/// A deterministic integrand sampled on the space-time grid: `rows[i][j]` is
/// `f(t_i, x_j)` for step `i` and cell `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledIntegrand {
    pub dt: f64,
    pub rows: Vec<Vec<f64>>,
}

impl SampledIntegrand {
    /// Samples `f(s, x)` at the left end of each step and the cell centers.
    pub fn from_fn(
        grid_size: usize,
        dt: f64,
        steps: usize,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        if grid_size == 0 || steps == 0 || !(dt > 0.0) {
            return Err(Error::domain("integrand grid must be nonempty with dt > 0"));
        }
        let rows = (0..steps)
            .map(|i| {
                let s = i as f64 * dt;
                (0..grid_size)
                    .map(|j| f(s, crate::grid::cell_center(j, grid_size)))
                    .collect()
            })
            .collect();
        Ok(Self { dt, rows })
    }

    pub fn grid_size(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn steps(&self) -> usize {
        self.rows.len()
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    /// Isometry variance `dt * h * sum f^2` of the Walsh integral.
    pub fn isometry_variance(&self) -> f64 {
        let h = 1.0 / self.grid_size() as f64;
        self.dt * h * self.rows.iter().flatten().map(|v| v * v).sum::<f64>()
    }

    fn validate(&self) -> Result<()> {
        let n = self.grid_size();
        if n == 0 || self.rows.iter().any(|r| r.len() != n) {
            return Err(Error::domain(
                "integrand rows must be nonempty and equally long",
            ));
        }
        Ok(())
    }
}

/// Discrete Walsh integral `sum_{i,j} f(s_i, x_j) dW_ij`.
pub fn walsh_integral(f: &SampledIntegrand, panels: &[SheetIncrementPanel]) -> Result<f64> {
    f.validate()?;
    if panels.len() != f.steps() {
        return Err(Error::domain(format!(
            "{} panels for {} integrand steps",
            panels.len(),
            f.steps()
        )));
    }
    let mut total = 0.0;
    for (row, panel) in f.rows.iter().zip(panels) {
        crate::error::check_grid(row.len(), panel.dw.len())?;
        total += row.iter().zip(&panel.dw).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(total)
}

/// `P[k][j] = int_{cell j} e_k(x) dx`, exact.
pub fn cell_mode_integrals(grid_size: usize, n_modes: usize) -> Vec<Vec<f64>> {
    let h = 1.0 / grid_size as f64;
    (0..n_modes)
        .map(|k| {
            (0..grid_size)
                .map(|j| {
                    if k == 0 {
                        h
                    } else {
                        let kp = k as f64 * std::f64::consts::PI;
                        let a = j as f64 * h;
                        std::f64::consts::SQRT_2 * ((kp * (a + h)).sin() - (kp * a).sin()) / kp
                    }
                })
                .collect()
        })
        .collect()
}

/// Mode coefficients `<f_h(s_i, .), e_k>` of the piecewise-constant
/// extension of each integrand row.
pub fn mode_coefficients(f: &SampledIntegrand, n_modes: usize) -> Result<Vec<Vec<f64>>> {
    f.validate()?;
    let p = cell_mode_integrals(f.grid_size(), n_modes);
    Ok(f.rows
        .iter()
        .map(|row| {
            p.iter()
                .map(|pk| pk.iter().zip(row).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect())
}

/// Spectral-representation integral `sum_i sum_k c_{ik} d beta_{ik}`.
pub fn spectral_integral(coeffs: &[Vec<f64>], increments: &[Vec<f64>]) -> Result<f64> {
    if coeffs.len() != increments.len() {
        return Err(Error::domain(
            "coefficient and increment step counts differ",
        ));
    }
    let mut total = 0.0;
    for (c, d) in coeffs.iter().zip(increments) {
        if c.len() > d.len() {
            return Err(Error::domain("fewer increments than modes"));
        }
        total += c.iter().zip(d).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub n_reps: usize,
    pub n_modes: usize,
    pub walsh_mean: f64,
    pub walsh_var: f64,
    pub spectral_mean: f64,
    pub spectral_var: f64,
    /// `dt * h * sum f^2`.
    pub target_var: f64,
    /// Variance the truncated spectral sum actually carries.
    pub spectral_target_var: f64,
    pub ks: KsTest,
}

impl EquivalenceReport {
    /// Relative variance errors of both representations against the
    /// isometry target. Zero integrands have zero error by definition.
    pub fn variance_errors(&self) -> (f64, f64) {
        if self.target_var == 0.0 {
            return (self.walsh_var, self.spectral_var);
        }
        (
            (self.walsh_var / self.target_var - 1.0).abs(),
            (self.spectral_var / self.target_var - 1.0).abs(),
        )
    }

    pub fn passes(&self, var_tol: f64) -> bool {
        let (a, b) = self.variance_errors();
        let ks_ok = if self.target_var == 0.0 {
            self.ks.statistic == 0.0
        } else {
            self.ks.passes()
        };
        a <= var_tol && b <= var_tol && ks_ok
    }
}

/// Draws `n_reps` Walsh integrals (sheet increments) and `n_reps` spectral
/// integrals (white mode increments, `K = 4N` modes) of the same integrand
/// from independent streams, and compares them.
pub fn representation_equivalence_check(
    f: &SampledIntegrand,
    n_reps: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    if n_reps < 100 {
        return Err(Error::Underpowered {
            what: "representation equivalence check replications",
            required: 100,
            got: n_reps,
        });
    }
    f.validate()?;
    let n = f.grid_size();
    let n_modes = MODES_PER_CELL * n;
    let coeffs = mode_coefficients(f, n_modes)?;
    let plan = NoisePlan::sheet(seed);
    let mut walsh = Vec::with_capacity(n_reps);
    let mut spectral = Vec::with_capacity(n_reps);
    let mut dw = vec![0.0; n];
    let mut db = vec![0.0; n_modes];
    let sd_cell = (f.dt / n as f64).sqrt();
    let sd_mode = f.dt.sqrt();
    for rep in 0..n_reps as u64 {
        let stream = plan.for_path(rep);
        let mut w = 0.0;
        let mut s = 0.0;
        for (i, (row, c)) in f.rows.iter().zip(&coeffs).enumerate() {
            fill_normals(&mut stream.stream(0, i as u64).rng(), &mut dw, sd_cell);
            w += row.iter().zip(&dw).map(|(a, b)| a * b).sum::<f64>();
            fill_normals(&mut stream.stream(1, i as u64).rng(), &mut db, sd_mode);
            s += c.iter().zip(&db).map(|(a, b)| a * b).sum::<f64>();
        }
        walsh.push(w);
        spectral.push(s);
    }
    let spectral_target_var = f.dt * coeffs.iter().flatten().map(|c| c * c).sum::<f64>();
    Ok(EquivalenceReport {
        n_reps,
        n_modes,
        walsh_mean: stats::mean(&walsh),
        walsh_var: stats::variance(&walsh),
        spectral_mean: stats::mean(&spectral),
        spectral_var: stats::variance(&spectral),
        target_var: f.isometry_variance(),
        spectral_target_var,
        ks: KsTest::run(&walsh, &spectral, EQUIVALENCE_ALPHA),
    })
}

/// Grid noise density `xi_j` (the white-noise field integrated over one step,
/// per unit length) synthesized from mode increments: `sum_k db_k e_k(x_j)`.
pub fn synthesize_from_modes(increments: &[f64], grid_size: usize) -> Vec<f64> {
    (0..grid_size)
        .map(|j| {
            let x = crate::grid::cell_center(j, grid_size);
            increments
                .iter()
                .enumerate()
                .map(|(k, d)| d * eigenfunction(k, x))
                .sum()
        })
        .collect()
}
