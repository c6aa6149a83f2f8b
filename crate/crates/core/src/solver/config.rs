use crate::error::{Error, Result};
use crate::model::{CoefficientSet, Field, TruncationRadius};

/// Largest admissible `dt * Lip(F_n)`.
pub const MAX_DRIFT_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Semi-implicit Euler-Maruyama: implicit second-difference diffusion,
    /// explicit reaction and noise.
    FiniteDifference,
    /// Exponential Euler on the cosine modes, reaction and noise by
    /// collocation.
    SpectralGalerkin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PositivityPolicy {
    #[default]
    ClampToZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub horizon: f64,
    /// Sorted, within `[0, horizon]`; each is rounded to the nearest step.
    pub snapshot_times: Vec<f64>,
    /// `None` selects `10 * (1 + sup_norm(init))`.
    pub truncation_radius: Option<TruncationRadius>,
    pub positivity: PositivityPolicy,
    /// Collocated modes for the spectral scheme; at most `grid_size`.
    pub n_modes: usize,
    pub grid_size: usize,
}

impl SolverConfig {
    pub fn new(scheme: Scheme, grid_size: usize, dt: f64, horizon: f64) -> Self {
        Self {
            scheme,
            dt,
            horizon,
            snapshot_times: vec![horizon],
            truncation_radius: None,
            positivity: PositivityPolicy::ClampToZero,
            n_modes: grid_size,
            grid_size,
        }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    /// Snapshots every `every` time units from 0 through the horizon.
    pub fn with_snapshot_interval(mut self, every: f64) -> Self {
        let k = (self.horizon / every).round() as usize;
        self.snapshot_times = (0..=k).map(|i| i as f64 * every).collect();
        self
    }

    pub fn with_radius(mut self, radius: TruncationRadius) -> Self {
        self.truncation_radius = Some(radius);
        self
    }

    pub fn with_modes(mut self, n_modes: usize) -> Self {
        self.n_modes = n_modes;
        self
    }

    pub fn steps(&self) -> u64 {
        (self.horizon / self.dt).round() as u64
    }

    pub fn step_of(&self, t: f64) -> u64 {
        (t / self.dt).round() as u64
    }

    pub fn snapshot_steps(&self) -> Vec<u64> {
        self.snapshot_times
            .iter()
            .map(|&t| self.step_of(t))
            .collect()
    }

    pub fn radius_for(&self, init: &Field) -> TruncationRadius {
        self.truncation_radius
            .unwrap_or_else(|| TruncationRadius::default_for(init))
    }

    /// Checks the structural invariants plus the explicit-reaction step
    /// restriction `dt * Lip(F_n) <= 0.5`.
    pub fn validate(&self, coeffs: &CoefficientSet, init: &Field) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.dt > self.horizon {
            return Err(Error::Config(format!(
                "dt {} exceeds the horizon {}",
                self.dt, self.horizon
            )));
        }
        if self.grid_size == 0 {
            return Err(Error::Config("grid size must be at least 1".into()));
        }
        crate::error::check_grid(self.grid_size, coeffs.grid_size())?;
        crate::error::check_grid(self.grid_size, init.grid_size())?;
        let steps = self.snapshot_steps();
        for (i, &t) in self.snapshot_times.iter().enumerate() {
            if !(0.0..=self.horizon + 0.5 * self.dt).contains(&t) {
                return Err(Error::Config(format!(
                    "snapshot time {t} outside [0, {}]",
                    self.horizon
                )));
            }
            if i > 0 && steps[i] <= steps[i - 1] {
                return Err(Error::Config(format!(
                    "snapshot times must be strictly increasing on the step grid (at {t})"
                )));
            }
        }
        if self.scheme == Scheme::SpectralGalerkin
            && (self.n_modes == 0 || self.n_modes > self.grid_size)
        {
            return Err(Error::Config(format!(
                "spectral scheme needs 1 <= n_modes <= grid size {}, got {}",
                self.grid_size, self.n_modes
            )));
        }
        let lip = coeffs.lipschitz_bound(self.radius_for(init));
        if self.dt * lip > MAX_DRIFT_STEP {
            return Err(Error::Config(format!(
                "dt {} too large for reaction Lipschitz bound {lip:.3}: need dt * L <= {MAX_DRIFT_STEP}",
                self.dt
            )));
        }
        Ok(())
    }
}
