//! One time step of either scheme.
//!
//! Both schemes first form the explicit update
//! `w = u + dt * F_n(u, v) + sigma * u * xi`, where `xi` is the white noise
//! integrated over the step per unit length, then propagate `w` by the
//! linear part:
//!
//! * finite differences solve `(I - dt L_N) u' = w`;
//! * the spectral scheme multiplies cosine mode `k` of `w` by
//!   `exp(-k^2 pi^2 dt)` (modes `k >= K` are dropped).
//!
//! Negative values are then clamped to zero and the clamped mass reported.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::model::{CoefficientSet, Field, TruncationRadius};
use crate::noise::SheetIncrementPanel;
use crate::transform::{eigenvalue, CosineTransform};
use crate::tridiag::ImplicitNeumannSolver;

use super::config::{PositivityPolicy, Scheme, SolverConfig};

/// Clamping diagnostics of one step, indexed by species.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDiagnostics {
    /// Mass `h * sum max(-u', 0)` removed by clamping.
    pub clipped_mass: [f64; 2],
    /// Clipped mass relative to the positive mass `h * sum max(u', 0)`.
    pub clipped_fraction: [f64; 2],
}

/// Reusable stepping state for one path.
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme: Scheme,
    dt: f64,
    radius: TruncationRadius,
    positivity: PositivityPolicy,
    n: usize,
    implicit: ImplicitNeumannSolver,
    transform: CosineTransform,
    decay: Vec<f64>,
    fu: Vec<f64>,
    fv: Vec<f64>,
    modes: Vec<f64>,
}

impl Stepper {
    pub fn new(config: &SolverConfig, radius: TruncationRadius) -> Self {
        let n = config.grid_size;
        let k_max = config.n_modes.min(n);
        let decay = (0..n)
            .map(|k| {
                if k < k_max {
                    (-eigenvalue(k) * config.dt).exp()
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            scheme: config.scheme,
            dt: config.dt,
            radius,
            positivity: config.positivity,
            n,
            implicit: ImplicitNeumannSolver::new(n, config.dt),
            transform: CosineTransform::new(n),
            decay,
            fu: vec![0.0; n],
            fv: vec![0.0; n],
            modes: vec![0.0; n],
        }
    }

    pub fn radius(&self) -> TruncationRadius {
        self.radius
    }

    pub fn grid_size(&self) -> usize {
        self.n
    }

    /// Noise density `xi_j = dW_j / h` of a sheet-increment panel.
    pub fn noise_from_sheet(&self, dw: &[f64], out: &mut [f64]) {
        let inv_h = self.n as f64;
        for (o, d) in out.iter_mut().zip(dw) {
            *o = d * inv_h;
        }
    }

    /// Noise density `xi_j = sum_{k<K} d beta_k e_k(x_j)` of mode increments.
    pub fn noise_from_modes(&mut self, increments: &[f64], out: &mut [f64]) -> Result<()> {
        if increments.len() > self.n {
            return Err(Error::domain(format!(
                "{} mode increments exceed the {}-cell grid",
                increments.len(),
                self.n
            )));
        }
        self.modes[..increments.len()].copy_from_slice(increments);
        self.modes[increments.len()..].fill(0.0);
        self.transform.inverse(&self.modes, out);
        Ok(())
    }

    /// Advances `(u, v)` by one step in place. `None` noise means the
    /// species receives no noise this step (valid when its noise term is
    /// identically zero).
    pub fn advance(
        &mut self,
        coeffs: &CoefficientSet,
        u: &mut [f64],
        v: &mut [f64],
        xi_u: Option<&[f64]>,
        xi_v: Option<&[f64]>,
    ) -> StepDiagnostics {
        coeffs.fill_truncated_reaction(u, v, self.radius, &mut self.fu, &mut self.fv);
        let dt = self.dt;
        explicit_update(u, &self.fu, coeffs.sigma1.values(), xi_u, dt);
        explicit_update(v, &self.fv, coeffs.sigma2.values(), xi_v, dt);
        self.propagate(u);
        self.propagate(v);
        let mut diag = StepDiagnostics::default();
        for (s, w) in [u, v].into_iter().enumerate() {
            let (clipped, frac) = self.enforce_positivity(w);
            diag.clipped_mass[s] = clipped;
            diag.clipped_fraction[s] = frac;
        }
        diag
    }

    fn propagate(&mut self, w: &mut [f64]) {
        match self.scheme {
            Scheme::FiniteDifference => self.implicit.solve_in_place(w),
            Scheme::SpectralGalerkin => {
                self.transform.forward(w, &mut self.modes);
                for (c, d) in self.modes.iter_mut().zip(&self.decay) {
                    *c *= d;
                }
                self.transform.inverse(&self.modes, w);
            }
        }
    }

    fn enforce_positivity(&self, w: &mut [f64]) -> (f64, f64) {
        match self.positivity {
            PositivityPolicy::ClampToZero => {
                let mut neg = 0.0;
                let mut pos = 0.0;
                for x in w.iter_mut() {
                    if *x < 0.0 {
                        neg -= *x;
                        *x = 0.0;
                    } else {
                        pos += *x;
                    }
                }
                let h = 1.0 / self.n as f64;
                let frac = if neg == 0.0 {
                    0.0
                } else if pos == 0.0 {
                    1.0
                } else {
                    neg / pos
                };
                (neg * h, frac)
            }
        }
    }
}

#[inline]
fn explicit_update(w: &mut [f64], f: &[f64], sigma: &[f64], xi: Option<&[f64]>, dt: f64) {
    match xi {
        Some(xi) => {
            for j in 0..w.len() {
                w[j] = w[j] + dt * f[j] + sigma[j] * w[j] * xi[j];
            }
        }
        None => {
            for j in 0..w.len() {
                w[j] += dt * f[j];
            }
        }
    }
}

fn finish(field: &Field, u: Vec<f64>, v: Vec<f64>, dt: f64) -> Result<Field> {
    if u.iter().chain(&v).any(|x| !x.is_finite()) {
        return Err(Error::NumericalBlowup {
            master_seed: 0,
            path_index: 0,
            step: (field.time / dt).round() as u64 + 1,
            sup_norm_tail: vec![crate::model::sup_norm(field)],
        });
    }
    Field::new(
        GridFunction::new(u)?,
        GridFunction::new(v)?,
        field.time + dt,
    )
}

/// One finite-difference step driven by sheet-increment panels.
pub fn step_fd(
    field: &Field,
    coeffs: &CoefficientSet,
    panel_u: &SheetIncrementPanel,
    panel_v: &SheetIncrementPanel,
    config: &SolverConfig,
) -> Result<Field> {
    let config = SolverConfig {
        scheme: Scheme::FiniteDifference,
        ..config.clone()
    };
    one_step(field, coeffs, &config, |st, xu, xv| {
        crate::error::check_grid(st.grid_size(), panel_u.dw.len())?;
        crate::error::check_grid(st.grid_size(), panel_v.dw.len())?;
        st.noise_from_sheet(&panel_u.dw, xu);
        st.noise_from_sheet(&panel_v.dw, xv);
        Ok(())
    })
}

/// One exponential-Euler step of the spectral-Galerkin scheme driven by
/// mode increments (at most `N` per species).
pub fn step_spectral(
    field: &Field,
    coeffs: &CoefficientSet,
    increments_u: &[f64],
    increments_v: &[f64],
    config: &SolverConfig,
) -> Result<Field> {
    let config = SolverConfig {
        scheme: Scheme::SpectralGalerkin,
        ..config.clone()
    };
    one_step(field, coeffs, &config, |st, xu, xv| {
        st.noise_from_modes(increments_u, xu)?;
        st.noise_from_modes(increments_v, xv)
    })
}

fn one_step(
    field: &Field,
    coeffs: &CoefficientSet,
    config: &SolverConfig,
    noise: impl FnOnce(&mut Stepper, &mut [f64], &mut [f64]) -> Result<()>,
) -> Result<Field> {
    crate::error::check_grid(config.grid_size, field.grid_size())?;
    crate::error::check_grid(config.grid_size, coeffs.grid_size())?;
    let mut stepper = Stepper::new(config, config.radius_for(field));
    let n = config.grid_size;
    let (mut xu, mut xv) = (vec![0.0; n], vec![0.0; n]);
    noise(&mut stepper, &mut xu, &mut xv)?;
    let mut u = field.u.values().to_vec();
    let mut v = field.v.values().to_vec();
    stepper.advance(coeffs, &mut u, &mut v, Some(&xu), Some(&xv));
    finish(field, u, v, config.dt)
}
