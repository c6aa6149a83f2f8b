use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::model::{CoefficientSet, Field, TruncationRadius};
use crate::noise::{
    fill_sheet_increments, fill_spectral_increments, NoisePlan, NoiseRepresentation,
};

use super::config::SolverConfig;
use super::step::Stepper;

/// Sup-norms kept for blowup reports.
pub const SUP_NORM_TAIL: usize = 8;

/// Receives the state after every step, and once for the initial state at
/// step 0.
pub trait PathObserver {
    fn observe(&mut self, step: u64, time: f64, u: &[f64], v: &[f64]);
}

impl<F: FnMut(u64, f64, &[f64], &[f64])> PathObserver for F {
    fn observe(&mut self, step: u64, time: f64, u: &[f64], v: &[f64]) {
        self(step, time, u, v)
    }
}

/// Per-path diagnostics gathered while stepping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    pub steps: u64,
    /// First step at which the sup-norm reached the truncation radius.
    pub exit_step: Option<u64>,
    /// Largest per-step ratio of clamped mass to remaining mass.
    pub max_clipped_fraction: f64,
    pub radius: TruncationRadius,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<(f64, Field)>,
    pub exit_step: Option<u64>,
    pub path_index: u64,
    pub master_seed: u64,
    pub max_clipped_fraction: f64,
    pub radius: TruncationRadius,
}

/// Runs one path of `plan` from `init`, reporting every state to `observer`.
pub fn run_path<O: PathObserver + ?Sized>(
    init: &Field,
    coeffs: &CoefficientSet,
    plan: &NoisePlan,
    config: &SolverConfig,
    observer: &mut O,
) -> Result<PathSummary> {
    config.validate(coeffs, init)?;
    plan.validate()?;
    if !init.is_nonnegative() {
        return Err(Error::Domain("initial data must be nonnegative".into()));
    }
    let n = config.grid_size;
    if plan.representation == NoiseRepresentation::Spectral && plan.n_modes > n {
        return Err(Error::Config(format!(
            "{} noise modes exceed the {n}-cell grid",
            plan.n_modes
        )));
    }
    let radius = config.radius_for(init);
    let mut stepper = Stepper::new(config, radius);
    let dt = config.dt;
    let steps = config.steps();
    let r2 = radius.get() * radius.get();

    let mut u = init.u.values().to_vec();
    let mut v = init.v.values().to_vec();
    let mut xi = [vec![0.0; n], vec![0.0; n]];
    let mut draw = vec![0.0; n.max(plan.n_modes)];
    let noisy = [
        coeffs.sigma1.values().iter().any(|&s| s != 0.0),
        coeffs.sigma2.values().iter().any(|&s| s != 0.0),
    ];

    let mut tail = [0.0f64; SUP_NORM_TAIL];
    let mut sup2 = sup_norm_sq(&u, &v);
    tail[0] = sup2.sqrt();
    let mut exit_step = (sup2 >= r2).then_some(0);
    let mut max_clipped: f64 = 0.0;
    observer.observe(0, 0.0, &u, &v);

    for step in 1..=steps {
        let mut active = [false; 2];
        for (s, state) in [&u, &v].into_iter().enumerate() {
            if !noisy[s] || state.iter().all(|&x| x == 0.0) {
                continue;
            }
            active[s] = true;
            let mut rng = plan.stream(s as u64, step - 1).rng();
            match plan.representation {
                NoiseRepresentation::SheetIncrements => {
                    fill_sheet_increments(&mut rng, dt, &mut draw[..n]);
                    stepper.noise_from_sheet(&draw[..n], &mut xi[s]);
                }
                NoiseRepresentation::Spectral => {
                    let k = plan.n_modes;
                    fill_spectral_increments(&mut rng, dt, &plan.weights[..k], &mut draw[..k]);
                    stepper.noise_from_modes(&draw[..k], &mut xi[s])?;
                }
            }
        }
        let [xu, xv] = &xi;
        let diag = stepper.advance(
            coeffs,
            &mut u,
            &mut v,
            active[0].then_some(xu.as_slice()),
            active[1].then_some(xv.as_slice()),
        );
        max_clipped = max_clipped.max(diag.clipped_fraction[0].max(diag.clipped_fraction[1]));

        sup2 = sup_norm_sq(&u, &v);
        tail[(step as usize) % SUP_NORM_TAIL] = sup2.sqrt();
        if !sup2.is_finite() {
            let k = step as usize;
            let sup_norm_tail = (k.saturating_sub(SUP_NORM_TAIL - 1)..=k)
                .map(|i| tail[i % SUP_NORM_TAIL])
                .collect();
            return Err(Error::NumericalBlowup {
                master_seed: plan.master_seed,
                path_index: plan.path_index,
                step,
                sup_norm_tail,
            });
        }
        if exit_step.is_none() && sup2 >= r2 {
            exit_step = Some(step);
        }
        observer.observe(step, step as f64 * dt, &u, &v);
    }

    Ok(PathSummary {
        steps,
        exit_step,
        max_clipped_fraction: max_clipped,
        radius,
    })
}

/// Runs one path and keeps full fields at the configured snapshot times.
pub fn simulate_path(
    init: &Field,
    coeffs: &CoefficientSet,
    plan: &NoisePlan,
    config: &SolverConfig,
) -> Result<Trajectory> {
    let wanted = config.snapshot_steps();
    let mut next = 0;
    let mut snapshots = Vec::with_capacity(wanted.len());
    let mut failure = None;
    let mut record = |step: u64, t: f64, u: &[f64], v: &[f64]| {
        if next < wanted.len() && wanted[next] == step {
            next += 1;
            let field = GridFunction::new(u.to_vec())
                .and_then(|gu| Field::new(gu, GridFunction::new(v.to_vec())?, t));
            match field {
                Ok(f) => snapshots.push((t, f)),
                Err(e) => failure = Some(e),
            }
        }
    };
    let summary = run_path(init, coeffs, plan, config, &mut record)?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Trajectory {
        snapshots,
        exit_step: summary.exit_step,
        path_index: plan.path_index,
        master_seed: plan.master_seed,
        max_clipped_fraction: summary.max_clipped_fraction,
        radius: summary.radius,
    })
}

#[inline]
pub(crate) fn sup_norm_sq(u: &[f64], v: &[f64]) -> f64 {
    let mut m: f64 = 0.0;
    for (a, b) in u.iter().zip(v) {
        let s = a * a + b * b;
        if s.is_nan() {
            return f64::NAN;
        }
        m = m.max(s);
    }
    m
}
