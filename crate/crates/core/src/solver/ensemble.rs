//! Monte Carlo ensembles: per-path records keyed by path index and the
//! statistics derived from them.
//!
//! An [`EnsembleStats`] is a map from path index to [`PathRecord`], so
//! merging two ensembles is a map union. Every aggregate iterates paths in
//! index order, which makes results independent of how the paths were
//! scheduled or merged.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::model::{CoefficientSet, Field, Species};
use crate::noise::NoisePlan;
use crate::stats;

use super::config::SolverConfig;
use super::path::{run_path, sup_norm_sq};

/// Increment moments for Hölder estimation of `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct HolderSpec {
    /// Moment order.
    pub p: f64,
    /// Space lags in cells.
    pub space_lags: Vec<usize>,
    /// Times at which space increments are sampled.
    pub space_times: Vec<f64>,
    /// If set, space increments are taken only from this cell, to both sides.
    pub anchor: Option<usize>,
    /// Reference times `t0` of time increments `U(t0 + lag) - U(t0)`.
    pub time_refs: Vec<f64>,
    /// Time lags, each a multiple of `dt`.
    pub time_lags: Vec<f64>,
}

impl HolderSpec {
    pub fn validate(&self, config: &SolverConfig) -> Result<()> {
        if !(self.p > 0.0) {
            return Err(Error::Config(format!(
                "moment order must be positive, got {}",
                self.p
            )));
        }
        let n = config.grid_size;
        if let Some(&l) = self.space_lags.iter().find(|&&l| l == 0 || l >= n) {
            return Err(Error::Config(format!("space lag {l} outside 1..{n}")));
        }
        if let Some(a) = self.anchor {
            if a >= n {
                return Err(Error::Config(format!("anchor cell {a} outside the grid")));
            }
        }
        let t_max = config.horizon + 0.5 * config.dt;
        for &t in self.space_times.iter().chain(&self.time_refs) {
            if !(0.0..=t_max).contains(&t) {
                return Err(Error::Config(format!(
                    "Hölder sampling time {t} outside [0, T]"
                )));
            }
        }
        for &r in &self.time_refs {
            for &l in &self.time_lags {
                if config.step_of(l) == 0 {
                    return Err(Error::Config(format!("time lag {l} is below one step")));
                }
                if r + l > t_max {
                    return Err(Error::Config(format!(
                        "time increment {r} + {l} exceeds the horizon"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// What each path records besides the log-masses and sup-norms.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    /// Regularization of `ln(eta + mass)`.
    pub eta: f64,
    /// Moment order of the sup-norm statistic.
    pub moment_p: f64,
    /// Cells whose `U` values are kept at each snapshot.
    pub probe_cells: Vec<usize>,
    /// Keep full fields at every snapshot.
    pub store_fields: bool,
    pub holder: Option<HolderSpec>,
}

impl Observables {
    /// `eta = 1e-12 * mass(U0)` (or `1e-12` when that mass is 0), `p = 2`.
    pub fn for_init(init: &Field) -> Self {
        let m = init.u.integral();
        Self {
            eta: if m > 0.0 { 1e-12 * m } else { 1e-12 },
            moment_p: 2.0,
            probe_cells: Vec::new(),
            store_fields: false,
            holder: None,
        }
    }
}

/// Sums of `|increment|^p` per lag.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementTable {
    /// Lags in physical units (space or time).
    pub lags: Vec<f64>,
    pub sums: Vec<f64>,
    pub counts: Vec<u64>,
    pub p: f64,
}

impl IncrementTable {
    pub fn new(lags: Vec<f64>, p: f64) -> Self {
        let k = lags.len();
        Self {
            lags,
            sums: vec![0.0; k],
            counts: vec![0; k],
            p,
        }
    }

    pub fn add(&mut self, lag: usize, diff: f64) {
        self.sums[lag] += diff.abs().powf(self.p);
        self.counts[lag] += 1;
    }

    /// Adds `other` lag by lag; both must have the same lags and order.
    pub fn accumulate(&mut self, other: &IncrementTable) -> Result<()> {
        if self.lags != other.lags || self.p != other.p {
            return Err(Error::Estimation(
                "increment tables have different lags".into(),
            ));
        }
        for i in 0..self.sums.len() {
            self.sums[i] += other.sums[i];
            self.counts[i] += other.counts[i];
        }
        Ok(())
    }

    /// Empirical `E|increment|^p` per lag.
    pub fn moments(&self) -> Vec<f64> {
        self.sums
            .iter()
            .zip(&self.counts)
            .map(|(s, &c)| if c == 0 { f64::NAN } else { s / c as f64 })
            .collect()
    }
}

/// Everything one path contributes to an ensemble. Series are indexed by
/// snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRecord {
    pub path_index: u64,
    pub ln_mass_u: Vec<f64>,
    pub ln_mass_v: Vec<f64>,
    pub mass_u: Vec<f64>,
    pub mass_v: Vec<f64>,
    pub sup_norm: Vec<f64>,
    /// Sup-norm maximized over all steps up to each snapshot.
    pub running_sup: Vec<f64>,
    /// Discrete Hölder seminorm of `U` (see [`holder_proxy`]).
    pub holder_proxy: Vec<f64>,
    /// `probes[snapshot][i]` is `U` at `probe_cells[i]`.
    pub probes: Vec<Vec<f64>>,
    pub fields: Option<Vec<Field>>,
    pub space_increments: Option<IncrementTable>,
    pub time_increments: Option<IncrementTable>,
    pub exit_step: Option<u64>,
    pub max_clipped_fraction: f64,
    /// Snapshot values below zero (zero by construction of the clamp).
    pub negative_values: u64,
}

impl PathRecord {
    pub fn ln_mass(&self, s: Species) -> &[f64] {
        match s {
            Species::U => &self.ln_mass_u,
            Species::V => &self.ln_mass_v,
        }
    }

    pub fn mass(&self, s: Species) -> &[f64] {
        match s {
            Species::U => &self.mass_u,
            Species::V => &self.mass_v,
        }
    }
}

/// Per-snapshot mean and standard error of a series across paths.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSummary {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub eta: f64,
    pub p: f64,
    pub master_seed: u64,
    pub records: BTreeMap<u64, PathRecord>,
}

impl EnsembleStats {
    pub fn n_paths(&self) -> usize {
        self.records.len()
    }

    /// Union of the two path sets. A path present in both must carry the
    /// same record.
    pub fn merge(mut self, other: EnsembleStats) -> Result<EnsembleStats> {
        if self.times != other.times
            || self.eta != other.eta
            || self.p != other.p
            || self.master_seed != other.master_seed
        {
            return Err(Error::Config(
                "cannot merge ensembles with different settings".into(),
            ));
        }
        for (k, r) in other.records {
            match self.records.get(&k) {
                Some(existing) if *existing != r => {
                    return Err(Error::Internal(format!("path {k} has conflicting records")))
                }
                Some(_) => {}
                None => {
                    self.records.insert(k, r);
                }
            }
        }
        Ok(self)
    }

    /// Per-snapshot values `f(record)[i]` collected over paths in index order.
    pub fn samples_at(&self, i: usize, f: impl Fn(&PathRecord) -> &[f64]) -> Vec<f64> {
        self.records.values().map(|r| f(r)[i]).collect()
    }

    pub fn summarize(&self, f: impl Fn(&PathRecord) -> Vec<f64>) -> SeriesSummary {
        let per_path: Vec<Vec<f64>> = self.records.values().map(f).collect();
        let k = self.times.len();
        let mut mean = Vec::with_capacity(k);
        let mut se = Vec::with_capacity(k);
        for i in 0..k {
            let xs: Vec<f64> = per_path.iter().map(|s| s[i]).collect();
            mean.push(stats::mean(&xs));
            se.push(if xs.len() > 1 {
                stats::std_error(&xs)
            } else {
                0.0
            });
        }
        SeriesSummary {
            times: self.times.clone(),
            mean,
            se,
        }
    }

    /// `E ln(eta + mass)` of one species.
    pub fn mean_ln_mass(&self, s: Species) -> SeriesSummary {
        self.summarize(|r| r.ln_mass(s).to_vec())
    }

    pub fn mean_mass(&self, s: Species) -> SeriesSummary {
        self.summarize(|r| r.mass(s).to_vec())
    }

    /// `E |Z(t)|_E^p` at each snapshot.
    pub fn mean_sup_norm_p(&self, p: f64) -> SeriesSummary {
        self.summarize(|r| r.sup_norm.iter().map(|s| s.powf(p)).collect())
    }

    /// `E sup_{s <= t} |Z(s)|_E^p` at each snapshot.
    pub fn mean_running_sup_p(&self, p: f64) -> SeriesSummary {
        self.summarize(|r| r.running_sup.iter().map(|s| s.powf(p)).collect())
    }

    /// Mean field of `U` at snapshot `i` (requires stored fields).
    pub fn mean_field(&self, i: usize) -> Result<(GridFunction, GridFunction)> {
        let mut acc: Option<(Vec<f64>, Vec<f64>)> = None;
        let n_paths = self.n_paths() as f64;
        for r in self.records.values() {
            let f = &r
                .fields
                .as_ref()
                .ok_or_else(|| Error::Config("ensemble did not store fields".into()))?[i];
            let (s, s2) =
                acc.get_or_insert_with(|| (vec![0.0; f.grid_size()], vec![0.0; f.grid_size()]));
            for (j, &x) in f.u.values().iter().enumerate() {
                s[j] += x;
                s2[j] += x * x;
            }
        }
        let (s, s2) = acc.ok_or_else(|| Error::Estimation("empty ensemble".into()))?;
        let mean: Vec<f64> = s.iter().map(|x| x / n_paths).collect();
        let se: Vec<f64> = s2
            .iter()
            .zip(&mean)
            .map(|(q, m)| {
                if n_paths > 1.0 {
                    ((q - n_paths * m * m).max(0.0) / (n_paths - 1.0) / n_paths).sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        Ok((GridFunction::new(mean)?, GridFunction::new(se)?))
    }

    /// Space or time increment table summed over the paths in `subset`
    /// (all paths when `None`).
    pub fn increment_table(
        &self,
        time_direction: bool,
        subset: Option<&[u64]>,
    ) -> Result<IncrementTable> {
        let pick = |r: &PathRecord| {
            if time_direction {
                r.time_increments.clone()
            } else {
                r.space_increments.clone()
            }
        };
        let mut total: Option<IncrementTable> = None;
        let keys: Vec<u64> = match subset {
            Some(s) => s.to_vec(),
            None => self.records.keys().copied().collect(),
        };
        for k in keys {
            let r = self
                .records
                .get(&k)
                .ok_or_else(|| Error::Estimation(format!("path {k} not in ensemble")))?;
            let t = pick(r)
                .ok_or_else(|| Error::Estimation("ensemble recorded no increment tables".into()))?;
            match &mut total {
                None => total = Some(t),
                Some(acc) => acc.accumulate(&t)?,
            }
        }
        total.ok_or_else(|| Error::Estimation("empty ensemble".into()))
    }

    pub fn exit_count(&self) -> usize {
        self.records
            .values()
            .filter(|r| r.exit_step.is_some())
            .count()
    }

    pub fn max_clipped_fraction(&self) -> f64 {
        self.records
            .values()
            .map(|r| r.max_clipped_fraction)
            .fold(0.0, f64::max)
    }

    pub fn negative_values(&self) -> u64 {
        self.records.values().map(|r| r.negative_values).sum()
    }
}

/// Exponent of the Hölder seminorm proxy.
pub const HOLDER_PROXY_EXPONENT: f64 = 0.25;

/// `max |u_{j+L} - u_j| / (L h)^{1/4}` over dyadic lags `L`.
pub fn holder_proxy(u: &[f64]) -> f64 {
    let n = u.len();
    let h = 1.0 / n as f64;
    let mut best: f64 = 0.0;
    let mut lag = 1;
    while lag < n {
        let scale = (lag as f64 * h).powf(-HOLDER_PROXY_EXPONENT);
        for j in 0..n - lag {
            best = best.max((u[j + lag] - u[j]).abs() * scale);
        }
        lag *= 2;
    }
    best
}

struct Recorder<'a> {
    obs: &'a Observables,
    n: usize,
    snap_steps: &'a [u64],
    next: usize,
    running_sup2: f64,
    rec: PathRecord,
    space_steps: Vec<u64>,
    ref_steps: Vec<u64>,
    lag_steps: Vec<u64>,
    refs: HashMap<u64, Vec<f64>>,
}

impl Recorder<'_> {
    fn observe(&mut self, step: u64, t: f64, u: &[f64], v: &[f64]) {
        let s2 = sup_norm_sq(u, v);
        self.running_sup2 = self.running_sup2.max(s2);
        if self.next < self.snap_steps.len() && self.snap_steps[self.next] == step {
            self.next += 1;
            self.snapshot(t, u, v, s2);
        }
        if let Some(h) = &self.obs.holder {
            if self.space_steps.contains(&step) {
                let table = self.rec.space_increments.as_mut().expect("space table");
                for (li, &lag) in h.space_lags.iter().enumerate() {
                    match h.anchor {
                        Some(a) => {
                            if a + lag < self.n {
                                table.add(li, u[a + lag] - u[a]);
                            }
                            if lag <= a {
                                table.add(li, u[a - lag] - u[a]);
                            }
                        }
                        None => {
                            for j in 0..self.n - lag {
                                table.add(li, u[j + lag] - u[j]);
                            }
                        }
                    }
                }
            }
            if self.ref_steps.contains(&step) {
                self.refs.insert(step, u.to_vec());
            }
            if !self.refs.is_empty() {
                let table = self.rec.time_increments.as_mut().expect("time table");
                for &r in &self.ref_steps {
                    if r >= step {
                        continue;
                    }
                    let Some(base) = self.refs.get(&r) else {
                        continue;
                    };
                    for (li, &l) in self.lag_steps.iter().enumerate() {
                        if r + l == step {
                            for j in 0..self.n {
                                table.add(li, u[j] - base[j]);
                            }
                        }
                    }
                }
            }
        }
    }

    fn snapshot(&mut self, t: f64, u: &[f64], v: &[f64], s2: f64) {
        let h = 1.0 / self.n as f64;
        let mu = h * u.iter().sum::<f64>();
        let mv = h * v.iter().sum::<f64>();
        let r = &mut self.rec;
        r.mass_u.push(mu);
        r.mass_v.push(mv);
        r.ln_mass_u.push((self.obs.eta + mu).ln());
        r.ln_mass_v.push((self.obs.eta + mv).ln());
        r.sup_norm.push(s2.sqrt());
        r.running_sup.push(self.running_sup2.sqrt());
        r.holder_proxy.push(holder_proxy(u));
        r.probes
            .push(self.obs.probe_cells.iter().map(|&j| u[j]).collect());
        r.negative_values += u.iter().chain(v).filter(|&&x| x < 0.0).count() as u64;
        if let Some(fields) = &mut r.fields {
            // Values are finite here: the stepper has already rejected NaN.
            let f = Field::new(
                GridFunction::new(u.to_vec()).expect("finite field"),
                GridFunction::new(v.to_vec()).expect("finite field"),
                t,
            )
            .expect("same grid");
            fields.push(f);
        }
    }
}

/// Runs one path and condenses it into a [`PathRecord`].
pub fn record_path(
    init: &Field,
    coeffs: &CoefficientSet,
    plan: &NoisePlan,
    config: &SolverConfig,
    obs: &Observables,
) -> Result<PathRecord> {
    let n = config.grid_size;
    if let Some(&j) = obs.probe_cells.iter().find(|&&j| j >= n) {
        return Err(Error::Config(format!("probe cell {j} outside the grid")));
    }
    if !(obs.eta >= 0.0) {
        return Err(Error::Config(format!(
            "eta must be nonnegative, got {}",
            obs.eta
        )));
    }
    let snap_steps = config.snapshot_steps();
    let k = snap_steps.len();
    let (space_steps, ref_steps, lag_steps, space_table, time_table) = match &obs.holder {
        Some(h) => {
            h.validate(config)?;
            let cell = 1.0 / n as f64;
            (
                h.space_times.iter().map(|&t| config.step_of(t)).collect(),
                h.time_refs.iter().map(|&t| config.step_of(t)).collect(),
                h.time_lags.iter().map(|&t| config.step_of(t)).collect(),
                Some(IncrementTable::new(
                    h.space_lags.iter().map(|&l| l as f64 * cell).collect(),
                    h.p,
                )),
                Some(IncrementTable::new(h.time_lags.clone(), h.p)),
            )
        }
        None => (Vec::new(), Vec::new(), Vec::new(), None, None),
    };
    let mut recorder = Recorder {
        obs,
        n,
        snap_steps: &snap_steps,
        next: 0,
        running_sup2: 0.0,
        rec: PathRecord {
            path_index: plan.path_index,
            ln_mass_u: Vec::with_capacity(k),
            ln_mass_v: Vec::with_capacity(k),
            mass_u: Vec::with_capacity(k),
            mass_v: Vec::with_capacity(k),
            sup_norm: Vec::with_capacity(k),
            running_sup: Vec::with_capacity(k),
            holder_proxy: Vec::with_capacity(k),
            probes: Vec::with_capacity(k),
            fields: obs.store_fields.then(|| Vec::with_capacity(k)),
            space_increments: space_table,
            time_increments: time_table,
            exit_step: None,
            max_clipped_fraction: 0.0,
            negative_values: 0,
        },
        space_steps,
        ref_steps,
        lag_steps,
        refs: HashMap::new(),
    };
    let mut observer = |step: u64, t: f64, u: &[f64], v: &[f64]| recorder.observe(step, t, u, v);
    let summary = run_path(init, coeffs, plan, config, &mut observer)?;
    let mut rec = recorder.rec;
    rec.exit_step = summary.exit_step;
    rec.max_clipped_fraction = summary.max_clipped_fraction;
    Ok(rec)
}

/// Runs paths `first..first + n_paths` of `plan` in parallel.
pub fn run_ensemble_range(
    init: &Field,
    coeffs: &CoefficientSet,
    plan: &NoisePlan,
    config: &SolverConfig,
    obs: &Observables,
    first: u64,
    n_paths: u64,
) -> Result<EnsembleStats> {
    if n_paths == 0 {
        return Err(Error::Config("an ensemble needs at least one path".into()));
    }
    let results: Vec<Result<PathRecord>> = (first..first + n_paths)
        .into_par_iter()
        .map(|i| record_path(init, coeffs, &plan.for_path(i), config, obs))
        .collect();
    let mut records = BTreeMap::new();
    for r in results {
        let r = r?;
        records.insert(r.path_index, r);
    }
    Ok(EnsembleStats {
        times: config
            .snapshot_steps()
            .iter()
            .map(|&s| s as f64 * config.dt)
            .collect(),
        eta: obs.eta,
        p: obs.moment_p,
        master_seed: plan.master_seed,
        records,
    })
}

/// Runs paths `0..n_paths`.
pub fn run_ensemble(
    init: &Field,
    coeffs: &CoefficientSet,
    plan: &NoisePlan,
    config: &SolverConfig,
    obs: &Observables,
    n_paths: u64,
) -> Result<EnsembleStats> {
    run_ensemble_range(init, coeffs, plan, config, obs, 0, n_paths)
}
