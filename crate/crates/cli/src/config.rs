//! Experiment configuration files.
//!
//! A configuration is a TOML document with a required `[run]` table and
//! optional tables per capability. Unknown keys are rejected. Every
//! validation error names the file and line of the offending key.

use std::path::{Path, PathBuf};

use lvspde::expr::Expr;
use lvspde::model::{CoefficientSet, Field, Species, TruncationRadius};
use lvspde::noise::{power_law_weights, NoisePlan};
use lvspde::solver::{Scheme, SolverConfig};
use lvspde::GridFunction;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub run: RunSection,
    pub model: Option<ModelSection>,
    pub solver: Option<SolverSection>,
    pub noise: Option<NoiseSection>,
    pub ensemble: Option<EnsembleSection>,
    pub oracle: Option<OracleSection>,
    pub linear_mean: Option<LinearMeanSection>,
    pub kernel_check: Option<KernelCheckSection>,
    pub noise_check: Option<NoiseCheckSection>,
    pub holder: Option<HolderSection>,
    pub extinction: Option<ExtinctionSection>,
    pub invariant: Option<InvariantSection>,
    pub density: Option<DensitySection>,
    pub audit: Option<AuditSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub name: String,
    #[serde(default = "one")]
    pub n_paths: u64,
    pub output_dir: Option<PathBuf>,
}

fn one() -> u64 {
    1
}

/// A coefficient given either as a number or as an expression in `x`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ExprValue {
    Number(f64),
    Text(String),
}

impl ExprValue {
    fn parse(&self) -> lvspde::Result<Expr> {
        match self {
            ExprValue::Number(v) => Ok(Expr::Const(*v)),
            ExprValue::Text(s) => Expr::parse(s),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub grid_size: usize,
    pub m1: ExprValue,
    pub m2: ExprValue,
    pub a1: ExprValue,
    pub a2: ExprValue,
    pub b1: ExprValue,
    pub b2: ExprValue,
    pub sigma1: ExprValue,
    pub sigma2: ExprValue,
    pub u0: ExprValue,
    pub v0: ExprValue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    FiniteDifference,
    SpectralGalerkin,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub scheme: SchemeName,
    pub dt: f64,
    pub horizon: f64,
    pub snapshot_times: Option<Vec<f64>>,
    pub snapshot_interval: Option<f64>,
    pub truncation_radius: Option<f64>,
    pub n_modes: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseName {
    Sheet,
    Spectral,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub representation: NoiseName,
    pub n_modes: Option<usize>,
    /// `"white"` or `"power:GAMMA"` for `lambda_k = (k + 1)^-GAMMA`.
    pub weights: Option<String>,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    /// Moment order of the sup-norm column.
    #[serde(default = "two")]
    pub p: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    /// CSV with columns `time,u`, relative to the configuration file.
    pub table: PathBuf,
    pub cell: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearMeanSection {
    pub times: Vec<f64>,
    #[serde(default = "three")]
    pub z_limit: f64,
}

fn three() -> f64 {
    3.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelCheckSection {
    pub tolerance: f64,
    pub mass_tolerance: f64,
    pub lattice: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub sweep_points: usize,
    pub variation_limit: f64,
}

impl Default for KernelCheckSection {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            mass_tolerance: 1e-6,
            lattice: 20,
            t_min: 0.01,
            t_max: 1.0,
            sweep_points: 9,
            variation_limit: 10.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseCheckSection {
    pub grid_size: usize,
    pub dt: f64,
    pub horizon: f64,
    pub n_reps: usize,
    pub variance_tolerance: f64,
    /// Integrands as expressions in `t` and `x`.
    pub functions: Vec<String>,
    pub master_seed: u64,
}

pub const DEFAULT_TEST_FUNCTIONS: [&str; 10] = [
    "1",
    "cos(pi*x)",
    "cos(2*pi*x)",
    "x",
    "x^2",
    "sin(pi*x)",
    "exp(x)",
    "sqrt(x)",
    "abs(x - 0.5)",
    "(1 + t)*cos(3*pi*x)",
];

impl Default for NoiseCheckSection {
    fn default() -> Self {
        Self {
            grid_size: 16,
            dt: 0.1,
            horizon: 1.0,
            n_reps: 10_000,
            variance_tolerance: 0.05,
            functions: Vec::new(),
            master_seed: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderSection {
    #[serde(default = "four")]
    pub p: f64,
    pub space_lags: Vec<usize>,
    pub space_times: Vec<f64>,
    pub anchor: Option<usize>,
    #[serde(default)]
    pub time_refs: Vec<f64>,
    #[serde(default)]
    pub time_lags: Vec<f64>,
    pub space_band: [f64; 2],
    pub time_band: Option<[f64; 2]>,
    #[serde(default = "yes")]
    pub calibrate: bool,
    #[serde(default = "bootstrap")]
    pub bootstrap: usize,
}

fn four() -> f64 {
    4.0
}

fn yes() -> bool {
    true
}

fn bootstrap() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SpeciesName {
    U,
    V,
}

impl From<SpeciesName> for Species {
    fn from(s: SpeciesName) -> Self {
        match s {
            SpeciesName::U => Species::U,
            SpeciesName::V => Species::V,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtinctionSection {
    pub species: SpeciesName,
    pub tail_window: [f64; 2],
    #[serde(default = "bootstrap")]
    pub bootstrap: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvariantSection {
    #[serde(default = "two")]
    pub p: f64,
    pub probe_cells: Vec<usize>,
    #[serde(default = "four_windows")]
    pub n_windows: usize,
}

fn two() -> f64 {
    2.0
}

fn four_windows() -> usize {
    4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySection {
    pub probe_cell: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    #[serde(default = "default_etas")]
    pub etas: Vec<f64>,
    #[serde(default = "default_lag")]
    pub lag: f64,
    pub n_modes: Option<usize>,
    #[serde(default = "default_m_tol")]
    pub m_eta_tolerance: f64,
}

fn default_etas() -> Vec<f64> {
    vec![1e-2, 1e-4, 1e-6]
}

fn default_lag() -> f64 {
    lvspde::analysis::DEFAULT_AUDIT_LAG
}

fn default_m_tol() -> f64 {
    1e-3
}

/// A loaded configuration file.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub path: PathBuf,
    pub source: String,
    /// Hex SHA-256 of the file bytes.
    pub hash: String,
    pub raw: RawConfig,
}

/// The model, solver and noise of a simulation experiment, resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub coeffs: CoefficientSet,
    pub init: Field,
    pub solver: SolverConfig,
    pub plan: NoisePlan,
}

impl Experiment {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_source(path, source)
    }

    pub fn from_source(path: &Path, source: String) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(&source).map_err(|e| {
            let line = e
                .span()
                .map(|s| source[..s.start.min(source.len())].matches('\n').count() + 1);
            CliError::Config {
                path: path.to_path_buf(),
                line,
                message: e.message().to_string(),
            }
        })?;
        let hash = hex::encode(Sha256::digest(source.as_bytes()));
        let exp = Self {
            path: path.to_path_buf(),
            source,
            hash,
            raw,
        };
        exp.validate()?;
        Ok(exp)
    }

    /// Line of `key` inside `[section]`, or of the section header when the
    /// key is absent.
    pub fn line_of(&self, section: &str, key: Option<&str>) -> Option<usize> {
        let mut current = String::new();
        let mut header = None;
        for (i, line) in self.source.lines().enumerate() {
            let t = line.trim();
            if t.starts_with('[') {
                current = t.trim_matches(|c| c == '[' || c == ']').trim().to_string();
                if current == section {
                    header = Some(i + 1);
                }
                continue;
            }
            if current == section {
                if let Some(k) = key {
                    let name = t.split('=').next().unwrap_or("").trim();
                    if name == k {
                        return Some(i + 1);
                    }
                }
            }
        }
        header
    }

    pub fn error(&self, section: &str, key: Option<&str>, message: impl Into<String>) -> CliError {
        let message = message.into();
        CliError::Config {
            path: self.path.clone(),
            line: self.line_of(section, key),
            message: match key {
                Some(k) => format!("{section}.{k}: {message}"),
                None => format!("[{section}]: {message}"),
            },
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.raw.run.n_paths == 0 {
            return Err(self.error("run", Some("n_paths"), "must be at least 1"));
        }
        if self.raw.model.is_some() {
            self.scenario(None)?;
        }
        if let Some(k) = &self.raw.kernel_check {
            let checks: [(&str, bool); 6] = [
                ("tolerance", k.tolerance >= 0.0),
                ("mass_tolerance", k.mass_tolerance >= 0.0),
                ("lattice", k.lattice >= 2),
                ("t_min", k.t_min > 0.0 && k.t_min < k.t_max),
                ("sweep_points", k.sweep_points >= 2),
                ("variation_limit", k.variation_limit > 0.0),
            ];
            for (key, ok) in checks {
                if !ok {
                    return Err(self.error("kernel_check", Some(key), "invalid value"));
                }
            }
        }
        if let Some(n) = &self.raw.noise_check {
            if n.grid_size == 0 {
                return Err(self.error("noise_check", Some("grid_size"), "must be at least 1"));
            }
            if !(n.dt > 0.0 && n.horizon >= n.dt) {
                return Err(self.error("noise_check", Some("dt"), "need 0 < dt <= horizon"));
            }
            for f in &n.functions {
                Expr::parse(f)
                    .map_err(|e| self.error("noise_check", Some("functions"), e.to_string()))?;
            }
        }
        if let Some(h) = &self.raw.holder {
            self.need_model("holder")?;
            if h.space_band[0] > h.space_band[1] {
                return Err(self.error(
                    "holder",
                    Some("space_band"),
                    "lower end exceeds upper end",
                ));
            }
            if !h.time_refs.is_empty() && h.time_band.is_none() {
                return Err(self.error(
                    "holder",
                    Some("time_band"),
                    "required when time_refs is set",
                ));
            }
            let solver = self.scenario(None)?.solver;
            self.holder_spec()
                .validate(&solver)
                .map_err(|e| self.error("holder", None, e.to_string()))?;
        }
        if let Some(e) = &self.raw.extinction {
            self.need_model("extinction")?;
            if e.tail_window[0] >= e.tail_window[1] {
                return Err(self.error("extinction", Some("tail_window"), "must be increasing"));
            }
        }
        if let Some(i) = &self.raw.invariant {
            let n = self.need_model("invariant")?;
            if let Some(&c) = i.probe_cells.iter().find(|&&c| c >= n) {
                return Err(self.error(
                    "invariant",
                    Some("probe_cells"),
                    format!("cell {c} outside the grid"),
                ));
            }
        }
        if let Some(d) = &self.raw.density {
            let n = self.need_model("density")?;
            if d.probe_cell >= n {
                return Err(self.error("density", Some("probe_cell"), "outside the grid"));
            }
        }
        if let Some(e) = &self.raw.ensemble {
            if !(e.p > 0.0) {
                return Err(self.error("ensemble", Some("p"), "must be positive"));
            }
        }
        if let Some(l) = &self.raw.linear_mean {
            self.need_model("linear_mean")?;
            let m = self.raw.model.as_ref().expect("model present");
            let zero = |v: &ExprValue| matches!(v, ExprValue::Number(x) if *x == 0.0);
            if !(zero(&m.a1) && zero(&m.b1)) {
                return Err(self.error("linear_mean", None, "requires a1 = 0 and b1 = 0"));
            }
            if !matches!(m.m1, ExprValue::Number(_)) || !matches!(m.sigma1, ExprValue::Number(_)) {
                return Err(self.error("linear_mean", None, "requires constant m1 and sigma1"));
            }
            if l.times.is_empty() {
                return Err(self.error("linear_mean", Some("times"), "need at least one time"));
            }
        }
        if let Some(o) = &self.raw.oracle {
            let n = self.need_model("oracle")?;
            if o.cell >= n {
                return Err(self.error("oracle", Some("cell"), "outside the grid"));
            }
        }
        if let Some(a) = &self.raw.audit {
            let n = self.need_model("audit")?;
            if a.etas.is_empty() || a.etas.iter().any(|e| !(*e >= 0.0)) {
                return Err(self.error("audit", Some("etas"), "need nonnegative values"));
            }
            if a.n_modes.is_some_and(|k| k == 0 || k > n) {
                return Err(self.error("audit", Some("n_modes"), format!("must lie in 1..={n}")));
            }
            if !(a.lag > 0.0) {
                return Err(self.error("audit", Some("lag"), "must be positive"));
            }
        }
        Ok(())
    }

    fn need_model(&self, section: &str) -> Result<usize, CliError> {
        if self.raw.solver.is_none() || self.raw.noise.is_none() {
            return Err(self.error(section, None, "requires [model], [solver] and [noise]"));
        }
        self.raw
            .model
            .as_ref()
            .map(|m| m.grid_size)
            .ok_or_else(|| self.error(section, None, "requires [model], [solver] and [noise]"))
    }

    /// Builds the scenario, with `seed` overriding the noise seed.
    pub fn scenario(&self, seed: Option<u64>) -> Result<Scenario, CliError> {
        let m = self
            .raw
            .model
            .as_ref()
            .ok_or_else(|| self.error("run", None, "this command requires a [model] table"))?;
        let s = self
            .raw
            .solver
            .as_ref()
            .ok_or_else(|| self.error("run", None, "this command requires a [solver] table"))?;
        let nz = self
            .raw
            .noise
            .as_ref()
            .ok_or_else(|| self.error("run", None, "this command requires a [noise] table"))?;
        let n = m.grid_size;
        if n == 0 {
            return Err(self.error("model", Some("grid_size"), "must be at least 1"));
        }
        let sample = |key: &str, v: &ExprValue| -> Result<GridFunction, CliError> {
            v.parse()
                .and_then(|e| e.sample(n))
                .map_err(|e| self.error("model", Some(key), e.to_string()))
        };
        let coeffs = CoefficientSet::new(
            sample("m1", &m.m1)?,
            sample("m2", &m.m2)?,
            sample("a1", &m.a1)?,
            sample("a2", &m.a2)?,
            sample("b1", &m.b1)?,
            sample("b2", &m.b2)?,
            sample("sigma1", &m.sigma1)?,
            sample("sigma2", &m.sigma2)?,
        )
        .map_err(|e| self.error("model", None, e.to_string()))?;
        let u0 = sample("u0", &m.u0)?;
        let v0 = sample("v0", &m.v0)?;
        if u0.min() < 0.0 {
            return Err(self.error("model", Some("u0"), "initial data must be nonnegative"));
        }
        if v0.min() < 0.0 {
            return Err(self.error("model", Some("v0"), "initial data must be nonnegative"));
        }
        let init = Field::new(u0, v0, 0.0).map_err(|e| self.error("model", None, e.to_string()))?;

        let scheme = match s.scheme {
            SchemeName::FiniteDifference => Scheme::FiniteDifference,
            SchemeName::SpectralGalerkin => Scheme::SpectralGalerkin,
        };
        if !(s.dt > 0.0) {
            return Err(self.error("solver", Some("dt"), "must be positive"));
        }
        if !(s.horizon > 0.0) {
            return Err(self.error("solver", Some("horizon"), "must be positive"));
        }
        let mut solver = SolverConfig::new(scheme, n, s.dt, s.horizon);
        match (&s.snapshot_times, s.snapshot_interval) {
            (Some(_), Some(_)) => {
                return Err(self.error(
                    "solver",
                    Some("snapshot_interval"),
                    "give snapshot_times or snapshot_interval, not both",
                ))
            }
            (Some(t), None) => solver = solver.with_snapshots(t.clone()),
            (None, Some(every)) => {
                if !(every > 0.0) {
                    return Err(self.error(
                        "solver",
                        Some("snapshot_interval"),
                        "must be positive",
                    ));
                }
                solver = solver.with_snapshot_interval(every);
            }
            (None, None) => {}
        }
        if let Some(r) = s.truncation_radius {
            let r = TruncationRadius::new(r)
                .map_err(|e| self.error("solver", Some("truncation_radius"), e.to_string()))?;
            solver = solver.with_radius(r);
        }
        if let Some(k) = s.n_modes {
            solver = solver.with_modes(k);
        }
        solver.validate(&coeffs, &init).map_err(|e| {
            let msg = e.to_string();
            let key = if msg.contains("snapshot") {
                "snapshot_times"
            } else if msg.contains("n_modes") {
                "n_modes"
            } else {
                "dt"
            };
            self.error("solver", Some(key), msg)
        })?;

        let seed = seed.unwrap_or(nz.master_seed);
        let plan = match nz.representation {
            NoiseName::Sheet => {
                if nz.n_modes.is_some() || nz.weights.is_some() {
                    return Err(self.error(
                        "noise",
                        Some("n_modes"),
                        "sheet noise takes no modes or weights",
                    ));
                }
                NoisePlan::sheet(seed)
            }
            NoiseName::Spectral => {
                let k = nz.n_modes.unwrap_or(n);
                if k == 0 || k > n {
                    return Err(self.error(
                        "noise",
                        Some("n_modes"),
                        format!("must lie in 1..={n}"),
                    ));
                }
                let weights = match nz.weights.as_deref().unwrap_or("white") {
                    "white" => vec![1.0; k],
                    w => match w
                        .strip_prefix("power:")
                        .and_then(|g| g.trim().parse::<f64>().ok())
                    {
                        Some(g) => power_law_weights(k, g),
                        None => {
                            return Err(self.error(
                                "noise",
                                Some("weights"),
                                format!("expected \"white\" or \"power:GAMMA\", got {w:?}"),
                            ))
                        }
                    },
                };
                NoisePlan::spectral_weighted(weights, seed)
                    .map_err(|e| self.error("noise", Some("weights"), e.to_string()))?
            }
        };
        Ok(Scenario {
            coeffs,
            init,
            solver,
            plan,
        })
    }

    pub fn holder_spec(&self) -> lvspde::solver::HolderSpec {
        let h = self.raw.holder.as_ref().expect("holder table present");
        lvspde::solver::HolderSpec {
            p: h.p,
            space_lags: h.space_lags.clone(),
            space_times: h.space_times.clone(),
            anchor: h.anchor,
            time_refs: h.time_refs.clone(),
            time_lags: h.time_lags.clone(),
        }
    }

    /// Resolves a path given in the configuration relative to its file.
    pub fn relative(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }
}
