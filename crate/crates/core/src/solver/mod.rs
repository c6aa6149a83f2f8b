//! Time stepping: the finite-difference and spectral-Galerkin schemes, single
//! paths, and parallel ensembles.

mod config;
mod ensemble;
mod path;
mod step;

pub use config::{PositivityPolicy, Scheme, SolverConfig, MAX_DRIFT_STEP};
pub use ensemble::{
    holder_proxy, record_path, run_ensemble, run_ensemble_range, EnsembleStats, HolderSpec,
    IncrementTable, Observables, PathRecord, SeriesSummary, HOLDER_PROXY_EXPONENT,
};
pub use path::{run_path, simulate_path, PathObserver, PathSummary, Trajectory, SUP_NORM_TAIL};
pub use step::{step_fd, step_spectral, StepDiagnostics, Stepper};
