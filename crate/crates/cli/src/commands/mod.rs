//! Subcommand implementations. Each returns a [`Report`] for the single
//! writer in [`crate::run`].

mod analyses;
mod checks;
mod simulate;

pub use analyses::{audit, density, extinction, holder, invariant};
pub use checks::{kernel_check, noise_check};
pub use simulate::{ensemble, simulate};

use lvspde::analysis::Verdict;
use lvspde::solver::{run_ensemble, EnsembleStats, Observables};

use crate::config::{Experiment, Scenario};
use crate::error::CliError;
use crate::output::{num, Table};

/// Command-line overrides shared by every subcommand.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<u64>,
}

impl Overrides {
    fn n_paths(&self, exp: &Experiment) -> u64 {
        self.paths.unwrap_or(exp.raw.run.n_paths)
    }
}

/// Largest clipped share of the total mass in any one step.
pub const CLIPPED_FRACTION_LIMIT: f64 = 1e-3;
/// Largest share of paths allowed to leave the truncation ball.
pub const EXIT_RATE_LIMIT: f64 = 0.01;

fn section<'a, T>(exp: &Experiment, value: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| {
        exp.error(
            "run",
            None,
            format!("this command requires a [{name}] table"),
        )
    })
}

fn run(scenario: &Scenario, obs: &Observables, n_paths: u64) -> Result<EnsembleStats, CliError> {
    Ok(run_ensemble(
        &scenario.init,
        &scenario.coeffs,
        &scenario.plan,
        &scenario.solver,
        obs,
        n_paths,
    )?)
}

/// Positivity, clipping and truncation-exit verdicts of an ensemble.
fn health(stats: &EnsembleStats) -> Vec<Verdict> {
    let negative = stats.negative_values();
    let clipped = stats.max_clipped_fraction();
    let exit_rate = stats.exit_count() as f64 / stats.n_paths() as f64;
    vec![
        Verdict::new(
            "positivity",
            "nonnegativity of solutions",
            negative == 0,
            negative as f64,
            0.0,
        ),
        Verdict::new(
            "clipped_mass_fraction",
            "nonnegativity of solutions",
            clipped < CLIPPED_FRACTION_LIMIT,
            clipped,
            CLIPPED_FRACTION_LIMIT,
        ),
        Verdict::new(
            "truncation_exit_rate",
            "global existence",
            exit_rate <= EXIT_RATE_LIMIT,
            exit_rate,
            EXIT_RATE_LIMIT,
        ),
    ]
}

/// Per-snapshot ensemble means with standard errors.
fn ensemble_table(stats: &EnsembleStats) -> Table {
    use lvspde::model::Species;
    let lu = stats.mean_ln_mass(Species::U);
    let lv = stats.mean_ln_mass(Species::V);
    let sp = stats.mean_sup_norm_p(stats.p);
    let mut t = Table::new(
        "ensemble.csv",
        &[
            "time",
            "mean_lnmassU",
            "mean_lnmassV",
            "mean_supnorm_p",
            "se_lnmassU",
            "se_lnmassV",
            "se_supnorm_p",
            "n_paths",
        ],
    );
    for i in 0..stats.times.len() {
        t.push(vec![
            num(stats.times[i]),
            num(lu.mean[i]),
            num(lv.mean[i]),
            num(sp.mean[i]),
            num(lu.se[i]),
            num(lv.se[i]),
            num(sp.se[i]),
            stats.n_paths().to_string(),
        ]);
    }
    t
}

fn snapshot_index(
    exp: &Experiment,
    stats: &EnsembleStats,
    t: f64,
    section: &str,
    key: &str,
) -> Result<usize, CliError> {
    stats
        .times
        .iter()
        .position(|s| (s - t).abs() < 1e-9)
        .ok_or_else(|| {
            exp.error(
                section,
                Some(key),
                format!("time {t} is not a snapshot time"),
            )
        })
}
