use lvspde::analysis::Verdict;
use lvspde::expr::Expr;
use lvspde::kernel::{
    gaussian_ratio_range, kernel, kernel_eigen_series, kernel_image_sum, scaling_sweep,
    semigroup_compose_check, EstimateFamily, Quadrature, DEFAULT_IMAGES,
};
use lvspde::noise::{representation_equivalence_check, SampledIntegrand};
use lvspde::rng::StreamId;
use lvspde::GridFunction;
use rand::Rng;
use rayon::prelude::*;

use super::Overrides;
use crate::config::{Experiment, KernelCheckSection, DEFAULT_TEST_FUNCTIONS};
use crate::error::CliError;
use crate::output::{num, Report, Table};

/// Cells of the midpoint rule used for kernel mass.
const MASS_CELLS: usize = 2000;
const SEMIGROUP_TOLERANCE: f64 = 1e-10;
const SEMIGROUP_TRIALS: u64 = 5;
const SEMIGROUP_GRID: usize = 64;

fn lattice(k: &KernelCheckSection) -> (Vec<f64>, Vec<f64>) {
    let m = k.lattice;
    let times = (0..m)
        .map(|i| k.t_min * (k.t_max / k.t_min).powf(i as f64 / (m - 1) as f64))
        .collect();
    let points = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
    (times, points)
}

pub fn kernel_check(exp: &Experiment) -> Result<Report, CliError> {
    let k = exp.raw.kernel_check.clone().unwrap_or_default();
    let (times, points) = lattice(&k);
    let mut table = Table::new(
        "kernel_check.csv",
        &["quantity", "t", "x", "y", "value", "reference", "abs_error"],
    );
    let blank = String::new;

    let mut agreement: f64 = 0.0;
    let mut min_value = f64::INFINITY;
    let mut asymmetry: f64 = 0.0;
    for &t in &times {
        let modes = lvspde::kernel::default_modes(t);
        for &x in &points {
            for &y in &points {
                let a = kernel_image_sum(t, x, y, DEFAULT_IMAGES)?;
                let b = kernel_eigen_series(t, x, y, modes)?;
                let e = (a - b).abs();
                agreement = agreement.max(e);
                min_value = min_value.min(a.min(b));
                asymmetry = asymmetry.max((kernel(t, x, y)? - kernel(t, y, x)?).abs());
                table.push(vec![
                    "image_vs_eigen".into(),
                    num(t),
                    num(x),
                    num(y),
                    num(a),
                    num(b),
                    num(e),
                ]);
            }
        }
    }

    let mut mass_error: f64 = 0.0;
    for &t in &times {
        for &x in &points {
            let h = 1.0 / MASS_CELLS as f64;
            let mut mass = 0.0;
            for j in 0..MASS_CELLS {
                mass += kernel(t, x, (j as f64 + 0.5) * h)?;
            }
            mass *= h;
            let e = (mass - 1.0).abs();
            mass_error = mass_error.max(e);
            table.push(vec![
                "mass".into(),
                num(t),
                num(x),
                blank(),
                num(mass),
                num(1.0),
                num(e),
            ]);
        }
    }

    let mut semigroup: f64 = 0.0;
    for trial in 0..SEMIGROUP_TRIALS {
        let mut rng = StreamId::new(0, trial, 0, 0).rng();
        let u = GridFunction::new((0..SEMIGROUP_GRID).map(|_| rng.random::<f64>()).collect())?;
        let (s, t) = (0.01 + 0.1 * trial as f64, 0.02 + 0.05 * trial as f64);
        let e = semigroup_compose_check(s, t, &u)?;
        semigroup = semigroup.max(e);
        table.push(vec![
            "semigroup_law".into(),
            num(s + t),
            blank(),
            blank(),
            num(e),
            num(0.0),
            num(e),
        ]);
    }

    let interior: Vec<f64> = points.to_vec();
    let (lo, hi) = gaussian_ratio_range(&times, &interior, &interior)?;
    for (name, v) in [("gaussian_ratio_inf", lo), ("gaussian_ratio_sup", hi)] {
        table.push(vec![
            name.into(),
            blank(),
            blank(),
            blank(),
            num(v),
            blank(),
            blank(),
        ]);
    }

    let mut sweeps = Table::new(
        "kernel_sweeps.csv",
        &["family", "sharp", "delta", "value", "bound_shape", "ratio"],
    );
    let quad = Quadrature::default();
    let results: Vec<_> = EstimateFamily::ALL
        .par_iter()
        .map(|&f| scaling_sweep(f, f.default_range(), k.sweep_points, &quad))
        .collect();

    let mut verdicts = vec![
        Verdict::new(
            "kernel_representation_agreement",
            "neumann heat kernel",
            agreement <= k.tolerance,
            agreement,
            k.tolerance,
        ),
        Verdict::new(
            "kernel_mass_conservation",
            "neumann heat kernel",
            mass_error <= k.mass_tolerance,
            mass_error,
            k.mass_tolerance,
        ),
        Verdict::new(
            "kernel_positivity",
            "neumann heat kernel",
            min_value > 0.0,
            min_value,
            0.0,
        ),
        Verdict::new(
            "kernel_symmetry",
            "neumann heat kernel",
            asymmetry <= k.tolerance,
            asymmetry,
            k.tolerance,
        ),
        Verdict::new(
            "semigroup_law",
            "neumann heat kernel",
            semigroup <= SEMIGROUP_TOLERANCE,
            semigroup,
            SEMIGROUP_TOLERANCE,
        ),
        Verdict::new(
            "gaussian_comparison",
            "gaussian kernel comparison",
            lo > 0.0 && hi.is_finite(),
            lo,
            0.0,
        ),
    ];
    for sweep in results {
        let s = sweep?;
        for i in 0..s.params.len() {
            sweeps.push(vec![
                family_name(s.family).into(),
                s.family.is_sharp().to_string(),
                num(s.params[i]),
                num(s.values[i]),
                num(s.family.at(s.params[i]).bound_shape()),
                num(s.ratios[i]),
            ]);
        }
        let v = s.variation();
        verdicts.push(Verdict::new(
            format!("scaling_{}", family_name(s.family)),
            "kernel increment scaling",
            v.is_finite() && v < k.variation_limit,
            v,
            k.variation_limit,
        ));
    }
    Ok(Report {
        seed: None,
        tables: vec![table, sweeps],
        snapshots: None,
        verdicts,
    })
}

fn family_name(f: EstimateFamily) -> &'static str {
    f.at(f.default_range().0).name()
}

pub fn noise_check(exp: &Experiment, ov: Overrides) -> Result<Report, CliError> {
    let n = exp.raw.noise_check.clone().unwrap_or_default();
    let seed = ov.seed.unwrap_or(n.master_seed);
    let names: Vec<String> = if n.functions.is_empty() {
        DEFAULT_TEST_FUNCTIONS
            .iter()
            .map(|s| s.to_string())
            .collect()
    } else {
        n.functions.clone()
    };
    let steps = (n.horizon / n.dt).round() as usize;
    let results: Vec<_> = names
        .par_iter()
        .enumerate()
        .map(|(i, name)| -> Result<_, CliError> {
            let e = Expr::parse(name)
                .map_err(|e| exp.error("noise_check", Some("functions"), e.to_string()))?;
            let f = SampledIntegrand::from_fn(n.grid_size, n.dt, steps, |t, x| e.eval_at(t, x))?;
            let r = representation_equivalence_check(&f, n.n_reps, seed.wrapping_add(i as u64))?;
            Ok((name, r))
        })
        .collect();

    let mut table = Table::new(
        "noise_check.csv",
        &[
            "f_name",
            "representation",
            "n_reps",
            "mean",
            "variance",
            "target_variance",
            "ks_statistic",
            "pass",
        ],
    );
    let mut verdicts = Vec::new();
    for (i, res) in results.into_iter().enumerate() {
        let (name, r) = res?;
        let pass = r.passes(n.variance_tolerance);
        for (rep, mean, var, target) in [
            ("walsh", r.walsh_mean, r.walsh_var, r.target_var),
            ("spectral", r.spectral_mean, r.spectral_var, r.target_var),
        ] {
            table.push(vec![
                name.clone(),
                rep.into(),
                r.n_reps.to_string(),
                num(mean),
                num(var),
                num(target),
                num(r.ks.statistic),
                pass.to_string(),
            ]);
        }
        let (ew, es) = r.variance_errors();
        let err = ew.max(es);
        verdicts.push(Verdict::new(
            format!("noise_variance_f{i}"),
            "walsh isometry",
            err <= n.variance_tolerance,
            err,
            n.variance_tolerance,
        ));
        let ks_ok = if r.target_var == 0.0 {
            r.ks.statistic == 0.0
        } else {
            r.ks.passes()
        };
        verdicts.push(Verdict::new(
            format!("noise_ks_f{i}"),
            "sheet and spectral integral equivalence",
            ks_ok,
            r.ks.statistic,
            r.ks.critical,
        ));
    }
    Ok(Report {
        seed: Some(seed),
        tables: vec![table],
        snapshots: None,
        verdicts,
    })
}
