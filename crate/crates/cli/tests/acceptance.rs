use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lvspde::model::{CoefficientSet, Field, UniformCoefficients};
use lvspde::noise::NoisePlan;
use lvspde::solver::{simulate_path, Scheme, SolverConfig};
use lvspde::GridFunction;
use lvspde_cli::output::Table;
use lvspde_cli::{execute, Command, Flags, Outcome};

struct Suite {
    scratch: tempfile::TempDir,
    results: Vec<(usize, bool, String)>,
    positivity: Vec<(String, bool)>,
    runs: usize,
}

impl Suite {
    fn run(&mut self, command: Command, config: &str) -> (Outcome, Duration) {
        self.run_with(command, config, |_| {})
    }

    fn run_with(
        &mut self,
        command: Command,
        config: &str,
        tweak: impl FnOnce(&mut Flags),
    ) -> (Outcome, Duration) {
        self.runs += 1;
        let mut flags = Flags {
            config: Some(config_path(config)),
            out: Some(self.scratch.path().join(format!("{config}-{}", self.runs))),
            reproducible: true,
            ..Flags::default()
        };
        tweak(&mut flags);
        let start = Instant::now();
        let outcome = execute(command, &flags).unwrap_or_else(|e| panic!("{config}: {e}"));
        let elapsed = start.elapsed();
        for v in &outcome.report.verdicts {
            if v.check == "positivity" || v.check == "clipped_mass_fraction" {
                self.positivity
                    .push((format!("{config}/{}", v.check), v.pass));
            }
        }
        (outcome, elapsed)
    }

    fn record(&mut self, id: usize, title: &str, pass: bool, detail: String) {
        let word = if pass { "PASS" } else { "FAIL" };
        self.results.push((
            id,
            pass,
            format!("criterion {id:>2} {word} {title}: {detail}"),
        ));
    }
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.toml"))
}

fn verdict<'a>(o: &'a Outcome, check: &str) -> &'a lvspde::analysis::Verdict {
    o.report
        .verdicts
        .iter()
        .find(|v| v.check == check)
        .unwrap_or_else(|| panic!("no verdict {check}"))
}

fn verdicts_with<'a>(o: &'a Outcome, prefix: &str) -> Vec<&'a lvspde::analysis::Verdict> {
    o.report
        .verdicts
        .iter()
        .filter(|v| v.check.starts_with(prefix))
        .collect()
}

fn table<'a>(o: &'a Outcome, file: &str) -> &'a Table {
    o.report
        .tables
        .iter()
        .find(|t| t.file == file)
        .unwrap_or_else(|| panic!("no table {file}"))
}

fn column(t: &Table, name: &str) -> usize {
    t.columns.iter().position(|c| c == name).unwrap()
}

fn cell(t: &Table, row: usize, name: &str) -> f64 {
    t.rows[row][column(t, name)].parse().unwrap()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn uniform(n: usize, m: f64, a: f64, sigma: f64) -> CoefficientSet {
    CoefficientSet::uniform(
        n,
        UniformCoefficients {
            m1: m,
            m2: m,
            a1: a,
            a2: a,
            b1: 0.0,
            b2: 0.0,
            sigma1: sigma,
            sigma2: sigma,
        },
    )
    .unwrap()
}

fn logistic_max_error(dt: f64) -> f64 {
    let n = 8;
    let exact = |t: f64| 1.0 / (1.0 + 9.0 * (-t).exp());
    let init = Field::new(GridFunction::constant(n, 0.1), GridFunction::zeros(n), 0.0).unwrap();
    let times: Vec<f64> = (1..=20).map(|i| 0.5 * i as f64).collect();
    let cfg = SolverConfig::new(Scheme::FiniteDifference, n, dt, 10.0).with_snapshots(times);
    let traj = simulate_path(
        &init,
        &uniform(n, 1.0, 1.0, 0.0),
        &NoisePlan::sheet(1),
        &cfg,
    )
    .unwrap();
    traj.snapshots
        .iter()
        .flat_map(|(t, f)| f.u.values().iter().map(move |u| (u - exact(*t)).abs()))
        .fold(0.0, f64::max)
}

fn heat_error(scheme: Scheme, dt: f64) -> f64 {
    let n = 256;
    let t = 0.5;
    let init = Field::new(
        GridFunction::from_fn(n, |x| 1.0 + (PI * x).cos()).unwrap(),
        GridFunction::zeros(n),
        0.0,
    )
    .unwrap();
    let cfg = SolverConfig::new(scheme, n, dt, t);
    let traj = simulate_path(
        &init,
        &uniform(n, 0.0, 0.0, 0.0),
        &NoisePlan::sheet(0),
        &cfg,
    )
    .unwrap();
    let exact = GridFunction::from_fn(n, |x| 1.0 + (-PI * PI * t).exp() * (PI * x).cos()).unwrap();
    traj.snapshots[0].1.u.max_abs_diff(&exact).unwrap()
}

fn kernel_representations(s: &mut Suite) {
    let (o, d) = s.run(Command::KernelCheck, "c01_kernel");
    let agree = verdict(&o, "kernel_representation_agreement");
    let mass = verdict(&o, "kernel_mass_conservation");
    let pass = agree.pass
        && agree.threshold <= 1e-8
        && mass.pass
        && mass.threshold <= 1e-6
        && secs(d) < 10.0;
    let detail = format!(
        "max |image - eigen| {:.2e}, mass error {:.2e}, {:.1} s",
        agree.statistic,
        mass.statistic,
        secs(d)
    );
    s.record(1, "heat kernel representations", pass, detail);
}

fn kernel_scaling(s: &mut Suite) {
    let (o, d) = s.run(Command::KernelCheck, "c02_kernel_scaling");
    let sweeps = verdicts_with(&o, "scaling_");
    let worst = sweeps.iter().map(|v| v.statistic).fold(0.0, f64::max);
    let pass =
        sweeps.len() == 5 && sweeps.iter().all(|v| v.pass && v.threshold <= 10.0) && secs(d) < 30.0;
    let detail = format!(
        "{} families, worst variation {:.3}, {:.1} s",
        sweeps.len(),
        worst,
        secs(d)
    );
    s.record(2, "kernel increment scaling", pass, detail);
}

fn noise_equivalence(s: &mut Suite) {
    let (o, d) = s.run(Command::NoiseCheck, "c03_noise");
    let var = verdicts_with(&o, "noise_variance_");
    let ks = verdicts_with(&o, "noise_ks_");
    let t = table(&o, "noise_check.csv");
    let reps_ok = (0..t.rows.len()).all(|r| cell(t, r, "n_reps") >= 10_000.0);
    let pass = var.len() == 10
        && ks.len() == 10
        && var.iter().chain(&ks).all(|v| v.pass)
        && var.iter().all(|v| v.threshold <= 0.05)
        && reps_ok
        && secs(d) < 60.0;
    let worst = var.iter().map(|v| v.statistic).fold(0.0, f64::max);
    let detail = format!(
        "{} functions, worst variance error {:.4}, {} KS passes, {:.1} s",
        var.len(),
        worst,
        ks.iter().filter(|v| v.pass).count(),
        secs(d)
    );
    s.record(3, "sheet and spectral noise agree", pass, detail);
}

fn deterministic_oracles(s: &mut Suite) {
    let start = Instant::now();
    let (o, _) = s.run(Command::Simulate, "c04_logistic");
    let oracle = verdict(&o, "oracle_max_error");
    let e1 = logistic_max_error(1e-3);
    let e2 = logistic_max_error(5e-4);
    let order = (e1 / e2).log2();
    let fd = heat_error(Scheme::FiniteDifference, 1e-4);
    let sp = heat_error(Scheme::SpectralGalerkin, 1e-3);
    let d = start.elapsed();
    let pass =
        oracle.pass && e1 < 5e-3 && order >= 0.9 && fd < 1e-4 && sp < 1e-12 && secs(d) < 60.0;
    let detail = format!(
        "logistic error {:.2e} (order {:.3}), heat error fd {:.2e} spectral {:.2e}, {:.1} s",
        e1,
        order,
        fd,
        sp,
        secs(d)
    );
    s.record(4, "deterministic oracles", pass, detail);
}

fn linear_mean(s: &mut Suite) {
    let (o, d) = s.run(Command::Ensemble, "c05_linear_mean");
    let t = table(&o, "linear_mean.csv");
    let n = 64;
    let m = 0.2;
    let mut worst: f64 = 0.0;
    for r in 0..t.rows.len() {
        let time = cell(t, r, "time");
        let j = cell(t, r, "cell") as usize;
        let x = (j as f64 + 0.5) / n as f64;
        let exact = (m * time).exp() * (1.0 + 0.5 * (-PI * PI * time).exp() * (PI * x).cos());
        worst = worst.max((cell(t, r, "mean") - exact).abs() / cell(t, r, "se"));
    }
    let pass = t.rows.len() == 2 * n
        && worst <= 3.0
        && verdict(&o, "linear_mean_max_z").pass
        && secs(d) < 300.0;
    let detail = format!(
        "max |z| {:.3} over {} cells, {:.1} s",
        worst,
        t.rows.len(),
        secs(d)
    );
    s.record(5, "linear equation mean field", pass, detail);
}

fn positivity(s: &mut Suite) {
    let (o, _) = s.run(Command::Ensemble, "c06_positivity");
    let clipped = verdict(&o, "clipped_mass_fraction").statistic;
    let failures: Vec<&String> = s
        .positivity
        .iter()
        .filter(|(_, p)| !p)
        .map(|(n, _)| n)
        .collect();
    let pass = failures.is_empty();
    let detail = format!(
        "{} checks across benchmark runs, benchmark clipped fraction {:.2e}, failures {:?}",
        s.positivity.len(),
        clipped,
        failures
    );
    s.record(6, "positivity", pass, detail);
}

fn extinction(s: &mut Suite) {
    let (o, d) = s.run(Command::Extinction, "c07_extinction");
    let rate = verdict(&o, "extinction_rate_negative");
    let slope = verdict(&o, "extinction_tail_slope");
    let bound = verdict(&o, "extinction_linear_bound");
    let (control, _) = s.run(Command::Extinction, "c07_extinction_control");
    let pass = (rate.statistic + 0.2).abs() < 1e-12
        && o.report.all_pass()
        && !control.report.all_pass()
        && secs(d) < 600.0;
    let detail = format!(
        "R {:.3}, slope {:.4} vs {:.4}, worst bound margin {:.2e}, control fails: {}, {:.1} s",
        rate.statistic,
        slope.statistic,
        slope.threshold,
        bound.statistic,
        !control.report.all_pass(),
        secs(d)
    );
    s.record(7, "extinction", pass, detail);
}

fn audit(s: &mut Suite) {
    let (o, d) = s.run(Command::Audit, "c08_audit");
    let t = table(&o, "audit.csv");
    let mut times: Vec<f64> = (0..t.rows.len()).map(|r| cell(t, r, "time")).collect();
    times.dedup();
    let smallest_eta = (0..t.rows.len())
        .filter(|&r| cell(t, r, "eta") == 1e-6)
        .map(|r| cell(t, r, "m_eta"))
        .fold(f64::INFINITY, f64::min);
    let drift = (0..t.rows.len())
        .map(|r| cell(t, r, "drift_ratio") - cell(t, r, "drift_bound"))
        .fold(f64::NEG_INFINITY, f64::max);
    let pass = times.len() == 20
        && smallest_eta >= 1.0 - 1e-3
        && drift <= 1e-9
        && o.report.all_pass()
        && secs(d) < 60.0;
    let detail = format!(
        "{} snapshots, min M at eta 1e-6 {:.6}, max drift excess {:.3e}, {:.1} s",
        times.len(),
        smallest_eta,
        drift,
        secs(d)
    );
    s.record(8, "log-mass functional audit", pass, detail);
}

fn holder(s: &mut Suite) {
    let (o, d) = s.run(Command::Holder, "c09_holder");
    let space = verdict(&o, "holder_space_exponent_min").statistic;
    let time = verdict(&o, "holder_time_exponent_min").statistic;
    let cal = verdicts_with(&o, "holder_calibration_");
    let (rough, dr) = s.run(Command::Holder, "c09_holder_rough");
    let rough_space = verdict(&rough, "holder_space_exponent_min").statistic;
    let pass = (0.40..=0.55).contains(&space)
        && (0.18..=0.30).contains(&time)
        && !cal.is_empty()
        && cal.iter().all(|v| v.pass && v.threshold <= 0.05)
        && (0.25..=0.35).contains(&rough_space)
        && o.report.all_pass()
        && rough.report.all_pass()
        && secs(d + dr) < 900.0;
    let detail = format!(
        "space {:.4}, time {:.4}, calibration errors {:?}, rough space {:.4}, {:.1} s",
        space,
        time,
        cal.iter()
            .map(|v| format!("{:.4}", v.statistic))
            .collect::<Vec<_>>(),
        rough_space,
        secs(d + dr)
    );
    s.record(9, "Hölder regularity", pass, detail);
}

fn invariant(s: &mut Suite) {
    let (o, d) = s.run(Command::Invariant, "c10_invariant");
    let flat = verdict(&o, "moment_flat_tail");
    let ks = verdict(&o, "stationarity_ks");
    let (control, dc) = s.run(Command::Invariant, "c10_invariant_control");
    let control_flat = verdict(&control, "moment_flat_tail");
    let pass = o.report.all_pass() && !control_flat.pass && secs(d) < 900.0;
    let detail = format!(
        "growth ratio {:.4}, KS pass fraction {:.2}, control growth ratio {:.2} fails: {}, {:.1} s (+{:.1} s control)",
        flat.statistic,
        ks.statistic,
        control_flat.statistic,
        !control_flat.pass,
        secs(d),
        secs(dc)
    );
    s.record(10, "invariant measure", pass, detail);
}

fn density(s: &mut Suite) {
    let (o, d) = s.run(Command::Density, "c11_density");
    let v = verdict(&o, "density_no_atom");
    let n = cell(table(&o, "density_summary.csv"), 0, "n");
    let (control, _) = s.run(Command::Density, "c11_density_control");
    let c = verdict(&control, "density_no_atom");
    let pass = v.pass
        && n >= 2000.0
        && (v.threshold - 3.0 / n.sqrt()).abs() < 1e-12
        && !c.pass
        && secs(d) < 300.0;
    let detail = format!(
        "max jump {:.4} < {:.4} at n {}, control jump {:.4} flagged: {}, {:.1} s",
        v.statistic,
        v.threshold,
        n,
        c.statistic,
        !c.pass,
        secs(d)
    );
    s.record(11, "density smoke test", pass, detail);
}

fn files_of(o: &Outcome) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<(PathBuf, Vec<u8>)> = o
        .written
        .iter()
        .map(|p| {
            (
                PathBuf::from(p.file_name().unwrap()),
                std::fs::read(p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism(s: &mut Suite) {
    let mut same = true;
    let mut compared = 0;
    for (command, config, paths) in [
        (Command::Simulate, "c12_determinism", None),
        (Command::Ensemble, "c06_positivity", Some(20)),
        (Command::Audit, "c08_audit", None),
    ] {
        let (a, _) = s.run_with(command, config, |f| f.paths = paths);
        let (b, _) = s.run_with(command, config, |f| {
            f.paths = paths;
            f.threads = 1;
        });
        let (fa, fb) = (files_of(&a), files_of(&b));
        compared += fa.len();
        same &= fa == fb;
    }
    s.record(
        12,
        "determinism",
        same,
        format!("{compared} files compared byte for byte"),
    );
}

fn main() -> ExitCode {
    let mut s = Suite {
        scratch: tempfile::tempdir().unwrap(),
        results: Vec::new(),
        positivity: Vec::new(),
        runs: 0,
    };
    kernel_representations(&mut s);
    kernel_scaling(&mut s);
    noise_equivalence(&mut s);
    deterministic_oracles(&mut s);
    linear_mean(&mut s);
    extinction(&mut s);
    audit(&mut s);
    holder(&mut s);
    invariant(&mut s);
    density(&mut s);
    positivity(&mut s);
    determinism(&mut s);

    s.results.sort_by_key(|r| r.0);
    for (_, _, line) in &s.results {
        println!("{line}");
    }
    let passed = s.results.iter().filter(|r| r.1).count();
    println!("acceptance: {passed}/{} criteria pass", s.results.len());
    if passed == s.results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
