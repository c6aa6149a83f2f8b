use lvspde::analysis::{
    density_smoke_test, extinction_report, fbm_path, holder_estimate, holder_estimate_ensemble,
    mild_log_functional_audit, moment_bound_curve, stationarity_report, Direction, HolderEstimate,
    Verdict,
};
use lvspde::rng::StreamId;
use lvspde::solver::{simulate_path, IncrementTable, Observables};

use super::{health, run, section, Overrides};
use crate::config::Experiment;
use crate::error::CliError;
use crate::output::{num, Report, Table};

/// Known Hurst indices recovered by the estimator self-calibration.
pub const CALIBRATION_HURST: [f64; 2] = [0.25, 0.5];
pub const CALIBRATION_TOLERANCE: f64 = 0.05;
const CALIBRATION_STEPS: usize = 4096;
const CALIBRATION_PATHS: usize = 25;
const CALIBRATION_LAGS: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::Space => "space",
        Direction::Time => "time",
    }
}

/// Estimates the exponent of synthetic fractional Brownian paths with
/// known Hurst index `hurst`.
pub fn calibrate(hurst: f64, p: f64, seed: u64) -> Result<HolderEstimate, CliError> {
    let m = CALIBRATION_STEPS;
    let mut rng = StreamId::new(seed, 0, 0, 0).rng();
    let lags: Vec<f64> = CALIBRATION_LAGS
        .iter()
        .map(|&l| l as f64 / m as f64)
        .collect();
    let mut table = IncrementTable::new(lags, p);
    for _ in 0..CALIBRATION_PATHS {
        let path = fbm_path(m, hurst, &mut rng)?;
        for (li, &l) in CALIBRATION_LAGS.iter().enumerate() {
            for j in 0..=m - l {
                table.add(li, path[j + l] - path[j]);
            }
        }
    }
    Ok(holder_estimate(&table, Direction::Space)?)
}

pub fn holder(exp: &Experiment, ov: Overrides) -> Result<Report, CliError> {
    let h = section(exp, &exp.raw.holder, "holder")?;
    let sc = exp.scenario(ov.seed)?;
    let obs = Observables {
        holder: Some(exp.holder_spec()),
        ..Observables::for_init(&sc.init)
    };
    let stats = run(&sc, &obs, ov.n_paths(exp))?;
    let seed = stats.master_seed;
    let mut verdicts = health(&stats);

    let mut moments = Table::new("holder_moments.csv", &["direction", "lag", "moment"]);
    let mut summary = Table::new(
        "holder_summary.csv",
        &[
            "direction",
            "p",
            "exponent",
            "se",
            "r2",
            "ci_low",
            "ci_high",
            "band_low",
            "band_high",
        ],
    );
    let mut directions = vec![(Direction::Space, h.space_band)];
    if let Some(band) = h.time_band.filter(|_| !h.time_refs.is_empty()) {
        directions.push((Direction::Time, band));
    }
    for (d, band) in directions {
        let e = holder_estimate_ensemble(&stats, d, h.bootstrap, seed)?;
        let name = direction_name(d);
        for (l, m) in e.lags.iter().zip(&e.moments) {
            moments.push(vec![name.into(), num(*l), num(*m)]);
        }
        summary.push(vec![
            name.into(),
            num(e.p),
            num(e.exponent()),
            num(e.se),
            num(e.r2),
            num(e.confidence_band.0),
            num(e.confidence_band.1),
            num(band[0]),
            num(band[1]),
        ]);
        let beta = e.exponent();
        verdicts.push(Verdict::new(
            format!("holder_{name}_exponent_min"),
            "holder regularity",
            beta >= band[0],
            beta,
            band[0],
        ));
        verdicts.push(Verdict::new(
            format!("holder_{name}_exponent_max"),
            "holder regularity",
            beta <= band[1],
            beta,
            band[1],
        ));
    }

    let mut tables = vec![moments, summary];
    if h.calibrate {
        let mut cal = Table::new(
            "holder_calibration.csv",
            &["hurst", "estimate", "abs_error"],
        );
        for (i, &hurst) in CALIBRATION_HURST.iter().enumerate() {
            let e = calibrate(hurst, h.p, seed.wrapping_add(i as u64))?;
            let err = (e.exponent() - hurst).abs();
            cal.push(vec![num(hurst), num(e.exponent()), num(err)]);
            verdicts.push(Verdict::new(
                format!("holder_calibration_h{hurst}"),
                "holder estimator calibration",
                err <= CALIBRATION_TOLERANCE,
                err,
                CALIBRATION_TOLERANCE,
            ));
        }
        tables.push(cal);
    }
    Ok(Report {
        seed: Some(seed),
        tables,
        snapshots: None,
        verdicts,
    })
}

pub fn extinction(exp: &Experiment, ov: Overrides) -> Result<Report, CliError> {
    let x = section(exp, &exp.raw.extinction, "extinction")?;
    let sc = exp.scenario(ov.seed)?;
    let stats = run(&sc, &Observables::for_init(&sc.init), ov.n_paths(exp))?;
    let species = x.species.into();
    let r = extinction_report(
        &stats,
        &sc.coeffs,
        species,
        (x.tail_window[0], x.tail_window[1]),
        x.bootstrap,
        stats.master_seed,
    )?;
    let mut t = Table::new("extinction.csv", &["time", "mean_log_mass", "se", "bound"]);
    for i in 0..r.times.len() {
        t.push(vec![
            num(r.times[i]),
            num(r.mean_log_mass[i]),
            num(r.se[i]),
            num(r.initial_log_mass + r.r_bound * r.times[i]),
        ]);
    }
    let mut verdicts = health(&stats);
    verdicts.extend([
        Verdict::new(
            "extinction_rate_negative",
            "extinction condition",
            r.r_bound < 0.0,
            r.r_bound,
            0.0,
        ),
        Verdict::new(
            "extinction_initial_mass",
            "extinction condition",
            !r.degenerate,
            r.initial_log_mass,
            stats.eta.ln(),
        ),
        Verdict::new(
            "extinction_tail_slope",
            "extinction rate",
            r.slope_ok,
            r.slope,
            r.r_bound + 3.0 * r.slope_se,
        ),
        Verdict::new(
            "extinction_linear_bound",
            "extinction rate",
            r.bound_ok,
            r.worst_bound_margin,
            0.0,
        ),
    ]);
    Ok(Report {
        seed: Some(stats.master_seed),
        tables: vec![t],
        snapshots: None,
        verdicts,
    })
}

pub fn invariant(exp: &Experiment, ov: Overrides) -> Result<Report, CliError> {
    let inv = section(exp, &exp.raw.invariant, "invariant")?;
    let sc = exp.scenario(ov.seed)?;
    let obs = Observables {
        moment_p: inv.p,
        probe_cells: inv.probe_cells.clone(),
        ..Observables::for_init(&sc.init)
    };
    let stats = run(&sc, &obs, ov.n_paths(exp))?;
    let curve = moment_bound_curve(&stats, &sc.coeffs, inv.p)?;
    let st = stationarity_report(&stats, &inv.probe_cells, inv.n_windows)?;

    let mut m = Table::new("moments.csv", &["time", "mean_supnorm_p", "se"]);
    for i in 0..curve.times.len() {
        m.push(vec![
            num(curve.times[i]),
            num(curve.mean[i]),
            num(curve.se[i]),
        ]);
    }
    let mut w = Table::new(
        "windows.csv",
        &[
            "start",
            "end",
            "mean_mass_u",
            "mean_mass_v",
            "mean_sup_norm",
            "holder_norm_proxy",
            "site_means",
        ],
    );
    for win in &st.windows {
        let sites: Vec<String> = win.site_means.iter().map(|v| num(*v)).collect();
        w.push(vec![
            num(win.start),
            num(win.end),
            num(win.mean_mass_u),
            num(win.mean_mass_v),
            num(win.mean_sup_norm),
            num(win.holder_norm_proxy),
            sites.join(" "),
        ]);
    }
    let mut ks = Table::new("site_ks.csv", &["cell", "statistic", "critical", "pass"]);
    for (c, k) in st.probe_cells.iter().zip(&st.site_ks) {
        ks.push(vec![
            c.to_string(),
            num(k.statistic),
            num(k.critical),
            k.passes().to_string(),
        ]);
    }

    let mut verdicts = health(&stats);
    let inf_a = sc.coeffs.a1.min().min(sc.coeffs.a2.min());
    verdicts.extend([
        Verdict::new(
            "invariant_self_limitation",
            "invariant measure condition",
            curve.in_hypothesis,
            inf_a,
            0.0,
        ),
        Verdict::new(
            "moment_flat_tail",
            "uniform moment bound",
            curve.flat_tail,
            curve.growth_ratio,
            2.0,
        ),
        Verdict::new(
            "stationarity_ks",
            "invariant measure",
            st.pass,
            st.pass_fraction,
            0.8,
        ),
    ]);
    Ok(Report {
        seed: Some(stats.master_seed),
        tables: vec![m, w, ks],
        snapshots: None,
        verdicts,
    })
}

pub fn density(exp: &Experiment, ov: Overrides) -> Result<Report, CliError> {
    let d = section(exp, &exp.raw.density, "density")?;
    let sc = exp.scenario(ov.seed)?;
    let obs = Observables {
        probe_cells: vec![d.probe_cell],
        ..Observables::for_init(&sc.init)
    };
    let stats = run(&sc, &obs, ov.n_paths(exp))?;
    let last = stats.times.len() - 1;
    let samples: Vec<f64> = stats.records.values().map(|r| r.probes[last][0]).collect();
    let r = density_smoke_test(&samples)?;

    let mut s = Table::new(
        "density_summary.csv",
        &[
            "time",
            "cell",
            "n",
            "zero_fraction",
            "repeated_values",
            "max_gap",
            "threshold",
            "bandwidth",
        ],
    );
    s.push(vec![
        num(stats.times[last]),
        d.probe_cell.to_string(),
        r.n.to_string(),
        num(r.atom_fraction_at_zero_excluded),
        r.repeated_values.to_string(),
        num(r.max_gap_statistic),
        num(r.threshold),
        num(r.kde_bandwidth),
    ]);
    let mut k = Table::new("density_kde.csv", &["x", "density"]);
    for p in &r.kde {
        k.push(vec![num(p.x), num(p.density)]);
    }
    let mut verdicts = health(&stats);
    verdicts.push(Verdict::new(
        "density_no_atom",
        "absolute continuity of marginals",
        !r.has_atom,
        r.max_gap_statistic,
        r.threshold,
    ));
    Ok(Report {
        seed: Some(stats.master_seed),
        tables: vec![s, k],
        snapshots: None,
        verdicts,
    })
}

pub fn audit(exp: &Experiment, ov: Overrides) -> Result<Report, CliError> {
    let a = section(exp, &exp.raw.audit, "audit")?;
    let sc = exp.scenario(ov.seed)?;
    let traj = simulate_path(&sc.init, &sc.coeffs, &sc.plan, &sc.solver)?;
    let n_modes = a.n_modes.unwrap_or(sc.init.grid_size());
    let r = mild_log_functional_audit(&traj, &sc.coeffs, &a.etas, &[], a.lag, n_modes)?;

    let mut t = Table::new(
        "audit.csv",
        &[
            "time",
            "eta",
            "m_eta",
            "drift_ratio",
            "drift_bound",
            "drift_ok",
        ],
    );
    for row in &r.rows {
        t.push(vec![
            num(row.time),
            num(row.eta),
            num(row.m_eta),
            num(row.drift_ratio),
            num(row.drift_bound),
            row.drift_term_bound_ok.to_string(),
        ]);
    }
    let eta = a.etas.iter().copied().fold(f64::INFINITY, f64::min);
    let m = r.min_m_eta(eta);
    let excess = r.max_drift_excess();
    let verdicts = vec![
        Verdict::new(
            "audit_m_eta",
            "mild ito formula for log mass",
            m >= 1.0 - a.m_eta_tolerance,
            m,
            1.0 - a.m_eta_tolerance,
        ),
        Verdict::new(
            "audit_drift_ratio",
            "mild ito formula for log mass",
            excess <= 1e-9,
            excess,
            1e-9,
        ),
        Verdict::new(
            "audit_monotone_in_eta",
            "mild ito formula for log mass",
            r.monotone_in_eta,
            if r.monotone_in_eta { 1.0 } else { 0.0 },
            1.0,
        ),
    ];
    Ok(Report {
        seed: Some(sc.plan.master_seed),
        tables: vec![t],
        snapshots: None,
        verdicts,
    })
}
