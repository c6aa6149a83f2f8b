use lvspde::analysis::Verdict;
use lvspde::kernel::semigroup_apply;
use lvspde::solver::{simulate_path, Observables};
use serde::Serialize;

use super::{
    ensemble_table, health, run, section, snapshot_index, Overrides, CLIPPED_FRACTION_LIMIT,
};
use crate::config::Experiment;
use crate::error::CliError;
use crate::output::{num, Report, Table};

#[derive(Serialize)]
struct SnapshotLine<'a> {
    t: f64,
    #[serde(rename = "U")]
    u: &'a [f64],
    #[serde(rename = "V")]
    v: &'a [f64],
}

pub fn simulate(exp: &Experiment, ov: Overrides) -> Result<Report, CliError> {
    let sc = exp.scenario(ov.seed)?;
    let traj = simulate_path(&sc.init, &sc.coeffs, &sc.plan, &sc.solver)?;
    let lines = traj
        .snapshots
        .iter()
        .map(|(t, f)| {
            serde_json::to_string(&SnapshotLine {
                t: *t,
                u: f.u.values(),
                v: f.v.values(),
            })
            .expect("snapshot serializes")
        })
        .collect();
    let min_value = traj
        .snapshots
        .iter()
        .map(|(_, f)| f.u.min().min(f.v.min()))
        .fold(f64::INFINITY, f64::min);
    let mut verdicts = vec![
        Verdict::new(
            "positivity",
            "nonnegativity of solutions",
            min_value >= 0.0,
            min_value,
            0.0,
        ),
        Verdict::new(
            "clipped_mass_fraction",
            "nonnegativity of solutions",
            traj.max_clipped_fraction < CLIPPED_FRACTION_LIMIT,
            traj.max_clipped_fraction,
            CLIPPED_FRACTION_LIMIT,
        ),
    ];
    let mut tables = Vec::new();

    if let Some(o) = &exp.raw.oracle {
        let path = exp.relative(&o.table);
        let rows = read_oracle(&path)?;
        let mut t = Table::new("oracle.csv", &["time", "simulated", "oracle", "abs_error"]);
        let mut worst: f64 = 0.0;
        for (time, want) in rows {
            let (_, f) = traj
                .snapshots
                .iter()
                .find(|(s, _)| (s - time).abs() < 1e-9)
                .ok_or_else(|| {
                    exp.error(
                        "oracle",
                        Some("table"),
                        format!("oracle time {time} is not a snapshot time"),
                    )
                })?;
            let got = f.u.values()[o.cell];
            let e = (got - want).abs();
            worst = worst.max(e);
            t.push(vec![num(time), num(got), num(want), num(e)]);
        }
        verdicts.push(Verdict::new(
            "oracle_max_error",
            "deterministic limit",
            worst < o.tolerance,
            worst,
            o.tolerance,
        ));
        tables.push(t);
    }

    Ok(Report {
        seed: Some(sc.plan.master_seed),
        tables,
        snapshots: Some(("simulate.ndjson".into(), lines)),
        verdicts,
    })
}

fn read_oracle(path: &std::path::Path) -> Result<Vec<(f64, f64)>, CliError> {
    let io = |m: String| CliError::Io {
        path: path.to_path_buf(),
        message: m,
    };
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| io(e.to_string()))?;
    let mut rows = Vec::new();
    for rec in r.deserialize::<(f64, f64)>() {
        rows.push(rec.map_err(|e| io(e.to_string()))?);
    }
    if rows.is_empty() {
        return Err(io("oracle table has no rows".into()));
    }
    Ok(rows)
}

pub fn ensemble(exp: &Experiment, ov: Overrides) -> Result<Report, CliError> {
    let sc = exp.scenario(ov.seed)?;
    let mut obs = Observables::for_init(&sc.init);
    if let Some(e) = &exp.raw.ensemble {
        obs.moment_p = e.p;
    }
    obs.store_fields = exp.raw.linear_mean.is_some();
    let stats = run(&sc, &obs, ov.n_paths(exp))?;
    let mut verdicts = health(&stats);
    let mut tables = vec![ensemble_table(&stats)];

    if exp.raw.linear_mean.is_some() {
        let l = section(exp, &exp.raw.linear_mean, "linear_mean")?;
        let m = sc.coeffs.m1.values()[0];
        let mut t = Table::new(
            "linear_mean.csv",
            &["time", "cell", "mean", "se", "expected", "z"],
        );
        let mut worst: f64 = 0.0;
        for &time in &l.times {
            let i = snapshot_index(exp, &stats, time, "linear_mean", "times")?;
            let (mean, se) = stats.mean_field(i)?;
            let expected = semigroup_apply(time, &sc.init.u)?.scale((m * time).exp());
            for j in 0..mean.len() {
                let d = mean.values()[j] - expected.values()[j];
                let s = se.values()[j];
                let z = if s > 0.0 {
                    d.abs() / s
                } else if d.abs() <= 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
                t.push(vec![
                    num(time),
                    j.to_string(),
                    num(mean.values()[j]),
                    num(s),
                    num(expected.values()[j]),
                    num(z),
                ]);
            }
        }
        verdicts.push(Verdict::new(
            "linear_mean_max_z",
            "mean of the linear equation",
            worst <= l.z_limit,
            worst,
            l.z_limit,
        ));
        tables.push(t);
    }

    Ok(Report {
        seed: Some(stats.master_seed),
        tables,
        snapshots: None,
        verdicts,
    })
}
