use std::f64::consts::{PI, SQRT_2};

use lvspde::noise::{
    cell_mode_integrals, power_law_weights, representation_equivalence_check,
    sample_sheet_increments, sample_spectral_increments, synthesize_from_modes, walsh_integral,
    NoisePlan, SampledIntegrand, SheetIncrementPanel,
};
use lvspde::rng::StreamId;
use lvspde::stats::{mean, variance};

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn sheet_cells_have_variance_dt_over_n() {
    let (n, dt) = (32, 0.01);
    let mut rng = StreamId::new(4, 0, 0, 0).rng();
    let mut draws = Vec::new();
    for _ in 0..2000 {
        draws.extend(sample_sheet_increments(n, dt, &mut rng).unwrap());
    }
    let target = dt / n as f64;
    // 64000 draws: the sample variance has relative sd sqrt(2 / 64000) ~ 0.0056.
    assert!(relative(variance(&draws), target) < 0.03);
    assert!(mean(&draws).abs() < 4.0 * (target / draws.len() as f64).sqrt());
}

#[test]
fn spectral_modes_carry_their_weights() {
    let (k, dt) = (6, 0.5);
    let weights = power_law_weights(k, 1.0);
    let mut rng = StreamId::new(8, 0, 0, 0).rng();
    let reps: Vec<Vec<f64>> = (0..20000)
        .map(|_| sample_spectral_increments(k, dt, &weights, &mut rng).unwrap())
        .collect();
    for m in 0..k {
        let col: Vec<f64> = reps.iter().map(|r| r[m]).collect();
        let target = dt / ((m + 1) * (m + 1)) as f64;
        assert!(relative(variance(&col), target) < 0.05, "mode {m}");
    }
}

#[test]
fn cell_mode_integrals_match_fine_midpoint_rule() {
    let (n, k) = (8, 5);
    let p = cell_mode_integrals(n, k);
    let h = 1.0 / n as f64;
    let sub = 4000;
    for (m, row) in p.iter().enumerate() {
        for (j, &got) in row.iter().enumerate() {
            let e = |x: f64| {
                if m == 0 {
                    1.0
                } else {
                    SQRT_2 * (m as f64 * PI * x).cos()
                }
            };
            let want: f64 = (0..sub)
                .map(|i| e(j as f64 * h + (i as f64 + 0.5) * h / sub as f64))
                .sum::<f64>()
                * h
                / sub as f64;
            assert!((got - want).abs() < 1e-9, "mode {m} cell {j}");
        }
    }
}

#[test]
fn synthesis_evaluates_cosine_modes_at_cell_centers() {
    let n = 5;
    let d = [0.3, -1.2, 0.7];
    let got = synthesize_from_modes(&d, n);
    for (j, g) in got.iter().enumerate() {
        let x = (j as f64 + 0.5) / n as f64;
        let want = 0.3 - 1.2 * SQRT_2 * (PI * x).cos() + 0.7 * SQRT_2 * (2.0 * PI * x).cos();
        assert!((g - want).abs() < 1e-12);
    }
}

#[test]
fn walsh_integral_is_a_weighted_sum_of_increments() {
    let f = SampledIntegrand {
        dt: 0.1,
        rows: vec![vec![1.0, 2.0], vec![-1.0, 0.5]],
    };
    let panels = vec![
        SheetIncrementPanel {
            dw: vec![0.2, 0.1],
            step_index: 0,
            species_index: 0,
        },
        SheetIncrementPanel {
            dw: vec![0.4, -0.6],
            step_index: 1,
            species_index: 0,
        },
    ];
    let got = walsh_integral(&f, &panels).unwrap();
    assert!((got - (0.2 + 0.2 - 0.4 - 0.3)).abs() < 1e-15);
    assert!(walsh_integral(&f, &panels[..1]).is_err());
}

#[test]
fn panels_depend_on_every_stream_coordinate() {
    let plan = NoisePlan::sheet(11);
    let base = plan.sheet_panel(16, 0.01, 0, 3).unwrap();
    assert_eq!(base, plan.sheet_panel(16, 0.01, 0, 3).unwrap());
    assert_ne!(base.dw, plan.sheet_panel(16, 0.01, 1, 3).unwrap().dw);
    assert_ne!(base.dw, plan.sheet_panel(16, 0.01, 0, 4).unwrap().dw);
    assert_ne!(
        base.dw,
        plan.for_path(1).sheet_panel(16, 0.01, 0, 3).unwrap().dw
    );
    assert_ne!(
        base.dw,
        NoisePlan::sheet(12).sheet_panel(16, 0.01, 0, 3).unwrap().dw
    );
}

#[test]
fn representations_agree_in_law_for_a_cosine() {
    let (n, dt, steps) = (16, 0.1, 10);
    let f = SampledIntegrand::from_fn(n, dt, steps, |_, x| (PI * x).cos()).unwrap();
    // The midpoint rule integrates cos^2(pi x) exactly, so the isometry gives T / 2.
    let target = 0.5 * dt * steps as f64;
    assert!(relative(f.isometry_variance(), target) < 1e-12);
    let r = representation_equivalence_check(&f, 10000, 21).unwrap();
    assert!(
        relative(r.walsh_var, target) < 0.05,
        "walsh {}",
        r.walsh_var
    );
    assert!(
        relative(r.spectral_var, target) < 0.05,
        "spectral {}",
        r.spectral_var
    );
    // Parseval: truncating the cosine expansion of the step profile loses energy.
    assert!(r.spectral_target_var <= target * (1.0 + 1e-12));
    assert!(r.spectral_target_var > 0.95 * target);
    assert!(r.ks.passes());
    assert!(r.passes(0.05));
}

#[test]
fn representations_agree_for_a_time_dependent_kink() {
    let (n, dt, steps) = (16, 0.1, 10);
    let f = SampledIntegrand::from_fn(n, dt, steps, |t, x| (1.0 + t) * (x - 0.5).abs()).unwrap();
    let target: f64 = (0..steps)
        .map(|i| {
            let t = i as f64 * dt;
            let s: f64 = (0..n)
                .map(|j| ((j as f64 + 0.5) / n as f64 - 0.5).powi(2))
                .sum();
            dt * (1.0 + t).powi(2) * s / n as f64
        })
        .sum();
    let r = representation_equivalence_check(&f, 10000, 22).unwrap();
    assert!(relative(r.target_var, target) < 1e-12);
    assert!(r.passes(0.05), "{r:?}");
}
