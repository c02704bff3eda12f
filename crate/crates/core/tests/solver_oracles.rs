//! Solver runs against exact solutions built independently here.

use std::f64::consts::TAU;

use freebound::blowup::{blowup_sequence, dyadic_sup};
use freebound::io::{read_field, write_field};
use freebound::solver::{solve, BoundaryData, ProfileMethod, SolveConfig};
use freebound::{CoefficientModel, PolarGrid};

/// `a(1 − cos ω(θ − rot))` on its arc, `a = 1/(2(2+ε))`, `ω² = 2(2+ε)/(1+ε)`.
fn oracle(eps: f64, rot: f64) -> impl Fn(f64, f64) -> f64 {
    let omega = ((4.0 + 2.0 * eps) / (1.0 + eps)).sqrt();
    let a = 1.0 / (4.0 + 2.0 * eps);
    move |r, th| {
        let s = (th - rot).rem_euclid(TAU);
        if s <= TAU / omega {
            r * r * a * (1.0 - (omega * s).cos())
        } else {
            0.0
        }
    }
}

#[test]
fn coarse_oracle_solves_are_accurate() {
    for eps in [-0.3, 0.5] {
        let grid = PolarGrid::uniform(0.01, 49, 96).unwrap();
        let cfg = SolveConfig::new(
            CoefficientModel::planar(eps).unwrap(),
            0.0,
            grid.clone(),
            BoundaryData::ClosedForm { rotation: 1.0, scale: 1.0 },
        );
        let sol = solve(&cfg).unwrap();
        let exact = oracle(eps, 1.0);
        let mut err: f64 = 0.0;
        for (i, &r) in grid.r_values().iter().enumerate() {
            for (j, &th) in grid.theta_values().iter().enumerate() {
                err = err.max((sol.field.at(i, j) - exact(r, th)).abs());
            }
        }
        let h = grid.radial_step();
        let norm = 1.0 / (4.0 + 2.0 * eps) * 2.0;
        assert!(err <= 5.0 * (h + 1e-2) * norm, "eps {eps}: {err}");
        assert!(sol.monotone_continuation);
        assert!(sol.stages.iter().all(|s| s.residual <= 1e-8));
        let alpha = TAU / ((4.0 + 2.0 * eps) / (1.0 + eps)).sqrt();
        for row in sol.free_boundary.iter().filter(|row| row.r >= 4.0 * h) {
            assert_eq!(row.arcs.len(), 1, "r {}", row.r);
            assert!((row.arcs[0] - alpha).abs() < 0.03 * alpha, "r {}: {:?}", row.r, row.arcs);
            assert!((row.entries[0] - 1.0).abs() < 0.05, "{:?}", row.entries);
        }
    }
}

#[test]
fn solved_fields_round_trip_and_grow_quadratically() {
    let grid = PolarGrid::log_polar(2f64.powi(-7), 7 * 8 + 1, 64).unwrap();
    let cfg = SolveConfig::new(
        CoefficientModel::planar(0.2).unwrap(),
        0.25,
        grid,
        BoundaryData::HomogeneousProfile {
            method: ProfileMethod::Quadrature,
            rotation: 2.0,
            scale: 1.0,
        },
    );
    let sol = solve(&cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    write_field(&path, &sol.field).unwrap();
    let back = read_field(&path).unwrap();
    assert_eq!(back, sol.field);

    let report = dyadic_sup(&back, 6).unwrap();
    let beta = cfg.beta();
    let fitted = report.fitted_beta.unwrap();
    assert!((fitted - beta).abs() < 0.05 * beta, "{fitted}");
    assert!(report.inequality_holds(report.c));
    assert!(!report.degenerate);
    let blowup = blowup_sequence(&back, beta, 1..=5).unwrap();
    assert!(!blowup.degenerate);
}

#[test]
fn larger_data_give_larger_solutions() {
    // For p = 0 the problem is not homogeneous in the data: doubling the oracle trace also
    // enlarges the positivity set.
    let grid = PolarGrid::uniform(0.01, 33, 64).unwrap();
    let base = |scale| {
        let cfg = SolveConfig::new(
            CoefficientModel::planar(0.1).unwrap(),
            0.0,
            grid.clone(),
            BoundaryData::ClosedForm { rotation: 0.0, scale },
        );
        solve(&cfg).unwrap()
    };
    let (one, two) = (base(1.0), base(2.0));
    assert!(two.positivity_fraction > one.positivity_fraction);
    // Comparison principle: larger data give a larger solution.
    for (a, b) in one.field.values().iter().zip(two.field.values()) {
        assert!(b + 1e-9 >= *a);
    }
}
