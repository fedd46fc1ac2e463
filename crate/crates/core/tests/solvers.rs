use effvel_core::caloric::{picard_mild_solve, PicardConfig};
use effvel_core::diagnostics::{energy_series, monotonicity_check};
use effvel_core::evolution::{solve_augmented, solve_classical_1d};
use effvel_core::{AugmentedState, Grid, PressureLaw, ScalarField, Scheme, SolverConfig};
use std::f64::consts::PI;

fn gaussian_bump(g: Grid, amp: f64) -> AugmentedState {
    let rho = ScalarField::from_fn(g, |r| 1.0 + amp * (-r * r).exp());
    let v = ScalarField::odd_from_fn(g, |r| amp * r * (-r * r).exp());
    AugmentedState::from_density_velocity(0.0, rho, v, 0.5).unwrap()
}

#[test]
fn picard_and_finite_differences_agree() {
    let law = PressureLaw::new(1.0, 2.0).unwrap();
    let t = 0.05;
    let cfg = SolverConfig {
        t_final: t,
        stride: 1000,
        ..SolverConfig::default()
    };
    for g in [
        Grid::periodic(128, -8.0, 8.0).unwrap(),
        Grid::radial(128, 8.0, 2).unwrap(),
        Grid::radial(128, 8.0, 3).unwrap(),
    ] {
        let init = gaussian_bump(g, 0.05);
        let fd = solve_augmented(&init, &law, &cfg).unwrap();
        let mild = picard_mild_solve(&init, &law, t, &PicardConfig::default()).unwrap();
        let (a, b) = (fd.last().unwrap(), mild.trajectory.last().unwrap());
        let d = a.rho.sup_distance(&b.rho).max(a.v.sup_distance(&b.v));
        assert!(d < 1e-3, "{:?}: discrepancy {d:e}", g.kind());
        assert!(mild.iterations <= 10);
    }
}

#[test]
fn radial_far_state_stays_unperturbed() {
    let law = PressureLaw::new(1.0, 1.0).unwrap();
    let cfg = SolverConfig {
        t_final: 1.0,
        ..SolverConfig::default()
    };
    for dim in [2, 3] {
        let g = Grid::radial(256, 16.0, dim).unwrap();
        let traj = solve_augmented(&gaussian_bump(g, 1.0), &law, &cfg).unwrap();
        for s in &traj.samples {
            let last = g.node_count() - 1;
            assert!((s.rho.values()[last] - 1.0).abs() < 1e-8);
            assert!(s.v.values()[last].abs() < 1e-8);
        }
    }
}

#[test]
fn formulations_approach_each_other_under_refinement() {
    let law = PressureLaw::new(1.0, 2.0).unwrap();
    let cfg = SolverConfig {
        t_final: 0.05,
        stride: 1000,
        ..SolverConfig::default()
    };
    let diff = |n: usize| {
        let g = Grid::periodic(n, 0.0, 2.0 * PI).unwrap();
        let rho = ScalarField::from_fn(g, |x| 1.0 + 0.2 * x.cos());
        let u = ScalarField::odd_from_fn(g, |x| 0.1 * x.sin());
        let init = AugmentedState::from_density_physical(0.0, rho.clone(), &u, 0.5).unwrap();
        let a = solve_augmented(&init, &law, &cfg).unwrap();
        let classical = SolverConfig {
            scheme: Scheme::Classical1d,
            ..cfg
        };
        let c = solve_classical_1d(&rho, &u, &law, 0.5, &classical).unwrap();
        let (a, c) = (a.last().unwrap(), c.last().unwrap());
        assert_eq!(a.t, c.t);
        a.rho.sup_distance(&c.rho)
    };
    let (coarse, fine) = (diff(256), diff(512));
    assert!(fine < 0.6 * coarse, "{coarse:e} -> {fine:e}");
}

#[test]
fn radial_energy_decays() {
    let law = PressureLaw::new(1.0, 2.0).unwrap();
    let cfg = SolverConfig {
        theta: 1.0,
        stride: 1,
        t_final: 0.5,
        ..SolverConfig::default()
    };
    for dim in [2, 3] {
        let g = Grid::radial(128, 12.0, dim).unwrap();
        let traj = solve_augmented(&gaussian_bump(g, 0.5), &law, &cfg).unwrap();
        let report = monotonicity_check(&energy_series(&traj, &law).unwrap(), 1e-6);
        assert!(report.pass, "dim {dim}: {report:?}");
    }
}
