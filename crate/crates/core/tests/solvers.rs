use korteweg_core::coefficients::{CoefficientFn, Coefficients};
use korteweg_core::lagrangian::FlowMap;
use korteweg_core::solver::{
    energy_norm, eulerian_reference_solve, fixed_point_residuals, picard_solve, pushforward_inverse_rescale,
    pushforward_solution, rescale_to_unit_viscosity, EulerianConfig, Frame, PicardConfig, Route, Scaling,
    TimeOrder, Trajectory,
};
use korteweg_core::{Error, Field, Grid, ScalarField, VectorField};

fn taylor_green(grid: &Grid, amp: f64) -> VectorField {
    VectorField::from_fn(grid, |x, y| [amp * x.sin() * y.cos(), -amp * x.cos() * y.sin()])
}

fn homogeneous(grid: &Grid, mu_bar: f64) -> Coefficients {
    Coefficients { mu_bar, ..Coefficients::homogeneous(grid) }
}

fn bump(grid: &Grid, kappa_bar: f64) -> Coefficients {
    let rho = ScalarField::from_fn(grid, |x, y| {
        let r2 = (x - std::f64::consts::PI).powi(2) + (y - std::f64::consts::PI).powi(2);
        1.0 + 0.2 * (-r2 / (2.0 * 0.6 * 0.6)).exp()
    });
    Coefficients::new(1.0, kappa_bar, CoefficientFn::new(vec![0.5]), CoefficientFn::one(), rho, 0.1).unwrap()
}

#[test]
fn eulerian_mass_is_conserved() {
    let grid = Grid::new(32).unwrap();
    let run = eulerian_reference_solve(&bump(&grid, 1e-2), &taylor_green(&grid, 0.3), 0.2, 40, &EulerianConfig::default())
        .unwrap();
    let m0 = run.mass[0];
    assert!(run.mass.iter().all(|m| (m - m0).abs() <= 1e-10 * m0));
    assert!(run.rho_min >= 1.0 - 1e-3 && run.rho_max <= 1.2 + 1e-3);
    assert_eq!(run.trajectory.scaling, Scaling::Original);
    assert_eq!(run.trajectory.frame, Frame::Eulerian);
}

#[test]
fn eulerian_rest_state_stays_at_rest() {
    let grid = Grid::new(16).unwrap();
    let coeffs = bump(&grid, 0.0);
    let run = eulerian_reference_solve(&coeffs, &VectorField::zeros(&grid), 0.1, 10, &EulerianConfig::default()).unwrap();
    assert!(run.trajectory.u.iter().all(|u| u.norm_linf() == 0.0));
    assert!(run.rho.iter().all(|r| r.axpy(-1.0, &coeffs.rho0).norm_linf() <= 1e-14));
}

#[test]
fn eulerian_taylor_green_decay_is_second_order_with_crank_nicolson() {
    // Taylor-Green is a steady Euler flow, so u(t) = e^{-2μ̄t}u₀ exactly.
    let grid = Grid::new(16).unwrap();
    let mu_bar = 0.5;
    let coeffs = homogeneous(&grid, mu_bar);
    let u0 = taylor_green(&grid, 0.5);
    let t = 0.5;
    let err = |order: TimeOrder, steps: usize| {
        let cfg = EulerianConfig { order, ..Default::default() };
        let run = eulerian_reference_solve(&coeffs, &u0, t, steps, &cfg).unwrap();
        run.trajectory.u.last().unwrap().axpy(-(-2.0 * mu_bar * t).exp(), &u0).norm_l2()
    };
    let second = err(TimeOrder::Second, 10) / err(TimeOrder::Second, 20);
    assert!((second - 4.0).abs() <= 0.1, "{second}");
    let first = err(TimeOrder::First, 10) / err(TimeOrder::First, 20);
    assert!((first - 2.0).abs() <= 0.15, "{first}");
}

#[test]
fn eulerian_rejects_compressible_data() {
    let grid = Grid::new(16).unwrap();
    let u = VectorField::from_fn(&grid, |x, _| [x.sin(), 0.0]);
    assert!(matches!(
        eulerian_reference_solve(&homogeneous(&grid, 1.0), &u, 0.1, 10, &EulerianConfig::default()),
        Err(Error::NonSolenoidal(_))
    ));
}

fn lagrangian(times: Vec<f64>, u: Vec<VectorField>) -> Trajectory {
    let p = vec![VectorField::zeros(u[0].grid()); u.len()];
    Trajectory::new(times, u, p, Frame::Lagrangian, Scaling::UnitViscosity).unwrap()
}

#[test]
fn pushforward_along_identity_and_translation() {
    let grid = Grid::new(32).unwrap();
    let rho0 = ScalarField::from_fn(&grid, |x, y| 1.0 + 0.1 * x.sin() * y.cos());
    let times = vec![0.0, 0.5, 1.0];
    let u = vec![taylor_green(&grid, 1.0); 3];
    let id = FlowMap::identity(&grid, &times).unwrap();
    let state = pushforward_solution(&lagrangian(times.clone(), u.clone()), &id, &rho0, 1.0, 1).unwrap();
    assert!(state.rho.iter().all(|r| r.axpy(-1.0, &rho0).norm_linf() <= 1e-12));
    assert!(state.trajectory.u[2].axpy(-1.0, &u[2]).norm_linf() <= 1e-12);

    // X(t, y) = y + (ct, 0) carries ρ₀ to ρ₀(x − ct, y).
    let c = 0.4;
    let d: Vec<VectorField> = times.iter().map(|&t| VectorField::constant(&grid, [c * t, 0.0])).collect();
    let flow = FlowMap::from_displacements(&times, d).unwrap();
    let state = pushforward_solution(&lagrangian(times.clone(), u), &flow, &rho0, 1.0, 2).unwrap();
    assert_eq!(state.trajectory.times, vec![0.0, 1.0]);
    let moved = ScalarField::from_fn(&grid, |x, y| 1.0 + 0.1 * (x - c).sin() * y.cos());
    assert!(state.rho[1].axpy(-1.0, &moved).norm_linf() <= 1e-12);
}

#[test]
fn rescaling_round_trips() {
    let grid = Grid::new(16).unwrap();
    let times = vec![0.0, 0.1, 0.2];
    let u: Vec<VectorField> = times.iter().map(|&t| taylor_green(&grid, 1.0 + t)).collect();
    let p: Vec<VectorField> = u.iter().map(|v| v.scale(0.3)).collect();
    let orig = Trajectory::new(times, u, p, Frame::Eulerian, Scaling::Original).unwrap();
    let unit = rescale_to_unit_viscosity(&orig, 2.5).unwrap();
    assert!((unit.times[2] - 0.5).abs() <= 1e-15);
    assert!(rescale_to_unit_viscosity(&unit, 2.5).is_err());
    let back = pushforward_inverse_rescale(&unit, 2.5).unwrap();
    for k in 0..3 {
        assert!((back.times[k] - orig.times[k]).abs() <= 1e-15);
        assert!(back.u[k].axpy(-1.0, &orig.u[k]).norm_linf() <= 1e-14);
        assert!(back.grad_p[k].axpy(-1.0, &orig.grad_p[k]).norm_linf() <= 1e-14);
    }
    assert!(pushforward_inverse_rescale(&unit, 0.0).is_err());
}

#[test]
fn energy_norm_is_the_sum_of_its_parts() {
    let grid = Grid::new(16).unwrap();
    let times: Vec<f64> = (0..=4).map(|k| k as f64 * 0.05).collect();
    let u: Vec<VectorField> = times.iter().map(|&t| taylor_green(&grid, (-2.0 * t).exp())).collect();
    let e = energy_norm(&lagrangian(times, u), 2.0).unwrap();
    assert_eq!(e.value, e.parts.total());
    assert!(e.parts.linf_u > 0.0 && e.parts.l1_dtu > 0.0 && e.parts.l1_grad_p == 0.0);
}

#[test]
fn picard_on_zero_data_stops_immediately() {
    let grid = Grid::new(16).unwrap();
    let out = picard_solve(&homogeneous(&grid, 1.0), &VectorField::zeros(&grid), 0.1, 10, &PicardConfig::default(), Route::General)
        .unwrap();
    assert!(out.converged);
    assert_eq!(out.iterations, 1);
    assert!(out.trajectory.u.iter().all(|u| u.is_exactly_zero()));
}

#[test]
fn picard_with_homogeneous_density_matches_the_eulerian_solver() {
    let grid = Grid::new(32).unwrap();
    let coeffs = homogeneous(&grid, 1.0);
    let u0 = taylor_green(&grid, 1e-3);
    let (t, steps) = (0.1, 50);
    let cfg = PicardConfig { tol: 1e-8, ..Default::default() };
    for route in [Route::General, Route::SmallDensity] {
        let out = picard_solve(&coeffs, &u0, t, steps, &cfg, route).unwrap();
        assert!(out.converged && out.iterations <= 3, "{route:?}: {:?}", out.contraction_log);
        let res = fixed_point_residuals(&coeffs, &out.trajectory, route).unwrap();
        assert!(res.divergence <= 1e-9 && res.volume <= 1e-6, "{res:?}");
        let state = pushforward_solution(&out.trajectory, &out.flow, &coeffs.rho0, 1.0, steps).unwrap();
        let run = eulerian_reference_solve(&coeffs, &u0, t, steps, &EulerianConfig::default()).unwrap();
        let gap = state.trajectory.u.last().unwrap().axpy(-1.0, run.trajectory.u.last().unwrap()).norm_l2();
        assert!(gap <= 1e-3 * u0.norm_l2(), "{route:?}: gap {gap:e}");
    }
}

#[test]
fn picard_refuses_large_data() {
    let grid = Grid::new(16).unwrap();
    let err = picard_solve(&homogeneous(&grid, 1.0), &taylor_green(&grid, 20.0), 0.5, 10, &PicardConfig::default(), Route::General);
    assert!(matches!(err, Err(Error::EpsilonExceeded { .. })));
    let dense = bump(&grid, 0.0);
    let cfg = PicardConfig { density_smallness: 1e-3, ..Default::default() };
    let err = picard_solve(&dense, &taylor_green(&grid, 0.01), 0.1, 10, &cfg, Route::SmallDensity);
    assert!(matches!(err, Err(Error::DensityNotSmall { .. })));
}
