use std::f64::consts::PI;

use korteweg_core::besov::phi;
use korteweg_core::coefficients::{CoefficientFn, Coefficients};
use korteweg_core::solver::{
    exit_time, free_capillary_forcing, free_solution, free_solution_stepped, rescaled_mesh, ExitSamples,
    FreeMode, FreeSolution,
};
use korteweg_core::{ops, Error, Field, Grid, ScalarField, VectorField};

fn taylor_green(grid: &Grid, amp: f64) -> VectorField {
    VectorField::from_fn(grid, |x, y| [amp * x.sin() * y.cos(), -amp * x.cos() * y.sin()])
}

fn capillary(grid: &Grid, kappa_bar: f64) -> Coefficients {
    let rho = ScalarField::from_fn(grid, |x, y| 1.0 + 0.1 * x.cos() * (2.0 * y).cos() + 0.1 * (3.0 * x).sin());
    Coefficients::new(1.0, kappa_bar, CoefficientFn::new(vec![0.5]), CoefficientFn::one(), rho, 0.1).unwrap()
}

#[test]
fn heat_mode_decays_exactly() {
    let grid = Grid::new(16).unwrap();
    let u0 = taylor_green(&grid, 1.0);
    let free = FreeSolution::new(&Coefficients::homogeneous(&grid), &u0).unwrap();
    for t in [0.0, 0.3, 2.0] {
        let u = free.velocity(t).unwrap();
        assert!(u.axpy(-(-2.0 * t).exp(), &u0).norm_linf() <= 1e-13);
    }
    assert!(free.pressure_gradient().is_exactly_zero());
    assert!(matches!(free.velocity(-1.0), Err(Error::NegativeTime(_))));
}

#[test]
fn forced_free_solution_relaxes_to_the_steady_state() {
    let grid = Grid::new(32).unwrap();
    let coeffs = capillary(&grid, 0.3);
    let free = FreeSolution::new(&coeffs, &VectorField::zeros(&grid)).unwrap();
    let (ph, qh) = ops::leray_project(&free_capillary_forcing(&coeffs).unwrap());
    let steady = ph.map_components(ops::inverse_laplacian).scale(-1.0);
    assert!(free.velocity(100.0).unwrap().axpy(-1.0, &steady).norm_linf() <= 1e-12);
    assert!(free.pressure_gradient().axpy(-1.0, &qh).norm_linf() <= 1e-14);
    assert!(ph.norm_l2() > 1e-6);
}

#[test]
fn time_derivative_matches_finite_differences() {
    let grid = Grid::new(32).unwrap();
    let coeffs = capillary(&grid, 0.3);
    let free = FreeSolution::new(&coeffs, &taylor_green(&grid, 0.5)).unwrap();
    let (t, h) = (0.2, 1e-4);
    let fd = free.velocity(t + h).unwrap().axpy(-1.0, &free.velocity(t - h).unwrap()).scale(0.5 / h);
    let exact = free.time_derivative(t).unwrap();
    assert!(fd.axpy(-1.0, &exact).norm_l2() <= 1e-6 * exact.norm_l2());
}

#[test]
fn non_solenoidal_data_are_rejected() {
    let grid = Grid::new(16).unwrap();
    let u = VectorField::from_fn(&grid, |x, _| [x.sin(), 0.0]);
    assert!(matches!(FreeSolution::new(&Coefficients::homogeneous(&grid), &u), Err(Error::NonSolenoidal(_))));
}

#[test]
fn stepped_free_solution_is_backward_euler() {
    let grid = Grid::new(16).unwrap();
    let u0 = taylor_green(&grid, 1.0);
    let times = rescaled_mesh(1.0, 0.2, 10).unwrap();
    let dt = times[1];
    for mode in [FreeMode::Constant, FreeMode::Variable] {
        let traj = free_solution_stepped(&Coefficients::homogeneous(&grid), &u0, &times, mode, 1e-13).unwrap();
        let factor = (1.0 + 2.0 * dt).powi(-10);
        assert!(traj.u[10].axpy(-factor, &u0).norm_linf() <= 1e-12, "{mode:?}");
    }
    let exact = free_solution(&Coefficients::homogeneous(&grid), &u0, &times, FreeMode::Constant).unwrap();
    assert!(exact.u[10].axpy(-(-0.4f64).exp(), &u0).norm_linf() <= 1e-13);
}

#[test]
fn rescaled_mesh_scales_the_horizon() {
    let mesh = rescaled_mesh(2.0, 0.5, 4).unwrap();
    assert_eq!(mesh.len(), 5);
    assert!((mesh[4] - 1.0).abs() <= 1e-15);
    assert!(rescaled_mesh(1.0, 0.5, 0).is_err());
    assert!(rescaled_mesh(1.0, -0.5, 4).is_err());
}

#[test]
fn exit_aggregate_of_a_single_mode_has_a_closed_form() {
    // u₀ = (0, sin x): ∂_t u and ∇²u both have norm e^{-t}B₀ at s = 0, and
    // ‖u‖ at s = 1 is e^{-t}B₁, so A(t) = 2B₀(1 − e^{-t}) + B₁√((1 − e^{-2t})/2).
    let grid = Grid::new(16).unwrap();
    let u0 = VectorField::from_fn(&grid, |x, _| [0.0, x.sin()]);
    let free = FreeSolution::new(&Coefficients::homogeneous(&grid), &u0).unwrap();
    let l2 = PI * 2f64.sqrt();
    let (mut s0, mut s1) = (0.0, 0.0);
    for j in -2..=4 {
        let w = phi((-j as f64).exp2());
        s0 += w;
        s1 += (j as f64).exp2() * w;
    }
    let (b0, b1) = (l2 * s0, l2 * s1);
    let closed = |t: f64| 2.0 * b0 * (1.0 - (-t).exp()) + b1 * ((1.0 - (-2.0 * t).exp()) / 2.0).sqrt();
    let times: Vec<f64> = (0..=2000).map(|k| k as f64 * 1e-3).collect();
    let samples = ExitSamples::from_free(&free, &times, 2.0).unwrap();
    let run = samples.running();
    for k in [100, 1000, 2000] {
        let exact = closed(times[k]);
        assert!((run[k] - exact).abs() <= 1e-5 * exact, "t = {}: {} vs {exact}", times[k], run[k]);
    }
    // Exit times grow with ε and saturate at the horizon.
    let e1 = exit_time(&samples, 0.5);
    let e2 = exit_time(&samples, 1.0);
    assert!(0.0 < e1 && e1 < e2 && e2 < 2.0);
    assert!((closed(e1) - 0.25).abs() <= 0.02 && closed(e1 - 1e-3) <= 0.25 + 1e-4);
    assert_eq!(exit_time(&samples, 1e6), 2.0);
}

#[test]
fn zero_trajectory_never_exits() {
    let grid = Grid::new(16).unwrap();
    let free = FreeSolution::new(&Coefficients::homogeneous(&grid), &VectorField::zeros(&grid)).unwrap();
    let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
    let samples = ExitSamples::from_free(&free, &times, 2.0).unwrap();
    assert!(samples.running().iter().all(|&v| v == 0.0));
    assert_eq!(exit_time(&samples, 1e-12), 1.0);
    assert!(ExitSamples::new(vec![0.0, 1.0], vec![0.0], vec![0.0, 0.0]).is_err());
}
