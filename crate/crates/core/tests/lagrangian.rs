use korteweg_core::coefficients::CoefficientFn;
use korteweg_core::lagrangian::{
    build_flow, compose_with_flow, divergence_constraint_term, forward_points, grid_points,
    inverse_points, jacobian_data, lagrangian_capillary_term, smallness_check,
    transformed_divergence, Direction, FlowMap, JacobianData,
};
use korteweg_core::{ops, Error, Field, Grid, ScalarField, VectorField};

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.physical().iter().zip(b.physical().iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn vmax_diff<F: Field>(a: &F, b: &F) -> f64 {
    a.components().iter().zip(b.components()).map(|(x, y)| max_diff(x, y)).fold(0.0, f64::max)
}

fn mesh(steps: usize, t: f64) -> Vec<f64> {
    (0..=steps).map(|k| t * k as f64 / steps as f64).collect()
}

fn shear(grid: &Grid, eps: f64) -> VectorField {
    VectorField::from_fn(grid, |_, y| [eps * y.sin(), 0.0])
}

#[test]
fn flow_of_simple_velocities() {
    let grid = Grid::new(16).unwrap();
    let times = mesh(10, 0.5);
    let zero = vec![VectorField::zeros(&grid); times.len()];
    let flow = build_flow(&times, &zero).unwrap();
    assert!(flow.displacement(10).is_exactly_zero());

    let c = [0.3, -0.2];
    let constant = vec![VectorField::constant(&grid, c); times.len()];
    let flow = build_flow(&times, &constant).unwrap();
    for (k, t) in times.iter().enumerate() {
        let d = flow.displacement(k);
        assert!((d.component(0).max() - c[0] * t).abs() <= 1e-15);
        assert!((d.component(1).min() - c[1] * t).abs() <= 1e-15);
    }

    // Linear in time: the trapezoid rule is exact, d = t²/2·g.
    let g = VectorField::from_fn(&grid, |x, y| [x.sin(), (2.0 * y).cos()]);
    let linear: Vec<VectorField> = times.iter().map(|&t| g.scale(t)).collect();
    let flow = build_flow(&times, &linear).unwrap();
    let expected = g.scale(0.5 * 0.25);
    assert!(vmax_diff(flow.displacement(10), &expected) <= 1e-14);
    assert!(matches!(flow.index_of(0.26), Err(Error::TimeNotOnMesh(_))));
    assert_eq!(flow.index_of(0.25).unwrap(), 5);
}

#[test]
fn jacobian_of_a_shear_and_a_stretch() {
    let grid = Grid::new(32).unwrap();
    let eps = 0.2;
    let jac = JacobianData::from_displacement(&shear(&grid, eps), 0.0).unwrap();
    assert!(jac.volume_defect() <= 1e-14);
    let cos = ScalarField::from_fn(&grid, |_, y| eps * y.cos());
    assert!(max_diff(jac.dx.entry(0, 1), &cos) <= 1e-13);
    assert!(max_diff(jac.a.entry(0, 1), &cos.scale(-1.0)) <= 1e-13);
    assert!(jac.a.entry(1, 0).norm_linf() <= 1e-14);

    let stretch = VectorField::from_fn(&grid, |x, _| [eps * x.sin(), 0.0]);
    let jac = JacobianData::from_displacement(&stretch, 0.0).unwrap();
    let j = ScalarField::from_fn(&grid, |x, _| 1.0 + eps * x.cos());
    assert!(max_diff(&jac.j, &j) <= 1e-13);
    let inv = ScalarField::from_fn(&grid, |x, _| 1.0 / (1.0 + eps * x.cos()));
    assert!(max_diff(jac.a.entry(0, 0), &inv) <= 1e-13);
    assert!(max_diff(jac.adj.entry(1, 1), &j) <= 1e-13);
    assert!(!jac.is_identity());
    assert!(JacobianData::identity(&grid).is_identity());
}

#[test]
fn degenerate_flow_is_reported() {
    let grid = Grid::new(32).unwrap();
    let fold = VectorField::from_fn(&grid, |x, _| [-x.sin(), 0.0]);
    assert!(matches!(
        JacobianData::from_displacement(&fold, 0.7),
        Err(Error::FlowDegenerate { time, .. }) if time == 0.7
    ));
}

#[test]
fn smallness_integral_of_a_steady_shear() {
    let grid = Grid::new(32).unwrap();
    let times = mesh(20, 1.0);
    let v = vec![shear(&grid, 1.0); times.len()];
    let norm = korteweg_core::besov::besov_norm(
        &ops::jacobian(&v[0]),
        korteweg_core::besov::BesovParams::sum(1.0, 2.0),
    )
    .unwrap();
    let ok = smallness_check(&times, &v, 2.0 * norm, 2.0).unwrap();
    assert!(ok.ok());
    assert!((ok.integral - norm).abs() <= 1e-12 * norm);
    let bad = smallness_check(&times, &v, 0.48 * norm, 2.0).unwrap();
    // The running integral is t·norm, so it first exceeds 0.48·norm at t = 1/2.
    assert!((bad.exceeded_at.unwrap() - 0.5).abs() <= 1e-12);
}

#[test]
fn composition_with_translations_and_shears() {
    let grid = Grid::new(32).unwrap();
    let times = mesh(1, 1.0);
    let f = ScalarField::from_fn(&grid, |x, y| x.sin() * y.cos());

    let id = FlowMap::identity(&grid, &times).unwrap();
    let same = compose_with_flow(&f, &id, 1.0, Direction::Forward).unwrap();
    assert!(max_diff(&same, &f) <= 1e-12);

    let shift = VectorField::constant(&grid, [0.3, 0.0]);
    let flow = FlowMap::from_displacements(&times, vec![VectorField::zeros(&grid), shift]).unwrap();
    let fwd = compose_with_flow(&f, &flow, 1.0, Direction::Forward).unwrap();
    let inv = compose_with_flow(&f, &flow, 1.0, Direction::Inverse).unwrap();
    assert!(max_diff(&fwd, &ScalarField::from_fn(&grid, |x, y| (x + 0.3).sin() * y.cos())) <= 1e-12);
    assert!(max_diff(&inv, &ScalarField::from_fn(&grid, |x, y| (x - 0.3).sin() * y.cos())) <= 1e-12);

    let grid = Grid::new(64).unwrap();
    let f = ScalarField::from_fn(&grid, |x, y| x.sin() * y.cos());
    let flow = FlowMap::from_displacements(&times, vec![VectorField::zeros(&grid), shear(&grid, 0.1)]).unwrap();
    let there = compose_with_flow(&f, &flow, 1.0, Direction::Forward).unwrap();
    let back = compose_with_flow(&there, &flow, 1.0, Direction::Inverse).unwrap();
    assert!(max_diff(&back, &f) <= 1e-8);
}

#[test]
fn inverse_points_invert_forward_points() {
    let grid = Grid::new(32).unwrap();
    let d = VectorField::from_fn(&grid, |x, y| [0.15 * y.sin(), 0.1 * (x + y).cos()]);
    let y = inverse_points(&d, 0.0).unwrap();
    let x = grid_points(&grid);
    let it0 = korteweg_core::interp::FourierInterpolant::new(d.component(0));
    let it1 = korteweg_core::interp::FourierInterpolant::new(d.component(1));
    for (yi, xi) in y.iter().zip(&x) {
        let back = [yi[0] + it0.eval(yi[0], yi[1]), yi[1] + it1.eval(yi[0], yi[1])];
        assert!((back[0] - xi[0]).abs() <= 1e-9 && (back[1] - xi[1]).abs() <= 1e-9);
    }
    let fwd = forward_points(&d);
    assert!((fwd[1][0] - (x[1][0] + d.component(0).physical()[1])).abs() <= 1e-15);
}

#[test]
fn chain_rule_through_the_flow() {
    // (∇f)∘X = ᵗA·∇(f∘X).
    let grid = Grid::new(64).unwrap();
    let times = mesh(1, 1.0);
    let flow = FlowMap::from_displacements(&times, vec![VectorField::zeros(&grid), shear(&grid, 0.1)]).unwrap();
    let jac = jacobian_data(&flow, 1.0).unwrap();
    let f = ScalarField::from_fn(&grid, |x, y| x.sin() * (2.0 * y).cos());
    let lhs = compose_with_flow(&ops::gradient(&f), &flow, 1.0, Direction::Forward).unwrap();
    let g = ops::gradient(&compose_with_flow(&f, &flow, 1.0, Direction::Forward).unwrap()).to_physical();
    let at = jac.a.transpose();
    let rhs = VectorField::new(vec![
        &at.entry(0, 0).mul_pointwise(g.component(0)) + &at.entry(0, 1).mul_pointwise(g.component(1)),
        &at.entry(1, 0).mul_pointwise(g.component(0)) + &at.entry(1, 1).mul_pointwise(g.component(1)),
    ])
    .unwrap();
    assert!(vmax_diff(&lhs, &rhs) <= 1e-9);
}

#[test]
fn capillary_term_special_cases() {
    let grid = Grid::new(64).unwrap();
    let id = JacobianData::identity(&grid);
    let one = CoefficientFn::one();
    let flat = ScalarField::constant(&grid, 1.3);
    assert!(lagrangian_capillary_term(&flat, &id, &one, 0.5, 0.1).unwrap().is_exactly_zero());
    let a = 0.1;
    let rho = ScalarField::from_fn(&grid, |x, _| 1.0 + a * x.cos());
    assert!(lagrangian_capillary_term(&rho, &id, &one, 0.0, 0.1).unwrap().is_exactly_zero());
    assert!(matches!(lagrangian_capillary_term(&rho, &id, &one, 0.5, 0.95), Err(Error::DensityBelowFloor { .. })));

    // A = I: −κ/ρ ∂_x(a² sin² x) = −κ a² sin 2x / (1 + a cos x).
    let kappa = 0.5;
    let term = lagrangian_capillary_term(&rho, &id, &one, kappa, 0.1).unwrap();
    let exact = ScalarField::from_fn(&grid, |x, _| -kappa * a * a * (2.0 * x).sin() / (1.0 + a * x.cos()));
    assert!(max_diff(term.component(0), &exact) <= 1e-12);
    assert!(term.component(1).norm_linf() <= 1e-14);
}

#[test]
fn constraint_term_special_cases() {
    let grid = Grid::new(32).unwrap();
    let w = VectorField::from_fn(&grid, |x, y| [y.sin(), x.cos()]);
    let id = JacobianData::identity(&grid);
    let c = divergence_constraint_term(&w, &id).unwrap();
    assert!(c.m.is_exactly_zero() && c.div_m.is_exactly_zero() && c.div_m_contraction.is_exactly_zero());
    let jac = JacobianData::from_displacement(&shear(&grid, 0.1), 0.0).unwrap();
    let c = divergence_constraint_term(&VectorField::zeros(&grid), &jac).unwrap();
    assert!(c.m.norm_linf() == 0.0 && c.div_m.norm_linf() == 0.0);

    let u = VectorField::from_fn(&grid, |x, y| [(x + y).sin(), -(x + y).sin()]);
    assert!(transformed_divergence(&u, &id) <= 1e-12);
}
