use std::f64::consts::PI;

use korteweg_core::ops::{self, AnyField, Derivative};
use korteweg_core::snapshot::{read_snapshot, write_snapshot, FieldKind};
use korteweg_core::{Error, Field, Grid, Representation, ScalarField, VectorField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(grid: &Grid, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::from_physical(grid, v).unwrap()
}

fn random_vector(grid: &Grid, seed: u64) -> VectorField {
    VectorField::new(vec![random_field(grid, seed), random_field(grid, seed + 1)]).unwrap()
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.physical().iter().zip(b.physical().iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn vmax_diff<F: Field>(a: &F, b: &F) -> f64 {
    a.components().iter().zip(b.components()).map(|(x, y)| max_diff(x, y)).fold(0.0, f64::max)
}

#[test]
fn grid_rejects_bad_sizes() {
    assert!(matches!(Grid::new(12), Err(Error::InvalidGrid(_))));
    assert!(matches!(Grid::new(4), Err(Error::InvalidGrid(_))));
    assert!(matches!(Grid::with_dim(16, 3), Err(Error::UnsupportedDimension(3))));
    let g = Grid::new(16).unwrap();
    assert_eq!(g.len(), 256);
    assert_eq!(g.wavenumber(8), -8);
    assert_eq!(g.deriv_wavenumber(8), 0.0);
    assert_eq!(g.dealias_cutoff(), 5);
}

#[test]
fn fft_round_trip_and_parseval() {
    let grid = Grid::new(64).unwrap();
    let f = random_field(&grid, 3);
    let back = f.to_spectral().to_physical();
    assert_eq!(back.representation(), Representation::Physical);
    assert!(max_diff(&f, &back) <= 1e-13);
    let (a, b) = (f.norm_l2(), f.to_spectral().norm_l2());
    assert!((a - b).abs() <= 1e-12 * a);
    assert!((f.mean() - f.to_spectral().mean()).abs() <= 1e-14);
}

#[test]
fn pure_mode_has_two_coefficients() {
    let n = 32;
    let grid = Grid::new(n).unwrap();
    let f = ScalarField::from_fn(&grid, |x, y| (3.0 * x + 2.0 * y).cos());
    let c = f.to_spectral().into_spectral_vec();
    let plus = 3 * n + 2;
    let minus = (n - 3) * n + (n - 2);
    let expected = n as f64 / 2.0;
    for (i, z) in c.iter().enumerate() {
        if i == plus || i == minus {
            assert!((z - Complex64::new(expected, 0.0)).norm() <= 1e-12);
        } else {
            assert!(z.norm() <= 1e-12);
        }
    }
    let mean = ScalarField::constant(&grid, 2.5).to_spectral();
    assert!((mean.spectral()[0].re - 2.5 * n as f64).abs() <= 1e-12);
}

#[test]
fn derivatives_of_trigonometric_fields() {
    let grid = Grid::new(32).unwrap();
    let f = ScalarField::from_fn(&grid, |x, y| (2.0 * x).sin() * (3.0 * y).cos());
    let dx = ScalarField::from_fn(&grid, |x, y| 2.0 * (2.0 * x).cos() * (3.0 * y).cos());
    let dy = ScalarField::from_fn(&grid, |x, y| -3.0 * (2.0 * x).sin() * (3.0 * y).sin());
    assert!(max_diff(&ops::partial(&f, 0), &dx) <= 1e-12);
    assert!(max_diff(&ops::partial(&f, 1), &dy) <= 1e-12);
    assert!(max_diff(&ops::laplacian(&f), &f.scale(-13.0)) <= 1e-11);
    let back = ops::laplacian(&ops::inverse_laplacian(&f));
    assert!(max_diff(&back, &f) <= 1e-12);
}

#[test]
fn nyquist_mode_has_zero_first_derivative() {
    let grid = Grid::new(16).unwrap();
    let f = ScalarField::from_fn(&grid, |x, _| (8.0 * x).cos());
    assert!(ops::partial(&f, 0).norm_linf() <= 1e-12);
    assert!(ops::partial(&random_field(&grid, 9), 0).hermitian_defect() <= 1e-12);
}

#[test]
fn divergence_free_mode_and_gradient_split() {
    let grid = Grid::new(32).unwrap();
    let u = VectorField::from_fn(&grid, |x, y| [(x + y).sin(), -(x + y).sin()]);
    assert!(ops::divergence(&u).norm_linf() <= 1e-12);
    let (p, q) = ops::leray_project(&u);
    assert!(vmax_diff(&p, &u) <= 1e-12);
    assert!(q.norm_linf() <= 1e-12);

    let phi = ScalarField::from_fn(&grid, |x, y| (2.0 * x).cos() * y.sin());
    let g = ops::gradient(&phi);
    let (p, q) = ops::leray_project(&g);
    assert!(p.norm_linf() <= 1e-12);
    assert!(vmax_diff(&q, &g) <= 1e-12);
}

#[test]
fn leray_projection_is_idempotent_and_solenoidal() {
    let grid = Grid::new(32).unwrap();
    let v = random_vector(&grid, 4);
    let (p, q) = ops::leray_project(&v);
    assert!(ops::divergence(&p).norm_l2() <= 1e-12);
    let (pp, _) = ops::leray_project(&p);
    assert!(vmax_diff(&pp, &p) <= 1e-13);
    assert!(vmax_diff(&p.axpy(1.0, &q), &v) <= 1e-13);
}

#[test]
fn heat_propagator_is_exact_and_a_semigroup() {
    let grid = Grid::new(32).unwrap();
    let f = ScalarField::from_fn(&grid, |x, y| x.sin() * (2.0 * y).sin());
    let g = ops::heat_propagate(&f, 0.3, 0.5).unwrap();
    let exact = f.scale((-0.5_f64 * 0.3 * 5.0).exp());
    assert!(max_diff(&g, &exact) <= 1e-13);

    let r = random_field(&grid, 5);
    let once = ops::heat_propagate(&r, 0.5, 1.0).unwrap();
    let twice = ops::heat_propagate(&ops::heat_propagate(&r, 0.2, 1.0).unwrap(), 0.3, 1.0).unwrap();
    assert!(max_diff(&once, &twice) <= 1e-13);
    assert!(matches!(ops::heat_propagate(&r, -0.1, 1.0), Err(Error::NegativeTime(_))));
    assert!(ops::heat_propagate(&r, 0.1, 0.0).is_err());
}

#[test]
fn dealiasing_keeps_low_modes_and_is_idempotent() {
    let n = 48usize.next_power_of_two();
    let grid = Grid::new(n).unwrap();
    let cut = grid.dealias_cutoff() as f64;
    let low = ScalarField::from_fn(&grid, |x, y| (cut * x).cos() + (cut * y).sin());
    assert!(max_diff(&low.dealias(), &low) <= 1e-12);
    let high = ScalarField::from_fn(&grid, |x, _| ((cut + 1.0) * x).cos());
    assert!(high.dealias().norm_linf() <= 1e-13);
    let r = random_field(&grid, 6);
    let once = r.dealias();
    assert_eq!(once.dealias().spectral(), once.spectral());
    let a = ScalarField::from_fn(&grid, |x, y| x.sin() * (2.0 * y).cos());
    let b = ScalarField::from_fn(&grid, |x, _| (3.0 * x).cos());
    let exact = ScalarField::from_fn(&grid, |x, y| x.sin() * (2.0 * y).cos() * (3.0 * x).cos());
    assert!(max_diff(&a.mul_dealiased(&b), &exact) <= 1e-12);
}

#[test]
fn half_trace_of_symmetric_gradient_is_divergence() {
    let grid = Grid::new(32).unwrap();
    let u = random_vector(&grid, 7).dealias();
    let d = ops::sym_double_gradient(&u);
    let half_trace = (d.entry(0, 0) + d.entry(1, 1)).scale(0.5);
    assert!(max_diff(&half_trace, &ops::divergence(&u)) <= 1e-12);
    let dz = ops::jacobian(&u);
    assert!(max_diff(dz.entry(0, 1), &ops::partial(u.component(0), 1)) <= 1e-14);
    // Column divergence of D(u) is Δu + ∇div u.
    let lhs = ops::tensor_divergence(&d);
    let rhs = ops::laplacian(&u).axpy(1.0, &ops::gradient(&ops::divergence(&u)));
    assert!(vmax_diff(&lhs, &rhs) <= 1e-10);
}

#[test]
fn differentiate_dispatches_and_rejects_bad_ranks() {
    let grid = Grid::new(16).unwrap();
    let f = AnyField::Scalar(ScalarField::from_fn(&grid, |x, _| x.sin()));
    assert!(matches!(ops::differentiate(&f, Derivative::Gradient).unwrap(), AnyField::Vector(_)));
    assert!(ops::differentiate(&f, Derivative::Divergence).is_err());
    let v = AnyField::Vector(VectorField::zeros(&grid));
    assert!(matches!(ops::differentiate(&v, Derivative::Jacobian).unwrap(), AnyField::Tensor(_)));
}

#[test]
fn snapshot_round_trip_and_bad_magic() {
    let grid = Grid::new(16).unwrap();
    let v = random_vector(&grid, 8);
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &AnyField::Vector(v.clone()), 0.25).unwrap();
    let (header, back) = read_snapshot(buf.as_slice()).unwrap();
    assert_eq!(header.kind, FieldKind::Vector);
    assert_eq!(header.n_points, 16);
    assert_eq!(header.time, 0.25);
    match back {
        AnyField::Vector(w) => assert!(vmax_diff(&w, &v) == 0.0),
        other => panic!("wrong rank {other:?}"),
    }
    buf[0] = b'X';
    assert!(matches!(read_snapshot(buf.as_slice()), Err(Error::Snapshot(_))));
    let _ = PI;
}
