use korteweg_cli::config::{DensitySpec, Format, SolverKind, VelocitySpec};
use korteweg_cli::{CliError, ExperimentConfig};
use korteweg_core::{ops, Field};

const FULL: &str = r#"{
    "grid": 32,
    "dt": 0.002,
    "T": 0.1,
    "mu_bar": 0.5,
    "kappa_bar": 0.01,
    "mu_fn": [0.5],
    "k_fn": [0.7, -0.3],
    "rho0": {"kind": "bump", "amplitude": 0.2, "sigma": [0.6, 0.8]},
    "u0": {"kind": "taylor_green", "amplitude": 0.1},
    "route": "general",
    "solver": "eulerian",
    "tolerances": {"picard": {"tol": 1e-9}, "eulerian": {"order": "second"}},
    "seed": 4,
    "sweep": [0.1, 0.03, 0.01],
    "formats": ["json"],
    "lifespan": {"epsilon": 0.02}
}"#;

fn field_of(text: &str) -> String {
    match ExperimentConfig::from_json(text) {
        Err(CliError::Config { field, .. }) => field,
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn full_manifest_parses() {
    let cfg = ExperimentConfig::from_json(FULL).unwrap();
    assert_eq!(cfg.steps(), 50);
    assert_eq!(cfg.solver, SolverKind::Eulerian);
    assert_eq!(cfg.formats, vec![Format::Json]);
    assert_eq!(cfg.lifespan.epsilon, 0.02);
    assert_eq!(cfg.tolerances.picard.tol, 1e-9);
    assert!(matches!(cfg.rho0, DensitySpec::Bump { center, .. } if center == [std::f64::consts::PI; 2]));
    cfg.validate_sweep(3).unwrap();
    let grid = cfg.make_grid().unwrap();
    let c = cfg.coefficients(&grid, cfg.kappa_bar).unwrap();
    assert_eq!(c.mu_bar, 0.5);
    assert!((c.rho0.max() - 1.2).abs() <= 1e-2);
}

#[test]
fn invalid_fields_are_named() {
    let with = |from: &str, to: &str| FULL.replace(from, to);
    assert_eq!(field_of(&with("\"grid\": 32", "\"grid\": 48")), "grid");
    assert_eq!(field_of(&with("\"dt\": 0.002", "\"dt\": 0.003")), "dt");
    assert_eq!(field_of(&with("\"T\": 0.1", "\"T\": -1")), "T");
    assert_eq!(field_of(&with("\"kappa_bar\": 0.01", "\"kappa_bar\": -0.01")), "kappa_bar");
    assert_eq!(field_of(&with("\"mu_bar\": 0.5", "\"mu_bar\": 0")), "mu_bar");
    assert_eq!(field_of(&with("[0.6, 0.8]", "[0.0, 0.8]")), "rho0.sigma");
    assert_eq!(field_of(&with("\"formats\": [\"json\"]", "\"formats\": []")), "formats");
    assert_eq!(field_of(&with("\"seed\": 4", "\"seed\": 4, \"colour\": 1")), "<manifest>");
    assert_eq!(field_of(&with("{\"tol\": 1e-9}", "{\"tol\": 0}")), "tolerances.picard.tol");
}

#[test]
fn sweeps_must_decrease_over_a_decade() {
    let mut cfg = ExperimentConfig::from_json(FULL).unwrap();
    assert!(cfg.validate_sweep(4).is_err());
    cfg.sweep = vec![0.1, 0.2, 0.01];
    assert!(cfg.validate_sweep(3).is_err());
    cfg.sweep = vec![0.1, 0.05, 0.02];
    assert!(cfg.validate_sweep(3).is_err());
    cfg.sweep = vec![0.1, 0.05, -0.02];
    assert!(cfg.validate_sweep(3).is_err());
    cfg.sweep = vec![1.0, 0.3, 0.1];
    assert!(cfg.validate_sweep(3).is_ok());
}

#[test]
fn random_initial_data_are_seeded_and_admissible() {
    let mut cfg = ExperimentConfig::minimal(32, 0.01, 0.1, VelocitySpec::Random { amplitude: 0.3, cutoff: 4 });
    cfg.rho0 = DensitySpec::Random { amplitude: 0.1, cutoff: 3 };
    cfg.seed = 9;
    let grid = cfg.make_grid().unwrap();
    let u = cfg.velocity(&grid).unwrap();
    let rho = cfg.density(&grid).unwrap();
    assert!(ops::divergence(&u).norm_l2() <= 1e-12);
    assert!((u.norm_linf() - 0.3).abs() <= 1e-12);
    let dev = rho.to_physical().map_physical(|r| (r - 1.0).abs()).max();
    assert!((dev - 0.1).abs() <= 1e-12);
    let again = cfg.velocity(&grid).unwrap();
    assert_eq!(u, again);
    cfg.seed = 10;
    assert_ne!(u, cfg.velocity(&grid).unwrap());
}

#[test]
fn deterministic_velocity_families() {
    let cfg = ExperimentConfig::minimal(16, 0.01, 0.1, VelocitySpec::Diagonal { amplitude: 0.5, modes: vec![1, 3] });
    let grid = cfg.make_grid().unwrap();
    let u = cfg.velocity(&grid).unwrap();
    assert!(ops::divergence(&u).norm_linf() <= 1e-12);
    let zero = ExperimentConfig::minimal(16, 0.01, 0.1, VelocitySpec::Zero);
    assert!(zero.velocity(&grid).unwrap().is_exactly_zero());
}

#[test]
fn shipped_manifests_are_valid() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../manifests");
    let mut count = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = ExperimentConfig::from_json(&std::fs::read_to_string(&path).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if !cfg.sweep.is_empty() {
            cfg.validate_sweep(3).unwrap();
        }
        count += 1;
    }
    assert_eq!(count, 4);
}
