use std::f64::consts::PI;

use korteweg_cli::config::{SolverKind, VelocitySpec};
use korteweg_cli::experiments::simulate::simulate;
use korteweg_cli::{run, Command, ExperimentConfig};
use korteweg_core::ops::AnyField;
use korteweg_core::snapshot::write_snapshot;
use korteweg_core::solver::TimeOrder;
use korteweg_core::{Grid, ScalarField};

fn taylor_green(amp: f64) -> VelocitySpec {
    VelocitySpec::TaylorGreen { amplitude: amp, k: 1 }
}

#[test]
fn taylor_green_energy_is_second_order_with_crank_nicolson() {
    // E(t) = π²a²e^{-4μ̄t} for ρ ≡ 1.
    let (amp, mu_bar, t): (f64, f64, f64) = (0.5, 0.5, 0.4);
    let exact = PI * PI * amp * amp * (-4.0 * mu_bar * t).exp();
    let err = |dt: f64| {
        let mut cfg = ExperimentConfig::minimal(16, dt, t, taylor_green(amp));
        cfg.mu_bar = mu_bar;
        cfg.solver = SolverKind::Eulerian;
        cfg.tolerances.eulerian.order = TimeOrder::Second;
        let run = simulate(&cfg).unwrap();
        (run.summary.final_energy - exact).abs()
    };
    let ratio = err(0.02) / err(0.01);
    assert!((ratio - 4.0).abs() <= 0.1, "ratio {ratio}");
}

#[test]
fn simulate_writes_its_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::minimal(16, 0.01, 0.05, taylor_green(0.1));
    cfg.kappa_bar = 1e-2;
    cfg.write_snapshot = true;
    let files = run(Command::Simulate, &cfg, dir.path()).unwrap();
    for name in ["diagnostics.csv", "picard.csv", "summary.json", "velocity_final.kfld"] {
        assert!(files.iter().any(|f| f.ends_with(name)), "{name} missing");
    }
    let csv = std::fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "t,linf_u,l1_dtu,l1_lap_u,l1_grad_p,E_total,div_residual,J_dev,energy");
    assert_eq!(csv.lines().count(), 1 + 6);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["converged"], serde_json::Value::Bool(true));
    assert!(summary["max_j_dev"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn lp_analyze_of_a_single_mode() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::new(64).unwrap();
    let f = ScalarField::from_fn(&grid, |x, y| (5.0 * x - 2.0 * y).cos());
    let path = dir.path().join("mode.kfld");
    write_snapshot(std::fs::File::create(&path).unwrap(), &AnyField::Scalar(f), 0.0).unwrap();
    let mut cfg = ExperimentConfig::minimal(64, 0.01, 0.01, VelocitySpec::Zero);
    cfg.lp.snapshot = Some(path);
    let out = dir.path().join("lp");
    run(Command::LpAnalyze, &cfg, &out).unwrap();
    let blocks: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("blocks.json")).unwrap()).unwrap();
    let nonzero = blocks["nonzero_rows"].as_u64().unwrap();
    assert!((1..=3).contains(&nonzero));
    assert_eq!(blocks["rows"].as_array().unwrap().len(), 9);
    assert!(std::fs::read_to_string(out.join("blocks.csv")).unwrap().starts_with("j,block_L2,block_Lp,weighted_2js"));
}

#[test]
fn binary_reports_config_errors_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"grid": 12, "dt": 0.01, "T": 0.1, "u0": {"kind": "zero"}}"#).unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_korteweg"))
        .args(["simulate", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("grid"));
}

#[test]
fn binary_runs_a_small_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"grid": 16, "dt": 0.01, "T": 0.02, "u0": {"kind": "taylor_green", "amplitude": 0.1}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_korteweg"))
        .args(["simulate", "--format", "csv", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(out.join("diagnostics.csv").exists());
    assert!(!out.join("summary.json").exists());
}
