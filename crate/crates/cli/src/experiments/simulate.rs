//! One run with per-step diagnostics.

use serde::Serialize;

use korteweg_core::lagrangian::{transformed_divergence, JacobianData};
use korteweg_core::ops::{self, AnyField};
use korteweg_core::snapshot::write_snapshot;
use korteweg_core::solver::{
    eulerian_reference_solve, picard_solve, pushforward_inverse_rescale, pushforward_solution, running_energy_parts,
    ContractionEntry, EnergyParts, Route,
};
use korteweg_core::{Field, VectorField};

use crate::config::{ExperimentConfig, SolverKind};
use crate::error::{CliError, Context};
use crate::output::{num, opt_num, Sink};

use super::kinetic_energy;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticRow {
    /// Original-frame time.
    pub t: f64,
    /// Running `E_t` parts, original frame.
    pub parts: EnergyParts,
    /// Lagrangian: `‖div u − div M(u)‖₂`; Eulerian: `‖div u‖₂`.
    pub div_residual: f64,
    /// `‖J − 1‖_∞` (Lagrangian only).
    pub j_dev: Option<f64>,
    /// `½∫ρ|u|²`.
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulateSummary {
    pub solver: SolverKind,
    pub route: Route,
    pub grid: usize,
    pub steps: usize,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    pub mu_bar: f64,
    pub kappa_bar: f64,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub halvings: Option<u32>,
    /// `‖(u, ∇P)‖_{E_T}`, original frame.
    pub e_norm: f64,
    pub final_energy: f64,
    pub max_div_residual: f64,
    pub max_j_dev: Option<f64>,
    /// `max_t |∫ρ(t) − ∫ρ₀|` (Eulerian only).
    pub mass_drift: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct SimulateRun {
    pub summary: SimulateSummary,
    pub diagnostics: Vec<DiagnosticRow>,
    pub contraction: Vec<ContractionEntry>,
    /// Eulerian velocity at `T`, original frame.
    pub final_velocity: VectorField,
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<SimulateRun, CliError> {
    let grid = cfg.make_grid()?;
    let coeffs = cfg.coefficients(&grid, cfg.kappa_bar)?;
    let u0 = cfg.velocity(&grid)?;
    let steps = cfg.steps();
    let p = cfg.tolerances.picard.p;
    let ctx = || format!("simulate (kappa_bar = {:e})", cfg.kappa_bar);
    let mut summary = SimulateSummary {
        solver: cfg.solver,
        route: cfg.route,
        grid: cfg.grid,
        steps,
        dt: cfg.dt,
        t_final: cfg.t_final,
        mu_bar: cfg.mu_bar,
        kappa_bar: cfg.kappa_bar,
        iterations: None,
        converged: None,
        halvings: None,
        e_norm: 0.0,
        final_energy: 0.0,
        max_div_residual: 0.0,
        max_j_dev: None,
        mass_drift: None,
    };
    let mut rows = Vec::new();
    let (contraction, final_velocity) = match cfg.solver {
        SolverKind::Lagrangian => {
            let out = picard_solve(&coeffs, &u0, cfg.t_final, steps, &cfg.tolerances.picard, cfg.route).context(ctx)?;
            let orig = pushforward_inverse_rescale(&out.trajectory, cfg.mu_bar).context(ctx)?;
            let parts = running_energy_parts(&orig, p).context(ctx)?;
            for k in 0..orig.len() {
                let jac = JacobianData::from_displacement(out.flow.displacement(k), out.flow.times()[k]).context(ctx)?;
                rows.push(DiagnosticRow {
                    t: orig.times[k],
                    parts: parts[k],
                    div_residual: transformed_divergence(&orig.u[k], &jac),
                    j_dev: Some(jac.volume_defect()),
                    energy: kinetic_energy(&coeffs.rho0, &orig.u[k]),
                });
            }
            summary.iterations = Some(out.iterations);
            summary.converged = Some(out.converged);
            let last = out.trajectory.len() - 1;
            let eul = pushforward_solution(&out.trajectory, &out.flow, &coeffs.rho0, cfg.mu_bar, last.max(1))
                .context(ctx)?;
            (out.contraction_log, eul.trajectory.u.last().unwrap().clone())
        }
        SolverKind::Eulerian => {
            let run = eulerian_reference_solve(&coeffs, &u0, cfg.t_final, steps, &cfg.tolerances.eulerian).context(ctx)?;
            let traj = &run.trajectory;
            let parts = running_energy_parts(traj, p).context(ctx)?;
            for k in 0..traj.len() {
                rows.push(DiagnosticRow {
                    t: traj.times[k],
                    parts: parts[k],
                    div_residual: ops::divergence(&traj.u[k]).norm_l2(),
                    j_dev: None,
                    energy: kinetic_energy(&run.rho[k], &traj.u[k]),
                });
            }
            summary.halvings = Some(run.halvings);
            let m0 = run.mass[0];
            summary.mass_drift = Some(run.mass.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max));
            (Vec::new(), traj.u.last().unwrap().clone())
        }
    };
    let last = rows.last().unwrap();
    summary.e_norm = last.parts.total();
    summary.final_energy = last.energy;
    summary.max_div_residual = rows.iter().map(|r| r.div_residual).fold(0.0, f64::max);
    summary.max_j_dev = rows.iter().filter_map(|r| r.j_dev).reduce(f64::max);
    Ok(SimulateRun { summary, diagnostics: rows, contraction, final_velocity })
}

pub const DIAGNOSTIC_COLUMNS: [&str; 9] =
    ["t", "linf_u", "l1_dtu", "l1_lap_u", "l1_grad_p", "E_total", "div_residual", "J_dev", "energy"];

pub const PICARD_COLUMNS: [&str; 5] = ["iteration", "distance", "relative", "contraction_ratio", "smallness"];

pub fn write(run: &SimulateRun, cfg: &ExperimentConfig, sink: &mut Sink) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> = run
        .diagnostics
        .iter()
        .map(|r| {
            vec![
                num(r.t),
                num(r.parts.linf_u),
                num(r.parts.l1_dtu),
                num(r.parts.l1_lap_u),
                num(r.parts.l1_grad_p),
                num(r.parts.total()),
                num(r.div_residual),
                opt_num(r.j_dev),
                num(r.energy),
            ]
        })
        .collect();
    sink.csv("diagnostics.csv", &DIAGNOSTIC_COLUMNS, &rows)?;
    if cfg.solver == SolverKind::Lagrangian {
        let rows: Vec<Vec<String>> = run
            .contraction
            .iter()
            .map(|e| vec![e.iteration.to_string(), num(e.distance), num(e.relative), opt_num(e.ratio), num(e.smallness)])
            .collect();
        sink.csv("picard.csv", &PICARD_COLUMNS, &rows)?;
    }
    sink.json("summary.json", &run.summary)?;
    if cfg.write_snapshot {
        let mut buf = Vec::new();
        let field = AnyField::Vector(run.final_velocity.to_physical());
        write_snapshot(&mut buf, &field, cfg.t_final).context(|| "snapshot".into())?;
        sink.bytes("velocity_final.kfld", &buf)?;
    }
    Ok(())
}
