//! Rescaling, Stokes stepping, forcing assembly, the fixed-point solver,
//! the Eulerian reference solver and the diagnostics that tie them together.

mod energy;
mod eulerian;
mod exit;
mod forcing;
mod free;
mod picard;
mod pushforward;
mod rescale;
mod stokes;
mod trajectory;

pub use energy::{energy_norm, running_energy_parts, EnergyNorm, EnergyParts};
pub use eulerian::{eulerian_capillary_force, eulerian_reference_solve, EulerianConfig, EulerianRun};
pub use exit::{exit_time, ExitSamples};
pub use forcing::{assemble_forcings, free_capillary_forcing, Baseline, ForcingRequest, ForcingTerms, Scheme};
pub use free::{free_solution, free_solution_stepped, rescaled_mesh, FreeMode, FreeSolution, SOLENOIDAL_TOL};
pub use picard::{
    fixed_point_residuals, picard_solve, ContractionEntry, FixedPointResiduals, PicardConfig,
    PicardOutput, Route,
};
pub use pushforward::{pushforward_solution, EulerianState};
pub use rescale::{pushforward_inverse_rescale, rescale_to_unit_viscosity};
pub use stokes::{stokes_step, variable_remainder, StepOptions, StokesMode, StokesState, TimeOrder};
pub use trajectory::{Frame, Scaling, Trajectory};
