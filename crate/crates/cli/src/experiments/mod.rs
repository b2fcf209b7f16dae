//! The subcommands, each split into a pure computation and its artifacts.

pub mod convergence;
pub mod decay;
pub mod lifespan;
pub mod lp;
pub mod simulate;

use korteweg_core::{Field, ScalarField, VectorField};

/// Evaluates `f` on every sweep value, spreading the values over the
/// available cores. Results come back in sweep order.
pub fn run_sweep<T, F>(values: &[f64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(f64) -> T + Sync,
{
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).clamp(1, values.len().max(1));
    if workers == 1 {
        return values.iter().map(|&v| f(v)).collect();
    }
    let f = &f;
    let mut parts: Vec<Vec<(usize, T)>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || values.iter().enumerate().skip(w).step_by(workers).map(|(i, &v)| (i, f(v))).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let mut all: Vec<(usize, T)> = parts.drain(..).flatten().collect();
    all.sort_by_key(|(i, _)| *i);
    all.into_iter().map(|(_, t)| t).collect()
}

/// `½∫ρ|u|²`.
pub fn kinetic_energy(rho: &ScalarField, u: &VectorField) -> f64 {
    let rho = rho.to_physical();
    let r = rho.physical();
    let mut s = 0.0;
    for c in u.components() {
        let c = c.physical();
        s += r.iter().zip(c.iter()).map(|(r, v)| r * v * v).sum::<f64>();
    }
    0.5 * s * rho.grid().cell_area()
}
