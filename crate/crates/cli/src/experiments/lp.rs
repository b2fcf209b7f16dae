//! Per-block Littlewood-Paley tables of a snapshot.

use std::path::Path;

use serde::Serialize;

use korteweg_core::besov::{BesovParams, BlockRow, DyadicPartition, Exponent};
use korteweg_core::ops::AnyField;
use korteweg_core::snapshot::{read_snapshot, SnapshotHeader};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Context};
use crate::output::{num, Sink};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpAnalysis {
    pub header: SnapshotHeader,
    pub s: f64,
    pub p: f64,
    pub rows: Vec<BlockRow>,
    /// `Σ_j 2^{js}‖Δ_j u‖_p`.
    pub besov_norm: f64,
    pub nonzero_rows: usize,
}

/// Rows below this fraction of the largest block count as empty.
const ZERO_ROW: f64 = 1e-12;

pub fn analyze_field(header: SnapshotHeader, field: &AnyField, s: f64, p: f64) -> Result<LpAnalysis, CliError> {
    let ctx = || "lp-analyze".to_string();
    let params = BesovParams::new(s, Exponent::Finite(p), Exponent::Finite(1.0)).context(ctx)?;
    let part = DyadicPartition::new(field.grid());
    let rows = match field {
        AnyField::Scalar(f) => part.block_table(f, params),
        AnyField::Vector(f) => part.block_table(f, params),
        AnyField::Tensor(f) => part.block_table(f, params),
    }
    .context(ctx)?;
    let top = rows.iter().map(|r| r.block_l2).fold(0.0, f64::max);
    let nonzero_rows = rows.iter().filter(|r| r.block_l2 > ZERO_ROW * top).count();
    let besov_norm = rows.iter().map(|r| r.weighted).sum();
    Ok(LpAnalysis { header, s, p, rows, besov_norm, nonzero_rows })
}

pub fn lp_analyze(cfg: &ExperimentConfig) -> Result<LpAnalysis, CliError> {
    let path = cfg
        .lp
        .snapshot
        .as_deref()
        .ok_or_else(|| CliError::Config { field: "lp.snapshot".into(), message: "a snapshot path is required".into() })?;
    let (header, field) = read(path)?;
    analyze_field(header, &field, cfg.lp.s, cfg.lp.p)
}

fn read(path: &Path) -> Result<(SnapshotHeader, AnyField), CliError> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    read_snapshot(std::io::BufReader::new(file)).context(|| format!("reading {}", path.display()))
}

pub fn write(a: &LpAnalysis, sink: &mut Sink) -> Result<(), CliError> {
    let rows: Vec<Vec<String>> =
        a.rows.iter().map(|r| vec![r.j.to_string(), num(r.block_l2), num(r.block_lp), num(r.weighted)]).collect();
    sink.csv("blocks.csv", &["j", "block_L2", "block_Lp", "weighted_2js"], &rows)?;
    sink.json("blocks.json", a)?;
    Ok(())
}
