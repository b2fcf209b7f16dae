//! Binary field snapshots.
//!
//! Layout: the 8 bytes `KORTFLD1`, a little-endian `u32` header length, a
//! UTF-8 JSON header `{dim, n_points, kind, representation, time}`, then
//! little-endian `f64` data. Components follow one another, each in
//! row-major order; spectral data interleave re/im.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field, Representation, ScalarField, TensorField, VectorField};
use crate::grid::Grid;
use crate::ops::AnyField;

pub const MAGIC: &[u8; 8] = b"KORTFLD1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Scalar,
    Vector,
    Tensor,
}

impl FieldKind {
    fn components(self, dim: usize) -> usize {
        match self {
            FieldKind::Scalar => 1,
            FieldKind::Vector => dim,
            FieldKind::Tensor => dim * dim,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub dim: usize,
    pub n_points: usize,
    pub kind: FieldKind,
    pub representation: Representation,
    pub time: f64,
}

pub fn write_snapshot<W: Write>(mut out: W, field: &AnyField, time: f64) -> Result<()> {
    let (kind, comps): (FieldKind, &[ScalarField]) = match field {
        AnyField::Scalar(f) => (FieldKind::Scalar, f.components()),
        AnyField::Vector(f) => (FieldKind::Vector, f.components()),
        AnyField::Tensor(f) => (FieldKind::Tensor, f.components()),
    };
    let grid = field.grid();
    let header = SnapshotHeader {
        dim: grid.dim(),
        n_points: grid.n_points(),
        kind,
        representation: comps[0].representation(),
        time,
    };
    let json = serde_json::to_vec(&header)?;
    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u32).to_le_bytes())?;
    out.write_all(&json)?;
    let mut buf = Vec::new();
    for c in comps {
        match header.representation {
            Representation::Physical => {
                for x in c.physical().iter() {
                    buf.extend_from_slice(&x.to_le_bytes());
                }
            }
            Representation::Spectral => {
                for z in c.spectral().iter() {
                    buf.extend_from_slice(&z.re.to_le_bytes());
                    buf.extend_from_slice(&z.im.to_le_bytes());
                }
            }
        }
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: Read>(mut input: R) -> Result<(SnapshotHeader, AnyField)> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let mut len = [0u8; 4];
    input.read_exact(&mut len)?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    input.read_exact(&mut json)?;
    let header: SnapshotHeader = serde_json::from_slice(&json)?;
    let grid = Grid::with_dim(header.n_points, header.dim)?;
    let mut rest = Vec::new();
    input.read_to_end(&mut rest)?;
    let ncomp = header.kind.components(header.dim);
    let per = match header.representation {
        Representation::Physical => 1,
        Representation::Spectral => 2,
    };
    let expected = ncomp * grid.len() * per * 8;
    if rest.len() != expected {
        return Err(Error::Snapshot(format!("expected {expected} data bytes, found {}", rest.len())));
    }
    let values: Vec<f64> =
        rest.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
    let mut comps = Vec::with_capacity(ncomp);
    for chunk in values.chunks_exact(grid.len() * per) {
        let c = match header.representation {
            Representation::Physical => ScalarField::from_physical(&grid, chunk.to_vec())?,
            Representation::Spectral => ScalarField::from_spectral(
                &grid,
                chunk.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect(),
            )?,
        };
        comps.push(c);
    }
    let field = match header.kind {
        FieldKind::Scalar => AnyField::Scalar(comps.pop().unwrap()),
        FieldKind::Vector => AnyField::Vector(VectorField::new(comps)?),
        FieldKind::Tensor => AnyField::Tensor(TensorField::new(comps)?),
    };
    Ok((header, field))
}
