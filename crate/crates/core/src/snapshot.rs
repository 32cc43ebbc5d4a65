//! Field snapshots: a CSV table `r,rho,u,theta` and a JSON sidecar with the
//! time and parameters.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{FlowState, PhysParams, RadialGrid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub t: f64,
    pub params: PhysParams,
    pub n: usize,
    pub eps: f64,
    pub outer: f64,
}

#[derive(Serialize, Deserialize)]
struct Row {
    r: f64,
    rho: f64,
    u: f64,
    theta: f64,
}

/// Path of the JSON sidecar belonging to a CSV snapshot.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `csv` and its sidecar. Floats use the shortest round-trip format.
pub fn write_snapshot(csv: &Path, state: &FlowState, grid: &RadialGrid, params: &PhysParams) -> Result<()> {
    state.validate(grid)?;
    let mut w = csv::Writer::from_path(csv)?;
    for (i, &r) in grid.nodes().iter().enumerate() {
        w.serialize(Row {
            r,
            rho: state.rho[i],
            u: state.u[i],
            theta: state.theta[i],
        })?;
    }
    w.flush()?;
    let meta = SnapshotMeta {
        t: state.t,
        params: *params,
        n: grid.len(),
        eps: grid.eps(),
        outer: grid.outer(),
    };
    let mut f = BufWriter::new(File::create(sidecar_path(csv))?);
    serde_json::to_writer_pretty(&mut f, &meta)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Reads a snapshot back. The grid is rebuilt from the `r` column.
pub fn read_snapshot(csv: &Path) -> Result<(FlowState, RadialGrid, SnapshotMeta)> {
    let meta: SnapshotMeta = serde_json::from_reader(File::open(sidecar_path(csv))?)?;
    let mut rdr = csv::Reader::from_path(csv)?;
    let (mut r, mut rho, mut u, mut theta) = (vec![], vec![], vec![], vec![]);
    for row in rdr.deserialize() {
        let row: Row = row?;
        r.push(row.r);
        rho.push(row.rho);
        u.push(row.u);
        theta.push(row.theta);
    }
    if r.len() != meta.n {
        return Err(Error::LengthMismatch {
            expected: meta.n,
            got: r.len(),
        });
    }
    let grid = RadialGrid::from_nodes(r)?;
    let state = FlowState::new(meta.t, rho, u, theta);
    state.validate(&grid)?;
    Ok((state, grid, meta))
}
