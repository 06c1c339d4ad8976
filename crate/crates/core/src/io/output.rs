//! CSV tables and raster snapshots.
//!
//! Floats are written with the shortest representation that reads back to
//! the same bits, '.' decimal separator, no locale.

use std::fs::File;
use std::path::{Path, PathBuf};

use crate::diagnostics::SeriesRow;
use crate::error::{Error, Result};
use crate::io::raster::{write_esri_ascii, Raster};
use crate::model::Model;
use crate::riemann::Profile;
use crate::state::FieldState;
use crate::timestep::StepReport;

pub const STEPS_HEADER: [&str; 9] = [
    "step",
    "t",
    "dt",
    "mass",
    "energy",
    "max_speed",
    "clamped_mass",
    "boundary_outflow",
    "viscous_dissipation",
];
pub const SERIES_HEADER: [&str; 5] = ["t", "q", "volume", "energy", "mass"];
pub const PROFILE_HEADER: [&str; 5] = ["x", "h_num", "v_num", "h_exact", "v_exact"];
pub const CELLS_HEADER: [&str; 8] = ["cell", "x", "y", "z", "theta", "h", "vx", "vy"];

/// A CSV file with a fixed header.
pub struct CsvTable {
    writer: csv::Writer<File>,
    path: PathBuf,
    width: usize,
}

impl CsvTable {
    pub fn create(path: impl AsRef<Path>, header: &[&str]) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header)?;
        Ok(CsvTable {
            writer,
            path,
            width: header.len(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        debug_assert_eq!(fields.len(), self.width);
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn floats(&mut self, values: &[f64]) -> Result<()> {
        let fields: Vec<String> = values.iter().map(|v| v.to_string()).collect();
        self.row(&fields)
    }

    pub fn step(&mut self, step: usize, r: &StepReport) -> Result<()> {
        let mut fields = vec![step.to_string()];
        fields.extend(
            [
                r.t,
                r.dt,
                r.mass,
                r.energy,
                r.max_speed,
                r.clamped_mass,
                r.boundary_outflow,
                r.viscous_dissipation,
            ]
            .iter()
            .map(f64::to_string),
        );
        self.row(&fields)
    }

    /// An undefined `q` is left empty.
    pub fn series(&mut self, r: &SeriesRow) -> Result<()> {
        let q = if r.q.is_nan() { String::new() } else { r.q.to_string() };
        self.row(&[r.t.to_string(), q, r.volume.to_string(), r.energy.to_string(), r.mass.to_string()])
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_series(path: impl AsRef<Path>, rows: &[SeriesRow]) -> Result<()> {
    let mut t = CsvTable::create(path, &SERIES_HEADER)?;
    for r in rows {
        t.series(r)?;
    }
    t.finish()
}

/// Numerical profile next to the exact one.
pub fn write_profile(path: impl AsRef<Path>, p: &Profile, h_exact: &[f64], v_exact: &[f64]) -> Result<()> {
    if h_exact.len() != p.len() || v_exact.len() != p.len() {
        return Err(Error::LengthMismatch(h_exact.len().min(v_exact.len()), p.len()));
    }
    let mut t = CsvTable::create(path, &PROFILE_HEADER)?;
    for k in 0..p.len() {
        t.floats(&[p.x[k], p.h[k], p.v[k], h_exact[k], v_exact[k]])?;
    }
    t.finish()
}

/// Per-cell dump of a state.
pub fn write_cells(path: impl AsRef<Path>, model: &Model, state: &FieldState) -> Result<()> {
    let mut t = CsvTable::create(path, &CELLS_HEADER)?;
    for (i, c) in model.mesh.cells().iter().enumerate() {
        let mut fields = vec![i.to_string()];
        fields.extend(
            [
                c.centroid.x,
                c.centroid.y,
                model.terrain.z[i],
                model.terrain.theta[i],
                state.h[i],
                state.v[i].x,
                state.v[i].y,
            ]
            .iter()
            .map(f64::to_string),
        );
        t.row(&fields)?;
    }
    t.finish()
}

/// File name of one snapshot raster, e.g. `h_000042_t12.500000.asc`.
pub fn snapshot_name(field: &str, step: usize, t: f64) -> String {
    format!("{field}_{step:06}_t{t:.6}.asc")
}

/// Writes depth `h` (m), speed `|v|` (m/s) and free-surface elevation
/// `w = z + h` (m) as ESRI ASCII grids. Needs a structured mesh; cells
/// missing from a masked mesh are NODATA. Hexagonal rows are written
/// unshifted with cellsize equal to the column pitch.
pub fn write_snapshot(model: &Model, state: &FieldState, step: usize, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let grid = model
        .mesh
        .grid()
        .ok_or_else(|| Error::Config("raster snapshots need a structured mesh".into()))?;
    let speed: Vec<f64> = state.v.iter().map(|v| v.norm()).collect();
    let surface: Vec<f64> = state.h.iter().zip(&model.terrain.z).map(|(h, z)| z + h).collect();
    let mut written = Vec::with_capacity(3);
    for (field, values) in [("h", &state.h), ("speed", &speed), ("w", &surface)] {
        let raster = Raster::from_grid(grid, values)?;
        let path = dir.join(snapshot_name(field, step, state.t));
        write_esri_ascii(&raster, &path)?;
        written.push(path);
    }
    Ok(written)
}
