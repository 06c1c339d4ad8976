//! ESRI ASCII grids.
//!
//! Header keys are matched case-insensitively and may appear in any order
//! before the first value. `xllcenter`/`yllcenter` are accepted and converted
//! to corners. Values are row-major with the top (northernmost) row first.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::{GridLayout, Mesh};
use crate::vec2::Vec2;

pub const DEFAULT_NODATA: f64 = -9999.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub ncols: usize,
    pub nrows: usize,
    pub cellsize: f64,
    pub xllcorner: f64,
    pub yllcorner: f64,
    pub nodata: f64,
    /// Row-major, top row first.
    pub values: Vec<f64>,
}

impl Raster {
    pub fn new(
        ncols: usize,
        nrows: usize,
        cellsize: f64,
        corner: Vec2,
        nodata: f64,
        values: Vec<f64>,
    ) -> Result<Self> {
        if ncols == 0 || nrows == 0 {
            return Err(Error::Config(format!("raster dimensions must be positive, got {ncols}x{nrows}")));
        }
        if !(cellsize > 0.0 && cellsize.is_finite()) {
            return Err(Error::Config(format!("raster cellsize must be positive, got {cellsize}")));
        }
        if values.len() != ncols * nrows {
            return Err(Error::LengthMismatch(values.len(), ncols * nrows));
        }
        Ok(Raster {
            ncols,
            nrows,
            cellsize,
            xllcorner: corner.x,
            yllcorner: corner.y,
            nodata,
            values,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.ncols + col]
    }

    pub fn is_nodata(&self, v: f64) -> bool {
        v == self.nodata || v.is_nan()
    }

    /// Value at a bottom-up grid position `(i, j)`, `None` on NODATA.
    pub fn at_grid(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.get(self.nrows - 1 - j, i);
        (!self.is_nodata(v)).then_some(v)
    }

    /// Value of the raster cell containing `p`, `None` outside or on NODATA.
    pub fn sample(&self, p: Vec2) -> Option<f64> {
        let fx = (p.x - self.xllcorner) / self.cellsize;
        let fy = (p.y - self.yllcorner) / self.cellsize;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (i, j) = (fx as usize, fy as usize);
        if i >= self.ncols || j >= self.nrows {
            return None;
        }
        self.at_grid(i, j)
    }

    /// Largest non-NODATA value.
    pub fn max_value(&self) -> Option<f64> {
        self.values
            .iter()
            .copied()
            .filter(|&v| !self.is_nodata(v))
            .reduce(f64::max)
    }

    /// Grid of per-cell values on a structured mesh; cells missing from the
    /// mesh become NODATA.
    pub fn from_grid(grid: &GridLayout, values: &[f64]) -> Result<Self> {
        let mut out = vec![DEFAULT_NODATA; grid.nx * grid.ny];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if let Some(c) = grid.cells[j * grid.nx + i] {
                    out[(grid.ny - 1 - j) * grid.nx + i] = values[c];
                }
            }
        }
        Raster::new(grid.nx, grid.ny, grid.cellsize, grid.origin, DEFAULT_NODATA, out)
    }

    /// Samples the raster at every cell centroid of `mesh`.
    pub fn sample_mesh(&self, mesh: &Mesh) -> Vec<Option<f64>> {
        mesh.cells().iter().map(|c| self.sample(c.centroid)).collect()
    }

    pub fn to_esri_string(&self) -> String {
        let mut s = String::with_capacity(self.values.len() * 8 + 128);
        let _ = writeln!(s, "ncols {}", self.ncols);
        let _ = writeln!(s, "nrows {}", self.nrows);
        let _ = writeln!(s, "xllcorner {}", self.xllcorner);
        let _ = writeln!(s, "yllcorner {}", self.yllcorner);
        let _ = writeln!(s, "cellsize {}", self.cellsize);
        let _ = writeln!(s, "NODATA_value {}", self.nodata);
        for row in self.values.chunks(self.ncols) {
            let mut first = true;
            for v in row {
                if !first {
                    s.push(' ');
                }
                first = false;
                let _ = write!(s, "{v}");
            }
            s.push('\n');
        }
        s
    }
}

pub fn read_esri_ascii(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_esri_ascii(&text, path)
}

pub fn write_esri_ascii(raster: &Raster, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, raster.to_esri_string()).map_err(|e| Error::io(path, e))
}

#[derive(Default)]
struct Header {
    ncols: Option<usize>,
    nrows: Option<usize>,
    xll: Option<(f64, bool)>,
    yll: Option<(f64, bool)>,
    cellsize: Option<f64>,
    nodata: Option<f64>,
}

/// Parses grid text; `path` only labels errors.
pub fn parse_esri_ascii(text: &str, path: &Path) -> Result<Raster> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut header = Header::default();
    let mut values = Vec::new();
    let mut in_body = false;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let mut tokens = raw.split_whitespace().peekable();
        let Some(&first) = tokens.peek() else {
            continue;
        };
        if !in_body && first.starts_with(|c: char| c.is_ascii_alphabetic()) {
            let key = first.to_ascii_lowercase();
            tokens.next();
            let value = tokens
                .next()
                .ok_or_else(|| err(line, format!("header key '{first}' has no value")))?;
            if let Some(extra) = tokens.next() {
                return Err(err(line, format!("unexpected token '{extra}' after header '{first}'")));
            }
            let num = || -> Result<f64> {
                value
                    .parse::<f64>()
                    .map_err(|_| err(line, format!("header '{first}': '{value}' is not a number")))
            };
            let count = || -> Result<usize> {
                value
                    .parse::<usize>()
                    .map_err(|_| err(line, format!("header '{first}': '{value}' is not a count")))
            };
            let slot_taken = match key.as_str() {
                "ncols" => header.ncols.replace(count()?).is_some(),
                "nrows" => header.nrows.replace(count()?).is_some(),
                "xllcorner" => header.xll.replace((num()?, false)).is_some(),
                "xllcenter" => header.xll.replace((num()?, true)).is_some(),
                "yllcorner" => header.yll.replace((num()?, false)).is_some(),
                "yllcenter" => header.yll.replace((num()?, true)).is_some(),
                "cellsize" => header.cellsize.replace(num()?).is_some(),
                "nodata_value" => header.nodata.replace(num()?).is_some(),
                _ => return Err(err(line, format!("unknown header key '{first}'"))),
            };
            if slot_taken {
                return Err(err(line, format!("duplicate header key '{first}'")));
            }
            continue;
        }
        if !in_body {
            in_body = true;
            let missing: Vec<&str> = [
                ("ncols", header.ncols.is_none()),
                ("nrows", header.nrows.is_none()),
                ("xllcorner", header.xll.is_none()),
                ("yllcorner", header.yll.is_none()),
                ("cellsize", header.cellsize.is_none()),
            ]
            .into_iter()
            .filter_map(|(k, m)| m.then_some(k))
            .collect();
            if !missing.is_empty() {
                return Err(err(line, format!("missing header keys: {}", missing.join(", "))));
            }
        }
        for tok in tokens {
            let v: f64 = tok
                .parse()
                .map_err(|_| err(line, format!("value '{tok}' is not a number")))?;
            values.push(v);
        }
    }

    if !in_body {
        return Err(err(last_line.max(1), "no data values".into()));
    }
    let (ncols, nrows) = (header.ncols.unwrap_or(0), header.nrows.unwrap_or(0));
    let cellsize = header.cellsize.unwrap_or(0.0);
    if values.len() != ncols * nrows {
        return Err(err(
            last_line,
            format!("expected {} values ({ncols}x{nrows}), found {}", ncols * nrows, values.len()),
        ));
    }
    let corner = |(v, centre): (f64, bool)| if centre { v - 0.5 * cellsize } else { v };
    let origin = Vec2::new(
        corner(header.xll.unwrap_or((0.0, false))),
        corner(header.yll.unwrap_or((0.0, false))),
    );
    Raster::new(ncols, nrows, cellsize, origin, header.nodata.unwrap_or(DEFAULT_NODATA), values)
        .map_err(|e| err(1, e.to_string()))
}
