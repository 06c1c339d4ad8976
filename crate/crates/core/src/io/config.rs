//! TOML run configuration.
//!
//! Loading validates everything that can be checked without building the
//! mesh: key names, types, value ranges, mutually exclusive sources, and
//! that every referenced file exists and parses. Relative paths resolve
//! against the directory holding the config file. The grammar is described
//! in the repository README.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::experiments::{self, Setup};
use crate::io::raster::{read_esri_ascii, Raster};
use crate::mesh::{build_masked_mesh, build_structured_mesh, AltitudePolicy, Mesh, MeshKind};
use crate::model::{Model, Physics};
use crate::physics::{FrictionParams, Hyetograph, Infiltration, Rain, SourceModel};
use crate::state::{self, FieldState, Terrain};
use crate::timestep::{BoundMode, StepPolicy};
use crate::vec2::Vec2;
use crate::{GRAVITY, H_DRY};

/// Extra height of the impermeable wall that replaces NODATA terrain.
pub const WALL_HEIGHT: f64 = 100.0;

// ---------------------------------------------------------------- raw

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mesh: RawMesh,
    terrain: RawTerrain,
    #[serde(default)]
    physics: RawPhysics,
    #[serde(default)]
    sources: RawSources,
    #[serde(default)]
    step: RawStep,
    initial: RawInitial,
    output: RawOutput,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
enum RawKind {
    #[default]
    Rect,
    Hex,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    #[serde(default)]
    kind: RawKind,
    nx: Option<usize>,
    ny: Option<usize>,
    spacing: Option<f64>,
    origin: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlane {
    slope: [f64; 2],
    #[serde(default)]
    z0: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRandom {
    seed: Option<u64>,
    #[serde(default = "one")]
    amplitude: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBowl {
    depth: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValley {
    along: f64,
    across: f64,
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum RawBoundaryName {
    Free,
    Wall,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawBoundary {
    Named(RawBoundaryName),
    Altitude { altitude: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerrain {
    z: Option<f64>,
    plane: Option<RawPlane>,
    z_raster: Option<PathBuf>,
    random: Option<RawRandom>,
    bowl: Option<RawBowl>,
    valley: Option<RawValley>,
    theta: Option<f64>,
    theta_raster: Option<PathBuf>,
    #[serde(default)]
    nodata: NodataPolicy,
    boundary: Option<RawBoundary>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPhysics {
    #[serde(default = "gravity")]
    g: f64,
    #[serde(default)]
    alpha_p: f64,
    #[serde(default)]
    alpha_s: f64,
    #[serde(default = "yes")]
    viscosity: bool,
    #[serde(default = "h_dry")]
    h_dry: f64,
}

impl Default for RawPhysics {
    fn default() -> Self {
        RawPhysics {
            g: GRAVITY,
            alpha_p: 0.0,
            alpha_s: 0.0,
            viscosity: true,
            h_dry: H_DRY,
        }
    }
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSources {
    rain: Option<f64>,
    rain_hyetograph: Option<PathBuf>,
    infiltration: Option<RawInfiltration>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawInfiltration {
    None,
    Constant {
        rate: f64,
        gate_depth: Option<f64>,
    },
    Horton {
        f0: f64,
        fc: f64,
        k: f64,
        gate_depth: Option<f64>,
    },
}

#[derive(Debug, Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum RawBound {
    Positivity,
    Cfl,
    Min,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    #[serde(default = "safety")]
    safety: f64,
    #[serde(default = "bound")]
    bound: RawBound,
    #[serde(default = "one")]
    dt_max: f64,
    #[serde(default = "dt_min")]
    dt_min: f64,
}

impl Default for RawStep {
    fn default() -> Self {
        RawStep {
            safety: safety(),
            bound: bound(),
            dt_max: one(),
            dt_min: dt_min(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawInitial {
    Lake {
        level: f64,
    },
    Depth {
        h: f64,
    },
    DamBreak {
        point: [f64; 2],
        #[serde(default = "x_axis")]
        normal: [f64; 2],
        level_left: f64,
        level_right: f64,
    },
    Raster {
        h_raster: PathBuf,
    },
    UniformFlow {
        h: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    t_end: f64,
    snapshot_every: Option<f64>,
    series_every: Option<f64>,
    max_steps: Option<usize>,
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn gravity() -> f64 {
    GRAVITY
}
fn h_dry() -> f64 {
    H_DRY
}
fn safety() -> f64 {
    0.9
}
fn bound() -> RawBound {
    RawBound::Min
}
fn dt_min() -> f64 {
    1e-12
}
fn x_axis() -> [f64; 2] {
    [1.0, 0.0]
}

// ----------------------------------------------------------- resolved

/// What to do with raster cells holding NODATA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodataPolicy {
    /// Keep the cell as impermeable high ground: `z = z_max + 100`, `θ = 1`.
    #[default]
    Wall,
    /// Drop the cell; its neighbours see a free-discharge boundary.
    Hole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshSpec {
    pub kind: MeshKind,
    pub nx: usize,
    pub ny: usize,
    pub spacing: f64,
    pub origin: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BedSource {
    Constant(f64),
    Plane { slope: Vec2, z0: f64 },
    Raster(Raster),
    Random { seed: u64, amplitude: f64 },
    Bowl { depth: f64 },
    Valley { along: f64, across: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ThetaSource {
    Constant(f64),
    Raster(Raster),
}

/// Altitude of the ghost cells on the domain boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundarySpec {
    /// Ghosts copy the owner's bed: free discharge.
    Free,
    /// Ghosts sit 100 m above the highest cell: closed basin.
    Wall,
    Altitude(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// Lake at rest with free surface elevation `level` (m).
    Lake { level: f64 },
    /// Still water of uniform depth.
    Depth { h: f64 },
    /// Still water at `level_left` behind the line through `point` with
    /// normal `normal`, `level_right` in front of it.
    DamBreak {
        point: Vec2,
        normal: Vec2,
        level_left: f64,
        level_right: f64,
    },
    /// Still water with depths sampled from a raster; NODATA means dry.
    Raster(Raster),
    /// Steady uniform flow of depth `h` down a planar bed.
    UniformFlow { h: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutputSpec {
    pub t_end: f64,
    pub snapshot_every: Option<f64>,
    pub series_every: Option<f64>,
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mesh: MeshSpec,
    pub bed: BedSource,
    pub theta: ThetaSource,
    pub nodata: NodataPolicy,
    pub boundary: BoundarySpec,
    pub physics: Physics,
    pub step: StepPolicy,
    pub initial: InitialSpec,
    pub output: OutputSpec,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Parses config text; relative file names resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
    resolve(raw, base)
}

fn cfg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

fn nonneg(name: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        cfg(format!("{name} must be finite and nonnegative, got {v}"))
    }
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        cfg(format!("{name} must be positive, got {v}"))
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        cfg(format!("{name} must be finite, got {v}"))
    }
}

fn open_raster(base: &Path, rel: &Path) -> Result<Raster> {
    read_esri_ascii(base.join(rel))
}

fn resolve(raw: RawConfig, base: &Path) -> Result<RunConfig> {
    let t = raw.terrain;
    let given = [
        t.z.is_some(),
        t.plane.is_some(),
        t.z_raster.is_some(),
        t.random.is_some(),
        t.bowl.is_some(),
        t.valley.is_some(),
    ];
    match given.iter().filter(|&&b| b).count() {
        0 => return cfg("terrain needs one of z, plane, z_raster, random, bowl, valley"),
        1 => {}
        _ => return cfg("terrain: give only one of z, plane, z_raster, random, bowl, valley"),
    }
    let bed = if let Some(z) = t.z {
        BedSource::Constant(finite("terrain.z", z)?)
    } else if let Some(p) = t.plane {
        BedSource::Plane {
            slope: Vec2::new(finite("terrain.plane.slope", p.slope[0])?, finite("terrain.plane.slope", p.slope[1])?),
            z0: finite("terrain.plane.z0", p.z0)?,
        }
    } else if let Some(r) = &t.z_raster {
        BedSource::Raster(open_raster(base, r)?)
    } else if let Some(r) = t.random {
        BedSource::Random {
            seed: r.seed.unwrap_or(0),
            amplitude: nonneg("terrain.random.amplitude", r.amplitude)?,
        }
    } else if let Some(b) = t.bowl {
        BedSource::Bowl {
            depth: nonneg("terrain.bowl.depth", b.depth)?,
        }
    } else if let Some(v) = t.valley {
        BedSource::Valley {
            along: finite("terrain.valley.along", v.along)?,
            across: finite("terrain.valley.across", v.across)?,
        }
    } else {
        unreachable!("exactly one bed source was checked above")
    };

    let theta = match (t.theta, &t.theta_raster) {
        (Some(_), Some(_)) => return cfg("terrain: theta and theta_raster are mutually exclusive"),
        (None, None) => return cfg("terrain needs theta or theta_raster"),
        (Some(th), None) => {
            if !(th > 0.0 && th <= 1.0) {
                return cfg(format!("terrain.theta must lie in (0, 1], got {th}"));
            }
            ThetaSource::Constant(th)
        }
        (None, Some(p)) => ThetaSource::Raster(open_raster(base, p)?),
    };

    let boundary = match t.boundary {
        None | Some(RawBoundary::Named(RawBoundaryName::Free)) => BoundarySpec::Free,
        Some(RawBoundary::Named(RawBoundaryName::Wall)) => BoundarySpec::Wall,
        Some(RawBoundary::Altitude { altitude }) => BoundarySpec::Altitude(finite("terrain.boundary.altitude", altitude)?),
    };

    let m = raw.mesh;
    let kind = match m.kind {
        RawKind::Rect => MeshKind::Rectangular,
        RawKind::Hex => MeshKind::Hexagonal,
    };
    let mesh = match (&bed, kind) {
        (BedSource::Raster(r), MeshKind::Rectangular) => {
            if m.nx.is_some() || m.ny.is_some() || m.spacing.is_some() || m.origin.is_some() {
                return cfg("mesh: a rectangular mesh takes nx, ny, spacing and origin from z_raster; remove them");
            }
            MeshSpec {
                kind,
                nx: r.ncols,
                ny: r.nrows,
                spacing: r.cellsize,
                origin: Vec2::new(r.xllcorner, r.yllcorner),
            }
        }
        _ => {
            let need = |name: &str| Error::Config(format!("mesh.{name} is required"));
            let nx = m.nx.ok_or_else(|| need("nx"))?;
            let ny = m.ny.ok_or_else(|| need("ny"))?;
            let spacing = positive("mesh.spacing", m.spacing.ok_or_else(|| need("spacing"))?)?;
            if nx == 0 || ny == 0 {
                return cfg(format!("mesh dimensions must be positive, got {nx}x{ny}"));
            }
            let default_origin = match &bed {
                BedSource::Raster(r) => [r.xllcorner, r.yllcorner],
                _ => [0.0, 0.0],
            };
            let o = m.origin.unwrap_or(default_origin);
            MeshSpec {
                kind,
                nx,
                ny,
                spacing,
                origin: Vec2::new(finite("mesh.origin", o[0])?, finite("mesh.origin", o[1])?),
            }
        }
    };

    let p = raw.physics;
    let s = raw.sources;
    let rain = match (s.rain, &s.rain_hyetograph) {
        (Some(_), Some(_)) => return cfg("sources: rain and rain_hyetograph are mutually exclusive"),
        (Some(r), None) => Rain::Constant(nonneg("sources.rain", r)?),
        (None, Some(path)) => Rain::Hyetograph(read_hyetograph(base.join(path))?),
        (None, None) => Rain::Constant(0.0),
    };
    let infiltration = match s.infiltration {
        None | Some(RawInfiltration::None) => Infiltration::None,
        Some(RawInfiltration::Constant { rate, gate_depth }) => Infiltration::Constant {
            rate: nonneg("sources.infiltration.rate", rate)?,
            gate_depth: gate_depth.map(|d| nonneg("sources.infiltration.gate_depth", d)).transpose()?,
        },
        Some(RawInfiltration::Horton { f0, fc, k, gate_depth }) => Infiltration::Horton {
            f0: nonneg("sources.infiltration.f0", f0)?,
            fc: nonneg("sources.infiltration.fc", fc)?,
            k: nonneg("sources.infiltration.k", k)?,
            gate_depth: gate_depth.map(|d| nonneg("sources.infiltration.gate_depth", d)).transpose()?,
        },
    };
    let physics = Physics {
        g: positive("physics.g", p.g)?,
        friction: FrictionParams::new(nonneg("physics.alpha_p", p.alpha_p)?, nonneg("physics.alpha_s", p.alpha_s)?),
        sources: SourceModel { rain, infiltration },
        viscosity: p.viscosity,
        h_dry: nonneg("physics.h_dry", p.h_dry)?,
    };

    let step = StepPolicy {
        safety: raw.step.safety,
        mode: match raw.step.bound {
            RawBound::Positivity => BoundMode::Positivity,
            RawBound::Cfl => BoundMode::Cfl,
            RawBound::Min => BoundMode::Min,
        },
        dt_max: raw.step.dt_max,
        dt_min: raw.step.dt_min,
    };
    step.validate()?;

    let initial = match raw.initial {
        RawInitial::Lake { level } => InitialSpec::Lake {
            level: finite("initial.level", level)?,
        },
        RawInitial::Depth { h } => InitialSpec::Depth {
            h: nonneg("initial.h", h)?,
        },
        RawInitial::DamBreak {
            point,
            normal,
            level_left,
            level_right,
        } => {
            let n = Vec2::new(normal[0], normal[1]);
            if !(n.norm() > 0.0) {
                return cfg("initial.normal must be nonzero");
            }
            InitialSpec::DamBreak {
                point: Vec2::new(finite("initial.point", point[0])?, finite("initial.point", point[1])?),
                normal: n,
                level_left: finite("initial.level_left", level_left)?,
                level_right: finite("initial.level_right", level_right)?,
            }
        }
        RawInitial::Raster { h_raster } => InitialSpec::Raster(open_raster(base, &h_raster)?),
        RawInitial::UniformFlow { h } => {
            if !matches!(bed, BedSource::Plane { .. }) || !matches!(theta, ThetaSource::Constant(_)) {
                return cfg("initial uniform_flow needs terrain.plane and a constant theta");
            }
            InitialSpec::UniformFlow {
                h: positive("initial.h", h)?,
            }
        }
    };

    let o = raw.output;
    let output = OutputSpec {
        t_end: positive("output.t_end", o.t_end)?,
        snapshot_every: o.snapshot_every.map(|v| positive("output.snapshot_every", v)).transpose()?,
        series_every: o.series_every.map(|v| positive("output.series_every", v)).transpose()?,
        max_steps: o.max_steps,
    };

    Ok(RunConfig {
        mesh,
        bed,
        theta,
        nodata: t.nodata,
        boundary,
        physics,
        step,
        initial,
        output,
    })
}

/// Reads a rain hyetograph from CSV with header `t,rate`: times in s,
/// rates in m/s, held constant until the next row.
pub fn read_hyetograph(path: impl AsRef<Path>) -> Result<Hyetograph> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut points = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(k + 2, |p| p.line() as usize);
        let field = |i: usize| -> Result<f64> {
            let s = record.get(i).unwrap_or("");
            s.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("'{s}' is not a number"),
            })
        };
        if record.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("expected 2 columns (t, rate), found {}", record.len()),
            });
        }
        points.push((field(0)?, field(1)?));
    }
    Hyetograph::new(points).map_err(|msg| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        msg,
    })
}

impl RunConfig {
    /// Replaces the seed of a random bed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        if let BedSource::Random { seed: s, .. } = &mut self.bed {
            *s = seed;
        }
        self
    }

    pub fn schedule(&self) -> crate::driver::Schedule {
        crate::driver::Schedule {
            t_end: self.output.t_end,
            snapshot_every: self.output.snapshot_every,
            series_every: self.output.series_every,
            max_steps: self.output.max_steps,
        }
    }

    /// Builds the mesh, terrain, model and initial state.
    pub fn build(&self) -> Result<Setup> {
        let m = &self.mesh;
        let full = build_structured_mesh(m.kind, m.nx, m.ny, m.spacing, m.origin)?;
        let (mesh, z_samples) = match &self.bed {
            BedSource::Raster(r) => {
                let samples = self.sample_bed(r, &full);
                if self.nodata == NodataPolicy::Hole && samples.iter().any(Option::is_none) {
                    let mask: Vec<bool> = samples.iter().map(Option::is_some).collect();
                    if !mask.iter().any(|&b| b) {
                        return cfg("z_raster holds no data inside the mesh");
                    }
                    let mesh = build_masked_mesh(m.kind, m.nx, m.ny, m.spacing, m.origin, Some(&mask))?;
                    (mesh, samples.into_iter().flatten().map(Some).collect())
                } else {
                    (full, samples)
                }
            }
            _ => (full, Vec::new()),
        };
        let n = mesh.n_cells();

        let z = match &self.bed {
            BedSource::Constant(z) => vec![*z; n],
            BedSource::Plane { slope, z0 } => state::planar_bed(&mesh, *slope, *z0),
            BedSource::Random { seed, amplitude } => experiments::random_bed(&mesh, *seed, *amplitude),
            BedSource::Bowl { depth } => experiments::bowl_bed(&mesh, *depth),
            BedSource::Valley { along, across } => experiments::valley_bed(&mesh, *along, *across),
            BedSource::Raster(r) => {
                let top = r.max_value().unwrap_or(0.0);
                z_samples.iter().map(|s| s.unwrap_or(top + WALL_HEIGHT)).collect()
            }
        };
        let walls: Vec<bool> = if z_samples.is_empty() {
            vec![false; n]
        } else {
            z_samples.iter().map(Option::is_none).collect()
        };
        let mut theta = match &self.theta {
            ThetaSource::Constant(t) => vec![*t; n],
            ThetaSource::Raster(r) => mesh
                .cells()
                .iter()
                .map(|c| r.sample(c.centroid).unwrap_or(1.0))
                .collect(),
        };
        for i in 0..n {
            if walls[i] {
                theta[i] = 1.0;
            }
        }
        if let Some(i) = theta.iter().position(|t| !(*t > 0.0 && *t <= 1.0)) {
            return cfg(format!("porosity {} in cell {i} lies outside (0, 1]", theta[i]));
        }

        let policy = match self.boundary {
            BoundarySpec::Free => AltitudePolicy::CopyOwner,
            BoundarySpec::Wall => experiments::wall(&z),
            BoundarySpec::Altitude(a) => AltitudePolicy::Fixed(a),
        };
        let mesh = mesh.attach_ghosts(policy, &z);
        let model = Model::new(mesh, Terrain::new(z, theta)?, self.physics.clone())?;
        let state = self.initial_state(&model)?;
        Ok(Setup { model, state })
    }

    fn sample_bed(&self, r: &Raster, mesh: &Mesh) -> Vec<Option<f64>> {
        match (self.mesh.kind, mesh.grid()) {
            (MeshKind::Rectangular, Some(g)) if g.nx == r.ncols && g.ny == r.nrows => {
                // one-to-one: avoids centroid rounding at cell borders
                let mut out = vec![None; mesh.n_cells()];
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        if let Some(c) = g.cells[j * g.nx + i] {
                            out[c] = r.at_grid(i, j);
                        }
                    }
                }
                out
            }
            _ => r.sample_mesh(mesh),
        }
    }

    fn initial_state(&self, model: &Model) -> Result<FieldState> {
        let g = model.physics.g;
        let z = &model.terrain.z;
        let still = |h: Vec<f64>| FieldState::still(h);
        match &self.initial {
            InitialSpec::Lake { level } => Ok(state::make_lake_state(&model.mesh, &model.terrain, g * level, g)),
            InitialSpec::Depth { h } => still(vec![*h; model.n_cells()]),
            InitialSpec::DamBreak {
                point,
                normal,
                level_left,
                level_right,
            } => still(
                model
                    .mesh
                    .cells()
                    .iter()
                    .zip(z)
                    .map(|(c, &zi)| {
                        let level = if (c.centroid - *point).dot(*normal) < 0.0 {
                            *level_left
                        } else {
                            *level_right
                        };
                        (level - zi).max(0.0)
                    })
                    .collect(),
            ),
            InitialSpec::Raster(r) => {
                let h: Vec<f64> = r.sample_mesh(&model.mesh).into_iter().map(|s| s.unwrap_or(0.0)).collect();
                if let Some(i) = h.iter().position(|v| !(*v >= 0.0)) {
                    return cfg(format!("initial depth {} in cell {i} is negative", h[i]));
                }
                still(h)
            }
            InitialSpec::UniformFlow { h } => {
                let (BedSource::Plane { slope, .. }, ThetaSource::Constant(theta)) = (&self.bed, &self.theta) else {
                    return cfg("initial uniform_flow needs terrain.plane and a constant theta");
                };
                state::make_uniform_flow_state(&model.mesh, *slope, *theta, *h, &model.physics.friction, g)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[mesh]
nx = 4
ny = 3
spacing = 1.0

[terrain]
z = 0.0
theta = 0.5

[initial]
kind = "lake"
level = 1.0

[output]
t_end = 1.0
"#;

    fn parse(s: &str) -> Result<RunConfig> {
        parse_config(s, Path::new("."))
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let c = parse(MINIMAL).unwrap();
        assert_eq!(c.step.safety, 0.9);
        assert_eq!(c.step.mode, BoundMode::Min);
        assert!(c.physics.viscosity);
        assert_eq!(c.physics.g, GRAVITY);
        assert_eq!(c.theta, ThetaSource::Constant(0.5));
        assert_eq!(c.boundary, BoundarySpec::Free);
        let s = c.build().unwrap();
        assert_eq!(s.model.n_cells(), 12);
        assert!(s.model.terrain.theta.iter().all(|&t| t == 0.5));
        assert!(s.state.h.iter().all(|&h| h == 1.0));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse(&MINIMAL.replace("spacing = 1.0", "spacing = 1.0\nspaceing = 2.0")).unwrap_err();
        assert!(e.to_string().contains("spaceing"), "{e}");
    }

    #[test]
    fn both_porosity_sources_is_an_error() {
        let e = parse(&MINIMAL.replace("theta = 0.5", "theta = 0.5\ntheta_raster = \"x.asc\"")).unwrap_err();
        assert!(e.to_string().contains("mutually exclusive"), "{e}");
    }

    #[test]
    fn type_mismatch_is_an_error() {
        assert!(parse(&MINIMAL.replace("nx = 4", "nx = \"four\"")).is_err());
    }

    #[test]
    fn missing_file_is_an_io_error() {
        assert!(matches!(load_config("/nonexistent/run.toml"), Err(Error::Io { .. })));
    }

    #[test]
    fn boundary_forms() {
        let c = parse(&MINIMAL.replace("theta = 0.5", "theta = 0.5\nboundary = \"wall\"")).unwrap();
        assert_eq!(c.boundary, BoundarySpec::Wall);
        let c = parse(&MINIMAL.replace("theta = 0.5", "theta = 0.5\nboundary = { altitude = 3.0 }")).unwrap();
        assert_eq!(c.boundary, BoundarySpec::Altitude(3.0));
    }
}
