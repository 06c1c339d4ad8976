//! Synthetic setups shared by the command line and the test suites.
//!
//! All random draws use ChaCha8 seeded from a `u64`, so a seed fully
//! determines a setup on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{self, SeriesRow};
use crate::driver::{self, Event, Schedule};
use crate::error::{Error, Result};
use crate::mesh::{build_structured_mesh, AltitudePolicy, Mesh, MeshKind};
use crate::model::{Model, Physics};
use crate::state::{self, FieldState, Terrain};
use crate::timestep::{self, StepPolicy};
use crate::vec2::Vec2;
use crate::GRAVITY;

#[derive(Debug, Clone)]
pub struct Setup {
    pub model: Model,
    pub state: FieldState,
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_values(r: &mut ChaCha8Rng, n: usize, amplitude: f64) -> Vec<f64> {
    (0..n).map(|_| amplitude * r.gen::<f64>()).collect()
}

/// Independent `U[0, amplitude]` bed elevations, one per cell.
pub fn random_bed(mesh: &Mesh, seed: u64, amplitude: f64) -> Vec<f64> {
    random_values(&mut rng(seed), mesh.n_cells(), amplitude)
}

pub(crate) fn bounding_box(mesh: &Mesh) -> (Vec2, Vec2) {
    let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in mesh.cells() {
        for v in &c.vertices {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
    }
    (lo, hi)
}

/// Paraboloid `z = depth · (r / R)²` centred on the mesh, `R` being half
/// the smaller extent of the cell centroids. Cells on the domain edge sit
/// at `z ≥ depth`.
pub fn bowl_bed(mesh: &Mesh, depth: f64) -> Vec<f64> {
    let (lo, hi) = mesh.cells().iter().fold(
        (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
        |(lo, hi), c| {
            let p = c.centroid;
            (Vec2::new(lo.x.min(p.x), lo.y.min(p.y)), Vec2::new(hi.x.max(p.x), hi.y.max(p.y)))
        },
    );
    let centre = (lo + hi) * 0.5;
    let r = 0.5 * (hi.x - lo.x).min(hi.y - lo.y);
    mesh.cells()
        .iter()
        .map(|c| depth * (c.centroid - centre).norm_sq() / (r * r))
        .collect()
}

/// V-shaped valley draining towards `x = 0`:
/// `z = s_x (x − x_min) + s_y |y − y_mid|`.
pub fn valley_bed(mesh: &Mesh, along: f64, across: f64) -> Vec<f64> {
    let (lo, hi) = bounding_box(mesh);
    let mid = 0.5 * (lo.y + hi.y);
    mesh.cells()
        .iter()
        .map(|c| along * (c.centroid.x - lo.x) + across * (c.centroid.y - mid).abs())
        .collect()
}

/// Closed ghosts far above any water level in the setups below.
pub(crate) fn wall(bed: &[f64]) -> AltitudePolicy {
    AltitudePolicy::Fixed(bed.iter().copied().fold(0.0, f64::max) + 100.0)
}

/// Lake at rest over a random bed `z ~ U[0, 1]` with random porosity
/// `θ ~ U[0.05, 1]`, free surface at 1.5 m so every cell is wet.
pub fn random_lake(kind: MeshKind, n: usize, seed: u64) -> Result<Setup> {
    let mut r = rng(seed);
    let mesh = build_structured_mesh(kind, n, n, 1.0, Vec2::ZERO)?;
    let z = random_values(&mut r, mesh.n_cells(), 1.0);
    let theta: Vec<f64> = (0..mesh.n_cells()).map(|_| r.gen_range(0.05..=1.0)).collect();
    let mesh = mesh.attach_ghosts(wall(&z), &z);
    let terrain = Terrain::new(z, theta)?;
    let model = Model::new(mesh, terrain, Physics::default().with_friction(0.1, 0.02))?;
    let state = state::make_lake_state(&model.mesh, &model.terrain, GRAVITY * 1.5, GRAVITY);
    Ok(Setup { model, state })
}

/// Lake in a paraboloid bowl wetting about `wet_fraction` of the cells,
/// with free-discharge ghosts. The boundary ring stays dry.
pub fn bowl_lake(kind: MeshKind, n: usize, wet_fraction: f64) -> Result<Setup> {
    if !(wet_fraction > 0.0 && wet_fraction < 1.0) {
        return Err(Error::Config(format!("wet fraction must lie in (0, 1), got {wet_fraction}")));
    }
    let mesh = build_structured_mesh(kind, n, n, 1.0, Vec2::ZERO)?;
    let z = bowl_bed(&mesh, 2.0);
    let mut sorted = z.clone();
    sorted.sort_by(f64::total_cmp);
    let level = sorted[(wet_fraction * z.len() as f64) as usize];
    if level > 2.0 {
        return Err(Error::Config(format!(
            "wet fraction {wet_fraction} floods the rim of a {n}x{n} bowl"
        )));
    }
    let mesh = mesh.attach_ghosts(AltitudePolicy::CopyOwner, &z);
    let terrain = Terrain::new(z, vec![0.6; mesh.n_cells()])?;
    let model = Model::new(mesh, terrain, Physics::default().with_friction(0.1, 0.02))?;
    let state = state::make_lake_state(&model.mesh, &model.terrain, GRAVITY * level, GRAVITY);
    Ok(Setup { model, state })
}

/// Dam break inside a closed bowl: free surface 1.2 m left of the centre,
/// 0.5 m right of it, over a bowl rising to 2 m at the rim.
/// `friction` is `(alpha_p, alpha_s)`.
pub fn closed_dam_break(
    kind: MeshKind,
    n: usize,
    theta: f64,
    viscosity: bool,
    friction: Option<(f64, f64)>,
) -> Result<Setup> {
    let mesh = build_structured_mesh(kind, n, n, 1.0, Vec2::ZERO)?;
    let z = bowl_bed(&mesh, 2.0);
    let (lo, hi) = bounding_box(&mesh);
    let cx = 0.5 * (lo.x + hi.x);
    let h = mesh
        .cells()
        .iter()
        .zip(&z)
        .map(|(c, &zi)| {
            let level = if c.centroid.x < cx { 1.2 } else { 0.5 };
            (level - zi).max(0.0)
        })
        .collect();
    let mesh = mesh.attach_ghosts(wall(&z), &z);
    let terrain = Terrain::new(z, vec![theta; mesh.n_cells()])?;
    let mut physics = Physics::default().with_viscosity(viscosity);
    if let Some((ap, as_)) = friction {
        physics = physics.with_friction(ap, as_);
    }
    let model = Model::new(mesh, terrain, physics)?;
    Ok(Setup {
        model,
        state: FieldState::still(h)?,
    })
}

/// Sum of a few random plane waves scaled into `[0, 1]`, smooth on the
/// scale of `span`.
fn smooth_field(r: &mut ChaCha8Rng, mesh: &Mesh, modes: usize) -> Vec<f64> {
    let (lo, hi) = bounding_box(mesh);
    let span = hi - lo;
    let waves: Vec<(f64, f64, f64, f64)> = (0..modes)
        .map(|_| {
            (
                r.gen_range(0.2..1.0),
                r.gen_range(0.5..3.0),
                r.gen_range(0.5..3.0),
                r.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let total: f64 = waves.iter().map(|w| w.0).sum();
    mesh.cells()
        .iter()
        .map(|c| {
            let p = c.centroid - lo;
            let s: f64 = waves
                .iter()
                .map(|&(a, kx, ky, ph)| a * (1.0 + (std::f64::consts::TAU * (kx * p.x / span.x + ky * p.y / span.y) + ph).cos()))
                .sum();
            0.5 * s / total
        })
        .collect()
}

/// Randomised dam break for positivity stress tests: smooth random bed and
/// porosity, two water levels split by a random line, dry patches, random
/// vegetation drag and either closed or free boundaries.
pub fn random_dam_break(seed: u64, n: usize) -> Result<Setup> {
    let mut r = rng(seed);
    let kind = if r.gen_bool(0.5) {
        MeshKind::Rectangular
    } else {
        MeshKind::Hexagonal
    };
    let mesh = build_structured_mesh(kind, n, n, r.gen_range(0.5..2.0), Vec2::ZERO)?;
    let (lo, hi) = bounding_box(&mesh);
    let span = hi - lo;
    let relief = r.gen_range(0.2..1.5);
    let z: Vec<f64> = smooth_field(&mut r, &mesh, 4).into_iter().map(|s| relief * s).collect();
    let theta_min = r.gen_range(0.05..0.9);
    let theta: Vec<f64> = smooth_field(&mut r, &mesh, 3)
        .into_iter()
        .map(|s| theta_min + (1.0 - theta_min) * s)
        .collect();
    let angle = r.gen_range(0.0..std::f64::consts::TAU);
    let normal = Vec2::new(angle.cos(), angle.sin());
    let centre = lo + Vec2::new(r.gen::<f64>() * span.x, r.gen::<f64>() * span.y);
    let high = r.gen_range(0.3..2.0) * relief + 0.1;
    let low = r.gen_range(0.0..0.5) * relief;
    let h = mesh
        .cells()
        .iter()
        .zip(&z)
        .map(|(c, &zi)| {
            let level = if (c.centroid - centre).dot(normal) < 0.0 { high } else { low };
            (level - zi).max(0.0)
        })
        .collect();
    let policy = if r.gen_bool(0.5) {
        wall(&z)
    } else {
        AltitudePolicy::CopyOwner
    };
    let mesh = mesh.attach_ghosts(policy, &z);
    let physics = Physics::default()
        .with_friction(r.gen_range(0.01..0.2), r.gen_range(0.005..0.05))
        .with_viscosity(true);
    let model = Model::new(mesh, Terrain::new(z, theta)?, physics)?;
    Ok(Setup {
        model,
        state: FieldState::still(h)?,
    })
}

/// Steady uniform flow down an inclined plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformFlowCase {
    pub n: usize,
    pub slope: Vec2,
    pub theta: f64,
    pub alpha_p: f64,
    pub alpha_s: f64,
    pub h: f64,
    pub steps: usize,
}

impl Default for UniformFlowCase {
    fn default() -> Self {
        UniformFlowCase {
            n: 64,
            slope: Vec2::new(0.01, 0.0),
            theta: 0.7,
            alpha_p: 0.1,
            alpha_s: 0.02,
            h: 0.5,
            steps: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformFlowResult {
    pub window_cells: usize,
    /// Largest per-step relative change of `h` or `v` inside the window.
    pub max_step_change: f64,
    /// Largest relative deviation of `v` from the steady velocity inside
    /// the window after the last step.
    pub max_velocity_error: f64,
    pub velocity: Vec2,
}

pub fn uniform_flow_setup(case: &UniformFlowCase) -> Result<Setup> {
    let mesh = build_structured_mesh(MeshKind::Rectangular, case.n, case.n, 1.0, Vec2::ZERO)?;
    let z = state::planar_bed(&mesh, case.slope, 0.0);
    let mesh = mesh.attach_ghosts(AltitudePolicy::CopyOwner, &z);
    let terrain = Terrain::new(z, vec![case.theta; mesh.n_cells()])?;
    let physics = Physics::default().with_friction(case.alpha_p, case.alpha_s);
    let model = Model::new(mesh, terrain, physics)?;
    let state = state::make_uniform_flow_state(
        &model.mesh,
        case.slope,
        case.theta,
        case.h,
        &model.physics.friction,
        model.physics.g,
    )?;
    Ok(Setup { model, state })
}

/// Runs the uniform-flow case and measures it on the cells that boundary
/// disturbances cannot reach: each step couples nearest neighbours only, so
/// cells more than `steps + 1` cells from the edge evolve as on an
/// unbounded plane.
pub fn run_uniform_flow(case: &UniformFlowCase, policy: &StepPolicy) -> Result<UniformFlowResult> {
    let Setup { model, mut state } = uniform_flow_setup(case)?;
    let v_exact = state::uniform_flow_velocity(
        case.slope,
        case.theta,
        case.h,
        &model.physics.friction,
        model.physics.g,
    )?;
    let margin = (case.steps + 2) as f64;
    let extent = case.n as f64;
    let window: Vec<usize> = model
        .mesh
        .cells()
        .iter()
        .filter(|c| {
            let p = c.centroid;
            p.x > margin && p.y > margin && p.x < extent - margin && p.y < extent - margin
        })
        .map(|c| c.id)
        .collect();
    if window.is_empty() {
        return Err(Error::Config("mesh too small for the requested number of steps".into()));
    }
    let mut max_change = 0.0f64;
    for _ in 0..case.steps {
        let (next, _) = timestep::advance(&model, &state, policy)?;
        for &i in &window {
            let dh = (next.h[i] - state.h[i]).abs() / state.h[i];
            let dv = (next.v[i] - state.v[i]).norm() / state.v[i].norm();
            max_change = max_change.max(dh).max(dv);
        }
        state = next;
    }
    let max_velocity_error = window
        .iter()
        .map(|&i| (state.v[i] - v_exact).norm() / v_exact.norm())
        .fold(0.0, f64::max);
    Ok(UniformFlowResult {
        window_cells: window.len(),
        max_step_change: max_change,
        max_velocity_error,
        velocity: v_exact,
    })
}

/// Free-discharge drainage of a vegetated valley.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrainCase {
    pub kind: MeshKind,
    pub n: usize,
    pub spacing: f64,
    pub theta: f64,
    pub h0: f64,
    pub alpha_p: f64,
    pub alpha_s: f64,
    pub slope_along: f64,
    pub slope_across: f64,
    pub t_end: f64,
    pub output_every: f64,
}

impl Default for DrainCase {
    fn default() -> Self {
        DrainCase {
            kind: MeshKind::Rectangular,
            n: 64,
            spacing: 5.0,
            theta: 0.35,
            h0: 0.05,
            alpha_p: 0.1,
            alpha_s: 0.01,
            slope_along: 0.02,
            slope_across: 0.05,
            t_end: 600.0,
            output_every: 20.0,
        }
    }
}

pub fn drain_setup(case: &DrainCase) -> Result<Setup> {
    let mesh = build_structured_mesh(case.kind, case.n, case.n, case.spacing, Vec2::ZERO)?;
    let z = valley_bed(&mesh, case.slope_along, case.slope_across);
    let mesh = mesh.attach_ghosts(AltitudePolicy::CopyOwner, &z);
    let terrain = Terrain::new(z, vec![case.theta; mesh.n_cells()])?;
    let physics = Physics::default().with_friction(case.alpha_p, case.alpha_s);
    let model = Model::new(mesh, terrain, physics)?;
    let state = FieldState::still(vec![case.h0; model.n_cells()])?;
    Ok(Setup { model, state })
}

/// Runs the drainage case and returns the water-content series at every
/// output time.
pub fn run_drain(case: &DrainCase, policy: &StepPolicy) -> Result<Vec<SeriesRow>> {
    let Setup { model, state } = drain_setup(case)?;
    let v0 = diagnostics::water_volume(&model, &state);
    let schedule = Schedule {
        series_every: Some(case.output_every),
        ..Schedule::until(case.t_end)
    };
    let mut rows = Vec::new();
    driver::run(&model, state, policy, &schedule, |ev| {
        if let Event::Output { state, series: true, .. } = ev {
            rows.push(diagnostics::series_row(&model, state, v0));
        }
        Ok(())
    })
    .map_err(|a| a.error)?;
    Ok(rows)
}
