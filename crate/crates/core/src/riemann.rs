//! Exact dam-break solution and the 1-D strip runner used to validate the
//! engine against it.
//!
//! The exact solution covers the classical frictionless problem on a flat bed
//! with `θ = 1`: still water of depth `h_l` left of the diaphragm and `h_r`
//! right of it, `h_l > h_r ≥ 0`. The wave pattern is a left rarefaction and a
//! right shock (or, when `h_r = 0`, a single rarefaction into the dry bed).

use crate::error::{Error, Result};
use crate::mesh::{build_structured_mesh, MeshKind};
use crate::model::{Model, Physics};
use crate::state::{FieldState, Terrain};
use crate::timestep::{self, StepPolicy};
use crate::vec2::Vec2;

/// Middle state of a dam break, precomputed once per `(h_l, h_r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DamBreak {
    pub g: f64,
    pub h_l: f64,
    pub h_r: f64,
    pub h_m: f64,
    pub u_m: f64,
    /// Shock speed; `None` for the dry-bed case.
    pub shock_speed: Option<f64>,
}

impl DamBreak {
    pub fn new(h_l: f64, h_r: f64, g: f64) -> Result<Self> {
        if !(h_r >= 0.0 && h_l > h_r && h_l.is_finite()) {
            return Err(Error::UnsupportedWavePattern(format!(
                "need h_l > h_r >= 0, got h_l = {h_l}, h_r = {h_r}"
            )));
        }
        let c_l = (g * h_l).sqrt();
        if h_r == 0.0 {
            return Ok(DamBreak {
                g,
                h_l,
                h_r,
                h_m: 0.0,
                u_m: 2.0 * c_l,
                shock_speed: None,
            });
        }
        // Rarefaction speed minus shock speed, decreasing in h_m.
        let matching = |h_m: f64| {
            2.0 * (c_l - (g * h_m).sqrt()) - (h_m - h_r) * (g * (h_m + h_r) / (2.0 * h_m * h_r)).sqrt()
        };
        let (mut lo, mut hi) = (h_r, h_l);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if matching(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h_m = 0.5 * (lo + hi);
        let u_m = 2.0 * (c_l - (g * h_m).sqrt());
        let d = DamBreak {
            g,
            h_l,
            h_r,
            h_m,
            u_m,
            shock_speed: Some(h_m * u_m / (h_m - h_r)),
        };
        let (rh, inv) = (d.rankine_hugoniot_residual(), d.invariant_residual());
        if !(rh < 1e-10 && inv < 1e-10) {
            return Err(Error::State(format!(
                "dam-break self-check failed: jump residual {rh:e}, invariant residual {inv:e}"
            )));
        }
        Ok(d)
    }

    /// Largest relative violation of the mass and momentum jump conditions
    /// across the shock; zero for the dry-bed case.
    pub fn rankine_hugoniot_residual(&self) -> f64 {
        let Some(s) = self.shock_speed else {
            return 0.0;
        };
        let g = self.g;
        let (hm, um, hr) = (self.h_m, self.u_m, self.h_r);
        let mass = (s * (hm - hr) - hm * um).abs() / (hm * um).abs().max(f64::MIN_POSITIVE);
        let flux = hm * um * um + 0.5 * g * (hm * hm - hr * hr);
        let momentum = (s * hm * um - flux).abs() / flux.abs().max(f64::MIN_POSITIVE);
        mass.max(momentum)
    }

    /// Relative change of `u + 2√(gh)` between the left and middle states.
    pub fn invariant_residual(&self) -> f64 {
        let left = 2.0 * (self.g * self.h_l).sqrt();
        let mid = self.u_m + 2.0 * (self.g * self.h_m).sqrt();
        (mid - left).abs() / left
    }

    /// `(h, u)` at similarity coordinate `ξ = (x − x₀) / t`.
    pub fn sample(&self, xi: f64) -> (f64, f64) {
        let g = self.g;
        let c_l = (g * self.h_l).sqrt();
        if xi <= -c_l {
            return (self.h_l, 0.0);
        }
        let tail = self.u_m - (g * self.h_m).sqrt();
        if xi < tail {
            let c = (2.0 * c_l - xi) / 3.0;
            return (c * c / g, 2.0 / 3.0 * (c_l + xi));
        }
        match self.shock_speed {
            Some(s) if xi < s => (self.h_m, self.u_m),
            Some(_) => (self.h_r, 0.0),
            None => (0.0, 0.0),
        }
    }
}

/// `(h, u)` of the dam break at distance `x` from the diaphragm and time `t`.
pub fn exact_dambreak(h_l: f64, h_r: f64, x: f64, t: f64, g: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) {
        return Err(Error::State(format!("exact solution needs t > 0, got {t}")));
    }
    Ok(DamBreak::new(h_l, h_r, g)?.sample(x / t))
}

/// Initial data of a 1-D Riemann problem on `[x_min, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannIC {
    pub h_l: f64,
    pub h_r: f64,
    pub v_l: f64,
    pub v_r: f64,
    pub theta_l: f64,
    pub theta_r: f64,
    pub x0: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub z: f64,
}

impl RiemannIC {
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }
}

impl Default for RiemannIC {
    fn default() -> Self {
        RiemannIC {
            h_l: 9.0,
            h_r: 1.0,
            v_l: 0.0,
            v_r: 0.0,
            theta_l: 1.0,
            theta_r: 1.0,
            x0: 1.0,
            x_min: -1.0,
            x_max: 3.0,
            z: 1.0,
        }
    }
}

/// Solver settings for [`run_riemann_1d`].
#[derive(Debug, Clone, PartialEq)]
pub struct StripRun {
    pub cells: usize,
    pub t_end: f64,
    pub friction: Option<(f64, f64)>,
    pub viscosity: bool,
    pub policy: StepPolicy,
}

impl StripRun {
    pub fn new(cells: usize, t_end: f64) -> Self {
        StripRun {
            cells,
            t_end,
            friction: None,
            viscosity: false,
            policy: StepPolicy::default(),
        }
    }
}

/// Cell-centred 1-D profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub t: f64,
    pub x: Vec<f64>,
    pub dx: f64,
    pub h: Vec<f64>,
    pub v: Vec<f64>,
}

impl Profile {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Builds the strip model and its initial state.
///
/// The strip is `cells × 1` squares. Lateral ghosts sit 1 km above the bed,
/// which closes the sides since the transverse velocity stays exactly zero;
/// the two end ghosts copy the bed, giving free discharge.
pub fn strip_setup(ic: &RiemannIC, run: &StripRun) -> Result<(Model, FieldState)> {
    if run.cells < 10 {
        return Err(Error::Config(format!("need at least 10 cells, got {}", run.cells)));
    }
    if !(ic.h_l >= 0.0 && ic.h_r >= 0.0) {
        return Err(Error::State("Riemann depths must be nonnegative".into()));
    }
    if !(ic.x_min < ic.x0 && ic.x0 < ic.x_max) {
        return Err(Error::Config("diaphragm must lie inside the strip".into()));
    }
    let dx = ic.length() / run.cells as f64;
    let n = run.cells;
    let mesh = build_structured_mesh(MeshKind::Rectangular, n, 1, dx, Vec2::new(ic.x_min, 0.0))?;
    let wall = ic.z + 1000.0;
    let mesh = mesh.attach_ghosts_with(|side| if side.normal.y.abs() > 0.5 { wall } else { ic.z });
    let left: Vec<bool> = mesh.cells().iter().map(|c| c.centroid.x < ic.x0).collect();
    let theta = left.iter().map(|&l| if l { ic.theta_l } else { ic.theta_r }).collect();
    let terrain = Terrain::new(vec![ic.z; n], theta)?;
    let mut physics = Physics::frictionless().with_viscosity(run.viscosity);
    if let Some((ap, as_)) = run.friction {
        physics = physics.with_friction(ap, as_);
    }
    let model = Model::new(mesh, terrain, physics)?;
    let h = left.iter().map(|&l| if l { ic.h_l } else { ic.h_r }).collect();
    let v = left
        .iter()
        .map(|&l| Vec2::new(if l { ic.v_l } else { ic.v_r }, 0.0))
        .collect();
    Ok((model, FieldState::new(h, v, 0.0)?))
}

/// Runs the 2-D engine on the strip up to `t_end`, landing on it exactly.
pub fn run_riemann_1d(ic: &RiemannIC, run: &StripRun) -> Result<Profile> {
    let (model, mut state) = strip_setup(ic, run)?;
    while state.t < run.t_end {
        let dt = timestep::select_dt(&model, &state, &run.policy)?;
        let remaining = run.t_end - state.t;
        let (mut next, _) = timestep::advance_with_dt(&model, &state, dt.min(remaining))?;
        if dt >= remaining {
            next.t = run.t_end;
        }
        state = next;
    }
    Ok(Profile {
        t: state.t,
        x: model.mesh.cells().iter().map(|c| c.centroid.x).collect(),
        dx: ic.length() / run.cells as f64,
        h: state.h,
        v: state.v.iter().map(|v| v.x).collect(),
    })
}

/// Exact `(h, u)` sampled at the profile's cell centres.
pub fn exact_profile(ic: &RiemannIC, x: &[f64], t: f64, g: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(t > 0.0) {
        return Err(Error::State(format!("exact solution needs t > 0, got {t}")));
    }
    let d = DamBreak::new(ic.h_l, ic.h_r, g)?;
    Ok(x.iter().map(|&xc| d.sample((xc - ic.x0) / t)).unzip())
}

/// Part of the strip that waves entering through the free-discharge ends
/// cannot have reached by time `t`: the infinite-domain solution is only
/// comparable there. Boundary signals travel at most at `|v| + √(g h)` of
/// the adjacent initial state, bounded here by twice that value.
pub fn unaffected_window(ic: &RiemannIC, t: f64, g: f64) -> (f64, f64) {
    let c_l = ic.v_l.abs() + (g * ic.h_l).sqrt();
    let c_r = ic.v_r.abs() + (g * ic.h_r).sqrt();
    (ic.x_min + 2.0 * c_l * t, ic.x_max - 2.0 * c_r * t)
}

impl Profile {
    /// Cells whose centre lies in `[a, b]`.
    pub fn window(&self, a: f64, b: f64) -> Profile {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| self.x[i] >= a && self.x[i] <= b).collect();
        Profile {
            t: self.t,
            x: keep.iter().map(|&i| self.x[i]).collect(),
            dx: self.dx,
            h: keep.iter().map(|&i| self.h[i]).collect(),
            v: keep.iter().map(|&i| self.v[i]).collect(),
        }
    }
}

/// Mean absolute depth error `Σ Δx |h − h_exact| / L`.
pub fn l1_error(profile: &Profile, exact_h: &[f64]) -> Result<f64> {
    if profile.h.len() != exact_h.len() {
        return Err(Error::LengthMismatch(profile.h.len(), exact_h.len()));
    }
    let length = profile.dx * profile.len() as f64;
    let sum: f64 = profile.h.iter().zip(exact_h).map(|(a, b)| (a - b).abs()).sum();
    Ok(profile.dx * sum / length)
}
