//! First-order fractional-step integrator.
//!
//! One step of length `Δt` runs, per cell:
//!
//! 1. explicit transport: `σ(θh)* = σ(θh)ⁿ + Δt L`,
//!    `σ(θhv)* = σ(θhv)ⁿ + Δt (J + S)` (viscosity folded into `J`);
//! 2. implicit mass source at `tⁿ⁺¹`: `(θh)ⁿ⁺¹ = (θh)* + Δt M(tⁿ⁺¹, hⁿ⁺¹)`;
//! 3. implicit friction: `(θh)ⁿ⁺¹ vⁿ⁺¹ + Δt K(hⁿ⁺¹) |vⁿ⁺¹| vⁿ⁺¹ = (θhv)*`.
//!
//! Depths are updated through increments (`h* = h + ΔL / θ`) so a zero
//! right-hand side leaves the state bitwise unchanged.

use rayon::prelude::*;

use crate::diagnostics;
use crate::error::{Error, Result};
use crate::mesh::Neighbor;
use crate::model::Model;
use crate::physics::SourceModel;
use crate::scheme::{self, SemidiscreteRhs};
use crate::state::FieldState;
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundMode {
    /// `τ = φ_min / v_max`, keeps the transport step positivity preserving.
    Positivity,
    /// `τ = φ_min / max(|v| + √(g h))`.
    Cfl,
    /// The smaller of the two.
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub safety: f64,
    pub mode: BoundMode,
    pub dt_max: f64,
    pub dt_min: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        StepPolicy {
            safety: 0.9,
            mode: BoundMode::Min,
            dt_max: 1.0,
            dt_min: 1e-12,
        }
    }
}

impl StepPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(Error::Config(format!("safety must lie in (0, 1], got {}", self.safety)));
        }
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_max) {
            return Err(Error::Config(format!(
                "need 0 < dt_min <= dt_max, got {} and {}",
                self.dt_min, self.dt_max
            )));
        }
        Ok(())
    }
}

/// Positivity bound `φ_min / v_max`; `dt_max` when nothing moves.
pub fn dt_positivity(model: &Model, state: &FieldState, dt_max: f64) -> f64 {
    let v_max = state.v.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if v_max > 0.0 {
        model.mesh.min_area_to_perimeter() / v_max
    } else {
        dt_max
    }
}

/// CFL bound `φ_min / c_max`; `dt_max` on a dry, still domain.
pub fn dt_cfl(model: &Model, state: &FieldState, dt_max: f64) -> f64 {
    let g = model.physics.g;
    let c_max = state
        .h
        .iter()
        .zip(&state.v)
        .map(|(&h, &v)| scheme::wave_speed(h, v, g))
        .fold(0.0, f64::max);
    if c_max > 0.0 {
        model.mesh.min_area_to_perimeter() / c_max
    } else {
        dt_max
    }
}

/// `safety · min(enabled bounds)`, capped at `dt_max`. A still domain has
/// no bound and steps at `dt_max`.
pub fn select_dt(model: &Model, state: &FieldState, policy: &StepPolicy) -> Result<f64> {
    let none = f64::INFINITY;
    let bound = match policy.mode {
        BoundMode::Positivity => dt_positivity(model, state, none),
        BoundMode::Cfl => dt_cfl(model, state, none),
        BoundMode::Min => dt_positivity(model, state, none).min(dt_cfl(model, state, none)),
    };
    let dt = (policy.safety * bound).min(policy.dt_max);
    if !(dt >= policy.dt_min) {
        return Err(Error::TimeStepTooSmall {
            t: state.t,
            dt,
            dt_min: policy.dt_min,
        });
    }
    Ok(dt)
}

/// State after the explicit transport substep.
#[derive(Debug, Clone, PartialEq)]
pub struct Intermediate {
    pub h: Vec<f64>,
    /// `(θhv)*`.
    pub momentum: Vec<Vec2>,
    /// Mass added by snapping roundoff-negative `(θh)*` to zero, m³.
    pub clamped_mass: f64,
}

/// Explicit transport substep.
///
/// Values of `(θh)*` in `[−1e-12 max(θhⁿ), 0)` are roundoff and snap to zero;
/// anything more negative means `Δt` broke the positivity bound.
pub fn hyperbolic_substep(
    model: &Model,
    state: &FieldState,
    rhs: &SemidiscreteRhs,
    dt: f64,
) -> Result<Intermediate> {
    let mesh = &model.mesh;
    let theta = &model.terrain.theta;
    let max_theta_h = state
        .h
        .iter()
        .zip(theta)
        .map(|(&h, &th)| th * h)
        .fold(0.0, f64::max);
    let tolerance = 1e-12 * max_theta_h;

    let cells: Vec<(f64, Vec2, f64)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|i| {
            let scale = dt / mesh.area(i);
            let d_mass = scale * rhs.mass[i];
            let h = if d_mass == 0.0 {
                state.h[i]
            } else {
                state.h[i] + d_mass / theta[i]
            };
            let momentum = state.v[i] * (theta[i] * state.h[i]) + rhs.hyperbolic_momentum(i) * scale;
            (h, momentum, theta[i] * h)
        })
        .collect();

    let mut out = Intermediate {
        h: Vec::with_capacity(cells.len()),
        momentum: Vec::with_capacity(cells.len()),
        clamped_mass: 0.0,
    };
    for (i, (h, momentum, theta_h)) in cells.into_iter().enumerate() {
        if h < 0.0 {
            if theta_h < -tolerance {
                return Err(Error::Positivity {
                    t: state.t,
                    cell: i,
                    value: theta_h,
                    bound: tolerance,
                });
            }
            out.clamped_mass -= mesh.area(i) * theta_h;
            out.h.push(0.0);
        } else {
            out.h.push(h);
        }
        out.momentum.push(momentum);
    }
    Ok(out)
}

/// Implicit mass-source update for one cell.
///
/// Solves `d = Δt (r(t) − θ ι(t, h* + d/θ))` and returns the new depth and
/// the depth added by clamping it at zero.
pub fn source_substep_h(
    h_star: f64,
    theta: f64,
    t_next: f64,
    sources: &SourceModel,
    dt: f64,
) -> Result<(f64, f64)> {
    if sources.is_inactive() {
        return Ok((h_star, 0.0));
    }
    let rain = sources.rain.rate(t_next);
    let law = &sources.infiltration;
    let d = if law.depends_on_depth() {
        solve_source_increment(h_star, theta, t_next, rain, sources, dt)
            .ok_or(Error::NonConvergence {
                cell: usize::MAX,
                iterations: MAX_SOURCE_ITERATIONS,
            })?
    } else {
        dt * (rain - theta * law.rate(t_next, h_star))
    };
    if d == 0.0 {
        return Ok((h_star, 0.0));
    }
    let h = h_star + d / theta;
    if h < 0.0 {
        Ok((0.0, -h))
    } else {
        Ok((h, 0.0))
    }
}

const MAX_SOURCE_ITERATIONS: usize = 100;

/// Bisection on the increasing residual `d − Δt (r − θ ι(t, h* + d/θ))`.
fn solve_source_increment(
    h_star: f64,
    theta: f64,
    t: f64,
    rain: f64,
    sources: &SourceModel,
    dt: f64,
) -> Option<f64> {
    let law = &sources.infiltration;
    let residual = |d: f64| d - dt * (rain - theta * law.rate(t, (h_star + d / theta).max(0.0)));
    let mut lo = dt * (rain - theta * law.bound());
    let mut hi = dt * rain;
    if residual(lo) >= 0.0 {
        return Some(lo);
    }
    if residual(hi) <= 0.0 {
        return Some(hi);
    }
    for _ in 0..MAX_SOURCE_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Some(mid);
        }
        if residual(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    None
}

/// Speed `s ≥ 0` solving `Δt K s² + θh s = |q|`, in the cancellation-free
/// form of the quadratic root.
#[inline]
pub fn friction_speed(theta_h: f64, q_norm: f64, k: f64, dt: f64) -> f64 {
    if q_norm == 0.0 {
        return 0.0;
    }
    if k == 0.0 {
        return q_norm / theta_h;
    }
    2.0 * q_norm / (theta_h + (theta_h * theta_h + 4.0 * dt * k * q_norm).sqrt())
}

/// Implicit friction update: the new velocity is parallel to `(θhv)*`.
pub fn friction_substep_v(theta_h: f64, momentum: Vec2, k: f64, dt: f64) -> Vec2 {
    if momentum == Vec2::ZERO || !(theta_h > 0.0) && k == 0.0 {
        return Vec2::ZERO;
    }
    if k == 0.0 {
        return Vec2::new(momentum.x / theta_h, momentum.y / theta_h);
    }
    let q = momentum.norm();
    momentum * (friction_speed(theta_h, q, k, dt) / q)
}

/// Summary of one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    /// `Σ σ θ h` after the step, m³.
    pub mass: f64,
    /// `Σ σ E` after the step.
    pub energy: f64,
    pub max_speed: f64,
    /// Mass added by zero-clamping, transport roundoff plus unmet
    /// infiltration demand, m³.
    pub clamped_mass: f64,
    /// Net mass leaving through ghost edges during the step, m³.
    pub boundary_outflow: f64,
    /// `Δt Σ l μ |v_i − v_j|²` over interior edges.
    pub viscous_dissipation: f64,
}

/// Advances one step with the time step chosen by `policy`.
pub fn advance(model: &Model, state: &FieldState, policy: &StepPolicy) -> Result<(FieldState, StepReport)> {
    let dt = select_dt(model, state, policy)?;
    advance_with_dt(model, state, dt)
}

/// Advances one step of the given length.
pub fn advance_with_dt(model: &Model, state: &FieldState, dt: f64) -> Result<(FieldState, StepReport)> {
    let mesh = &model.mesh;
    let physics = &model.physics;
    let mu = if physics.viscosity {
        scheme::viscosity_coefficients(model, state)
    } else {
        Vec::new()
    };
    let rhs = scheme::assemble_rhs(model, state, &mu);
    let star = hyperbolic_substep(model, state, &rhs, dt)?;
    let t_next = state.t + dt;

    let theta = &model.terrain.theta;
    let cells: Vec<Result<(f64, Vec2, f64)>> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|i| {
            let (h, clamp) = source_substep_h(star.h[i], theta[i], t_next, &physics.sources, dt)
                .map_err(|e| match e {
                    Error::NonConvergence { iterations, .. } => Error::NonConvergence { cell: i, iterations },
                    other => other,
                })?;
            let v = if h <= physics.h_dry {
                Vec2::ZERO
            } else {
                let k = physics.friction.k(h, theta[i]);
                friction_substep_v(theta[i] * h, star.momentum[i], k, dt)
            };
            Ok((h, v, clamp * theta[i] * mesh.area(i)))
        })
        .collect();

    let mut next = FieldState {
        h: Vec::with_capacity(cells.len()),
        v: Vec::with_capacity(cells.len()),
        t: t_next,
    };
    let mut clamped = star.clamped_mass;
    for cell in cells {
        let (h, v, c) = cell?;
        next.h.push(h);
        next.v.push(v);
        clamped += c;
    }

    let viscous_dissipation = if mu.is_empty() {
        0.0
    } else {
        dt * mesh
            .edges()
            .iter()
            .zip(&mu)
            .filter_map(|(e, &m)| match e.right {
                Neighbor::Cell(j) => Some(e.length * m * (state.v[j] - state.v[e.left]).norm_sq()),
                Neighbor::Boundary(_) => None,
            })
            .sum::<f64>()
    };

    let report = StepReport {
        t: t_next,
        dt,
        mass: diagnostics::total_mass(model, &next),
        energy: diagnostics::total_energy(model, &next),
        max_speed: next.v.iter().map(|v| v.norm()).fold(0.0, f64::max),
        clamped_mass: clamped,
        boundary_outflow: dt * rhs.boundary_outflow,
        viscous_dissipation,
    };
    Ok((next, report))
}
