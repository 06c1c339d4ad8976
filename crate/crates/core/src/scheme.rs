//! Interface values and the semidiscrete spatial operators.
//!
//! For an edge `(i, j)` with unit normal `n` from `i` to `j` and length `l`:
//!
//! - mass flux out of `i`: `l (θh)_up v_n`
//! - momentum flux out of `i`: `l (θh)_up v_(i,j) v_n`
//! - free-surface force on `i`: `−½ l (w_j − w_i) (θh)_s n`
//!
//! where `v_(i,j)` is the mean velocity, `v_n = v_(i,j)·n`, `(θh)_up` is taken
//! from the upwind cell, and `(θh)_s` switches to the cell with the higher
//! free surface when `v_n` is exactly zero. On a lake at rest every term is an
//! exact zero, with no roundoff.
//!
//! The computation is two passes: a per-edge flux pass, then a per-cell gather
//! that visits each cell's edges in ascending edge order. Both passes are
//! parallel and neither depends on the worker count.

use rayon::prelude::*;

use crate::mesh::{Edge, Neighbor};
use crate::model::Model;
use crate::state::FieldState;
use crate::vec2::Vec2;

/// One side of an interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Side {
    pub theta_h: f64,
    pub h: f64,
    pub v: Vec2,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceValues {
    pub v: Vec2,
    pub v_n: f64,
    pub w: f64,
    /// Upwinded `θh`; when `v_n == 0` it is `max(θ_i h_i, θ_j h_j)`, which
    /// only matters for the viscosity since the fluxes carry a factor `v_n`.
    pub theta_h_up: f64,
    pub theta_h_s: f64,
}

pub fn interface_values(left: Side, right: Side, normal: Vec2) -> InterfaceValues {
    let v = (left.v + right.v) * 0.5;
    let v_n = v.dot(normal);
    let theta_h_up = if v_n > 0.0 {
        left.theta_h
    } else if v_n < 0.0 {
        right.theta_h
    } else {
        left.theta_h.max(right.theta_h)
    };
    let theta_h_s = if v_n != 0.0 {
        theta_h_up
    } else if left.w > right.w {
        left.theta_h
    } else {
        right.theta_h
    };
    InterfaceValues {
        v,
        v_n,
        w: 0.5 * (left.w + right.w),
        theta_h_up,
        theta_h_s,
    }
}

/// Free-discharge ghost seen across a boundary edge with outward normal `n`.
///
/// The ghost carries the owner's velocity, the owner's depth on outflow and
/// zero depth otherwise, and the free surface `g z_ghost` of a dry cell.
pub fn ghost_side(owner: Side, normal: Vec2, ghost_altitude: f64, g: f64) -> Side {
    let outflow = owner.v.dot(normal) > 0.0;
    Side {
        theta_h: if outflow { owner.theta_h } else { 0.0 },
        h: if outflow { owner.h } else { 0.0 },
        v: owner.v,
        w: g * ghost_altitude,
    }
}

pub fn ghost_interface(owner: Side, normal: Vec2, ghost_altitude: f64, g: f64) -> InterfaceValues {
    interface_values(owner, ghost_side(owner, normal, ghost_altitude, g), normal)
}

/// Per-cell quantities every edge kernel reads.
pub(crate) struct CellData {
    pub theta_h: Vec<f64>,
    pub w: Vec<f64>,
}

impl CellData {
    pub fn new(model: &Model, state: &FieldState) -> Self {
        let g = model.physics.g;
        let t = &model.terrain;
        CellData {
            theta_h: state.h.iter().zip(&t.theta).map(|(&h, &th)| th * h).collect(),
            w: state.h.iter().zip(&t.z).map(|(&h, &z)| g * (z + h)).collect(),
        }
    }

    fn side(&self, state: &FieldState, i: usize) -> Side {
        Side {
            theta_h: self.theta_h[i],
            h: state.h[i],
            v: state.v[i],
            w: self.w[i],
        }
    }
}

/// Both sides of edge `e`, the right one being a ghost on the boundary.
pub(crate) fn edge_sides(model: &Model, state: &FieldState, data: &CellData, edge: &Edge) -> (Side, Side) {
    let left = data.side(state, edge.left);
    let right = match edge.right {
        Neighbor::Cell(j) => data.side(state, j),
        Neighbor::Boundary(k) => ghost_side(
            left,
            edge.normal,
            model.mesh.ghosts()[k].altitude,
            model.physics.g,
        ),
    };
    (left, right)
}

/// Interface values on every edge, in edge order.
pub fn all_interface_values(model: &Model, state: &FieldState) -> Vec<InterfaceValues> {
    let data = CellData::new(model, state);
    model
        .mesh
        .edges()
        .par_iter()
        .map(|edge| {
            let (l, r) = edge_sides(model, state, &data, edge);
            interface_values(l, r, edge.normal)
        })
        .collect()
}

/// Wave speed `|v| + √(g h)`.
#[inline]
pub fn wave_speed(h: f64, v: Vec2, g: f64) -> f64 {
    v.norm() + (g * h.max(0.0)).sqrt()
}

/// Artificial viscosity `μ_(i,j) = (θh)_(i,j) max(c_i, c_j)` per edge.
pub fn viscosity_coefficients(model: &Model, state: &FieldState) -> Vec<f64> {
    let data = CellData::new(model, state);
    let g = model.physics.g;
    model
        .mesh
        .edges()
        .par_iter()
        .map(|edge| {
            let (l, r) = edge_sides(model, state, &data, edge);
            let iv = interface_values(l, r, edge.normal);
            let c = wave_speed(l.h, l.v, g).max(wave_speed(r.h, r.v, g));
            iv.theta_h_up * c
        })
        .collect()
}

/// Right-hand side of the semidiscrete system, per cell.
///
/// `σ d(θh)/dt = mass`, `σ d(θhv)/dt = transport + pressure + friction`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemidiscreteRhs {
    /// `L_i`, m³/s.
    pub mass: Vec<f64>,
    /// `J_i` plus the viscous exchange when enabled, m⁴/s².
    pub transport: Vec<Vec2>,
    /// `S_i`, m⁴/s².
    pub pressure: Vec<Vec2>,
    /// `−σ_i K_i |v_i| v_i`; applied implicitly by the integrator.
    pub friction: Vec<Vec2>,
    /// Net mass flux out through ghost edges, m³/s.
    pub boundary_outflow: f64,
}

impl SemidiscreteRhs {
    /// `J + S`, the explicit part of the momentum rate.
    pub fn hyperbolic_momentum(&self, i: usize) -> Vec2 {
        self.transport[i] + self.pressure[i]
    }

    pub fn total_momentum(&self, i: usize) -> Vec2 {
        self.transport[i] + self.pressure[i] + self.friction[i]
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.mass.iter().all(|&m| m == 0.0)
            && self
                .transport
                .iter()
                .chain(&self.pressure)
                .chain(&self.friction)
                .all(|v| v.x == 0.0 && v.y == 0.0)
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct EdgeFlux {
    mass: f64,
    momentum: Vec2,
    pressure: Vec2,
    viscous: Vec2,
}

/// Assembles the right-hand side. `mu` holds one viscosity per edge; pass
/// an empty slice to disable viscosity.
pub fn assemble_rhs(model: &Model, state: &FieldState, mu: &[f64]) -> SemidiscreteRhs {
    let mesh = &model.mesh;
    let data = CellData::new(model, state);
    let fluxes: Vec<EdgeFlux> = mesh
        .edges()
        .par_iter()
        .enumerate()
        .map(|(e, edge)| {
            let (l, r) = edge_sides(model, state, &data, edge);
            let iv = interface_values(l, r, edge.normal);
            let len = edge.length;
            let mass = len * iv.theta_h_up * iv.v_n;
            let viscous = match mu.get(e) {
                Some(&m) if m != 0.0 => (r.v - l.v) * (len * m),
                _ => Vec2::ZERO,
            };
            EdgeFlux {
                mass,
                momentum: iv.v * mass,
                pressure: edge.normal * (-0.5 * len * (r.w - l.w) * iv.theta_h_s),
                viscous,
            }
        })
        .collect();

    let friction_params = model.physics.friction;
    let per_cell: Vec<(f64, Vec2, Vec2, Vec2)> = (0..mesh.n_cells())
        .into_par_iter()
        .map(|i| {
            let mut mass = 0.0;
            let mut transport = Vec2::ZERO;
            let mut pressure = Vec2::ZERO;
            for inc in mesh.incidence(i) {
                let f = &fluxes[inc.edge];
                if inc.outward {
                    mass -= f.mass;
                    transport -= f.momentum;
                    transport += f.viscous;
                } else {
                    mass += f.mass;
                    transport += f.momentum;
                    transport -= f.viscous;
                }
                pressure += f.pressure;
            }
            let v = state.v[i];
            let k = friction_params.k(state.h[i], model.terrain.theta[i]);
            let friction = v * (-mesh.area(i) * k * v.norm());
            (mass, transport, pressure, friction)
        })
        .collect();

    let mut rhs = SemidiscreteRhs {
        mass: Vec::with_capacity(per_cell.len()),
        transport: Vec::with_capacity(per_cell.len()),
        pressure: Vec::with_capacity(per_cell.len()),
        friction: Vec::with_capacity(per_cell.len()),
        boundary_outflow: mesh
            .edges()
            .iter()
            .zip(&fluxes)
            .filter(|(e, _)| matches!(e.right, Neighbor::Boundary(_)))
            .map(|(_, f)| f.mass)
            .sum(),
    };
    for (m, t, p, f) in per_cell {
        rhs.mass.push(m);
        rhs.transport.push(t);
        rhs.pressure.push(p);
        rhs.friction.push(f);
    }
    rhs
}
