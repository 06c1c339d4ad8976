//! Mass, energy and water-content observables.
//!
//! Energies follow the convention `E_i = θ_i (½|v_i|² h_i + ½ g h_i² + g z_i h_i)`,
//! energy per unit plan area, so `Σ σ_i E_i` carries units of m⁵/s²
//! (multiply by the water density for joules).

use crate::error::{Error, Result};
use crate::mesh::Neighbor;
use crate::model::Model;
use crate::scheme::{self, CellData, Side};
use crate::state::FieldState;
use crate::vec2::Vec2;

/// `θ (½|v|² h + ½ g h² + g z h)`.
#[inline]
pub fn cell_energy(h: f64, v: Vec2, z: f64, theta: f64, g: f64) -> f64 {
    theta * (0.5 * v.norm_sq() * h + 0.5 * g * h * h + g * z * h)
}

/// `Σ σ θ h`, in cell order.
pub fn total_mass(model: &Model, state: &FieldState) -> f64 {
    let mut sum = 0.0;
    for (i, &h) in state.h.iter().enumerate() {
        sum += model.mesh.area(i) * model.terrain.theta[i] * h;
    }
    sum
}

/// `Σ σ h`, the volume the water content is measured in.
pub fn water_volume(model: &Model, state: &FieldState) -> f64 {
    let mut sum = 0.0;
    for (i, &h) in state.h.iter().enumerate() {
        sum += model.mesh.area(i) * h;
    }
    sum
}

pub fn cell_energies(model: &Model, state: &FieldState) -> Vec<f64> {
    let t = &model.terrain;
    (0..state.len())
        .map(|i| cell_energy(state.h[i], state.v[i], t.z[i], t.theta[i], model.physics.g))
        .collect()
}

/// `Σ σ_i E_i`, in cell order.
pub fn total_energy(model: &Model, state: &FieldState) -> f64 {
    let mut sum = 0.0;
    for (i, e) in cell_energies(model, state).into_iter().enumerate() {
        sum += model.mesh.area(i) * e;
    }
    sum
}

/// Energy flux across an interface,
/// `H = ½ (θh)_s (w_i v_j + w_j v_i + ⟨v_i, v_j⟩ v_(i,j))`.
///
/// Swapping the two sides leaves `H` unchanged. For identical sides it
/// reduces to the continuous flux `θh v (½|v|² + w)`.
pub fn energy_flux(left: Side, right: Side, normal: Vec2) -> Vec2 {
    let iv = scheme::interface_values(left, right, normal);
    let cross = left.v * right.w + right.v * left.w + iv.v * left.v.dot(right.v);
    cross * (0.5 * iv.theta_h_s)
}

/// [`energy_flux`] on edge `e` of the model, ghosts included.
pub fn energy_flux_h(model: &Model, state: &FieldState, e: usize) -> Vec2 {
    let data = CellData::new(model, state);
    let edge = &model.mesh.edges()[e];
    let (l, r) = scheme::edge_sides(model, state, &data, edge);
    energy_flux(l, r, edge.normal)
}

/// Instantaneous energy budget of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub cells: Vec<f64>,
    /// `Σ σ_i E_i` in cell order.
    pub total: f64,
    /// `Σ l ⟨H, n⟩` over ghost edges, energy leaving per second.
    pub boundary_flux: f64,
    /// `Σ σ K |v|³`.
    pub friction_rate: f64,
    /// `Σ l μ |v_i − v_j|²` over interior edges; zero with viscosity off.
    pub viscous_rate: f64,
}

pub fn energy_report(model: &Model, state: &FieldState) -> EnergyReport {
    let mesh = &model.mesh;
    let cells = cell_energies(model, state);
    let mut total = 0.0;
    for (i, e) in cells.iter().enumerate() {
        total += mesh.area(i) * e;
    }
    let data = CellData::new(model, state);
    let mu = if model.physics.viscosity {
        scheme::viscosity_coefficients(model, state)
    } else {
        vec![0.0; mesh.edges().len()]
    };
    let mut boundary_flux = 0.0;
    let mut viscous_rate = 0.0;
    for (e, edge) in mesh.edges().iter().enumerate() {
        match edge.right {
            Neighbor::Boundary(_) => {
                let (l, r) = scheme::edge_sides(model, state, &data, edge);
                boundary_flux += edge.length * energy_flux(l, r, edge.normal).dot(edge.normal);
            }
            Neighbor::Cell(j) => {
                viscous_rate += edge.length * mu[e] * (state.v[j] - state.v[edge.left]).norm_sq();
            }
        }
    }
    let mut friction_rate = 0.0;
    for i in 0..mesh.n_cells() {
        let k = model.physics.friction.k(state.h[i], model.terrain.theta[i]);
        friction_rate += mesh.area(i) * k * state.v[i].norm().powi(3);
    }
    EnergyReport {
        cells,
        total,
        boundary_flux,
        friction_rate,
        viscous_rate,
    }
}

/// Per-cell residual of the semidiscrete energy balance
/// `σ dE/dt + Σ l ⟨H, n⟩ + σ K |v|³`, with `dE/dt` taken by the chain rule
/// from the inviscid right-hand side. Sources are ignored.
pub fn energy_identity_residual(model: &Model, state: &FieldState) -> Vec<f64> {
    let mesh = &model.mesh;
    let rhs = scheme::assemble_rhs(model, state, &[]);
    let data = CellData::new(model, state);
    let flux: Vec<f64> = mesh
        .edges()
        .iter()
        .map(|edge| {
            let (l, r) = scheme::edge_sides(model, state, &data, edge);
            edge.length * energy_flux(l, r, edge.normal).dot(edge.normal)
        })
        .collect();
    (0..mesh.n_cells())
        .map(|i| {
            let v = state.v[i];
            let rate = (data.w[i] - 0.5 * v.norm_sq()) * rhs.mass[i] + v.dot(rhs.total_momentum(i));
            let mut out = 0.0;
            for inc in mesh.incidence(i) {
                if inc.outward {
                    out += flux[inc.edge];
                } else {
                    out -= flux[inc.edge];
                }
            }
            let k = model.physics.friction.k(state.h[i], model.terrain.theta[i]);
            rate + out + mesh.area(i) * k * v.norm().powi(3)
        })
        .collect()
}

/// Relative water content `q(t) = Σσh(t) / Σσh(0)` of a sequence of states.
pub fn water_content_q(model: &Model, history: &[FieldState]) -> Result<Vec<(f64, f64)>> {
    let first = history
        .first()
        .ok_or_else(|| Error::State("water content needs at least one state".into()))?;
    let v0 = water_volume(model, first);
    if !(v0 > 0.0) {
        return Err(Error::State("initial water volume must be positive".into()));
    }
    Ok(history
        .iter()
        .map(|s| (s.t, water_volume(model, s) / v0))
        .collect())
}

/// One row of the `(t, q, E, mass)` time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    /// `V(t) / V(0)`; NaN when the domain starts dry.
    pub q: f64,
    /// Water volume `Σ σ h`, m³.
    pub volume: f64,
    pub energy: f64,
    pub mass: f64,
}

/// Series row of `state`, `volume0` being the initial `Σσh`.
pub fn series_row(model: &Model, state: &FieldState, volume0: f64) -> SeriesRow {
    let volume = water_volume(model, state);
    SeriesRow {
        t: state.t,
        q: if volume0 > 0.0 { volume / volume0 } else { f64::NAN },
        volume,
        energy: total_energy(model, state),
        mass: total_mass(model, state),
    }
}

/// Decomposition of the energy change over one step.
///
/// `delta = mass_term + momentum_term + surface_term + kinetic_term` holds
/// as an algebraic identity. The scheme turns the first two into
/// `friction − viscous + boundary` plus the source contribution, which is
/// what lands in `remainder` together with roundoff.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyAudit {
    pub delta: f64,
    /// `Σ θσ (hⁿ⁺¹ − hⁿ)(wⁿ − ½|vⁿ|²)`.
    pub mass_term: f64,
    /// `Σ θσ ⟨(hv)ⁿ⁺¹ − (hv)ⁿ, vⁿ⟩`.
    pub momentum_term: f64,
    /// `g Σ θσ (hⁿ⁺¹ − hⁿ)² / 2`, never negative.
    pub surface_term: f64,
    /// `Σ θσ hⁿ⁺¹ |vⁿ⁺¹ − vⁿ|² / 2`, never negative.
    pub kinetic_term: f64,
    /// `−Δt Σ σ K(hⁿ⁺¹) |vⁿ⁺¹| ⟨vⁿ⁺¹, vⁿ⟩`.
    pub friction: f64,
    /// `Δt Σ l μ |v_i − v_j|²`, never negative.
    pub viscous: f64,
    /// `−Δt Σ l ⟨H, n⟩` over ghost edges at `tⁿ`.
    pub boundary: f64,
    /// `delta − (surface + kinetic + friction − viscous + boundary)`:
    /// source contribution plus roundoff.
    pub remainder: f64,
}

impl EnergyAudit {
    /// Roundoff left in the four-term identity.
    pub fn identity_residual(&self) -> f64 {
        self.delta - (self.mass_term + self.momentum_term + self.surface_term + self.kinetic_term)
    }
}

pub fn energy_step_audit(model: &Model, prev: &FieldState, next: &FieldState, dt: f64) -> EnergyAudit {
    let mesh = &model.mesh;
    let g = model.physics.g;
    let t = &model.terrain;
    let mut a = EnergyAudit {
        delta: total_energy(model, next) - total_energy(model, prev),
        ..EnergyAudit::default()
    };
    for i in 0..mesh.n_cells() {
        let ts = t.theta[i] * mesh.area(i);
        let (h0, h1) = (prev.h[i], next.h[i]);
        let (v0, v1) = (prev.v[i], next.v[i]);
        let dh = h1 - h0;
        let w0 = g * (t.z[i] + h0);
        a.mass_term += ts * dh * (w0 - 0.5 * v0.norm_sq());
        a.momentum_term += ts * (v1 * h1 - v0 * h0).dot(v0);
        a.surface_term += 0.5 * g * ts * dh * dh;
        a.kinetic_term += 0.5 * ts * h1 * (v1 - v0).norm_sq();
        let k = model.physics.friction.k(h1, t.theta[i]);
        a.friction -= dt * mesh.area(i) * k * v1.norm() * v1.dot(v0);
    }
    let report = energy_report(model, prev);
    a.viscous = dt * report.viscous_rate;
    a.boundary = -dt * report.boundary_flux;
    a.remainder = a.delta - (a.surface_term + a.kinetic_term + a.friction - a.viscous + a.boundary);
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GRAVITY;

    fn side(theta_h: f64, v: Vec2, w: f64) -> Side {
        Side {
            theta_h,
            h: theta_h,
            v,
            w,
        }
    }

    #[test]
    fn cell_energy_examples() {
        assert_eq!(cell_energy(0.0, Vec2::new(3.0, 1.0), 2.0, 0.5, GRAVITY), 0.0);
        assert!((cell_energy(2.0, Vec2::ZERO, 0.0, 1.0, GRAVITY) - 19.62).abs() < 1e-12);
        let e = cell_energy(1.3, Vec2::new(0.2, -0.7), 0.4, 1.0, GRAVITY);
        assert!((cell_energy(1.3, Vec2::new(0.2, -0.7), 0.4, 0.25, GRAVITY) - 0.25 * e).abs() < 1e-14);
    }

    #[test]
    fn flux_of_still_water_vanishes() {
        let n = Vec2::new(0.0, 1.0);
        assert_eq!(energy_flux(side(1.0, Vec2::ZERO, 3.0), side(2.0, Vec2::ZERO, 5.0), n), Vec2::ZERO);
    }

    #[test]
    fn flux_of_identical_states_is_continuous_flux() {
        let v = Vec2::new(0.8, -0.3);
        let s = side(1.7, v, 14.0);
        let h = energy_flux(s, s, Vec2::new(0.6, 0.8));
        let expect = v * (1.7 * (0.5 * v.norm_sq() + 14.0));
        assert!((h - expect).norm() < 1e-13);
    }

    #[test]
    fn flux_is_symmetric_under_swap() {
        let a = side(1.1, Vec2::new(0.4, 0.1), 12.0);
        let b = side(0.7, Vec2::new(0.9, -0.2), 9.0);
        let n = Vec2::new(1.0, 0.0);
        let h1 = energy_flux(a, b, n);
        let h2 = energy_flux(b, a, -n);
        assert!((h1 - h2).norm() < 1e-14);
    }
}
