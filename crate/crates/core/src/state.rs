//! Terrain and flow fields, variable conversions, and stationary states.

use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::physics::FrictionParams;
use crate::vec2::Vec2;

/// Per-cell bed elevation `z` (m) and porosity `θ ∈ (0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Terrain {
    pub z: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Terrain {
    pub fn new(z: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if z.len() != theta.len() {
            return Err(Error::LengthMismatch(z.len(), theta.len()));
        }
        if let Some(i) = theta.iter().position(|&t| !(t > 0.0 && t <= 1.0)) {
            return Err(Error::State(format!(
                "porosity must lie in (0, 1], cell {i} has {}",
                theta[i]
            )));
        }
        if let Some(i) = z.iter().position(|z| !z.is_finite()) {
            return Err(Error::State(format!("bed elevation of cell {i} is not finite")));
        }
        Ok(Terrain { z, theta })
    }

    pub fn uniform(n: usize, z: f64, theta: f64) -> Result<Self> {
        Terrain::new(vec![z; n], vec![theta; n])
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }
}

/// Primitive flow state: depth `h` (m), velocity `v` (m/s), time `t` (s).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub h: Vec<f64>,
    pub v: Vec<Vec2>,
    pub t: f64,
}

impl FieldState {
    pub fn new(h: Vec<f64>, v: Vec<Vec2>, t: f64) -> Result<Self> {
        if h.len() != v.len() {
            return Err(Error::LengthMismatch(h.len(), v.len()));
        }
        if let Some(i) = h.iter().position(|&h| !(h >= 0.0) || !h.is_finite()) {
            return Err(Error::State(format!("cell {i} has invalid depth {}", h[i])));
        }
        Ok(FieldState { h, v, t })
    }

    pub fn still(h: Vec<f64>) -> Result<Self> {
        let n = h.len();
        FieldState::new(h, vec![Vec2::ZERO; n], 0.0)
    }

    pub fn dry(n: usize) -> Self {
        FieldState {
            h: vec![0.0; n],
            v: vec![Vec2::ZERO; n],
            t: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    pub fn to_conservative(&self, terrain: &Terrain) -> ConservativeView {
        let theta_h: Vec<f64> = self
            .h
            .iter()
            .zip(&terrain.theta)
            .map(|(&h, &th)| th * h)
            .collect();
        let theta_hv = theta_h.iter().zip(&self.v).map(|(&q, &v)| v * q).collect();
        ConservativeView { theta_h, theta_hv }
    }

    /// Recovers primitives; cells with `h ≤ h_dry` get zero velocity.
    pub fn from_conservative(view: &ConservativeView, terrain: &Terrain, t: f64, h_dry: f64) -> Self {
        let mut h = Vec::with_capacity(view.theta_h.len());
        let mut v = Vec::with_capacity(view.theta_h.len());
        for i in 0..view.theta_h.len() {
            let q = view.theta_h[i].max(0.0);
            let th = terrain.theta[i];
            let hi = depth_from_mass(q, th);
            h.push(hi);
            if hi <= h_dry || q == 0.0 {
                v.push(Vec2::ZERO);
            } else {
                v.push(view.theta_hv[i] * (1.0 / q));
            }
        }
        FieldState { h, v, t }
    }
}

/// Solves `fl(θ·h) = q` for `h`, preferring the float closest to `q / θ`.
fn depth_from_mass(q: f64, theta: f64) -> f64 {
    let h = q / theta;
    if theta * h == q {
        return h;
    }
    for cand in [next_up(h), next_down(h)] {
        if theta * cand == q {
            return cand;
        }
    }
    h
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let b = x.to_bits();
    f64::from_bits(if x > 0.0 { b + 1 } else { b - 1 })
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// Conservative variables `θh` (m) and `θhv` (m²/s).
#[derive(Debug, Clone, PartialEq)]
pub struct ConservativeView {
    pub theta_h: Vec<f64>,
    pub theta_hv: Vec<Vec2>,
}

/// Free-surface level `w = g (z + h)` per cell.
pub fn free_surface(state: &FieldState, terrain: &Terrain, g: f64) -> Vec<f64> {
    state
        .h
        .iter()
        .zip(&terrain.z)
        .map(|(&h, &z)| g * (z + h))
        .collect()
}

/// Lake at rest with free surface `w_level` (m²/s²).
///
/// Each wet depth is nudged by at most a few ulps so that `z + h` rounds to
/// exactly the same level in every cell; the free surface is then bitwise
/// constant and the lake is an exact fixed point of the scheme. Some levels
/// cannot be hit from every bed value (a sum that falls halfway between two
/// doubles rounds to even, so an odd level may be unreachable), in which
/// case low mantissa bits of the level are cleared until every wet cell
/// reaches it. That always succeeds when no depth exceeds the level's
/// binade, e.g. for `0 <= z < level`.
pub fn make_lake_state(mesh: &Mesh, terrain: &Terrain, w_level: f64, g: f64) -> FieldState {
    let n = mesh.n_cells();
    let raw = (w_level / g).to_bits();
    let even = f64::from_bits(raw & !1);
    let mut h = Vec::with_capacity(n);
    for bits in 0..53 {
        let level = f64::from_bits(raw & !((1u64 << bits) - 1));
        h.clear();
        h.extend((0..n).map_while(|i| lake_depth(terrain.z[i], level)));
        if h.len() == n {
            break;
        }
    }
    // A bed far below the level can put h on a coarser grid than the level
    // itself; some cells then miss it by one ulp.
    if h.len() != n {
        h = terrain
            .z
            .iter()
            .map(|&z| lake_depth(z, even).unwrap_or(even - z))
            .collect();
    }
    FieldState {
        h,
        v: vec![Vec2::ZERO; n],
        t: 0.0,
    }
}

/// Depth with `z + h == level` exactly, `Some(0)` above the level, `None`
/// when no nearby depth hits the level.
fn lake_depth(z: f64, level: f64) -> Option<f64> {
    if !(z < level) {
        return Some(0.0);
    }
    let h0 = level - z;
    if z + h0 == level {
        return Some(h0);
    }
    let mut up = h0;
    let mut down = h0;
    for _ in 0..8 {
        up = next_up(up);
        if z + up == level {
            return Some(up);
        }
        down = next_down(down);
        if down > 0.0 && z + down == level {
            return Some(down);
        }
    }
    None
}

/// Bed `z_i = z0 + ξ · x̄_i` sampled at cell centroids.
pub fn planar_bed(mesh: &Mesh, slope: Vec2, z0: f64) -> Vec<f64> {
    mesh.cells()
        .iter()
        .map(|c| z0 + slope.dot(c.centroid))
        .collect()
}

/// Velocity of steady uniform flow of depth `h` down a plane of slope `ξ`,
/// balancing gravity against friction: `K |v| v = −θ h g ξ`.
pub fn uniform_flow_velocity(
    slope: Vec2,
    theta: f64,
    h: f64,
    friction: &FrictionParams,
    g: f64,
) -> Result<Vec2> {
    let s = slope.norm();
    if !(s > 0.0) {
        return Err(Error::State("uniform flow needs a nonzero slope".into()));
    }
    if !(h > 0.0) {
        return Err(Error::State(format!("uniform flow needs h > 0, got {h}")));
    }
    let k = friction.k(h, theta);
    if !(k > 0.0) {
        return Err(Error::State("uniform flow needs positive friction".into()));
    }
    let speed_over_slope = (theta * h * g / (k * s)).sqrt();
    Ok(slope * (-speed_over_slope))
}

/// Constant state `(h, v)` that is stationary on the plane `z = z0 + ξ·x`.
/// The terrain must have been built with [`planar_bed`] and uniform `θ`.
pub fn make_uniform_flow_state(
    mesh: &Mesh,
    slope: Vec2,
    theta: f64,
    h: f64,
    friction: &FrictionParams,
    g: f64,
) -> Result<FieldState> {
    let v = uniform_flow_velocity(slope, theta, h, friction, g)?;
    let n = mesh.n_cells();
    Ok(FieldState {
        h: vec![h; n],
        v: vec![v; n],
        t: 0.0,
    })
}
