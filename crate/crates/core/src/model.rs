use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::physics::{FrictionParams, SourceModel};
use crate::state::Terrain;
use crate::{GRAVITY, H_DRY};

/// Physical constants and closures shared by every step of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Physics {
    pub g: f64,
    pub friction: FrictionParams,
    pub sources: SourceModel,
    /// Adds the edge viscosity `μ = (θh)_(i,j) max(c_i, c_j)` to the
    /// momentum transport.
    pub viscosity: bool,
    pub h_dry: f64,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            g: GRAVITY,
            friction: FrictionParams::default(),
            sources: SourceModel::none(),
            viscosity: true,
            h_dry: H_DRY,
        }
    }
}

impl Physics {
    pub fn frictionless() -> Self {
        Physics::default()
    }

    pub fn with_friction(mut self, alpha_p: f64, alpha_s: f64) -> Self {
        self.friction = FrictionParams::new(alpha_p, alpha_s);
        self
    }

    pub fn with_viscosity(mut self, on: bool) -> Self {
        self.viscosity = on;
        self
    }

    pub fn with_sources(mut self, sources: SourceModel) -> Self {
        self.sources = sources;
        self
    }
}

/// Everything that stays fixed during a run: geometry, terrain, physics.
#[derive(Debug, Clone)]
pub struct Model {
    pub mesh: Mesh,
    pub terrain: Terrain,
    pub physics: Physics,
}

impl Model {
    pub fn new(mesh: Mesh, terrain: Terrain, physics: Physics) -> Result<Self> {
        if terrain.len() != mesh.n_cells() {
            return Err(Error::LengthMismatch(terrain.len(), mesh.n_cells()));
        }
        if !mesh.has_ghosts() {
            return Err(Error::Mesh("boundary ghosts must be attached before use".into()));
        }
        if !(physics.g > 0.0) {
            return Err(Error::Config(format!("g must be positive, got {}", physics.g)));
        }
        if !(physics.friction.alpha_p >= 0.0 && physics.friction.alpha_s >= 0.0) {
            return Err(Error::Config("friction strengths must be nonnegative".into()));
        }
        if !(physics.h_dry >= 0.0) {
            return Err(Error::Config("h_dry must be nonnegative".into()));
        }
        Ok(Model {
            mesh,
            terrain,
            physics,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.mesh.n_cells()
    }
}
