//! Finite-volume engine for 2-D shallow water flow over vegetated terrain.
//!
//! The vegetation enters through a per-cell porosity `θ ∈ (0, 1]` (the plan
//! fraction not occupied by stems). Unknowns are the water depth `h` and the
//! depth-averaged velocity `v`; the conserved quantities are `θh` and `θhv`.
//!
//! Module map:
//! - [`mesh`]: polygonal partitions, edge geometry, boundary ghost cells.
//! - [`state`]: terrain and flow fields, lake and uniform-flow states.
//! - [`physics`]: friction law and rain/infiltration sources.
//! - [`scheme`]: interface values and the semidiscrete right-hand side.
//! - [`timestep`]: fractional-step integrator and time-step bounds.
//! - [`diagnostics`]: energy, mass and water-content observables.
//! - [`riemann`]: exact dam-break solution and the 1-D strip runner.
//! - [`io`]: ESRI ASCII rasters, run configuration, CSV output.
//! - [`driver`]: configured runs with output schedules.
//! - [`experiments`]: canonical synthetic setups used by the CLI and tests.

pub mod diagnostics;
pub mod driver;
pub mod error;
pub mod experiments;
pub mod io;
pub mod mesh;
pub mod model;
pub mod physics;
pub mod riemann;
pub mod scheme;
pub mod state;
pub mod timestep;
pub mod vec2;

pub use error::{Error, Result};
pub use mesh::{AltitudePolicy, Mesh, MeshKind};
pub use model::{Model, Physics};
pub use physics::{FrictionParams, Infiltration, Rain, SourceModel};
pub use state::{FieldState, Terrain};
pub use timestep::{BoundMode, StepPolicy, StepReport};
pub use vec2::Vec2;

/// Standard gravitational acceleration, m/s².
pub const GRAVITY: f64 = 9.81;

/// Depth below which a cell counts as dry and its velocity is forced to zero.
pub const H_DRY: f64 = 1e-10;

/// Runs `f` on a dedicated rayon pool with `workers` threads.
///
/// Every parallel kernel in the crate is written so that its result does not
/// depend on the number of workers.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}
