//! Polygonal partitions of the flow domain.
//!
//! A [`Mesh`] is a conforming, edge-to-edge set of counterclockwise polygons.
//! Every side shared by two cells is stored once as an interior [`Edge`];
//! every side on the domain boundary is an edge whose right neighbor is a
//! boundary slot. [`Mesh::attach_ghosts`] turns those slots into ghost cells
//! carrying an altitude and zero water depth.
//!
//! Cell ids are `0..n_cells`; ghost ids are `n_cells..n_cells + n_ghosts`.
//! Edges are sorted by `(min id, max id)` so every reduction over edges runs
//! in a fixed order.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshKind {
    Rectangular,
    Hexagonal,
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub id: usize,
    pub area: f64,
    pub centroid: Vec2,
    /// Counterclockwise.
    pub vertices: Vec<Vec2>,
}

/// What lies on the far side of an edge, seen from its left cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighbor {
    Cell(usize),
    /// Boundary slot `k`; after ghost attachment it is ghost `k` with global
    /// id `n_cells + k`.
    Boundary(usize),
}

#[derive(Debug, Clone)]
pub struct Edge {
    pub left: usize,
    pub right: Neighbor,
    pub length: f64,
    /// Unit normal pointing from `left` to `right`.
    pub normal: Vec2,
    pub midpoint: Vec2,
}

#[derive(Debug, Clone)]
pub struct Ghost {
    pub id: usize,
    pub owner: usize,
    pub edge: usize,
    pub altitude: f64,
}

/// An edge as seen from one of its cells.
#[derive(Debug, Clone, Copy)]
pub struct Incidence {
    pub edge: usize,
    /// True when the cell is the edge's left cell, so the stored normal is
    /// outward for it.
    pub outward: bool,
}

/// Raster-like index of a structured mesh: `cells[j * nx + i]` is the cell
/// at column `i`, row `j` counted from the bottom, if that cell is active.
#[derive(Debug, Clone)]
pub struct GridLayout {
    pub kind: MeshKind,
    pub nx: usize,
    pub ny: usize,
    pub cellsize: f64,
    pub origin: Vec2,
    pub cells: Vec<Option<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum AltitudePolicy {
    /// Ghost altitude equals the owner's bed elevation (free outfall).
    #[default]
    CopyOwner,
    Fixed(f64),
}

/// Geometry of a boundary side handed to custom altitude rules.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySide {
    pub owner: usize,
    pub normal: Vec2,
    pub midpoint: Vec2,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    cells: Vec<Cell>,
    edges: Vec<Edge>,
    incidence: Vec<Vec<Incidence>>,
    boundary_edges: Vec<usize>,
    ghosts: Vec<Ghost>,
    grid: Option<GridLayout>,
}

impl Mesh {
    /// Builds a mesh from shared vertices and counterclockwise polygons.
    pub fn from_polygons(vertices: &[Vec2], polygons: &[Vec<usize>]) -> Result<Mesh> {
        if polygons.is_empty() {
            return Err(Error::Mesh("no cells".into()));
        }
        let mut cells = Vec::with_capacity(polygons.len());
        for (id, poly) in polygons.iter().enumerate() {
            if poly.len() < 3 {
                return Err(Error::Mesh(format!("cell {id} has fewer than 3 vertices")));
            }
            let pts: Vec<Vec2> = poly
                .iter()
                .map(|&v| {
                    vertices
                        .get(v)
                        .copied()
                        .ok_or_else(|| Error::Mesh(format!("cell {id} references vertex {v}")))
                })
                .collect::<Result<_>>()?;
            let (area, centroid) = polygon_area_centroid(&pts);
            if !(area > 0.0) {
                return Err(Error::Mesh(format!(
                    "cell {id} has non-positive signed area {area} (vertices must be counterclockwise)"
                )));
            }
            cells.push(Cell {
                id,
                area,
                centroid,
                vertices: pts,
            });
        }

        // (min vertex, max vertex) -> sides (cell, from, to) that use it
        let mut sides: HashMap<(usize, usize), Vec<(usize, usize, usize)>> = HashMap::new();
        let mut order = Vec::new();
        for (id, poly) in polygons.iter().enumerate() {
            for k in 0..poly.len() {
                let a = poly[k];
                let b = poly[(k + 1) % poly.len()];
                if a == b {
                    return Err(Error::Mesh(format!("cell {id} has a degenerate side")));
                }
                let key = (a.min(b), a.max(b));
                let entry = sides.entry(key).or_default();
                if entry.is_empty() {
                    order.push(key);
                }
                entry.push((id, a, b));
            }
        }

        struct Raw {
            left: usize,
            right: Option<usize>,
            from: usize,
            to: usize,
        }
        let mut raw = Vec::with_capacity(order.len());
        for key in &order {
            let users = &sides[key];
            match users.as_slice() {
                [(c, a, b)] => raw.push(Raw {
                    left: *c,
                    right: None,
                    from: *a,
                    to: *b,
                }),
                [(c1, a1, b1), (c2, a2, b2)] => {
                    if c1 == c2 {
                        return Err(Error::Mesh(format!("cell {c1} uses a side twice")));
                    }
                    if a1 != b2 || b1 != a2 {
                        return Err(Error::Mesh(format!(
                            "cells {c1} and {c2} traverse a shared side in the same direction"
                        )));
                    }
                    let (left, from, to, right) = if c1 < c2 {
                        (*c1, *a1, *b1, *c2)
                    } else {
                        (*c2, *a2, *b2, *c1)
                    };
                    raw.push(Raw {
                        left,
                        right: Some(right),
                        from,
                        to,
                    });
                }
                _ => {
                    return Err(Error::Mesh(format!(
                        "side {key:?} shared by {} cells; partition is not conforming",
                        users.len()
                    )))
                }
            }
        }

        // Boundary slots are numbered by (owner, traversal order) so ghost ids
        // are deterministic.
        let mut boundary: Vec<usize> = (0..raw.len()).filter(|&e| raw[e].right.is_none()).collect();
        boundary.sort_by_key(|&e| (raw[e].left, e));
        let mut slot = vec![usize::MAX; raw.len()];
        for (k, &e) in boundary.iter().enumerate() {
            slot[e] = k;
        }
        let n = cells.len();
        let sort_key = |e: usize| -> (usize, usize) {
            match raw[e].right {
                Some(j) => (raw[e].left, j),
                None => (raw[e].left, n + slot[e]),
            }
        };
        let mut perm: Vec<usize> = (0..raw.len()).collect();
        perm.sort_by_key(|&e| sort_key(e));

        let mut edges = Vec::with_capacity(raw.len());
        let mut boundary_edges = vec![usize::MAX; boundary.len()];
        for &e in &perm {
            let r = &raw[e];
            let a = vertices[r.from];
            let b = vertices[r.to];
            let d = b - a;
            let length = d.x.hypot(d.y);
            if !(length > 0.0) {
                return Err(Error::Mesh(format!("zero-length side at {a:?}")));
            }
            let right = match r.right {
                Some(j) => Neighbor::Cell(j),
                None => {
                    boundary_edges[slot[e]] = edges.len();
                    Neighbor::Boundary(slot[e])
                }
            };
            edges.push(Edge {
                left: r.left,
                right,
                length,
                normal: Vec2::new(d.y / length, -d.x / length),
                midpoint: (a + b) * 0.5,
            });
        }

        let mut incidence = vec![Vec::new(); n];
        for (e, edge) in edges.iter().enumerate() {
            incidence[edge.left].push(Incidence {
                edge: e,
                outward: true,
            });
            if let Neighbor::Cell(j) = edge.right {
                incidence[j].push(Incidence {
                    edge: e,
                    outward: false,
                });
            }
        }

        Ok(Mesh {
            cells,
            edges,
            incidence,
            boundary_edges,
            ghosts: Vec::new(),
            grid: None,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, i: usize) -> &Cell {
        &self.cells[i]
    }

    pub fn area(&self, i: usize) -> f64 {
        self.cells[i].area
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn ghosts(&self) -> &[Ghost] {
        &self.ghosts
    }

    pub fn n_boundary_sides(&self) -> usize {
        self.boundary_edges.len()
    }

    pub fn has_ghosts(&self) -> bool {
        !self.ghosts.is_empty() || self.boundary_edges.is_empty()
    }

    pub fn grid(&self) -> Option<&GridLayout> {
        self.grid.as_ref()
    }

    /// Edges of cell `i` in ascending edge order.
    pub fn incidence(&self, i: usize) -> &[Incidence] {
        &self.incidence[i]
    }

    /// The neighbor set of cell `i`: other cells and boundary slots.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = Neighbor> + '_ {
        self.incidence[i].iter().map(move |inc| {
            let e = &self.edges[inc.edge];
            if inc.outward {
                e.right
            } else {
                Neighbor::Cell(e.left)
            }
        })
    }

    /// Normal of edge `e` oriented outward from the incident cell.
    #[inline]
    pub fn outward_normal(&self, inc: Incidence) -> Vec2 {
        let n = self.edges[inc.edge].normal;
        if inc.outward {
            n
        } else {
            -n
        }
    }

    pub fn perimeter(&self, i: usize) -> f64 {
        self.incidence[i]
            .iter()
            .map(|inc| self.edges[inc.edge].length)
            .sum()
    }

    /// Smallest ratio of cell area to cell perimeter, boundary sides included.
    pub fn min_area_to_perimeter(&self) -> f64 {
        (0..self.n_cells())
            .map(|i| self.cells[i].area / self.perimeter(i))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn total_area(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum()
    }

    /// Attaches one ghost per boundary side using `policy` for its altitude.
    /// `bed` is the per-cell bed elevation. Previously attached ghosts are
    /// replaced.
    pub fn attach_ghosts(self, policy: AltitudePolicy, bed: &[f64]) -> Mesh {
        self.attach_ghosts_with(|side| match policy {
            AltitudePolicy::CopyOwner => bed[side.owner],
            AltitudePolicy::Fixed(z) => z,
        })
    }

    /// Like [`Mesh::attach_ghosts`] with a per-side altitude rule.
    pub fn attach_ghosts_with(mut self, mut altitude: impl FnMut(BoundarySide) -> f64) -> Mesh {
        let n = self.n_cells();
        self.ghosts = self
            .boundary_edges
            .iter()
            .enumerate()
            .map(|(k, &e)| {
                let edge = &self.edges[e];
                Ghost {
                    id: n + k,
                    owner: edge.left,
                    edge: e,
                    altitude: altitude(BoundarySide {
                        owner: edge.left,
                        normal: edge.normal,
                        midpoint: edge.midpoint,
                    }),
                }
            })
            .collect();
        self
    }

    pub(crate) fn with_grid(mut self, grid: GridLayout) -> Mesh {
        self.grid = Some(grid);
        self
    }
}

/// Signed area and area centroid of a closed polygon.
fn polygon_area_centroid(pts: &[Vec2]) -> (f64, Vec2) {
    // Coordinates relative to the first vertex keep the cross products small.
    let o = pts[0];
    let mut twice_area = 0.0;
    let mut c = Vec2::ZERO;
    for k in 1..pts.len() - 1 {
        let p = pts[k] - o;
        let q = pts[k + 1] - o;
        let cross = p.x * q.y - q.x * p.y;
        twice_area += cross;
        c += (p + q) * cross;
    }
    let area = 0.5 * twice_area;
    (area, o + c * (1.0 / (3.0 * twice_area)))
}

/// Builds a regular rectangular or hexagonal partition.
///
/// For `Rectangular`, cells are squares of side `spacing` with cell `(i, j)`
/// at id `j * nx + i`. For `Hexagonal`, cells are pointy-top regular hexagons
/// of side `spacing` in an odd-row-shifted layout with the same id rule.
pub fn build_structured_mesh(
    kind: MeshKind,
    nx: usize,
    ny: usize,
    spacing: f64,
    origin: Vec2,
) -> Result<Mesh> {
    build_masked_mesh(kind, nx, ny, spacing, origin, None)
}

/// Like [`build_structured_mesh`] but keeps only cells whose `mask` entry
/// (indexed `j * nx + i`) is true. Removed cells become domain boundary.
pub fn build_masked_mesh(
    kind: MeshKind,
    nx: usize,
    ny: usize,
    spacing: f64,
    origin: Vec2,
    mask: Option<&[bool]>,
) -> Result<Mesh> {
    if nx == 0 || ny == 0 {
        return Err(Error::Mesh(format!("dimensions must be positive, got {nx}x{ny}")));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Mesh(format!("spacing must be positive, got {spacing}")));
    }
    if let Some(m) = mask {
        if m.len() != nx * ny {
            return Err(Error::LengthMismatch(m.len(), nx * ny));
        }
    }

    // Vertices live on an integer lattice so shared corners dedupe exactly.
    let (unit, corners): (Vec2, &[(i64, i64)]) = match kind {
        MeshKind::Rectangular => (
            Vec2::new(spacing, spacing),
            &[(0, 0), (1, 0), (1, 1), (0, 1)],
        ),
        MeshKind::Hexagonal => (
            Vec2::new(0.5 * 3f64.sqrt() * spacing, 0.5 * spacing),
            &[(1, 1), (0, 2), (-1, 1), (-1, -1), (0, -2), (1, -1)],
        ),
    };
    let anchor = |i: usize, j: usize| -> (i64, i64) {
        let (i, j) = (i as i64, j as i64);
        match kind {
            MeshKind::Rectangular => (i, j),
            MeshKind::Hexagonal => (2 * i + (j & 1) + 1, 3 * j + 2),
        }
    };

    let mut lattice: HashMap<(i64, i64), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut polygons = Vec::new();
    let mut grid_cells = vec![None; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            if let Some(m) = mask {
                if !m[j * nx + i] {
                    continue;
                }
            }
            let (ax, ay) = anchor(i, j);
            let poly = corners
                .iter()
                .map(|&(dx, dy)| {
                    let key = (ax + dx, ay + dy);
                    *lattice.entry(key).or_insert_with(|| {
                        vertices.push(Vec2::new(
                            origin.x + key.0 as f64 * unit.x,
                            origin.y + key.1 as f64 * unit.y,
                        ));
                        vertices.len() - 1
                    })
                })
                .collect();
            grid_cells[j * nx + i] = Some(polygons.len());
            polygons.push(poly);
        }
    }
    let cellsize = match kind {
        MeshKind::Rectangular => spacing,
        MeshKind::Hexagonal => 3f64.sqrt() * spacing,
    };
    Ok(Mesh::from_polygons(&vertices, &polygons)?.with_grid(GridLayout {
        kind,
        nx,
        ny,
        cellsize,
        origin,
        cells: grid_cells,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal_sum(mesh: &Mesh, i: usize) -> Vec2 {
        mesh.incidence(i).iter().fold(Vec2::ZERO, |acc, &inc| {
            acc + mesh.outward_normal(inc) * mesh.edges()[inc.edge].length
        })
    }

    #[test]
    fn unit_square() {
        let m = build_structured_mesh(MeshKind::Rectangular, 1, 1, 1.0, Vec2::ZERO).unwrap();
        assert_eq!(m.n_cells(), 1);
        assert_eq!(m.area(0), 1.0);
        assert_eq!(m.edges().len(), 4);
        assert!(m.edges().iter().all(|e| e.length == 1.0));
        assert!(m.edges().iter().all(|e| matches!(e.right, Neighbor::Boundary(_))));
        assert_eq!(m.cell(0).centroid, Vec2::new(0.5, 0.5));
        assert_eq!(m.min_area_to_perimeter(), 0.25);
    }

    #[test]
    fn two_squares_share_one_edge() {
        let m = build_structured_mesh(MeshKind::Rectangular, 2, 1, 1.0, Vec2::ZERO).unwrap();
        let interior: Vec<_> = m
            .edges()
            .iter()
            .filter(|e| matches!(e.right, Neighbor::Cell(_)))
            .collect();
        assert_eq!(interior.len(), 1);
        assert_eq!(interior[0].left, 0);
        assert_eq!(interior[0].right, Neighbor::Cell(1));
        assert_eq!(interior[0].normal, Vec2::new(1.0, 0.0));
        assert_eq!(interior[0].length, 1.0);
    }

    #[test]
    fn hexagonal_interior_cells() {
        let s = 0.7;
        let m = build_structured_mesh(MeshKind::Hexagonal, 3, 3, s, Vec2::new(2.0, -1.0)).unwrap();
        let center = 4; // (1, 1)
        assert_eq!(m.incidence(center).len(), 6);
        assert!(m.neighbors(center).all(|nb| matches!(nb, Neighbor::Cell(_))));
        for inc in m.incidence(center) {
            assert!((m.edges()[inc.edge].length - s).abs() < 1e-12);
        }
        let sum = normal_sum(&m, center);
        assert!(sum.norm() < 1e-12 * 6.0 * s);
        let expect_area = 1.5 * 3f64.sqrt() * s * s;
        assert!((m.area(center) - expect_area).abs() < 1e-12);
    }

    #[test]
    fn hexagon_area_to_perimeter() {
        let s = 2.0;
        let m = build_structured_mesh(MeshKind::Hexagonal, 1, 1, s, Vec2::ZERO).unwrap();
        // Oracle: regular hexagon area (3√3/2)s² over perimeter 6s.
        let oracle = (1.5 * 3f64.sqrt() * s * s) / (6.0 * s);
        assert!((m.min_area_to_perimeter() - oracle).abs() < 1e-12);
        assert!((oracle - 3f64.sqrt() / 4.0 * s).abs() < 1e-12);
    }

    #[test]
    fn rect_ratio_scales_with_spacing() {
        for d in [0.5, 1.0, 3.0] {
            let m = build_structured_mesh(MeshKind::Rectangular, 4, 3, d, Vec2::ZERO).unwrap();
            assert!((m.min_area_to_perimeter() - d / 4.0).abs() < 1e-15);
            assert!(m.cells().iter().all(|c| (c.area - d * d).abs() < 1e-14));
        }
    }

    #[test]
    fn ghosts_follow_policy() {
        let m = build_structured_mesh(MeshKind::Rectangular, 1, 1, 1.0, Vec2::ZERO).unwrap();
        let copy = m.clone().attach_ghosts(AltitudePolicy::CopyOwner, &[3.5]);
        assert_eq!(copy.ghosts().len(), 4);
        assert!(copy.ghosts().iter().all(|g| g.altitude == 3.5 && g.owner == 0));
        assert!(copy.ghosts().iter().all(|g| g.id >= copy.n_cells()));
        let fixed = m.attach_ghosts(AltitudePolicy::Fixed(5.0), &[3.5]);
        assert!(fixed.ghosts().iter().all(|g| g.altitude == 5.0));
    }

    #[test]
    fn ghost_count_is_boundary_side_count() {
        // 2x2 squares: count boundary sides directly from the generated edges.
        let m = build_structured_mesh(MeshKind::Rectangular, 2, 2, 1.0, Vec2::ZERO).unwrap();
        let sides = m
            .edges()
            .iter()
            .filter(|e| matches!(e.right, Neighbor::Boundary(_)))
            .count();
        assert_eq!(sides, 8);
        let m = m.attach_ghosts(AltitudePolicy::CopyOwner, &[0.0; 4]);
        assert_eq!(m.ghosts().len(), 8);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(build_structured_mesh(MeshKind::Rectangular, 0, 3, 1.0, Vec2::ZERO).is_err());
        assert!(build_structured_mesh(MeshKind::Hexagonal, 2, 0, 1.0, Vec2::ZERO).is_err());
        assert!(build_structured_mesh(MeshKind::Rectangular, 2, 2, 0.0, Vec2::ZERO).is_err());
        assert!(build_structured_mesh(MeshKind::Rectangular, 2, 2, -1.0, Vec2::ZERO).is_err());
    }

    #[test]
    fn rejects_clockwise_polygon() {
        let v = [Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 0.0)];
        assert!(Mesh::from_polygons(&v, &[vec![0, 1, 2]]).is_err());
    }

    #[test]
    fn masked_cells_become_boundary() {
        let mask = [true, false, true, true];
        let m = build_masked_mesh(MeshKind::Rectangular, 2, 2, 1.0, Vec2::ZERO, Some(&mask)).unwrap();
        assert_eq!(m.n_cells(), 3);
        assert_eq!(m.n_boundary_sides(), 8);
        let grid = m.grid().unwrap();
        assert_eq!(grid.cells, vec![Some(0), None, Some(1), Some(2)]);
    }

    #[test]
    fn edges_sorted_by_id_pair() {
        let m = build_structured_mesh(MeshKind::Hexagonal, 4, 3, 1.0, Vec2::ZERO).unwrap();
        let n = m.n_cells();
        let key = |e: &Edge| match e.right {
            Neighbor::Cell(j) => (e.left, j),
            Neighbor::Boundary(k) => (e.left, n + k),
        };
        assert!(m.edges().windows(2).all(|w| key(&w[0]) < key(&w[1])));
    }
}
