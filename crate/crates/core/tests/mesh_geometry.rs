use pswe_core::mesh::{build_masked_mesh, build_structured_mesh, Neighbor};
use pswe_core::{AltitudePolicy, MeshKind, Vec2};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = MeshKind> {
    prop_oneof![Just(MeshKind::Rectangular), Just(MeshKind::Hexagonal)]
}

fn cell_area(kind: MeshKind, s: f64) -> f64 {
    match kind {
        MeshKind::Rectangular => s * s,
        MeshKind::Hexagonal => 1.5 * 3f64.sqrt() * s * s,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cells_are_closed_and_tile_the_domain(kind in kind(), nx in 1usize..12, ny in 1usize..12, s in 0.1f64..10.0) {
        let mesh = build_structured_mesh(kind, nx, ny, s, Vec2::new(3.0, -2.0)).unwrap();
        let a = cell_area(kind, s);
        prop_assert_eq!(mesh.n_cells(), nx * ny);
        prop_assert!((mesh.total_area() - (nx * ny) as f64 * a).abs() <= 1e-10 * a * (nx * ny) as f64);
        for i in 0..mesh.n_cells() {
            prop_assert!((mesh.area(i) - a).abs() <= 1e-12 * a);
            let mut closure = Vec2::ZERO;
            for inc in mesh.incidence(i) {
                let e = &mesh.edges()[inc.edge];
                let n = if inc.outward { e.normal } else { -e.normal };
                closure += n * e.length;
                prop_assert!((e.normal.norm() - 1.0).abs() < 1e-14);
            }
            prop_assert!(closure.norm() <= 1e-12 * s);
        }
    }

    #[test]
    fn edges_point_from_left_to_right(kind in kind(), n in 2usize..10) {
        let mesh = build_structured_mesh(kind, n, n, 1.0, Vec2::ZERO).unwrap();
        for e in mesh.edges() {
            let from = mesh.cells()[e.left].centroid;
            prop_assert!((e.midpoint - from).dot(e.normal) > 0.0);
            if let Neighbor::Cell(j) = e.right {
                prop_assert!(e.left < j);
                prop_assert!((mesh.cells()[j].centroid - e.midpoint).dot(e.normal) > 0.0);
            }
        }
    }

    #[test]
    fn ghosts_cover_every_boundary_side(kind in kind(), n in 1usize..10, mask_seed in any::<u64>()) {
        let mask: Vec<bool> = (0..n * n).map(|k| (mask_seed >> (k % 64)) & 1 == 1 || k == 0).collect();
        let mesh = build_masked_mesh(kind, n, n, 1.0, Vec2::ZERO, Some(&mask)).unwrap();
        let bed = vec![0.5; mesh.n_cells()];
        let sides = mesh.n_boundary_sides();
        let mesh = mesh.attach_ghosts(AltitudePolicy::Fixed(9.0), &bed);
        prop_assert_eq!(mesh.ghosts().len(), sides);
        for g in mesh.ghosts() {
            prop_assert_eq!(g.altitude, 9.0);
            prop_assert_eq!(mesh.edges()[g.edge].left, g.owner);
        }
    }
}

#[test]
fn area_to_perimeter_ratio() {
    let s = 2.0;
    let rect = build_structured_mesh(MeshKind::Rectangular, 4, 4, s, Vec2::ZERO).unwrap();
    assert!((rect.min_area_to_perimeter() - s / 4.0).abs() < 1e-14);
    let hex = build_structured_mesh(MeshKind::Hexagonal, 4, 4, s, Vec2::ZERO).unwrap();
    assert!((hex.min_area_to_perimeter() - 3f64.sqrt() / 4.0 * s).abs() < 1e-14);
}
