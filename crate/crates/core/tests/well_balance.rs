use pswe_core::experiments::{bowl_lake, random_lake};
use pswe_core::mesh::build_structured_mesh;
use pswe_core::state::{free_surface, make_lake_state};
use pswe_core::{scheme, timestep, FieldState, MeshKind, Model, Physics, StepPolicy, Terrain, Vec2, GRAVITY};
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = MeshKind> {
    prop_oneof![Just(MeshKind::Rectangular), Just(MeshKind::Hexagonal)]
}

fn assert_fixed_point(model: &Model, state: &FieldState, steps: usize) -> Result<(), TestCaseError> {
    let mu = scheme::viscosity_coefficients(model, state);
    prop_assert!(scheme::assemble_rhs(model, state, &mu).is_exactly_zero());
    let mut s = state.clone();
    for _ in 0..steps {
        s = timestep::advance(model, &s, &StepPolicy::default()).unwrap().0;
    }
    prop_assert_eq!(&s.h, &state.h);
    prop_assert!(s.v.iter().all(|v| *v == Vec2::ZERO));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn wet_lake_is_a_fixed_point(kind in kind(), n in 3usize..20, seed in any::<u64>()) {
        let s = random_lake(kind, n, seed).unwrap();
        assert_fixed_point(&s.model, &s.state, 25)?;
    }

    #[test]
    fn partly_dry_lake_is_a_fixed_point(kind in kind(), n in 6usize..30, frac in 0.1f64..0.35) {
        let s = bowl_lake(kind, n, frac).unwrap();
        prop_assert!(s.state.h.contains(&0.0));
        assert_fixed_point(&s.model, &s.state, 25)?;
    }

    #[test]
    fn lake_surface_is_bitwise_flat(
        z in proptest::collection::vec(0.0f64..3.0, 16),
        level in 0.0f64..4.0,
    ) {
        let mesh = build_structured_mesh(MeshKind::Rectangular, 4, 4, 1.0, Vec2::ZERO).unwrap();
        let terrain = Terrain::new(z.clone(), vec![0.5; 16]).unwrap();
        let lake = make_lake_state(&mesh, &terrain, GRAVITY * level, GRAVITY);
        let w = free_surface(&lake, &terrain, GRAVITY);
        let wet: Vec<f64> = (0..16).filter(|&i| lake.h[i] > 0.0).map(|i| w[i]).collect();
        prop_assert!(wet.windows(2).all(|p| p[0] == p[1]));
        for i in 0..16 {
            prop_assert_eq!(lake.h[i] > 0.0, z[i] < lake.h[i] + z[i] && z[i] < level);
        }
    }
}

#[test]
fn dry_basin_stays_dry() {
    let mesh = build_structured_mesh(MeshKind::Hexagonal, 8, 8, 1.0, Vec2::ZERO).unwrap();
    let z: Vec<f64> = mesh.cells().iter().map(|c| 0.1 * c.centroid.x).collect();
    let mesh = mesh.attach_ghosts(pswe_core::AltitudePolicy::CopyOwner, &z);
    let model = Model::new(mesh, Terrain::new(z, vec![0.4; 64]).unwrap(), Physics::default()).unwrap();
    let dry = FieldState::dry(64);
    let (next, report) = timestep::advance(&model, &dry, &StepPolicy::default()).unwrap();
    assert_eq!(next.h, dry.h);
    assert_eq!(report.dt, StepPolicy::default().dt_max);
}

// A bed far below the level puts the depth on a coarser grid than the level;
// two such cells can need levels of opposite mantissa parity.
#[test]
fn deep_cells_miss_the_level_by_one_ulp_at_most() {
    let mut z = vec![0.0; 16];
    z[2] = -1.5365692252437966;
    z[6] = -0.35372567249753145;
    z[13] = -1.4261065331154203;
    let mesh = build_structured_mesh(MeshKind::Rectangular, 4, 4, 1.0, Vec2::ZERO).unwrap();
    let terrain = Terrain::new(z.clone(), vec![0.5; 16]).unwrap();
    let lake = make_lake_state(&mesh, &terrain, GRAVITY * 2.8106501653345597, GRAVITY);
    let s: Vec<f64> = (0..16).map(|i| z[i] + lake.h[i]).collect();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(hi.to_bits() - lo.to_bits() <= 1, "{lo} {hi}");
}

#[test]
fn bowl_lake_refuses_to_flood_the_rim() {
    assert!(bowl_lake(MeshKind::Hexagonal, 6, 0.9).is_err());
    assert!(bowl_lake(MeshKind::Rectangular, 32, 0.4).is_ok());
}
