use std::path::Path;

use pswe_core::driver::{run, Event, Schedule};
use pswe_core::io::config::{parse_config, read_hyetograph, NodataPolicy};
use pswe_core::io::output::{snapshot_name, write_snapshot};
use pswe_core::io::raster::{parse_esri_ascii, read_esri_ascii, write_esri_ascii, Raster};
use pswe_core::mesh::build_structured_mesh;
use pswe_core::state::make_lake_state;
use pswe_core::{AltitudePolicy, FieldState, MeshKind, Model, Physics, StepPolicy, Terrain, Vec2, GRAVITY};
use proptest::prelude::*;

fn finite_f64() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3f64..1e3,
        Just(0.1 + 0.2),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raster_round_trip_is_exact(
        ncols in 1usize..8,
        nrows in 1usize..8,
        cellsize in 1e-3f64..1e3,
        x in -1e6f64..1e6,
        y in -1e6f64..1e6,
        pool in proptest::collection::vec(finite_f64(), 64),
    ) {
        let values: Vec<f64> = pool[..ncols * nrows].to_vec();
        let r = Raster::new(ncols, nrows, cellsize, Vec2::new(x, y), -9999.0, values).unwrap();
        let back = parse_esri_ascii(&r.to_esri_string(), Path::new("mem.asc")).unwrap();
        prop_assert_eq!(back.values.len(), r.values.len());
        for (a, b) in back.values.iter().zip(&r.values) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!((back.xllcorner, back.yllcorner, back.cellsize), (x, y, cellsize));
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let r = Raster::new(3, 2, 0.5, Vec2::new(10.0, 20.0), -1.0, vec![1.0, -1.0, 1.0 / 3.0, 2e-300, 5.5, 7.0]).unwrap();
    let path = dir.path().join("g.asc");
    write_esri_ascii(&r, &path).unwrap();
    assert_eq!(read_esri_ascii(&path).unwrap(), r);
}

fn write_dem(dir: &Path) {
    let dem = "ncols 4\nnrows 3\nxllcorner 0\nyllcorner 0\ncellsize 1\nNODATA_value -9999\n\
               3 2 1 0\n3 -9999 1 0\n3 2 1 0\n";
    std::fs::write(dir.join("dem.asc"), dem).unwrap();
}

fn raster_config(nodata: &str) -> String {
    format!(
        "[mesh]\n[terrain]\nz_raster = \"dem.asc\"\ntheta = 0.5\nnodata = \"{nodata}\"\n\
         [initial]\nkind = \"depth\"\nh = 0.0\n[output]\nt_end = 1.0\n"
    )
}

#[test]
fn nodata_becomes_a_wall() {
    let dir = tempfile::tempdir().unwrap();
    write_dem(dir.path());
    let c = parse_config(&raster_config("wall"), dir.path()).unwrap();
    assert_eq!(c.nodata, NodataPolicy::Wall);
    let s = c.build().unwrap();
    assert_eq!(s.model.n_cells(), 12);
    // grid (1, 1) is the NODATA cell: second row from the top
    let wall = 4 + 1;
    assert_eq!(s.model.terrain.z[wall], 3.0 + 100.0);
    assert_eq!(s.model.terrain.theta[wall], 1.0);
    assert_eq!(s.model.terrain.z[0], 3.0);
    assert_eq!(s.model.terrain.z[3], 0.0);
    assert_eq!(s.model.terrain.theta[0], 0.5);
}

#[test]
fn nodata_becomes_a_hole() {
    let dir = tempfile::tempdir().unwrap();
    write_dem(dir.path());
    let s = parse_config(&raster_config("hole"), dir.path()).unwrap().build().unwrap();
    assert_eq!(s.model.n_cells(), 11);
    // 14 outer sides plus the 4 around the hole
    assert_eq!(s.model.mesh.ghosts().len(), 18);
}

#[test]
fn referenced_files_must_exist() {
    let dir = tempfile::tempdir().unwrap();
    let e = parse_config(&raster_config("wall"), dir.path()).unwrap_err();
    assert!(e.to_string().contains("dem.asc"), "{e}");
}

#[test]
fn hyetograph_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("rain.csv");
    std::fs::write(&p, "t,rate\n0,1e-5\n60, 0\n").unwrap();
    let h = read_hyetograph(&p).unwrap();
    assert_eq!(h.points().collect::<Vec<_>>(), vec![(0.0, 1e-5), (60.0, 0.0)]);
    std::fs::write(&p, "t,rate\n0,1e-5\n60,x\n").unwrap();
    let e = read_hyetograph(&p).unwrap_err();
    assert!(e.to_string().contains(":3:"), "{e}");
}

fn basin(h: impl Fn(f64) -> f64) -> (Model, FieldState) {
    let mesh = build_structured_mesh(MeshKind::Rectangular, 5, 4, 2.0, Vec2::ZERO).unwrap();
    let z: Vec<f64> = mesh.cells().iter().map(|c| 0.1 * c.centroid.x).collect();
    let mesh = mesh.attach_ghosts(AltitudePolicy::Fixed(50.0), &z);
    let model = Model::new(mesh, Terrain::new(z.clone(), vec![0.8; 20]).unwrap(), Physics::default()).unwrap();
    let state = FieldState::still(z.iter().map(|&zi| h(zi)).collect()).unwrap();
    (model, state)
}

#[test]
fn lake_snapshot_depth_is_level_minus_bed() {
    let (model, _) = basin(|_| 0.0);
    let level = 0.55;
    let lake = make_lake_state(&model.mesh, &model.terrain, GRAVITY * level, GRAVITY);
    let dir = tempfile::tempdir().unwrap();
    let files = write_snapshot(&model, &lake, 7, dir.path()).unwrap();
    assert_eq!(files.len(), 3);
    let h = read_esri_ascii(&files[0]).unwrap();
    let grid = model.mesh.grid().unwrap();
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let c = grid.cells[j * grid.nx + i].unwrap();
            let expect = (level - model.terrain.z[c]).max(0.0);
            assert!((h.at_grid(i, j).unwrap() - expect).abs() < 1e-14);
        }
    }
    assert!(files[0].ends_with(snapshot_name("h", 7, 0.0)));
}

#[test]
fn dry_basin_snapshot_is_zero() {
    let (model, dry) = basin(|_| 0.0);
    let dir = tempfile::tempdir().unwrap();
    let files = write_snapshot(&model, &dry, 0, dir.path()).unwrap();
    assert!(read_esri_ascii(&files[0]).unwrap().values.iter().all(|&v| v == 0.0));
}

#[test]
fn snapshot_cadence_gives_eleven_outputs() {
    let (model, state) = basin(|z| (0.6 - z).max(0.0) + 0.01);
    let schedule = Schedule {
        snapshot_every: Some(10.0),
        ..Schedule::until(100.0)
    };
    let policy = StepPolicy { dt_max: 3.0, ..StepPolicy::default() };
    let mut times = Vec::new();
    run(&model, state, &policy, &schedule, |ev| {
        if let Event::Output { state, snapshot: true, .. } = ev {
            times.push(state.t);
        }
        Ok(())
    })
    .unwrap();
    let expect: Vec<f64> = (0..=10).map(|k| 10.0 * k as f64).collect();
    assert_eq!(times, expect);
}
