use pswe_core::diagnostics::total_mass;
use pswe_core::experiments::{closed_dam_break, random_dam_break};
use pswe_core::{timestep, BoundMode, Error, MeshKind, StepPolicy};
use proptest::prelude::*;

fn mode() -> impl Strategy<Value = BoundMode> {
    prop_oneof![Just(BoundMode::Positivity), Just(BoundMode::Cfl), Just(BoundMode::Min)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn depth_stays_nonnegative(seed in any::<u64>(), mode in mode(), safety in 0.3f64..=1.0) {
        let s = random_dam_break(seed, 10).unwrap();
        let policy = StepPolicy { safety, mode, ..StepPolicy::default() };
        let m0 = total_mass(&s.model, &s.state);
        let mut st = s.state.clone();
        let mut clamped = 0.0;
        for _ in 0..120 {
            // A rare front blow-up ends the run through the Δt guard; depth
            // must still be non-negative up to that point.
            let (next, r) = match timestep::advance(&s.model, &st, &policy) {
                Ok(ok) => ok,
                Err(e) => {
                    prop_assert!(matches!(e, Error::TimeStepTooSmall { .. }), "{e}");
                    break;
                }
            };
            prop_assert!(next.h.iter().all(|&h| h >= 0.0));
            prop_assert!(r.dt > 0.0 && r.dt <= policy.dt_max);
            clamped += r.clamped_mass;
            st = next;
        }
        prop_assert!(clamped <= 1e-10 * m0);
    }
}

#[test]
fn closed_basin_conserves_mass() {
    for kind in [MeshKind::Rectangular, MeshKind::Hexagonal] {
        let s = closed_dam_break(kind, 32, 0.8, true, Some((0.1, 0.02))).unwrap();
        let m0 = total_mass(&s.model, &s.state);
        let mut st = s.state.clone();
        for _ in 0..300 {
            let (next, r) = timestep::advance(&s.model, &st, &StepPolicy::default()).unwrap();
            assert_eq!(r.boundary_outflow, 0.0);
            st = next;
        }
        let drift = (total_mass(&s.model, &st) - m0).abs() / m0;
        assert!(drift < 1e-12, "{kind:?}: {drift:e}");
    }
}

#[test]
fn wall_outflow_closes_the_mass_budget() {
    // On a coarse bowl the wave reaches the rim, and water moving towards a
    // high ghost still leaves with the owner's depth.
    let s = closed_dam_break(MeshKind::Rectangular, 16, 0.7, true, Some((0.1, 0.02))).unwrap();
    let m0 = total_mass(&s.model, &s.state);
    let mut st = s.state.clone();
    let mut out = 0.0;
    for _ in 0..300 {
        let (next, r) = timestep::advance(&s.model, &st, &StepPolicy::default()).unwrap();
        out += r.boundary_outflow;
        st = next;
    }
    let budget = (total_mass(&s.model, &st) + out - m0).abs() / m0;
    assert!(budget < 1e-12, "{budget:e}");
}
