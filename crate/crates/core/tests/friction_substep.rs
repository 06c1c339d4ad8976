use pswe_core::timestep::{friction_speed, friction_substep_v};
use pswe_core::Vec2;
use proptest::prelude::*;

/// Root of `Δt K s² + θh s − |q| = 0` on `[0, |q|/θh]` by bisection.
fn bisect(theta_h: f64, q: f64, k: f64, dt: f64) -> f64 {
    let f = |s: f64| dt * k * s * s + theta_h * s - q;
    let (mut lo, mut hi) = (0.0f64, q / theta_h);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn closed_form_matches_bisection(
        theta_h in 1e-6f64..10.0,
        qx in -50.0f64..50.0,
        qy in -50.0f64..50.0,
        k in 0.0f64..5.0,
        dt in 1e-6f64..10.0,
    ) {
        let q = Vec2::new(qx, qy);
        let s = friction_speed(theta_h, q.norm(), k, dt);
        let oracle = bisect(theta_h, q.norm(), k, dt);
        prop_assert!((s - oracle).abs() <= 1e-12 * oracle.max(f64::MIN_POSITIVE), "{} vs {}", s, oracle);
        let v = friction_substep_v(theta_h, q, k, dt);
        // direction is kept, speed never grows
        prop_assert!(v.x * q.x >= 0.0 && v.y * q.y >= 0.0);
        prop_assert!(v.norm() <= q.norm() / theta_h * (1.0 + 1e-15));
    }
}

#[test]
fn no_friction_is_plain_division() {
    assert_eq!(friction_speed(2.0, 3.0, 0.0, 1.0), 1.5);
    assert_eq!(friction_substep_v(2.0, Vec2::new(3.0, -1.0), 0.0, 1.0), Vec2::new(1.5, -0.5));
    assert_eq!(friction_substep_v(2.0, Vec2::ZERO, 1.0, 1.0), Vec2::ZERO);
}
