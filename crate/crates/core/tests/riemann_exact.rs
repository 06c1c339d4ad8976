use pswe_core::riemann::{exact_dambreak, l1_error, run_riemann_1d, unaffected_window, DamBreak, RiemannIC, StripRun};
use pswe_core::GRAVITY as G;
use proptest::prelude::*;

/// Middle state from Newton's method on the depth function of the
/// shallow water Riemann problem (left rarefaction, right shock).
fn newton_middle(hl: f64, hr: f64) -> (f64, f64) {
    let side = |h: f64, hk: f64| -> (f64, f64) {
        if h <= hk {
            (2.0 * ((G * h).sqrt() - (G * hk).sqrt()), (G / h).sqrt())
        } else {
            let gk = (0.5 * G * (h + hk) / (h * hk)).sqrt();
            let f = (h - hk) * gk;
            let df = gk - G * (h - hk) / (4.0 * h * h * gk);
            (f, df)
        }
    };
    let mut h = 0.5 * (hl + hr);
    for _ in 0..100 {
        let (fl, dl) = side(h, hl);
        let (fr, dr) = side(h, hr);
        let step = (fl + fr) / (dl + dr);
        h -= step;
        if step.abs() <= 1e-15 * h {
            break;
        }
    }
    let u = 0.5 * (side(h, hr).0 - side(h, hl).0);
    (h, u)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn middle_state_matches_newton(hl in 0.1f64..20.0, ratio in 1e-3f64..0.999) {
        let hr = hl * ratio;
        let d = DamBreak::new(hl, hr, G).unwrap();
        let (h, u) = newton_middle(hl, hr);
        prop_assert!((d.h_m - h).abs() <= 1e-10 * h);
        prop_assert!((d.u_m - u).abs() <= 1e-10 * u.abs().max(1.0));
        let s = (G * d.h_m * (d.h_m + hr) / (2.0 * hr)).sqrt();
        prop_assert!((d.shock_speed.unwrap() - s).abs() <= 1e-10 * s);
        prop_assert!(d.rankine_hugoniot_residual() < 1e-10);
        prop_assert!(d.invariant_residual() < 1e-10);
    }

    #[test]
    fn profile_is_monotone_in_depth(hl in 0.5f64..10.0, ratio in 0.0f64..0.9, t in 0.01f64..1.0) {
        let hr = hl * ratio;
        let mut last = f64::INFINITY;
        for k in 0..200 {
            let x = -30.0 + 0.3 * k as f64;
            let (h, _) = exact_dambreak(hl, hr, x, t, G).unwrap();
            prop_assert!(h <= last + 1e-12);
            last = h;
        }
    }
}

#[test]
fn nine_to_one_middle_state() {
    let d = DamBreak::new(9.0, 1.0, G).unwrap();
    let (h, u) = newton_middle(9.0, 1.0);
    assert!((d.h_m - h).abs() < 1e-12 && (d.u_m - u).abs() < 1e-12);
    assert!((d.h_m - 3.70).abs() < 0.01);
}

#[test]
fn ritter_solution_for_dry_bed() {
    let c = (G * 4.0).sqrt();
    let (h, u) = exact_dambreak(4.0, 0.0, 0.0, 1.0, G).unwrap();
    assert!((h - 4.0 * c * c / (9.0 * G)).abs() < 1e-12);
    assert!((u - 2.0 * c / 3.0).abs() < 1e-12);
    assert_eq!(exact_dambreak(4.0, 0.0, 2.0 * c + 1e-9, 1.0, G).unwrap().0, 0.0);
}

#[test]
fn strip_error_shrinks_under_refinement() {
    let ic = RiemannIC::default();
    let mut errors = Vec::new();
    for cells in [50, 100, 200] {
        let run = StripRun { viscosity: true, ..StripRun::new(cells, 0.04) };
        let p = run_riemann_1d(&ic, &run).unwrap();
        let (a, b) = unaffected_window(&ic, p.t, G);
        let w = p.window(a, b);
        let exact: Vec<f64> = w.x.iter().map(|&x| exact_dambreak(9.0, 1.0, x - ic.x0, w.t, G).unwrap().0).collect();
        errors.push(l1_error(&w, &exact).unwrap());
    }
    assert!(errors[1] < errors[0] && errors[2] < errors[1], "{errors:?}");
}
