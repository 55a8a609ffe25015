use effham_core::apps::dispersive::zeta_numeric_chain;
use effham_core::apps::near_resonant::{two_rotation_closed_form, two_rotation_zeta};
use effham_core::apps::{omega_zx_analytical, zeta4, zeta4_contributions, zeta6, DispersiveParams};
use effham_core::cqed::{CqedParams, Levels};
use effham_core::C64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn two_rotation_pipeline_matches_closed_form(
        delta in -1.0f64..1.0,
        big in -2.0f64..2.0,
        g1 in 0.01f64..0.3,
        g2 in 0.01f64..0.3,
    ) {
        let e2 = delta.signum() * (delta * delta + g1 * g1).sqrt();
        prop_assume!((big - e2).abs() > 1e-3);
        let r = |x: f64| C64::new(x, 0.0);
        let z = two_rotation_zeta(r(delta), r(big), r(g1), r(g2)).unwrap().re;
        let c = two_rotation_closed_form(&r(delta), &r(big), &r(g1), &r(g2)).re + delta;
        prop_assert!((z - c).abs() <= 1e-12 * c.abs().max(1.0), "{} vs {}", z, c);
    }

    #[test]
    fn zeta4_splits_into_two_contributions(
        d1 in -2.0f64..2.0,
        d2 in -2.0f64..2.0,
        a1 in -0.4f64..-0.1,
        a2 in -0.4f64..-0.1,
        g1 in 0.005f64..0.1,
        g2 in 0.005f64..0.1,
    ) {
        let p = DispersiveParams::new(d1, d2, a1, a2, g1, g2);
        if let (Ok((t, r)), Ok(z)) = (zeta4_contributions(&p), zeta4(&p)) {
            prop_assert!((t + r - z.value).abs() <= 1e-12 * (t.abs() + r.abs()));
        }
    }

    #[test]
    fn zx_over_drive_is_even(drive in 1e-4f64..0.05, detuning in 0.02f64..0.1) {
        let plus = omega_zx_analytical(-0.003, drive, detuning, -0.33).unwrap() / drive;
        let minus = omega_zx_analytical(-0.003, -drive, detuning, -0.33).unwrap() / -drive;
        prop_assert!((plus - minus).abs() <= 1e-12 * plus.abs());
    }

    #[test]
    fn zeta_is_symmetric_under_qubit_swap(
        d1 in -2.0f64..-0.5,
        d2 in -2.0f64..-0.5,
        g in 0.005f64..0.05,
    ) {
        let p = DispersiveParams::new(d1, d2, -0.3, -0.25, g, 0.7 * g);
        if let (Ok(a), Ok(b)) = (zeta6(&p), zeta6(&p.swapped())) {
            prop_assert!((a.value - b.value).abs() <= 1e-12 * a.value.abs());
        }
    }
}

fn chain(g: f64) -> CqedParams {
    CqedParams {
        omega1: -0.9,
        omega2: -1.4,
        alpha1: -0.33,
        alpha2: -0.3,
        g1: g,
        g2: g,
        omega_r: 0.0,
        levels: Levels::Uniform(4),
        ..CqedParams::default()
    }
}

#[test]
fn fourth_order_error_shrinks_quadratically_with_coupling() {
    let mut prev: Option<f64> = None;
    for g in [0.04, 0.02, 0.01] {
        let p = chain(g);
        let exact = zeta_numeric_chain(&p).unwrap().value;
        let approx = zeta4(&DispersiveParams::from_cqed(&p)).unwrap().value;
        let rel = ((approx - exact) / exact).abs();
        if let Some(before) = prev {
            let ratio = before / rel;
            assert!((3.5..4.5).contains(&ratio), "g = {g}: error ratio {ratio}");
        }
        prev = Some(rel);
    }
}

#[test]
fn sixth_order_beats_fourth_order_as_coupling_shrinks() {
    for g in [0.04, 0.02] {
        let p = chain(g);
        let exact = zeta_numeric_chain(&p).unwrap().value;
        let dp = DispersiveParams::from_cqed(&p);
        let e4 = (zeta4(&dp).unwrap().value - exact).abs();
        let e6 = (zeta6(&dp).unwrap().value - exact).abs();
        assert!(e6 < 0.1 * e4, "g = {g}: {e6:e} vs {e4:e}");
    }
}
