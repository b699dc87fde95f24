use geolorenz_core::geometric::{GeoModel, SectionPoint, Side, SuspensionPoint};
use proptest::prelude::*;

fn nonzero() -> impl Strategy<Value = f64> {
    (-1.0f64..1.0).prop_filter("off the singular leaf", |x| x.abs() > 1e-9)
}

/// Branches written out directly: `α x^η − 1` on the right, `1 − α|x|^η` on the left.
fn fbar(m: &GeoModel, x: f64) -> f64 {
    if x > 0.0 {
        m.alpha * x.powf(m.eta) - 1.0
    } else {
        1.0 - m.alpha * (-x).powf(m.eta)
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn quotient_map_matches_closed_form(x in nonzero()) {
        let m = GeoModel::default();
        prop_assert!((m.quotient_map(x).unwrap() - fbar(&m, x)).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference(x in (-0.99f64..0.99).prop_filter("away from 0", |x| x.abs() > 1e-2)) {
        let m = GeoModel::default();
        let h = 1e-6 * x.abs();
        let fd = (fbar(&m, x + h) - fbar(&m, x - h)) / (2.0 * h);
        let d = m.quotient_derivative(x).unwrap();
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs(), "{} vs {}", d, fd);
        prop_assert!(d.abs() >= m.min_expansion() * (1.0 - 1e-12));
    }

    #[test]
    fn inverse_branches_invert(x in nonzero()) {
        let m = GeoModel::default();
        let side = if x > 0.0 { Side::R } else { Side::L };
        let back = m.inverse_branch(side, m.quotient_map(x).unwrap()).unwrap();
        prop_assert!((back - x).abs() < 1e-12);
    }

    #[test]
    fn poincare_map_contracts_fibres(x in nonzero(), y1 in -1.0f64..1.0, y2 in -1.0f64..1.0) {
        let m = GeoModel::default();
        let a = m.poincare_map(&SectionPoint::new(x, y1).unwrap()).unwrap();
        let b = m.poincare_map(&SectionPoint::new(x, y2).unwrap()).unwrap();
        prop_assert_eq!(a.x, b.x);
        prop_assert!(((a.y - b.y) - m.c_s * (y1 - y2)).abs() < 1e-14);
        prop_assert!(a.y.abs() <= 1.0);
    }

    #[test]
    fn suspension_step_counts_laps(x in nonzero(), y in -1.0f64..1.0, t in 0.0f64..20.0) {
        let m = GeoModel::default();
        let p = SuspensionPoint::new(&m, SectionPoint::new(x, y).unwrap(), 0.0).unwrap();
        let (q, laps) = m.suspension_step(&p, t).unwrap();
        // Replay the laps by hand.
        let mut base = p.base;
        let mut left = t;
        let mut n = 0;
        loop {
            let r = -base.x.abs().ln() / m.lambda_u + m.r0;
            if left < r {
                break;
            }
            left -= r;
            base = m.poincare_map(&base).unwrap();
            n += 1;
        }
        prop_assert_eq!(laps, n);
        prop_assert!((q.u - left).abs() < 1e-9);
        prop_assert!(laps as f64 <= t / m.r0 + 1.0);
    }
}

#[test]
fn presets_are_well_formed() {
    for name in ["default", "constant-roof"] {
        let m = GeoModel::preset(name).unwrap();
        assert!(m.checked().is_ok(), "{name}");
    }
    // η = 8/(3 λ_u) gives αη < 1.
    assert!(GeoModel::preset("classical-eta")
        .unwrap()
        .checked()
        .is_err());
    assert!(GeoModel::preset("nope").is_none());
}

#[test]
fn singular_leaf_is_rejected() {
    let m = GeoModel::default();
    assert!(m.quotient_map(0.0).is_err());
    assert!(m.roof(0.0).is_err());
}
