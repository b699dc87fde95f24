use geolorenz_core::distortion::{d0, MarkedPoint};
use geolorenz_core::geometric::{GeoModel, Side};
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::L), Just(Side::R)]
}

/// A history made of a prefix of up to three symbols and a periodic tail of
/// length one to three.
fn history() -> impl Strategy<Value = (Vec<Side>, usize)> {
    (
        prop::collection::vec(side(), 0..4),
        prop::collection::vec(side(), 1..4),
    )
        .prop_map(|(mut pre, tail)| {
            let p = tail.len();
            pre.extend(tail);
            (pre, p)
        })
}

fn coord() -> impl Strategy<Value = f64> {
    (-1.0f64..1.0).prop_filter("away from the singular leaf", |x| x.abs() > 1e-3)
}

fn inverse(m: &GeoModel, side: Side, v: f64) -> f64 {
    match side {
        Side::R => ((v + 1.0) / m.alpha).powf(1.0 / m.eta),
        Side::L => -((1.0 - v) / m.alpha).powf(1.0 / m.eta),
    }
}

fn roof(m: &GeoModel, x: f64) -> f64 {
    -x.abs().ln() / m.lambda_u + m.r0
}

/// Direct partial sum of `r(x_{−j}) − r(z_{−j})` over `depth` backward steps.
fn direct(m: &GeoModel, p: &MarkedPoint, q: &MarkedPoint, depth: usize) -> f64 {
    let (mut x, mut z, mut s) = (p.x, q.x, 0.0);
    for j in 0..depth {
        let side = p.symbol(j).unwrap();
        x = inverse(m, side, x);
        z = inverse(m, side, z);
        s += roof(m, x) - roof(m, z);
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn matches_direct_sum((h, per) in history(), x in coord(), z in coord()) {
        let m = GeoModel::default();
        let p = MarkedPoint::new(x, h, Some(per)).unwrap();
        let q = p.with_x(z).unwrap();
        let d = d0(&m, &p, &q, TOL).unwrap();
        let reference = direct(&m, &p, &q, 400);
        prop_assert!((d.value - reference).abs() <= d.tail_bound + 1e-9, "{} vs {}", d.value, reference);
    }

    #[test]
    fn antisymmetric((h, per) in history(), x in coord(), z in coord()) {
        let m = GeoModel::default();
        let p = MarkedPoint::new(x, h, Some(per)).unwrap();
        let q = p.with_x(z).unwrap();
        let a = d0(&m, &p, &q, TOL).unwrap();
        let b = d0(&m, &q, &p, TOL).unwrap();
        prop_assert!((a.value + b.value).abs() <= a.tail_bound + b.tail_bound + 1e-12);
    }

    #[test]
    fn cocycle((h, per) in history(), x in coord(), y in coord(), z in coord()) {
        let m = GeoModel::default();
        let p = MarkedPoint::new(x, h, Some(per)).unwrap();
        let q = p.with_x(y).unwrap();
        let r = p.with_x(z).unwrap();
        let pq = d0(&m, &p, &q, TOL).unwrap();
        let qr = d0(&m, &q, &r, TOL).unwrap();
        let pr = d0(&m, &p, &r, TOL).unwrap();
        prop_assert!((pq.value + qr.value - pr.value).abs() <= pq.tail_bound + qr.tail_bound + pr.tail_bound + 1e-12);
    }
}

#[test]
fn vanishes_on_the_diagonal() {
    let m = GeoModel::default();
    let p = MarkedPoint::periodic(0.4, vec![Side::L, Side::R]).unwrap();
    assert_eq!(d0(&m, &p, &p, TOL).unwrap().value, 0.0);
}

#[test]
fn constant_roof_has_no_distortion() {
    let m = GeoModel::preset("constant-roof").unwrap();
    let p = MarkedPoint::periodic(0.4, vec![Side::L, Side::R, Side::R]).unwrap();
    let q = p.with_x(-0.7).unwrap();
    assert!(d0(&m, &p, &q, TOL).unwrap().value.abs() < 1e-12);
}

#[test]
fn rejects_different_leaves() {
    let m = GeoModel::default();
    let p = MarkedPoint::periodic(0.4, vec![Side::L]).unwrap();
    let q = MarkedPoint::periodic(0.4, vec![Side::R]).unwrap();
    assert!(d0(&m, &p, &q, TOL).is_err());
}
