use geolorenz_core::geometric::GeoModel;
use geolorenz_core::stats::{coboundary_series, suspension_grid, time_one};

#[test]
fn y_independent_observable_needs_no_correction() {
    let m = GeoModel::default();
    let pts = suspension_grid(&m, 8, 4, 3).unwrap();
    let v = |s: &[f64; 3]| s[0].sin() + 0.5 * s[2];
    let d = coboundary_series(&m, v, &pts, 20).unwrap();
    assert!(d.chi.iter().all(|c| c.abs() < 1e-14));
    for (p, vh) in pts.iter().zip(&d.v_hat) {
        assert!((vh - v(p)).abs() < 1e-12);
    }
}

#[test]
fn corrected_observable_is_constant_on_stable_leaves() {
    let m = GeoModel::default();
    let pts = suspension_grid(&m, 8, 4, 3).unwrap();
    let v = |s: &[f64; 3]| (2.0 * s[1]).cos() + s[0] * s[1];
    let d = coboundary_series(&m, v, &pts, 30).unwrap();
    // Points differing only in y share a stable leaf.
    for (i, a) in pts.iter().enumerate() {
        for (j, b) in pts.iter().enumerate() {
            if a[0] == b[0] && a[2] == b[2] && i < j {
                assert!((d.v_hat[i] - d.v_hat[j]).abs() <= 10.0 * d.tail_bound + 1e-12);
            }
        }
    }
}

#[test]
fn time_one_is_a_unit_flow_step() {
    let m = GeoModel::default();
    let s = [0.3, 0.1, 0.2];
    let a = time_one(&m, &s).unwrap();
    let b = time_one(&m, &time_one(&m, &s).unwrap()).unwrap();
    let p = geolorenz_core::geometric::SuspensionPoint::new(
        &m,
        geolorenz_core::geometric::SectionPoint::new(s[0], s[1]).unwrap(),
        s[2],
    )
    .unwrap();
    let (q, _) = m.suspension_step(&p, 2.0).unwrap();
    assert!(
        (b[0] - q.base.x).abs() < 1e-12
            && (b[1] - q.base.y).abs() < 1e-12
            && (b[2] - q.u).abs() < 1e-9
    );
    assert!(a != s);
}
