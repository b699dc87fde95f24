use geolorenz_core::flow::Trajectory;
use geolorenz_core::flow::{FlowParams, State3};
use geolorenz_core::geometric::GeoModel;
use geolorenz_core::section::{
    close_returns, detect_crossings, empirical_quotient, find_periodic_orbit, orbit_integral,
    stream_crossings, CrossingDirection, CrossingEvent, SectionSpec, PLANE_TOL,
};
use geolorenz_core::stats::periodic_obstruction;
use geolorenz_core::stats::{initial_state, Backend};

#[test]
fn crossings_at_large_times_stay_on_the_plane() {
    // Rotation in the (x, z) plane with radius 10^4: at t ~ 6000 the time
    // resolution alone would leave a plane residual of ulp(t)·|ż| ~ 10^-8.
    let field = |s: &[f64; 3]| [-s[2], 0.0, s[0]];
    let w = 1e5;
    let spec = SectionSpec::new(
        [0.0, 0.0, 1.0],
        0.0,
        CrossingDirection::Increasing,
        [-w, w, -w, w],
    )
    .unwrap();
    let traj = Trajectory::from_field(&field, State3::new(1e4, 0.0, 0.0), 6000.0, 1e-10).unwrap();
    let (events, _) = detect_crossings(&traj, &spec);
    let expected = (6000.0 / std::f64::consts::TAU) as usize;
    assert!(
        events.len() + 1 >= expected,
        "{} of {expected}",
        events.len()
    );
    for e in &events {
        assert!(spec.plane(&e.state).abs() < PLANE_TOL);
        assert!((e.flight - std::f64::consts::TAU).abs() < 1e-6);
    }
}

#[test]
fn long_lorenz_run_keeps_crossing() {
    let p = FlowParams::CLASSICAL;
    let spec = SectionSpec::lorenz_default(&p);
    let s0 = State3::from_array(initial_state(&Backend::Ode(p), 1).unwrap());
    let events = stream_crossings(&p, s0, 4000.0, 1e-9, &spec).unwrap();
    let last = events.last().unwrap();
    assert!(last.time > 3990.0, "crossings stopped at t = {}", last.time);
}

#[test]
fn quotient_of_synthetic_events_recovers_the_map() {
    let m = GeoModel::default();
    let spec = SectionSpec::new(
        [0.0, 0.0, 1.0],
        27.0,
        CrossingDirection::Decreasing,
        [-40.0, 40.0, -40.0, 40.0],
    )
    .unwrap();
    let mut x: f64 = 0.123456789;
    let mut events = Vec::new();
    for k in 0..20_000 {
        events.push(
            CrossingEvent::new(&spec, State3::new(10.0 * x, 0.0, 27.0), k as f64, 1.0).unwrap(),
        );
        x = m.quotient_map(x).unwrap();
    }
    let q = empirical_quotient(&events, 100).unwrap();
    assert!((q.axis[0] - 1.0).abs() < 1e-9);
    let c = q.centroid[0];
    for i in 0..q.bins() {
        let a = (q.arg_means[i] + c) / 10.0;
        if q.counts[i] == 0 || a.abs() < 0.2 {
            continue;
        }
        // Bin averages of a smooth map differ from the map at the mean
        // argument by at most the slope times the bin width.
        let width = (q.edges[i + 1] - q.edges[i]) / 10.0;
        let slope = m
            .quotient_derivative(a.abs().max(0.2) - width)
            .unwrap()
            .abs();
        let expect = 10.0 * m.quotient_map(a).unwrap() - c;
        assert!(
            (q.values[i] - expect).abs() <= 10.0 * slope * width,
            "bin {i}"
        );
    }
    // The only discontinuity is the jump from +1 to −1 across x = 0.
    let jumps = q.jumps(5.0);
    assert_eq!(jumps.len(), 1);
    let at = (q.edges[jumps[0] + 1] + c) / 10.0;
    assert!(at.abs() < 0.05, "{at}");
}

#[test]
fn periodic_orbit_integrals() {
    let p = FlowParams::CLASSICAL;
    let spec = SectionSpec::lorenz_default(&p);
    let s0 = State3::from_array(initial_state(&Backend::Ode(p), 6).unwrap());
    let events = stream_crossings(&p, s0, 3000.0, 1e-9, &spec).unwrap();
    let orbit = close_returns(&events, 2, 20)
        .into_iter()
        .find_map(|seed| find_periodic_orbit(&p, &spec, seed, 2).ok())
        .expect("a period-2 orbit");
    assert!((orbit.flights.iter().sum::<f64>() - orbit.period).abs() < 1e-9);
    let one = periodic_obstruction(&p, &orbit, |_| 1.0).unwrap();
    assert!((one - orbit.period).abs() < 1e-8);
    // (x, y, z) ↦ (−x, −y, z) is a symmetry, so odd observables cancel
    // between an orbit and its mirror image.
    let mirror = State3::new(-orbit.seed.x, -orbit.seed.y, orbit.seed.z);
    let a = orbit_integral(&p, orbit.seed, orbit.period, |s| s.x).unwrap();
    let b = orbit_integral(&p, mirror, orbit.period, |s| s.x).unwrap();
    assert!((a + b).abs() < 1e-6 * (1.0 + a.abs()), "{a} {b}");
}
