mod common;

use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;
use relcharge_core::closedform::{
    closed_form_orbit, max_deviation, vortex_orbit, vortex_transverse_orbit, ClosedFormOrbit, Orbit,
};
use relcharge_core::dynamics::{hamilton_rhs, integrate, IntegrateOptions};
use relcharge_core::expm::{expm, oscillator_matrix, propagate};
use relcharge_core::invariants::{vortex_transverse_invariants, InvariantSet};
use relcharge_core::{Error, FieldSpec, Form, PhasePoint};

fn front(t: f64, xm: f64, x: f64, y: f64, pm: f64, p1: f64, p2: f64) -> PhasePoint {
    PhasePoint::new(Form::Front, t, [xm, x, y], [pm, p1, p2])
}

fn cases() -> Vec<(FieldSpec, PhasePoint, f64)> {
    vec![
        (FieldSpec::Free, front(0.0, 0.1, 0.2, -0.3, 0.6, 0.4, -0.1), 5.0),
        (common::plane_wave(), front(0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0), 20.0),
        (common::circular_wave(), front(-1.0, 0.3, 0.1, 0.2, 0.8, -0.2, 0.3), 10.0),
        (common::tm_mode(), front(1.0, 0.0, 0.2, -0.1, 0.5, 0.1, 0.05), 9.0),
        (common::vortex(), front(0.0, 0.0, 0.3, 0.1, 0.5, 0.1, -0.05), 8.0 * std::f64::consts::PI),
    ]
}

#[test]
fn orbits_satisfy_hamiltons_equations() {
    for (spec, s0, span) in cases() {
        let orbit = closed_form_orbit(&spec, &s0).unwrap();
        let h = 1e-3;
        for k in 1..=50 {
            let t = s0.time + span * k as f64 / 51.0;
            let st = orbit.states_at(&[t - h, t, t + h]).unwrap();
            let rhs = hamilton_rhs(&spec, &st[1]).unwrap();
            let (a, b) = (st[0].phase(), st[2].phase());
            for i in 0..6 {
                let fd = (b[i] - a[i]) / (2.0 * h);
                assert!((fd - rhs[i]).abs() <= 1e-6 * rhs[i].abs().max(1.0), "{} t={t} {i}: {fd} vs {}", spec.name(), rhs[i]);
            }
        }
    }
}

#[test]
fn orbits_reproduce_their_launch() {
    for (spec, s0, _) in cases() {
        let orbit = closed_form_orbit(&spec, &s0).unwrap();
        let at = orbit.state_at(s0.time).unwrap();
        for k in 0..7 {
            assert!((at.to_array()[k] - s0.to_array()[k]).abs() <= 1e-12);
        }
    }
}

#[test]
fn invariants_are_constant_along_orbits() {
    for (spec, s0, span) in cases() {
        if spec == FieldSpec::Free {
            continue;
        }
        let set = InvariantSet::for_launch(&spec, &s0).unwrap();
        let orbit = closed_form_orbit(&spec, &s0).unwrap();
        let times: Vec<f64> = (0..=40).map(|k| s0.time + span * k as f64 / 40.0).collect();
        let q0 = set.evaluate(&s0).unwrap();
        for s in orbit.states_at(&times).unwrap() {
            let q = set.evaluate(&s).unwrap();
            for k in 0..set.quantities.len() {
                assert!(common::rel(q[k], q0[k]) <= 1e-8, "{} {}", spec.name(), set.quantities[k]);
            }
        }
    }
}

#[test]
fn orbits_match_the_integrator() {
    for (spec, s0, span) in cases() {
        let traj = integrate(&spec, &s0, s0.time + span, &IntegrateOptions::with_tol(1e-10), None).unwrap();
        let orbit = closed_form_orbit(&spec, &s0).unwrap();
        let dev = max_deviation(&orbit, &traj).unwrap();
        assert!(dev.iter().all(|d| *d <= 1e-6), "{} {dev:?}", spec.name());
    }
}

#[test]
fn oscillator_orbit_conserves_its_quantities() {
    let eps = 0.1;
    let orbit = vortex_transverse_orbit(eps, &[0.3, -0.2, 0.1, 0.4], 0.0);
    let x0 = vortex_transverse_invariants(eps, &orbit.at(0.0)).unwrap();
    for (_, s) in orbit.sample(8.0 * std::f64::consts::PI, 200) {
        let x = vortex_transverse_invariants(eps, &s).unwrap();
        for k in 0..3 {
            assert!((x[k] - x0[k]).abs() <= 1e-10 * x0[k].abs().max(1.0));
        }
    }
}

#[test]
fn free_vortex_orbit_is_affine() {
    let spec = FieldSpec::Vortex { b0: 0.0, omega: 1.0 };
    let s0 = front(0.0, 0.0, 0.3, 0.1, 0.5, 0.1, -0.05);
    let orbit = vortex_orbit(&spec, &s0).unwrap();
    let pts = orbit.states_at(&[0.0, 1.0, 2.0, 3.5, 7.0]).unwrap();
    let v = [(pts[1].q[1] - pts[0].q[1]), (pts[1].q[2] - pts[0].q[2])];
    for s in &pts {
        assert!((s.q[1] - s0.q[1] - v[0] * s.time).abs() < 1e-12);
        assert!((s.q[2] - s0.q[2] - v[1] * s.time).abs() < 1e-12);
    }
}

#[test]
fn axis_orbit_drifts_linearly_in_x_minus() {
    let spec = common::vortex();
    let pm = 0.7;
    let s0 = front(0.0, 0.2, 0.0, 0.0, pm, 0.0, 0.0);
    let orbit = vortex_orbit(&spec, &s0).unwrap();
    for s in orbit.states_at(&[1.0, 3.0, 6.0]).unwrap() {
        assert!((s.q[0] - 0.2 - s.time / (4.0 * pm * pm)).abs() < 1e-12);
    }
}

#[test]
fn no_closed_form_for_undulator_or_helical() {
    let s0 = front(0.0, 0.0, 0.1, 0.2, 0.5, 0.1, -0.1);
    assert!(matches!(closed_form_orbit(&common::helical(), &s0), Err(Error::NoClosedForm { .. })));
    let i0 = PhasePoint::new(Form::Instant, 0.0, [0.0; 3], [0.1, 0.0, 0.3]);
    assert!(matches!(closed_form_orbit(&common::undulator(), &i0), Err(Error::NoClosedForm { .. })));
    assert!(matches!(
        closed_form_orbit(&common::tm_mode(), &front(0.0, 0.0, 0.1, 0.2, 0.5, 0.1, -0.1)),
        Err(Error::SingularLaunchTime)
    ));
}

#[test]
fn tm_rays_through_origin() {
    let spec = common::tm_mode();
    // tune p⊥ so that Q₁ = Q₂ = 0; both are affine in p⊥
    let set = InvariantSet::new(&spec, 1.0).unwrap();
    let mut s0 = front(1.0, 0.0, 0.3, -0.2, 0.5, 0.0, 0.0);
    for (i, name) in [(1, "Q1"), (2, "Q2")] {
        let g = set.gradient(name, &s0).unwrap();
        s0.p[i] -= set.value(name, &s0).unwrap() / g[4 + i];
    }
    assert!(set.value("Q1", &s0).unwrap().abs() < 1e-14);
    assert!(set.value("Q2", &s0).unwrap().abs() < 1e-14);
    let ClosedFormOrbit::Tm(orbit) = closed_form_orbit(&spec, &s0).unwrap() else { unreachable!() };
    for s in orbit.states_at(&[1.5, 2.0, 4.0]).unwrap() {
        assert!((s.q[1] / s.time - 0.3).abs() < 1e-12);
        assert!((s.q[2] / s.time + 0.2).abs() < 1e-12);
    }
}

#[test]
fn exponential_of_zero_is_identity() {
    assert_eq!(expm(&(oscillator_matrix(0.1) * 0.0)), Matrix4::identity());
}

proptest! {
    #[test]
    fn exponential_semigroup(eps in -0.5..0.5f64, s in -3.0..3.0f64, t in -3.0..3.0f64) {
        let m = oscillator_matrix(eps);
        let lhs = expm(&(m * (s + t)));
        let rhs = expm(&(m * s)) * expm(&(m * t));
        let scale = lhs.amax().max(1.0);
        prop_assert!((lhs - rhs).amax() <= 1e-10 * scale);
    }

    #[test]
    fn propagation_composes(eps in -0.5..0.5f64, s in 0.0..5.0f64, t in 0.0..5.0f64) {
        let y = Vector4::new(0.3, -0.1, 0.2, 0.4);
        let once = propagate(eps, &y, s + t);
        let twice = propagate(eps, &propagate(eps, &y, s), t);
        prop_assert!((once - twice).amax() <= 1e-10 * once.amax().max(1.0));
    }
}
