mod common;

use proptest::prelude::*;
use relcharge_core::dynamics::{
    finite_difference_gradient, front_to_instant, hamilton_rhs, hamiltonian, hamiltonian_gradient, instant_to_front,
    integrate, poisson_bracket, IntegrateOptions, Numeric, PhaseFunction,
};
use relcharge_core::invariants::{InvariantSet, TrackedInvariants};
use relcharge_core::sampling::sample_states;
use relcharge_core::{Form, PhasePoint};

// smooth test functions of phase space, parametrised by a few coefficients
fn smooth(c: [f64; 4]) -> impl Fn(&PhasePoint) -> relcharge_core::Result<f64> {
    move |s: &PhasePoint| {
        let [a, b, d, e] = c;
        Ok(a * (s.q[1] * s.p[2]).sin() + b * s.q[0] * s.p[1] * s.p[1] + d * (0.3 * s.p[0] + s.q[2]).cos()
            + e * s.time * s.q[1])
    }
}

fn poly(c: [f64; 4]) -> impl Fn(&PhasePoint) -> relcharge_core::Result<f64> {
    move |s: &PhasePoint| {
        let [a, b, d, e] = c;
        Ok(a * s.q[0] * s.p[1] + b * s.q[1] * s.q[1] + d * s.p[0] * s.p[2] * s.q[2] + e * s.p[1] * s.p[1])
    }
}

type Fun<'a> = &'a dyn Fn(&PhasePoint) -> relcharge_core::Result<f64>;

fn bracket_fn<'a>(u: Fun<'a>, v: Fun<'a>) -> impl Fn(&PhasePoint) -> relcharge_core::Result<f64> + 'a {
    move |x: &PhasePoint| poisson_bracket(&Numeric(u), &Numeric(v), x)
}

fn state() -> impl Strategy<Value = PhasePoint> {
    (prop::array::uniform3(-1.0..1.0f64), prop::array::uniform3(-1.0..1.0f64), -1.0..1.0f64)
        .prop_map(|(q, p, t)| PhasePoint::new(Form::Front, t, q, p))
}

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-2.0..2.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_antisymmetric(a in coeffs(), b in coeffs(), s in state()) {
        let (f, g) = (Numeric(smooth(a)), Numeric(smooth(b)));
        let fg = poisson_bracket(&f, &g, &s).unwrap();
        let gf = poisson_bracket(&g, &f, &s).unwrap();
        prop_assert!((fg + gf).abs() < 1e-12 * (1.0 + fg.abs()));
        prop_assert!(poisson_bracket(&f, &f, &s).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bracket_is_bilinear(a in coeffs(), b in coeffs(), c in coeffs(), k in -3.0..3.0f64, s in state()) {
        let (f, g, h) = (smooth(a), smooth(b), Numeric(smooth(c)));
        let combo = Numeric(|x: &PhasePoint| Ok(f(x)? + k * g(x)?));
        let lhs = poisson_bracket(&combo, &h, &s).unwrap();
        let rhs = poisson_bracket(&Numeric(&f), &h, &s).unwrap() + k * poisson_bracket(&Numeric(&g), &h, &s).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-7 * (1.0 + lhs.abs()));
    }

    #[test]
    fn bracket_obeys_leibniz(a in coeffs(), b in coeffs(), c in coeffs(), s in state()) {
        let (f, g, h) = (smooth(a), smooth(b), Numeric(smooth(c)));
        let product = Numeric(|x: &PhasePoint| Ok(f(x)? * g(x)?));
        let lhs = poisson_bracket(&product, &h, &s).unwrap();
        let rhs = f(&s).unwrap() * poisson_bracket(&Numeric(&g), &h, &s).unwrap()
            + g(&s).unwrap() * poisson_bracket(&Numeric(&f), &h, &s).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-7 * (1.0 + lhs.abs()));
    }

    #[test]
    fn jacobi_identity(a in coeffs(), b in coeffs(), c in coeffs(), s in state()) {
        let (f, g, h) = (poly(a), poly(b), poly(c));
        let gh = bracket_fn(&g, &h);
        let hf = bracket_fn(&h, &f);
        let fg = bracket_fn(&f, &g);
        let total = poisson_bracket(&Numeric(&f), &Numeric(&gh), &s).unwrap()
            + poisson_bracket(&Numeric(&g), &Numeric(&hf), &s).unwrap()
            + poisson_bracket(&Numeric(&h), &Numeric(&fg), &s).unwrap();
        prop_assert!(total.abs() <= 1e-6, "jacobi sum {total}");
    }
}

#[test]
fn hamiltonian_gradient_matches_finite_differences() {
    for spec in common::all_specs() {
        for form in [Form::Front, Form::Instant] {
            if form == Form::Instant && !matches!(spec, relcharge_core::FieldSpec::Undulator { .. }) {
                continue;
            }
            for s in sample_states(&spec, form, 100, 11) {
                let (_, g) = hamiltonian_gradient(&spec, &s).unwrap();
                let fd = finite_difference_gradient(|x| hamiltonian(&spec, x), &s).unwrap();
                for k in 0..7 {
                    assert!(
                        (g[k] - fd[k]).abs() <= 1e-7 * g[k].abs().max(1.0),
                        "{} {k}: {} vs {}",
                        spec.name(),
                        g[k],
                        fd[k]
                    );
                }
            }
        }
    }
}

#[test]
fn rhs_is_the_signed_gradient() {
    for spec in common::all_specs() {
        for s in sample_states(&spec, Form::Front, 30, 12) {
            let (_, g) = hamiltonian_gradient(&spec, &s).unwrap();
            let r = hamilton_rhs(&spec, &s).unwrap();
            for i in 0..3 {
                assert_eq!(r[i], -g[4 + i]);
                assert_eq!(r[3 + i], g[1 + i]);
            }
        }
    }
}

#[test]
fn decoupled_plane_wave_light_front_velocity() {
    let spec = common::circular_wave();
    let relcharge_core::FieldSpec::PlaneWave { f1, f2 } = &spec else { unreachable!() };
    for s in sample_states(&spec, Form::Front, 50, 13) {
        let r = hamilton_rhs(&spec, &s).unwrap();
        let (a1, a2) = (f1.derivative(s.time), f2.derivative(s.time));
        let pm = s.p[0];
        let kin = (s.p[1] - a1).powi(2) + (s.p[2] - a2).powi(2);
        assert!((r[0] - (1.0 + kin) / (4.0 * pm * pm)).abs() < 1e-13);
        assert!((r[1] + (s.p[1] - a1) / (2.0 * pm)).abs() < 1e-14);
        assert!((r[2] + (s.p[2] - a2) / (2.0 * pm)).abs() < 1e-14);
    }
}

fn plane_wave_drift(tol: f64) -> f64 {
    let spec = common::plane_wave();
    let s0 = PhasePoint::new(Form::Front, 0.0, [0.0; 3], [0.5, 0.0, 0.0]);
    let set = InvariantSet::for_launch(&spec, &s0).unwrap();
    let tracker = TrackedInvariants::all(set.clone());
    let traj = integrate(&spec, &s0, 20.0, &IntegrateOptions::with_tol(tol), Some(&tracker)).unwrap();
    let q0 = set.evaluate(&s0).unwrap();
    let mut worst = 0.0f64;
    for s in &traj.samples {
        let scale = set.magnitudes(&s.state).unwrap();
        for k in 0..q0.len() {
            worst = worst.max((s.tracked[k] - q0[k]).abs() / scale[k].max(1.0));
        }
    }
    worst
}

#[test]
fn halving_tolerance_reduces_drift() {
    let drifts: Vec<f64> = [1e-6, 5e-7, 2.5e-7, 1.25e-7].map(plane_wave_drift).to_vec();
    for w in drifts.windows(2) {
        assert!(w[1] < w[0], "{drifts:?}");
    }
    assert!(plane_wave_drift(1e-10) <= 1e-8);
}

#[test]
fn front_and_instant_forms_agree_on_the_plane_wave() {
    let spec = common::plane_wave();
    let front0 = PhasePoint::new(Form::Front, 0.0, [0.0, 0.1, -0.2], [0.5, 0.2, 0.1]);
    let opts = IntegrateOptions::with_tol(1e-11);
    let front = integrate(&spec, &front0, 10.0, &opts, None).unwrap();
    let inst0 = front_to_instant(&spec, &front0).unwrap();
    // round trip through the mass shell
    let back = instant_to_front(&spec, &inst0).unwrap();
    for k in 0..7 {
        assert!((back.to_array()[k] - front0.to_array()[k]).abs() < 1e-12);
    }
    let t_end = front_to_instant(&spec, front.last()).unwrap().time;
    let inst = integrate(&spec, &inst0, t_end, &opts, None).unwrap();
    let mut worst = 0.0f64;
    for s in &front.samples {
        let matched = front_to_instant(&spec, &s.state).unwrap();
        let at = inst.interpolate(matched.time);
        for k in 0..3 {
            worst = worst.max((at.q[k] - matched.q[k]).abs()).max((at.p[k] - matched.p[k]).abs());
        }
    }
    assert!(worst <= 1e-5, "max deviation {worst}");
}

#[test]
fn free_particle_moves_in_a_straight_line() {
    let spec = relcharge_core::FieldSpec::Free;
    let s0 = PhasePoint::new(Form::Front, 0.0, [0.3, -0.1, 0.2], [0.7, 0.3, -0.4]);
    let traj = integrate(&spec, &s0, 5.0, &IntegrateOptions::default(), None).unwrap();
    let v = hamilton_rhs(&spec, &s0).unwrap();
    for s in &traj.samples {
        for k in 0..3 {
            assert!((s.state.p[k] - s0.p[k]).abs() <= 1e-12);
            assert!((s.state.q[k] - s0.q[k] - v[k] * s.state.time).abs() <= 1e-10);
        }
    }
}

#[test]
fn hamiltonian_phase_function_uses_exact_gradient() {
    let spec = common::helical();
    for s in sample_states(&spec, Form::Front, 10, 14) {
        let h = relcharge_core::dynamics::Hamiltonian(&spec);
        let exact = h.gradient(&s).unwrap();
        let numeric = Numeric(|x: &PhasePoint| hamiltonian(&spec, x)).gradient(&s).unwrap();
        for k in 0..7 {
            assert!((exact[k] - numeric[k]).abs() <= 1e-7 * exact[k].abs().max(1.0));
        }
    }
}
