//! Instant- and front-form Hamiltonians, Poisson brackets, the evolution
//! law and trajectory integration.
//!
//! Time evolution follows `dQ/dτ = ∂Q/∂τ - {Q, H}` with the canonical
//! bracket `{X, Y} = Σ ∂X/∂qᵢ ∂Y/∂pᵢ - ∂X/∂pᵢ ∂Y/∂qᵢ`, so Hamilton's
//! equations read `q̇ = -∂H/∂p`, `ṗ = +∂H/∂q`. This is the sign that goes
//! with lower-index canonical momenta `p_μ = π_μ + A_μ`.

use crate::error::{Error, Result};
use crate::integrator::{self, Dopri5Options, Failure, Node, OdeSystem};
use crate::fields::FieldSpec;
use crate::scalar::{Dual, Scalar};
use crate::spacetime::{self, event_of, Covector, Form, PhasePoint, PoincareGenerator};

/// `|p₋ - A₋|` below which the front-form Hamiltonian is rejected.
pub const LIGHT_CONE_EPS: f64 = 1e-12;
/// `|p₋ - A₋|` below which integration stops at a domain boundary.
pub const BOUNDARY_EPS: f64 = 1e-9;

pub type Dual7 = Dual<f64, 7>;

/// Seeds the seven extended phase-space coordinates as dual variables.
pub fn seed_phase(pt: &PhasePoint) -> (Dual7, [Dual7; 3], [Dual7; 3]) {
    let v = pt.to_array();
    let d = |k: usize| Dual7::variable(v[k], k);
    (d(0), [d(1), d(2), d(3)], [d(4), d(5), d(6)])
}

/// Hamiltonian over any scalar type.
pub fn hamiltonian_of<S: Scalar>(
    spec: &FieldSpec,
    form: Form,
    time: S,
    q: &[S; 3],
    p: &[S; 3],
) -> Result<S> {
    let x = event_of(form, time, q);
    let a = spec.potential_at(&x)?;
    match form {
        Form::Instant => {
            let (k1, k2, k3) = (p[0] - a[1], p[1] - a[2], p[2] - a[3]);
            Ok((k1 * k1 + k2 * k2 + k3 * k3 + 1.0).sqrt() + a[0])
        }
        Form::Front => {
            let a_plus = (a[0] + a[3]) * 0.5;
            let a_minus = (a[0] - a[3]) * 0.5;
            let gap = p[0] - a_minus;
            if gap.re().abs() < LIGHT_CONE_EPS {
                return Err(Error::OnLightCone {
                    gap: gap.re().abs(),
                    time: time.re(),
                });
            }
            let (k1, k2) = (p[1] - a[1], p[2] - a[2]);
            Ok((k1 * k1 + k2 * k2 + 1.0) / (gap * 4.0) + a_plus)
        }
    }
}

pub fn hamiltonian(spec: &FieldSpec, state: &PhasePoint) -> Result<f64> {
    hamiltonian_of(spec, state.form, state.time, &state.q, &state.p)
}

/// `H` and its gradient with respect to `(time, q, p)`.
pub fn hamiltonian_gradient(spec: &FieldSpec, state: &PhasePoint) -> Result<(f64, [f64; 7])> {
    let (t, q, p) = seed_phase(state);
    let h = hamiltonian_of(spec, state.form, t, &q, &p)?;
    Ok((h.v, h.d))
}

/// Canonical four-momentum `p_μ` (lower Cartesian indices), completed on
/// shell with `p₊ = H` (front form) or `p₀ = H` (instant form).
pub fn four_momentum(spec: &FieldSpec, state: &PhasePoint) -> Result<Covector> {
    let h = hamiltonian(spec, state)?;
    Ok(match state.form {
        Form::Instant => Covector([h, state.p[0], state.p[1], state.p[2]]),
        Form::Front => Covector::from_light_front(h, state.p[0], [state.p[1], state.p[2]]),
    })
}

/// `ξ·p` over any scalar type.
pub fn charge_of<S: Scalar>(
    spec: &FieldSpec,
    g: &PoincareGenerator,
    form: Form,
    time: S,
    q: &[S; 3],
    p: &[S; 3],
) -> Result<S> {
    let h = hamiltonian_of(spec, form, time, q, p)?;
    let x = event_of(form, time, q);
    let xi = g.xi_upper(&x);
    let mom = match form {
        Form::Instant => [h, p[0], p[1], p[2]],
        Form::Front => [h + p[0], p[1], p[2], h - p[0]],
    };
    Ok(spacetime::pair(&xi, &mom))
}

/// The Noether charge candidate `ξ·p` at a state.
pub fn charge(spec: &FieldSpec, g: &PoincareGenerator, state: &PhasePoint) -> Result<f64> {
    charge_of(spec, g, state.form, state.time, &state.q, &state.p)
}

/// Phase velocity `(q̇, ṗ)` with `q̇ = -∂H/∂p`, `ṗ = ∂H/∂q`.
pub fn hamilton_rhs(spec: &FieldSpec, state: &PhasePoint) -> Result<[f64; 6]> {
    let (_, g) = hamiltonian_gradient(spec, state)?;
    Ok([-g[4], -g[5], -g[6], g[1], g[2], g[3]])
}

/// `dx^μ/dτ` in Cartesian components along the flow (τ the evolution time).
pub fn spacetime_velocity(spec: &FieldSpec, state: &PhasePoint) -> Result<[f64; 4]> {
    let v = hamilton_rhs(spec, state)?;
    Ok(match state.form {
        Form::Instant => [1.0, v[0], v[1], v[2]],
        Form::Front => [0.5 * (1.0 + v[0]), v[1], v[2], 0.5 * (1.0 - v[0])],
    })
}

/// `p₋ - A₋` at a front-form state.
pub fn light_cone_gap(spec: &FieldSpec, state: &PhasePoint) -> Result<f64> {
    let a = crate::fields::potential(spec, state.event())?;
    Ok(state.p[0] - a.minus())
}

/// A real function on extended phase space.
pub trait PhaseFunction {
    fn value(&self, state: &PhasePoint) -> Result<f64>;

    /// Partial derivatives with respect to `(time, q₁, q₂, q₃, p₁, p₂, p₃)`.
    /// Defaults to Richardson-extrapolated central differences.
    fn gradient(&self, state: &PhasePoint) -> Result<[f64; 7]> {
        finite_difference_gradient(|s| self.value(s), state)
    }
}

/// Wraps a closure as a [`PhaseFunction`] differentiated numerically.
pub struct Numeric<F>(pub F);

impl<F: Fn(&PhasePoint) -> Result<f64>> PhaseFunction for Numeric<F> {
    fn value(&self, state: &PhasePoint) -> Result<f64> {
        (self.0)(state)
    }
}

/// The Hamiltonian of a background as a phase function (exact gradient).
pub struct Hamiltonian<'a>(pub &'a FieldSpec);

impl PhaseFunction for Hamiltonian<'_> {
    fn value(&self, state: &PhasePoint) -> Result<f64> {
        hamiltonian(self.0, state)
    }
    fn gradient(&self, state: &PhasePoint) -> Result<[f64; 7]> {
        hamiltonian_gradient(self.0, state).map(|(_, g)| g)
    }
}

/// Central differences with step `h = 1e-5·max(1, |coordinate|)` and one
/// Richardson refinement.
pub fn finite_difference_gradient<F>(f: F, state: &PhasePoint) -> Result<[f64; 7]>
where
    F: Fn(&PhasePoint) -> Result<f64>,
{
    let base = state.to_array();
    let mut out = [0.0; 7];
    for k in 0..7 {
        let h = 1e-5 * base[k].abs().max(1.0);
        let central = |h: f64| -> Result<f64> {
            let mut up = base;
            let mut dn = base;
            up[k] += h;
            dn[k] -= h;
            let fu = f(&PhasePoint::from_array(state.form, up))?;
            let fd = f(&PhasePoint::from_array(state.form, dn))?;
            Ok((fu - fd) / (2.0 * h))
        };
        let d1 = central(h)?;
        let d2 = central(0.5 * h)?;
        out[k] = (4.0 * d2 - d1) / 3.0;
    }
    Ok(out)
}

fn bracket_from_gradients(gf: &[f64; 7], gg: &[f64; 7]) -> f64 {
    (0..3).map(|i| gf[1 + i] * gg[4 + i] - gf[4 + i] * gg[1 + i]).sum()
}

/// `{f, g}` at a state.
pub fn poisson_bracket(f: &dyn PhaseFunction, g: &dyn PhaseFunction, state: &PhasePoint) -> Result<f64> {
    Ok(bracket_from_gradients(&f.gradient(state)?, &g.gradient(state)?))
}

/// `dQ/dτ = ∂Q/∂τ - {Q, H}`.
pub fn total_time_derivative(q: &dyn PhaseFunction, spec: &FieldSpec, state: &PhasePoint) -> Result<f64> {
    conservation_residual(q, spec, state).map(|(r, _)| r)
}

/// `dQ/dτ` together with the magnitude scale of its individual terms,
/// `|∂Q/∂τ| + Σ |∂Q/∂qᵢ ∂H/∂pᵢ| + |∂Q/∂pᵢ ∂H/∂qᵢ|`.
pub fn conservation_residual(q: &dyn PhaseFunction, spec: &FieldSpec, state: &PhasePoint) -> Result<(f64, f64)> {
    let gq = q.gradient(state)?;
    let (_, gh) = hamiltonian_gradient(spec, state)?;
    let residual = gq[0] - bracket_from_gradients(&gq, &gh);
    let scale = gq[0].abs()
        + (0..3)
            .map(|i| (gq[1 + i] * gh[4 + i]).abs() + (gq[4 + i] * gh[1 + i]).abs())
            .sum::<f64>();
    Ok((residual, scale))
}

/// Matched instant-form state for a front-form state: same event, same
/// canonical covector `p_μ` with `p₊` completed on shell.
pub fn front_to_instant(spec: &FieldSpec, state: &PhasePoint) -> Result<PhasePoint> {
    assert_eq!(state.form, Form::Front);
    let p = four_momentum(spec, state)?;
    let e = state.event();
    Ok(PhasePoint::new(Form::Instant, e.t, [e.x, e.y, e.z], [p.0[1], p.0[2], p.0[3]]))
}

/// Matched front-form state for an instant-form state.
pub fn instant_to_front(spec: &FieldSpec, state: &PhasePoint) -> Result<PhasePoint> {
    assert_eq!(state.form, Form::Instant);
    let p = four_momentum(spec, state)?;
    let e = state.event();
    Ok(PhasePoint::new(
        Form::Front,
        e.x_plus(),
        [e.x_minus(), e.x, e.y],
        [p.minus(), p.0[1], p.0[2]],
    ))
}

/// Quantities recorded at every accepted step of a trajectory.
pub trait Tracker {
    fn names(&self) -> Vec<String>;
    fn evaluate(&self, state: &PhasePoint) -> Result<Vec<f64>>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub state: PhasePoint,
    /// Phase velocity at the sample, used for dense output.
    pub velocity: [f64; 6],
    pub tracked: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub form: Form,
    pub tracked_names: Vec<String>,
    pub samples: Vec<Sample>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn first(&self) -> &PhasePoint {
        &self.samples[0].state
    }

    pub fn last(&self) -> &PhasePoint {
        &self.samples[self.samples.len() - 1].state
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.state.time)
    }

    /// Cubic Hermite dense output.
    pub fn interpolate(&self, time: f64) -> PhasePoint {
        let nodes: Vec<Node<6>> = self
            .samples
            .iter()
            .map(|s| Node {
                t: s.state.time,
                y: s.state.phase(),
                dydt: s.velocity,
            })
            .collect();
        let y = integrator::hermite(&nodes, time);
        self.samples[0].state.with_phase(time, &y)
    }

    /// Tracked series by name.
    pub fn series(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.tracked_names.iter().position(|n| n == name)?;
        Some(self.samples.iter().map(|s| s.tracked[k]).collect())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct IntegrateOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub h_max: f64,
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        IntegrateOptions {
            rel_tol: tol,
            abs_tol: tol,
            h_max: f64::INFINITY,
        }
    }
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions::with_tol(1e-10)
    }
}

struct Flow<'a> {
    spec: &'a FieldSpec,
    form: Form,
}

impl Flow<'_> {
    fn point(&self, t: f64, y: &[f64; 6]) -> PhasePoint {
        PhasePoint::new(self.form, t, [y[0], y[1], y[2]], [y[3], y[4], y[5]])
    }
}

impl OdeSystem<6> for Flow<'_> {
    type Error = Error;

    fn rhs(&self, t: f64, y: &[f64; 6]) -> Result<[f64; 6]> {
        hamilton_rhs(self.spec, &self.point(t, y))
    }

    fn check(&self, t: f64, y: &[f64; 6]) -> Result<()> {
        let pt = self.point(t, y);
        if !pt.is_finite() {
            return Err(Error::DomainBoundary {
                last: pt,
                reason: "non-finite state".into(),
            });
        }
        if self.form == Form::Front {
            let gap = light_cone_gap(self.spec, &pt)?;
            if gap.abs() < BOUNDARY_EPS {
                return Err(Error::DomainBoundary {
                    last: pt,
                    reason: format!("|p₋ - A₋| = {:.3e} below {BOUNDARY_EPS:e}", gap.abs()),
                });
            }
        }
        Ok(())
    }
}

fn check_span(spec: &FieldSpec, initial: &PhasePoint, t_end: f64) -> Result<()> {
    if !t_end.is_finite() || !initial.is_finite() {
        return Err(Error::Invalid("non-finite initial state or end time".into()));
    }
    if let FieldSpec::TmMode { .. } = spec {
        let (lo, hi) = if initial.time <= t_end {
            (initial.time, t_end)
        } else {
            (t_end, initial.time)
        };
        // the singular surface is x⁺ = 0; in the instant form x⁺ varies along
        // the orbit, so only the front form can be checked up front
        if initial.form == Form::Front && lo <= 0.0 && hi >= 0.0 {
            return Err(Error::TmSingular);
        }
    }
    Ok(())
}

/// Integrates Hamilton's equations from `initial` to `t_end`.
pub fn integrate(
    spec: &FieldSpec,
    initial: &PhasePoint,
    t_end: f64,
    opts: &IntegrateOptions,
    tracker: Option<&dyn Tracker>,
) -> Result<Trajectory> {
    check_span(spec, initial, t_end)?;
    let flow = Flow {
        spec,
        form: initial.form,
    };
    let o = Dopri5Options {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        h_max: opts.h_max,
        ..Default::default()
    };
    let sol = integrator::solve(&flow, initial.time, initial.phase(), t_end, &o).map_err(|f| match f {
        Failure::StepUnderflow { last, h } => Error::StepUnderflow {
            last: flow.point(last.t, &last.y),
            step: h,
        },
        Failure::TooManySteps { last } => Error::StepUnderflow {
            last: flow.point(last.t, &last.y),
            step: 0.0,
        },
        Failure::System { last, error } => match error {
            Error::DomainBoundary { .. } | Error::StepUnderflow { .. } => error,
            other => Error::DomainBoundary {
                last: flow.point(last.t, &last.y),
                reason: other.to_string(),
            },
        },
    })?;
    let mut samples = Vec::with_capacity(sol.nodes.len());
    for n in &sol.nodes {
        let state = flow.point(n.t, &n.y);
        let tracked = match tracker {
            Some(t) => t.evaluate(&state)?,
            None => Vec::new(),
        };
        samples.push(Sample {
            state,
            velocity: n.dydt,
            tracked,
        });
    }
    Ok(Trajectory {
        form: initial.form,
        tracked_names: tracker.map(|t| t.names()).unwrap_or_default(),
        samples,
        stats: IntegratorStats {
            steps: sol.stats.accepted,
            rejected: sol.stats.rejected,
            evaluations: sol.stats.evaluations,
            rel_tol: opts.rel_tol,
            abs_tol: opts.abs_tol,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Profile;

    fn front(x_plus: f64, x_minus: f64, x: f64, y: f64, pm: f64, p1: f64, p2: f64) -> PhasePoint {
        PhasePoint::new(Form::Front, x_plus, [x_minus, x, y], [pm, p1, p2])
    }

    fn plane_wave() -> FieldSpec {
        FieldSpec::PlaneWave {
            f1: Profile::Cosine {
                amplitude: 1.0,
                omega: 1.0,
            },
            f2: Profile::zero(),
        }
    }

    #[test]
    fn free_mass_shell() {
        let rest = PhasePoint::new(Form::Instant, 0.0, [0.0; 3], [0.0; 3]);
        assert_eq!(hamiltonian(&FieldSpec::Free, &rest).unwrap(), 1.0);
        let f = front(0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0);
        assert_eq!(hamiltonian(&FieldSpec::Free, &f).unwrap(), 0.5);
    }

    #[test]
    fn undulator_kinetic_momentum_vanishes() {
        let spec = FieldSpec::Undulator { b0: 0.5, omega: 1.0 };
        let s = PhasePoint::new(Form::Instant, 0.0, [0.3, -0.2, 0.0], [0.5, 0.0, 0.0]);
        assert!((hamiltonian(&spec, &s).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn light_cone_is_rejected() {
        let s = front(0.0, 0.0, 0.0, 0.0, 0.0, 0.1, 0.0);
        assert!(matches!(
            hamiltonian(&FieldSpec::Free, &s),
            Err(Error::OnLightCone { .. })
        ));
    }

    #[test]
    fn free_front_velocity() {
        let s = front(0.0, 0.0, 0.0, 0.0, 0.7, 0.3, -0.2);
        let v = hamilton_rhs(&FieldSpec::Free, &s).unwrap();
        let expect = (1.0 + 0.09 + 0.04) / (4.0 * 0.49);
        assert!((v[0] - expect).abs() < 1e-15);
        assert_eq!(&v[3..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn undulator_longitudinal_velocity() {
        let spec = FieldSpec::Undulator { b0: 0.5, omega: 1.0 };
        let s = PhasePoint::new(Form::Instant, 0.0, [0.1, 0.2, 0.4], [0.3, -0.1, 0.8]);
        let h = hamiltonian(&spec, &s).unwrap();
        let v = hamilton_rhs(&spec, &s).unwrap();
        assert!((v[2] + 0.8 / h).abs() < 1e-15);
        let b0 = 0.5;
        assert!((v[1] + (-0.1 - b0 * 0.4f64.sin()) / h).abs() < 1e-15);
        let p3dot = b0 / h * (0.3 * 0.4f64.sin() - (-0.1) * 0.4f64.cos());
        assert!((v[5] - p3dot).abs() < 1e-15);
    }

    #[test]
    fn canonical_brackets() {
        let s = front(0.4, 0.1, 0.2, 0.3, 0.5, 0.1, 0.2);
        let xm = Numeric(|p: &PhasePoint| Ok(p.q[0]));
        let pm = Numeric(|p: &PhasePoint| Ok(p.p[0]));
        let x = Numeric(|p: &PhasePoint| Ok(p.q[1]));
        let p2 = Numeric(|p: &PhasePoint| Ok(p.p[2]));
        assert!((poisson_bracket(&xm, &pm, &s).unwrap() - 1.0).abs() < 1e-10);
        assert!(poisson_bracket(&x, &p2, &s).unwrap().abs() < 1e-10);
    }

    #[test]
    fn plane_wave_t1_bracket_with_p1() {
        let spec = plane_wave();
        let q4 = Numeric(|p: &PhasePoint| {
            let f1 = Profile::Cosine {
                amplitude: 1.0,
                omega: 1.0,
            };
            Ok(2.0 * p.q[1] * p.p[0] + p.time * p.p[1] - f1.value(p.time))
        });
        let p1 = Numeric(|p: &PhasePoint| Ok(p.p[1]));
        let s = front(1.3, 0.2, -0.4, 0.9, 0.6, 0.25, -0.3);
        assert!((poisson_bracket(&q4, &p1, &s).unwrap() - 1.2).abs() < 1e-9);
        // and Q4 is conserved
        assert!(total_time_derivative(&q4, &spec, &s).unwrap().abs() < 1e-9);
        // whereas p1 is not for the TM mode
        let tm = FieldSpec::TmMode {
            f: Profile::Cosine {
                amplitude: 0.3,
                omega: 1.0,
            },
        };
        assert!(total_time_derivative(&p1, &tm, &s).unwrap().abs() > 1e-3);
    }

    #[test]
    fn free_particle_is_straight() {
        let s = front(0.0, 0.0, 0.1, -0.2, 0.6, 0.3, 0.1);
        let traj = integrate(&FieldSpec::Free, &s, 10.0, &IntegrateOptions::default(), None).unwrap();
        let v = hamilton_rhs(&FieldSpec::Free, &s).unwrap();
        for smp in &traj.samples {
            assert_eq!(smp.state.p, s.p);
            let dt = smp.state.time;
            for k in 0..3 {
                assert!((smp.state.q[k] - (s.q[k] + v[k] * dt)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tm_span_through_origin_rejected() {
        let tm = FieldSpec::TmMode {
            f: Profile::Cosine {
                amplitude: 0.3,
                omega: 1.0,
            },
        };
        let s = front(-1.0, 0.0, 0.1, 0.1, 0.5, 0.0, 0.0);
        assert_eq!(
            integrate(&tm, &s, 1.0, &IntegrateOptions::default(), None).unwrap_err(),
            Error::TmSingular
        );
    }

    #[test]
    fn matched_initial_data_roundtrip() {
        let spec = plane_wave();
        let s = front(0.7, -0.3, 0.2, 0.5, 0.8, -0.1, 0.4);
        let inst = front_to_instant(&spec, &s).unwrap();
        let back = instant_to_front(&spec, &inst).unwrap();
        for (a, b) in back.to_array().iter().zip(s.to_array()) {
            assert!((a - b).abs() < 1e-14);
        }
        // same energy-momentum covector in both forms
        let pf = four_momentum(&spec, &s).unwrap();
        let pi = four_momentum(&spec, &inst).unwrap();
        for k in 0..4 {
            assert!((pf.0[k] - pi.0[k]).abs() < 1e-14);
        }
    }
}
