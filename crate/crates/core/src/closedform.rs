//! Analytic orbits used as oracles for the integrator: plane-wave algebraic
//! orbits, TM-mode quadrature orbits and the vortex transverse reduction.
//!
//! All quadratures are anchored at the launch time, so every orbit
//! reproduces its initial state exactly there.

use nalgebra::Vector4;

use crate::dynamics;
use crate::error::{Error, Result};
use crate::expm;
use crate::fields::{FieldSpec, Profile};
use crate::invariants::{self, tm_quad_options};
use crate::quadrature::{integrate, integrate_ratio, QuadOptions};
use crate::spacetime::{Form, PhasePoint};

fn quad_options() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// Cumulative `x⁻` at `times`, integrating `rate` segment by segment from
/// the launch time. `rate` receives the segment start as well, so it can
/// reuse any per-segment cache.
fn accumulate<F>(times: &[f64], t0: f64, x0: f64, mut segment: F) -> Result<Vec<f64>>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let mut out = Vec::with_capacity(times.len());
    let (mut t, mut x) = (t0, x0);
    for &target in times {
        x += segment(t, target)?;
        t = target;
        out.push(x);
    }
    Ok(out)
}

/// A closed-form solution of Hamilton's equations.
pub trait Orbit {
    fn launch(&self) -> &PhasePoint;

    /// States at the requested times, most efficient for ordered times.
    fn states_at(&self, times: &[f64]) -> Result<Vec<PhasePoint>>;

    fn state_at(&self, time: f64) -> Result<PhasePoint> {
        Ok(self.states_at(&[time])?.remove(0))
    }
}

/// Plane-wave (and free) orbit: transverse motion read off from `Q₄, Q₅`,
/// `x⁻` by quadrature.
#[derive(Clone, Debug)]
pub struct PlaneWaveOrbit {
    pub f1: Profile,
    pub f2: Profile,
    pub launch: PhasePoint,
    /// `(Q₁, Q₂, Q₃, Q₄, Q₅)` at launch.
    pub charges: [f64; 5],
}

pub fn plane_wave_orbit(spec: &FieldSpec, initial: &PhasePoint) -> Result<PlaneWaveOrbit> {
    let (f1, f2) = match spec {
        FieldSpec::PlaneWave { f1, f2 } => (f1.clone(), f2.clone()),
        FieldSpec::Free => (Profile::zero(), Profile::zero()),
        _ => return Err(Error::Invalid("plane-wave orbit needs a plane wave".into())),
    };
    if initial.form != Form::Front {
        return Err(Error::Invalid("closed-form orbits start from front-form states".into()));
    }
    if initial.p[0] == 0.0 {
        return Err(Error::ZeroLongitudinalMomentum);
    }
    let charges = invariants::plane_wave_of(&f1, &f2, initial.time, &initial.q, &initial.p);
    Ok(PlaneWaveOrbit {
        f1,
        f2,
        launch: *initial,
        charges,
    })
}

impl PlaneWaveOrbit {
    /// `dx⁻/dx⁺`.
    pub fn x_minus_rate(&self, s: f64) -> f64 {
        let [q1, q2, q3, _, _] = self.charges;
        let k1 = q1 - self.f1.derivative(s);
        let k2 = q2 - self.f2.derivative(s);
        (1.0 + k1 * k1 + k2 * k2) / (4.0 * q3 * q3)
    }

    pub fn transverse(&self, s: f64) -> [f64; 2] {
        let [q1, q2, q3, q4, q5] = self.charges;
        [
            (q4 + self.f1.value(s) - q1 * s) / (2.0 * q3),
            (q5 + self.f2.value(s) - q2 * s) / (2.0 * q3),
        ]
    }
}

impl Orbit for PlaneWaveOrbit {
    fn launch(&self) -> &PhasePoint {
        &self.launch
    }

    fn states_at(&self, times: &[f64]) -> Result<Vec<PhasePoint>> {
        let o = quad_options();
        let xm = accumulate(times, self.launch.time, self.launch.q[0], |a, b| {
            Ok(integrate(|s| self.x_minus_rate(s), a, b, &o)?.value)
        })?;
        let [q1, q2, q3, _, _] = self.charges;
        Ok(times
            .iter()
            .zip(xm)
            .map(|(&t, xm)| {
                let [x, y] = self.transverse(t);
                if t == self.launch.time {
                    return self.launch;
                }
                PhasePoint::new(Form::Front, t, [xm, x, y], [q3, q1, q2])
            })
            .collect())
    }
}

/// TM-mode orbit: transverse coordinates and momenta algebraic given the
/// anchored integral `I(x⁺) = ∫ ds/(s²(2p₋+f(s)))`, `x⁻` by quadrature.
#[derive(Clone, Debug)]
pub struct TmOrbit {
    pub f: Profile,
    pub launch: PhasePoint,
    /// `(Q₁, Q₂, Q₃, Q₄, Q₅, Q̃₄)` at launch.
    pub charges: [f64; 6],
}

pub fn tm_orbit(spec: &FieldSpec, initial: &PhasePoint) -> Result<TmOrbit> {
    let f = match spec {
        FieldSpec::TmMode { f } => f.clone(),
        _ => return Err(Error::Invalid("TM orbit needs a TM mode".into())),
    };
    if initial.form != Form::Front {
        return Err(Error::Invalid("closed-form orbits start from front-form states".into()));
    }
    if initial.time == 0.0 {
        return Err(Error::SingularLaunchTime);
    }
    let charges = invariants::tm_of(&f, initial.time, initial.time, &initial.q, &initial.p)?;
    Ok(TmOrbit {
        f,
        launch: *initial,
        charges,
    })
}

impl TmOrbit {
    fn den(&self, s: f64) -> f64 {
        s * s * (2.0 * self.charges[2] + self.f.value(s))
    }

    fn integral(&self, a: f64, b: f64) -> Result<f64> {
        Ok(integrate_ratio(|_| 1.0, |s| self.den(s), a, b, &tm_quad_options())?.value)
    }

    /// `(x, y, p₁, p₂)` at `x⁺` given `I(x⁺)`.
    fn transverse(&self, s: f64, i: f64) -> [f64; 4] {
        let [q1, q2, pm, _, q5, q4t] = self.charges;
        let x = s * (q5 - q1 * i);
        let y = s * (q4t - q2 * i);
        [x, y, (q1 - 2.0 * x * pm) / s, (q2 - 2.0 * y * pm) / s]
    }

    /// `dx⁻/dx⁺ = (1 + (p⊥ - A⊥)²)/(2p₋ + f)²`.
    fn x_minus_rate(&self, s: f64, i: f64) -> f64 {
        let [x, y, p1, p2] = self.transverse(s, i);
        let fv = self.f.value(s);
        let (k1, k2) = (p1 - x * fv / s, p2 - y * fv / s);
        let d = 2.0 * self.charges[2] + fv;
        (1.0 + k1 * k1 + k2 * k2) / (d * d)
    }
}

impl Orbit for TmOrbit {
    fn launch(&self) -> &PhasePoint {
        &self.launch
    }

    fn states_at(&self, times: &[f64]) -> Result<Vec<PhasePoint>> {
        let o = tm_quad_options();
        let mut ivals = Vec::with_capacity(times.len());
        let mut i_prev = 0.0;
        let xm = accumulate(times, self.launch.time, self.launch.q[0], |a, b| {
            // the pole guard on the integral also covers the outer integrand
            let i_b = i_prev + self.integral(a, b)?;
            let mut failure = None;
            let seg = integrate(
                |s| match self.integral(a, s) {
                    Ok(di) => self.x_minus_rate(s, i_prev + di),
                    Err(e) => {
                        failure.get_or_insert(e);
                        0.0
                    }
                },
                a,
                b,
                &o,
            )?;
            if let Some(e) = failure {
                return Err(e);
            }
            i_prev = i_b;
            ivals.push(i_b);
            Ok(seg.value)
        })?;
        Ok(times
            .iter()
            .zip(xm)
            .zip(ivals)
            .map(|((&t, xm), i)| {
                if t == self.launch.time {
                    return self.launch;
                }
                let [x, y, p1, p2] = self.transverse(t, i);
                PhasePoint::new(Form::Front, t, [xm, x, y], [self.charges[2], p1, p2])
            })
            .collect())
    }
}

/// Solution of the rotating-frame oscillator system.
#[derive(Clone, Debug)]
pub struct OscillatorOrbit {
    pub eps: f64,
    pub phi0: f64,
    /// `(α, β, α', β')` at `φ₀`.
    pub y0: Vector4<f64>,
}

/// Oscillator orbit from `(α, β, p_α, p_β)` at `φ₀`.
pub fn vortex_transverse_orbit(eps: f64, initial: &[f64; 4], phi0: f64) -> OscillatorOrbit {
    let [al, be, pa, pb] = *initial;
    OscillatorOrbit {
        eps,
        phi0,
        y0: Vector4::new(al, be, pa + 0.5 * be, pb - 0.5 * al),
    }
}

impl OscillatorOrbit {
    /// `(α, β, p_α, p_β)` at `φ`.
    pub fn at(&self, phi: f64) -> [f64; 4] {
        if phi == self.phi0 {
            let y = self.y0;
            return [y[0], y[1], y[2] - 0.5 * y[1], y[3] + 0.5 * y[0]];
        }
        let y = expm::propagate(self.eps, &self.y0, phi - self.phi0);
        [y[0], y[1], y[2] - 0.5 * y[1], y[3] + 0.5 * y[0]]
    }

    /// `n` evenly spaced states over `[φ₀, φ₀ + span]`.
    pub fn sample(&self, span: f64, n: usize) -> Vec<(f64, [f64; 4])> {
        (0..n)
            .map(|k| {
                let phi = self.phi0 + span * k as f64 / (n.max(2) - 1) as f64;
                (phi, self.at(phi))
            })
            .collect()
    }
}

/// Full vortex orbit: transverse motion from the oscillator reduction,
/// `x⁻` from `dx⁻/dx⁺ = H/p₋`.
#[derive(Clone, Debug)]
pub struct VortexOrbit {
    pub spec: FieldSpec,
    pub launch: PhasePoint,
    pub omega: f64,
    pub oscillator: OscillatorOrbit,
}

pub fn vortex_orbit(spec: &FieldSpec, initial: &PhasePoint) -> Result<VortexOrbit> {
    let omega = match spec {
        FieldSpec::Vortex { omega, .. } => *omega,
        _ => return Err(Error::Invalid("vortex orbit needs a vortex".into())),
    };
    if initial.form != Form::Front {
        return Err(Error::Invalid("closed-form orbits start from front-form states".into()));
    }
    let eps = invariants::vortex_epsilon(spec, initial.p[0])?;
    let osc = invariants::vortex_to_oscillator(spec, initial.time, &initial.q, &initial.p)?;
    Ok(VortexOrbit {
        spec: spec.clone(),
        launch: *initial,
        omega,
        oscillator: vortex_transverse_orbit(eps, &osc, omega * initial.time),
    })
}

impl VortexOrbit {
    fn transverse(&self, x_plus: f64) -> Result<[f64; 4]> {
        let s = self.oscillator.at(self.omega * x_plus);
        invariants::oscillator_to_vortex(&self.spec, x_plus, self.launch.p[0], &s)
    }

    fn state_without_x_minus(&self, x_plus: f64) -> Result<PhasePoint> {
        let [x, y, p1, p2] = self.transverse(x_plus)?;
        Ok(PhasePoint::new(Form::Front, x_plus, [0.0, x, y], [self.launch.p[0], p1, p2]))
    }
}

/// `x⁻` along a vortex orbit at `times`, integrating `H/p₋` from launch.
pub fn vortex_xminus(orbit: &VortexOrbit, times: &[f64]) -> Result<Vec<f64>> {
    let pm = orbit.launch.p[0];
    if pm == 0.0 {
        return Err(Error::ZeroLongitudinalMomentum);
    }
    let o = quad_options();
    accumulate(times, orbit.launch.time, orbit.launch.q[0], |a, b| {
        let mut failure = None;
        let r = integrate(
            |s| match orbit
                .state_without_x_minus(s)
                .and_then(|st| dynamics::hamiltonian(&orbit.spec, &st))
            {
                Ok(h) => h / pm,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            a,
            b,
            &o,
        )?;
        match failure {
            Some(e) => Err(e),
            None => Ok(r.value),
        }
    })
}

impl Orbit for VortexOrbit {
    fn launch(&self) -> &PhasePoint {
        &self.launch
    }

    fn states_at(&self, times: &[f64]) -> Result<Vec<PhasePoint>> {
        let xm = vortex_xminus(self, times)?;
        times
            .iter()
            .zip(xm)
            .map(|(&t, xm)| {
                if t == self.launch.time {
                    return Ok(self.launch);
                }
                let mut s = self.state_without_x_minus(t)?;
                s.q[0] = xm;
                Ok(s)
            })
            .collect()
    }
}

/// Any of the available closed-form orbits.
#[derive(Clone, Debug)]
pub enum ClosedFormOrbit {
    PlaneWave(PlaneWaveOrbit),
    Tm(TmOrbit),
    Vortex(VortexOrbit),
}

/// The closed-form orbit through `initial`, or [`Error::NoClosedForm`].
pub fn closed_form_orbit(spec: &FieldSpec, initial: &PhasePoint) -> Result<ClosedFormOrbit> {
    match spec {
        FieldSpec::Free | FieldSpec::PlaneWave { .. } => plane_wave_orbit(spec, initial).map(ClosedFormOrbit::PlaneWave),
        FieldSpec::TmMode { .. } => tm_orbit(spec, initial).map(ClosedFormOrbit::Tm),
        FieldSpec::Vortex { .. } => vortex_orbit(spec, initial).map(ClosedFormOrbit::Vortex),
        other => Err(Error::NoClosedForm {
            system: other.name().to_string(),
        }),
    }
}

impl Orbit for ClosedFormOrbit {
    fn launch(&self) -> &PhasePoint {
        match self {
            ClosedFormOrbit::PlaneWave(o) => o.launch(),
            ClosedFormOrbit::Tm(o) => o.launch(),
            ClosedFormOrbit::Vortex(o) => o.launch(),
        }
    }

    fn states_at(&self, times: &[f64]) -> Result<Vec<PhasePoint>> {
        match self {
            ClosedFormOrbit::PlaneWave(o) => o.states_at(times),
            ClosedFormOrbit::Tm(o) => o.states_at(times),
            ClosedFormOrbit::Vortex(o) => o.states_at(times),
        }
    }
}

/// Largest per-component deviation between a trajectory and an orbit,
/// compared at the trajectory's own sample times.
pub fn max_deviation(orbit: &dyn Orbit, traj: &dynamics::Trajectory) -> Result<[f64; 6]> {
    let times: Vec<f64> = traj.times().collect();
    let exact = orbit.states_at(&times)?;
    let mut worst = [0.0f64; 6];
    for (s, e) in traj.samples.iter().zip(&exact) {
        let (a, b) = (s.state.phase(), e.phase());
        for k in 0..6 {
            worst[k] = worst[k].max((a[k] - b[k]).abs());
        }
    }
    Ok(worst)
}
