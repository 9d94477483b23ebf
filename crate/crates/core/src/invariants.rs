//! Closed-form conserved quantities, their algebraic identities and bracket
//! tables.
//!
//! Every quantity is written once over [`Lift`] scalars so that values and
//! exact phase-space gradients come from the same expression.

use crate::dynamics::{self, seed_phase, Dual7, PhaseFunction};
use crate::error::{Error, Result};
use crate::fields::{FieldSpec, Profile};
use crate::quadrature::{integrate_ratio, QuadOptions};
use crate::scalar::{Dual, Lift, Scalar};
use crate::spacetime::{Form, PhasePoint, PoincareGenerator};

/// Tolerances for the TM quadratures.
pub fn tm_quad_options() -> QuadOptions {
    QuadOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// `∫_{s₀}^{x⁺} ds / (s²(2p₋ + f(s)))` and its partials with respect to
/// `x⁺` and `p₋`.
pub fn tm_integral(f: &Profile, anchor: f64, x_plus: f64, p_minus: f64) -> Result<(f64, f64, f64)> {
    let o = tm_quad_options();
    let den = |s: f64| s * s * (2.0 * p_minus + f.value(s));
    let value = integrate_ratio(|_| 1.0, den, anchor, x_plus, &o)?.value;
    let d_x_plus = 1.0 / den(x_plus);
    let d_p_minus = -2.0
        * integrate_ratio(
            |s| 1.0 / (2.0 * p_minus + f.value(s)),
            den,
            anchor,
            x_plus,
            &o,
        )?
        .value;
    Ok((value, d_x_plus, d_p_minus))
}

/// `(Q₁..Q₅)` for the plane wave.
pub fn plane_wave_of<S: Scalar>(f1: &Profile, f2: &Profile, t: S, q: &[S; 3], p: &[S; 3]) -> [S; 5] {
    let (x, y) = (q[1], q[2]);
    let (pm, p1, p2) = (p[0], p[1], p[2]);
    [
        p1,
        p2,
        pm,
        x * pm * 2.0 + t * p1 - f1.value(t),
        y * pm * 2.0 + t * p2 - f2.value(t),
    ]
}

/// `(Q₁, Q₂, Q₃, Q₄, Q₅, Q̃₄)` for the TM mode, quadratures anchored at
/// `anchor`.
pub fn tm_of<S: Lift>(f: &Profile, anchor: f64, t: S, q: &[S; 3], p: &[S; 3]) -> Result<[S; 6]> {
    if t.re() == 0.0 || anchor == 0.0 {
        return Err(Error::TmSingular);
    }
    let (x, y) = (q[1], q[2]);
    let (pm, p1, p2) = (p[0], p[1], p[2]);
    let (iv, dx, dp) = tm_integral(f, anchor, t.re(), pm.re())?;
    let i = S::lift(iv, &[(dx, t), (dp, pm)]);
    let q1 = x * pm * 2.0 + t * p1;
    let q2 = y * pm * 2.0 + t * p2;
    Ok([
        q1,
        q2,
        pm,
        x * p2 - y * p1,
        x / t + q1 * i,
        y / t + q2 * i,
    ])
}

/// `(Q₁, Q₂, Q₃, Q₄, u, r₁)` for the undulator (instant form).
pub fn undulator_of<S: Scalar>(spec: &FieldSpec, t: S, q: &[S; 3], p: &[S; 3]) -> Result<[S; 6]> {
    let (b, w) = match spec {
        FieldSpec::Undulator { b0, omega } => (b0 / omega, *omega),
        _ => return Err(Error::Invalid("undulator invariants need an undulator".into())),
    };
    let h = dynamics::hamiltonian_of(spec, Form::Instant, t, q, p)?;
    let (x, y, z) = (q[0], q[1], q[2]);
    let (p1, p2, p3) = (p[0], p[1], p[2]);
    let u = h * h - p1 * p1 - p2 * p2 - 1.0 - b * b;
    let wz = z * w;
    let r1 = p3 * p3 - (p1 * wz.cos() + p2 * wz.sin()) * (2.0 * b) - u;
    Ok([p1, p2, h, p3 + (x * p2 - y * p1) * w, u, r1])
}

/// `ẏ·p₃ - ż·(p₂ - b₀ sin ωz)` with velocities from Hamilton's equations.
pub fn undulator_r2(spec: &FieldSpec, state: &PhasePoint) -> Result<f64> {
    let (b, w) = match spec {
        FieldSpec::Undulator { b0, omega } => (b0 / omega, *omega),
        _ => return Err(Error::Invalid("undulator invariants need an undulator".into())),
    };
    let v = dynamics::hamilton_rhs(spec, state)?;
    Ok(v[1] * state.p[2] - v[2] * (state.p[1] - b * (w * state.q[2]).sin()))
}

/// Helical-boost quantities `(Q₁..Q₅, Q̃₂)` and the magnitude of the
/// largest term in each (used as the drift scale).
pub fn helical_of<S: Scalar>(spec: &FieldSpec, t: S, q: &[S; 3], p: &[S; 3]) -> Result<([S; 6], [f64; 6])> {
    let (f0, w) = match spec {
        FieldSpec::HelicalBoost { f0, omega } => (*f0, *omega),
        _ => return Err(Error::Invalid("helical invariants need a helical boost".into())),
    };
    let (x, y) = (q[1], q[2]);
    let (pm, p1, p2) = (p[0], p[1], p[2]);
    if pm.re() == 0.0 {
        return Err(Error::ZeroLongitudinalMomentum);
    }
    let ratio = f0 / (2.0 * pm.re());
    if !(ratio > 0.0) {
        return Err(Error::OmegaImaginary { ratio });
    }
    let om2 = S::cst(f0) / (pm * 2.0);
    let om = om2.sqrt();
    let (sx, dx) = (x + y, x - y);
    let (sp, dp) = ((p1 + p2) / (pm * 2.0), (p1 - p2) / (pm * 2.0));
    let t2 = t * t;
    let a_s = om * (sx - t2 * w - S::cst(2.0 * w) / om2);
    let b_s = sp + t * (om2 * (t2 * (w / 3.0) - sx) + 2.0 * w);
    let a_d = om * (dx - t2 * w + S::cst(2.0 * w) / om2);
    let b_d = dp - t * (om2 * (t2 * (w / 3.0) - dx) - 2.0 * w);
    let arg = om * t;
    let (sh, ch, sn, cs) = (arg.sinh(), arg.cosh(), arg.sin(), arg.cos());
    let q2 = a_s * sh + b_s * ch;
    let q3 = a_s * ch + b_s * sh;
    let q4 = a_d * cs + b_d * sn;
    let q5 = a_d * sn - b_d * cs;
    let h = dynamics::hamiltonian_of(spec, Form::Front, t, q, p)?;
    let q2t = h + (pm * x * 2.0 + t * p1) * (2.0 * w) - y * (x + t2 * w) * f0;
    let mag = |a: S, b: S, c: S, d: S| (a * b).re().abs() + (c * d).re().abs();
    let scales = [
        pm.re().abs(),
        mag(a_s, sh, b_s, ch),
        mag(a_s, ch, b_s, sh),
        mag(a_d, cs, b_d, sn),
        mag(a_d, sn, b_d, cs),
        h.re().abs() + (pm * x * 2.0 + t * p1).re().abs() * 2.0 * w + (y * (x + t2 * w) * f0).re().abs(),
    ];
    Ok(([pm, q2, q3, q4, q5, q2t], scales))
}

/// `Q̃₂ - [Q₁/2·(Q₂² - Q₃² + Q₄² + Q₅²) + 1/(4Q₁)]`.
pub fn helical_combination<S: Scalar>(q: &[S; 6]) -> S {
    let (q1, q2, q3, q4, q5, q2t) = (q[0], q[1], q[2], q[3], q[4], q[5]);
    q2t - ((q2 * q2 - q3 * q3 + q4 * q4 + q5 * q5) * q1 * 0.5 + S::cst(0.25) / q1)
}

/// `(Q₁, Q₂) = (p₋, H + ω/2·(x p₂ - y p₁))` for the vortex.
pub fn vortex_of<S: Scalar>(spec: &FieldSpec, t: S, q: &[S; 3], p: &[S; 3]) -> Result<[S; 2]> {
    let w = match spec {
        FieldSpec::Vortex { omega, .. } => *omega,
        _ => return Err(Error::Invalid("vortex invariants need a vortex".into())),
    };
    let h = dynamics::hamiltonian_of(spec, Form::Front, t, q, p)?;
    Ok([p[0], h + (q[1] * p[2] - q[2] * p[1]) * (0.5 * w)])
}

/// Maps a front-form vortex state to the rotating oscillator variables
/// `(α, β, p_α, p_β)` at `φ = ωx⁺`, with `χ = e^{-iφ/2}z` and
/// `p_α + i p_β = e^{-iφ/2} dz/dφ`.
pub fn vortex_to_oscillator<S: Scalar>(spec: &FieldSpec, t: S, q: &[S; 3], p: &[S; 3]) -> Result<[S; 4]> {
    let w = match spec {
        FieldSpec::Vortex { omega, .. } => *omega,
        _ => return Err(Error::Invalid("oscillator map needs a vortex".into())),
    };
    if p[0].re() == 0.0 {
        return Err(Error::ZeroLongitudinalMomentum);
    }
    let x = crate::spacetime::event_of(Form::Front, t, q);
    let a = spec.potential_at(&x)?;
    let (xx, yy) = (q[1], q[2]);
    // dz/dφ = (dx/dx⁺ + i dy/dx⁺)/ω with dx/dx⁺ = -(p₁ - A₁)/(2p₋)
    let u = -(p[1] - a[1]) / (p[0] * (2.0 * w));
    let v = -(p[2] - a[2]) / (p[0] * (2.0 * w));
    let half = t * (0.5 * w);
    let (c, s) = (half.cos(), half.sin());
    Ok([
        c * xx + s * yy,
        c * yy - s * xx,
        c * u + s * v,
        c * v - s * u,
    ])
}

/// Inverse of [`vortex_to_oscillator`] at `x⁺`: `(x, y, p₁, p₂)`.
pub fn oscillator_to_vortex(spec: &FieldSpec, x_plus: f64, p_minus: f64, s: &[f64; 4]) -> Result<[f64; 4]> {
    let (b0, w) = match spec {
        FieldSpec::Vortex { b0, omega } => (*b0, *omega),
        _ => return Err(Error::Invalid("oscillator map needs a vortex".into())),
    };
    let half = 0.5 * w * x_plus;
    let (c, sn) = (half.cos(), half.sin());
    let [al, be, pa, pb] = *s;
    let (x, y) = (c * al - sn * be, sn * al + c * be);
    let (u, v) = (c * pa - sn * pb, sn * pa + c * pb);
    let phi = w * x_plus;
    let a1 = b0 * (x * phi.sin() - y * phi.cos());
    let a2 = b0 * (-x * phi.cos() - y * phi.sin());
    Ok([x, y, a1 - 2.0 * p_minus * w * u, a2 - 2.0 * p_minus * w * v])
}

/// `ε = B₀/(2ωp₋)`.
pub fn vortex_epsilon(spec: &FieldSpec, p_minus: f64) -> Result<f64> {
    match spec {
        FieldSpec::Vortex { b0, omega } => {
            if p_minus == 0.0 {
                Err(Error::ZeroLongitudinalMomentum)
            } else {
                Ok(b0 / (2.0 * omega * p_minus))
            }
        }
        _ => Err(Error::Invalid("ε is defined for the vortex only".into())),
    }
}

/// `(X₁, X₂, H_E)` over any scalar; `eps` must be nonzero.
pub fn oscillator_of<S: Scalar>(eps: S, s: &[S; 4]) -> [S; 3] {
    let [al, be, pa, pb] = *s;
    let ep = eps + 0.25;
    let em = -eps + 0.25;
    let ka = pa + be * 0.5;
    let kb = pb - al * 0.5;
    let cross = al * pb * ep / eps - be * pa * em / eps;
    let x1 = ka * ka - ep * al * al - cross;
    let x2 = kb * kb - em * be * be + cross;
    let he = (ka * ka + kb * kb - ep * al * al - em * be * be) * 0.5;
    [x1, x2, he]
}

/// `(X₁, X₂, H_E)` of an oscillator state.
pub fn vortex_transverse_invariants(eps: f64, s: &[f64; 4]) -> Result<[f64; 3]> {
    if eps == 0.0 {
        return Err(Error::EpsilonZero);
    }
    Ok(oscillator_of(eps, s))
}

/// Gradients of `(X₁, X₂, H_E)` with respect to `(α, β, p_α, p_β)`.
pub fn oscillator_gradients(eps: f64, s: &[f64; 4]) -> Result<[[f64; 4]; 3]> {
    if eps == 0.0 {
        return Err(Error::EpsilonZero);
    }
    let v: [Dual<f64, 4>; 4] = std::array::from_fn(|k| Dual::variable(s[k], k));
    Ok(oscillator_of(Dual::constant(eps), &v).map(|d| d.d))
}

/// Canonical bracket on the oscillator phase space `(α, β; p_α, p_β)`.
pub fn oscillator_bracket(gf: &[f64; 4], gg: &[f64; 4]) -> f64 {
    gf[0] * gg[2] - gf[2] * gg[0] + gf[1] * gg[3] - gf[3] * gg[1]
}

/// Oscillator phase velocity from `H_E`: `(∂H/∂p, -∂H/∂q)`.
pub fn oscillator_rhs(eps: f64, s: &[f64; 4]) -> [f64; 4] {
    let v: [Dual<f64, 4>; 4] = std::array::from_fn(|k| Dual::variable(s[k], k));
    let h = oscillator_of(Dual::constant(eps), &v)[2].d;
    [h[2], h[3], -h[0], -h[1]]
}

/// Which background an [`InvariantSet`] describes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum System {
    Free,
    PlaneWave,
    TmMode,
    Undulator,
    HelicalBoost,
    Vortex,
}

/// The built-in conserved quantities of one background and its identity
/// residuals, with stable names.
#[derive(Clone, Debug)]
pub struct InvariantSet {
    pub spec: FieldSpec,
    pub system: System,
    /// Lower limit of the TM quadratures.
    pub anchor: f64,
    /// Conserved quantities, in evaluation order.
    pub quantities: Vec<&'static str>,
    /// Residuals expected to vanish identically.
    pub identities: Vec<&'static str>,
}

impl InvariantSet {
    /// `anchor` is the TM quadrature lower limit (ignored elsewhere).
    pub fn new(spec: &FieldSpec, anchor: f64) -> Result<Self> {
        spec.validate()?;
        let (system, quantities, identities): (_, Vec<&str>, Vec<&str>) = match spec {
            FieldSpec::Free => (System::Free, vec![], vec![]),
            FieldSpec::PlaneWave { .. } => (System::PlaneWave, vec!["Q1", "Q2", "Q3", "Q4", "Q5"], vec![]),
            FieldSpec::TmMode { .. } => {
                if anchor == 0.0 {
                    return Err(Error::SingularLaunchTime);
                }
                (
                    System::TmMode,
                    vec!["Q1", "Q2", "Q3", "Q4", "Q5", "Q4tilde"],
                    vec!["identity_residual"],
                )
            }
            FieldSpec::Undulator { .. } => (
                System::Undulator,
                vec!["Q1", "Q2", "Q3", "Q4", "u"],
                vec!["r1", "r2"],
            ),
            FieldSpec::HelicalBoost { .. } => (
                System::HelicalBoost,
                vec!["Q1", "Q2", "Q3", "Q4", "Q5", "Q2tilde"],
                vec!["combo_residual"],
            ),
            FieldSpec::Vortex { b0, .. } => {
                let mut q = vec!["Q1", "Q2"];
                if *b0 != 0.0 {
                    q.extend(["X1", "X2", "H_E"]);
                }
                (System::Vortex, q, vec![])
            }
        };
        Ok(InvariantSet {
            spec: spec.clone(),
            system,
            anchor,
            quantities,
            identities,
        })
    }

    /// Anchors the TM quadratures at the launch time of `initial`.
    pub fn for_launch(spec: &FieldSpec, initial: &PhasePoint) -> Result<Self> {
        InvariantSet::new(spec, initial.time)
    }

    /// The phase-space form the quantities are written in.
    pub fn form(&self) -> Form {
        match self.system {
            System::Undulator => Form::Instant,
            _ => Form::Front,
        }
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.quantities.iter().chain(&self.identities).copied().collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names().iter().position(|n| *n == name)
    }

    fn check_form(&self, state: &PhasePoint) -> Result<()> {
        if state.form != self.form() {
            return Err(Error::Invalid(format!(
                "{} invariants are defined on {:?}-form states",
                self.spec.name(),
                self.form()
            )));
        }
        Ok(())
    }

    /// Quantities followed by the identity residuals that have closed forms
    /// over [`Lift`] scalars (everything except the undulator `r₂`).
    fn eval_generic<S: Lift>(&self, t: S, q: &[S; 3], p: &[S; 3]) -> Result<Vec<S>> {
        Ok(match &self.spec {
            FieldSpec::Free => vec![],
            FieldSpec::PlaneWave { f1, f2 } => plane_wave_of(f1, f2, t, q, p).to_vec(),
            FieldSpec::TmMode { f } => {
                let v = tm_of(f, self.anchor, t, q, p)?;
                let mut out = v.to_vec();
                out.push(v[1] * v[4] - v[0] * v[5] - v[3]);
                out
            }
            FieldSpec::Undulator { .. } => undulator_of(&self.spec, t, q, p)?.to_vec(),
            FieldSpec::HelicalBoost { .. } => {
                let (v, _) = helical_of(&self.spec, t, q, p)?;
                let mut out = v.to_vec();
                out.push(helical_combination(&v));
                out
            }
            FieldSpec::Vortex { b0, .. } => {
                let mut out = vortex_of(&self.spec, t, q, p)?.to_vec();
                if *b0 != 0.0 {
                    let eps = S::cst(vortex_epsilon(&self.spec, 1.0)?) / p[0];
                    let osc = vortex_to_oscillator(&self.spec, t, q, p)?;
                    out.extend(oscillator_of(eps, &osc));
                }
                out
            }
        })
    }

    /// Values of [`InvariantSet::names`] at a state.
    pub fn evaluate(&self, state: &PhasePoint) -> Result<Vec<f64>> {
        self.check_form(state)?;
        let mut out = self.eval_generic(state.time, &state.q, &state.p)?;
        if self.system == System::Undulator {
            out.push(undulator_r2(&self.spec, state)?);
        }
        Ok(out)
    }

    pub fn value(&self, name: &str, state: &PhasePoint) -> Result<f64> {
        let k = self.lookup(name)?;
        Ok(self.evaluate(state)?[k])
    }

    fn lookup(&self, name: &str) -> Result<usize> {
        self.index_of(name).ok_or_else(|| {
            Error::Invalid(format!(
                "unknown invariant {name:?} for {}; valid: {}",
                self.spec.name(),
                self.names().join(", ")
            ))
        })
    }

    /// Exact gradient of a named quantity with respect to `(time, q, p)`.
    pub fn gradient(&self, name: &str, state: &PhasePoint) -> Result<[f64; 7]> {
        self.check_form(state)?;
        let k = self.lookup(name)?;
        if name == "r2" {
            let f = |s: &PhasePoint| undulator_r2(&self.spec, s);
            return dynamics::finite_difference_gradient(f, state);
        }
        let (t, q, p) = seed_phase(state);
        let v: Vec<Dual7> = self.eval_generic(t, &q, &p)?;
        Ok(v[k].d)
    }

    /// Magnitude scale of each quantity at a state: the size of its largest
    /// constituent terms for the helical quintet, `|Q|` otherwise.
    pub fn magnitudes(&self, state: &PhasePoint) -> Result<Vec<f64>> {
        let vals = self.evaluate(state)?;
        let mut out: Vec<f64> = vals.iter().map(|v| v.abs()).collect();
        if self.system == System::HelicalBoost {
            let (_, scales) = helical_of(&self.spec, state.time, &state.q, &state.p)?;
            out[..6].copy_from_slice(&scales);
        }
        Ok(out)
    }

    /// A named quantity as a [`PhaseFunction`] with exact gradient.
    pub fn quantity(&self, name: &str) -> Result<Quantity<'_>> {
        self.lookup(name)?;
        let name = self.names().into_iter().find(|n| *n == name).unwrap();
        Ok(Quantity { set: self, name })
    }

    /// Poincaré generators whose Noether charges `ξ·p - Λ` are the named
    /// quantities, up to additive constants.
    pub fn poincare_charges(&self) -> Vec<(&'static str, PoincareGenerator)> {
        use PoincareGenerator as G;
        match &self.spec {
            FieldSpec::Free => vec![],
            FieldSpec::PlaneWave { .. } => vec![
                ("Q1", G::p_perp(0)),
                ("Q2", G::p_perp(1)),
                ("Q3", G::p_minus()),
                ("Q4", G::t_null(0)),
                ("Q5", G::t_null(1)),
            ],
            FieldSpec::TmMode { .. } => vec![
                ("Q1", G::t_null(0)),
                ("Q2", G::t_null(1)),
                ("Q3", G::p_minus()),
                ("Q4", G::l_z()),
            ],
            FieldSpec::Undulator { omega, .. } => vec![
                ("Q1", G::cartesian_translation(1)),
                ("Q2", G::cartesian_translation(2)),
                ("Q3", G::cartesian_translation(0)),
                ("Q4", G::cartesian_translation(3) + G::l_z() * *omega),
            ],
            FieldSpec::HelicalBoost { omega, .. } => vec![
                ("Q1", G::p_minus()),
                ("Q2tilde", G::p_plus() + G::t_null(0) * (2.0 * omega)),
            ],
            FieldSpec::Vortex { omega, .. } => vec![
                ("Q1", G::p_minus()),
                ("Q2", G::p_plus() + G::l_z() * (0.5 * omega)),
            ],
        }
    }
}

/// One named quantity of an [`InvariantSet`].
pub struct Quantity<'a> {
    set: &'a InvariantSet,
    name: &'static str,
}

impl Quantity<'_> {
    pub fn name(&self) -> &'static str {
        self.name
    }
}

impl PhaseFunction for Quantity<'_> {
    fn value(&self, state: &PhasePoint) -> Result<f64> {
        self.set.value(self.name, state)
    }
    fn gradient(&self, state: &PhasePoint) -> Result<[f64; 7]> {
        self.set.gradient(self.name, state)
    }
}

/// Records selected quantities along a trajectory.
pub struct TrackedInvariants {
    pub set: InvariantSet,
    pub names: Vec<String>,
    indices: Vec<usize>,
}

impl TrackedInvariants {
    pub fn new(set: InvariantSet, names: &[String]) -> Result<Self> {
        let indices = names.iter().map(|n| set.lookup(n)).collect::<Result<Vec<_>>>()?;
        Ok(TrackedInvariants {
            set,
            names: names.to_vec(),
            indices,
        })
    }

    /// Tracks every quantity and identity.
    pub fn all(set: InvariantSet) -> Self {
        let names: Vec<String> = set.names().iter().map(|s| s.to_string()).collect();
        let indices = (0..names.len()).collect();
        TrackedInvariants { set, names, indices }
    }
}

impl dynamics::Tracker for TrackedInvariants {
    fn names(&self) -> Vec<String> {
        self.names.clone()
    }
    fn evaluate(&self, state: &PhasePoint) -> Result<Vec<f64>> {
        let all = self.set.evaluate(state)?;
        Ok(self.indices.iter().map(|&k| all[k]).collect())
    }
}

/// Summary of `{Qᵢ, Qⱼ}` over a set of states.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BracketEntry {
    pub left: String,
    pub right: String,
    pub max_abs: f64,
    /// `c` when the bracket equals `c·p₋` at every state.
    pub fitted_p_minus: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct BracketTable {
    pub names: Vec<String>,
    pub entries: Vec<BracketEntry>,
}

impl BracketTable {
    pub fn get(&self, left: &str, right: &str) -> Option<&BracketEntry> {
        self.entries.iter().find(|e| e.left == left && e.right == right)
    }
}

/// All pairwise brackets of the set's conserved quantities at `states`.
pub fn bracket_table(set: &InvariantSet, states: &[PhasePoint]) -> Result<BracketTable> {
    let names = set.quantities.clone();
    let n = names.len();
    let mut values = vec![vec![Vec::with_capacity(states.len()); n]; n];
    let mut p_minus = Vec::with_capacity(states.len());
    for s in states {
        let grads = names.iter().map(|q| set.gradient(q, s)).collect::<Result<Vec<_>>>()?;
        for i in 0..n {
            for j in 0..n {
                let b: f64 = (0..3)
                    .map(|k| grads[i][1 + k] * grads[j][4 + k] - grads[i][4 + k] * grads[j][1 + k])
                    .sum();
                values[i][j].push(b);
            }
        }
        p_minus.push(s.p[0]);
    }
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let b = &values[i][j];
            let max_abs = b.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let fitted_p_minus = if max_abs > 1e-8 && set.form() == Form::Front {
                let c = b.iter().zip(&p_minus).map(|(x, y)| x * y).sum::<f64>()
                    / p_minus.iter().map(|y| y * y).sum::<f64>();
                let worst = b.iter().zip(&p_minus).fold(0.0f64, |a, (x, y)| a.max((x - c * y).abs()));
                (worst <= 1e-8 * max_abs.max(1.0)).then_some(c)
            } else {
                None
            };
            entries.push(BracketEntry {
                left: names[i].to_string(),
                right: names[j].to_string(),
                max_abs,
                fitted_p_minus,
            });
        }
    }
    Ok(BracketTable {
        names: names.iter().map(|s| s.to_string()).collect(),
        entries,
    })
}
