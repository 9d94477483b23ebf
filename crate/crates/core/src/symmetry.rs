//! Lie derivatives of the background under Poincaré generators, symmetry
//! scans, gauge terms and Noether charges.

use nalgebra::DMatrix;

use crate::dynamics::{self, spacetime_velocity};
use crate::error::{Error, Result};
use crate::fields::{FieldSpec, PotentialJet};
use crate::integrator::{self, Dopri5Options, Failure, OdeSystem};
use crate::quadrature::{self, QuadOptions};
use crate::spacetime::{
    AntisymTensor, BasisElement, Covector, Form, PhasePoint, PoincareGenerator, SpacetimePoint,
};

/// `𝓛_ξ A_μ = ξ^ν ∂_ν A_μ + A_ν ∂_μ ξ^ν`.
pub fn lie_derivative_potential(spec: &FieldSpec, g: &PoincareGenerator, p: SpacetimePoint) -> Result<Covector> {
    let x = p.to_array();
    let a = spec.potential_at(&x)?;
    let da = spec.potential_jacobian(p)?;
    let xi = g.xi_upper(&x);
    let dxi = g.gradient_upper();
    Ok(Covector(std::array::from_fn(|mu| {
        (0..4).map(|nu| xi[nu] * da[nu][mu] + a[nu] * dxi[mu][nu]).sum()
    })))
}

fn lie_terms(jet: &PotentialJet, g: &PoincareGenerator, x: &[f64; 4]) -> (AntisymTensor, f64) {
    let f = jet.field_strength().0;
    let df = jet.field_strength_gradient();
    let xi = g.xi_upper(x);
    let dxi = g.gradient_upper();
    let mut out = [[0.0; 4]; 4];
    let mut scale: f64 = 0.0;
    for mu in 0..4 {
        for nu in mu + 1..4 {
            let mut acc = 0.0;
            let mut mag = 0.0;
            for s in 0..4 {
                let terms = [
                    xi[s] * df[s].0[mu][nu],
                    f[s][nu] * dxi[mu][s],
                    f[mu][s] * dxi[nu][s],
                ];
                for t in terms {
                    acc += t;
                    mag += t.abs();
                }
            }
            out[mu][nu] = acc;
            out[nu][mu] = -acc;
            scale = scale.max(mag);
        }
    }
    (AntisymTensor(out), scale)
}

/// `𝓛_ξ F_μν = ξ·∂F_μν + F_σν ∂_μξ^σ + F_μσ ∂_νξ^σ`.
pub fn lie_derivative_field_strength(
    spec: &FieldSpec,
    g: &PoincareGenerator,
    p: SpacetimePoint,
) -> Result<AntisymTensor> {
    let jet = spec.potential_jet(p)?;
    Ok(lie_terms(&jet, g, &p.to_array()).0)
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SymmetryScanResult {
    /// Orthonormal basis of the symmetric subalgebra, as coefficient vectors
    /// over [`BasisElement::ALL`].
    pub basis: Vec<[f64; 10]>,
    /// All ten singular values of the scan matrix, descending.
    pub singular_values: [f64; 10],
    /// `max |𝓛_ξ F|` over the samples for each basis element.
    pub residuals: Vec<f64>,
    pub sample_count: usize,
}

impl SymmetryScanResult {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn generators(&self) -> Vec<PoincareGenerator> {
        self.basis.iter().map(PoincareGenerator::from_basis_coefficients).collect()
    }

    /// Largest singular value counted as non-null, relative to `σ_max`.
    pub fn spectral_gap(&self) -> f64 {
        let smax = self.singular_values[0];
        let k = 10 - self.dimension();
        if k == 0 || smax == 0.0 {
            0.0
        } else {
            self.singular_values[k - 1] / smax
        }
    }

    /// Largest null singular value relative to `σ_max`.
    pub fn null_level(&self) -> f64 {
        let smax = self.singular_values[0];
        if self.dimension() == 0 || smax == 0.0 {
            0.0
        } else {
            self.singular_values[10 - self.dimension()] / smax
        }
    }

    /// Distance of `g` from the detected subalgebra in coefficient space.
    pub fn distance_to(&self, g: &PoincareGenerator) -> f64 {
        let c = g.basis_coefficients();
        let mut r = c;
        for b in &self.basis {
            let dot: f64 = b.iter().zip(&c).map(|(x, y)| x * y).sum();
            for k in 0..10 {
                r[k] -= dot * b[k];
            }
        }
        r.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Finds the Poincaré generators leaving `F` invariant at every sample.
///
/// Each sample contributes the six independent components of `𝓛_ξF` as
/// rows of a linear map on the named-basis coefficients; rows of one
/// sample are scaled by that sample's largest entry. Singular values below
/// `tol·σ_max` span the null space.
pub fn symmetry_scan(spec: &FieldSpec, samples: &[SpacetimePoint], tol: f64) -> Result<SymmetryScanResult> {
    let rows = 6 * samples.len();
    if rows < 10 {
        return Err(Error::InsufficientSamples {
            given: samples.len(),
            rows,
        });
    }
    let basis = PoincareGenerator::basis();
    let mut m = DMatrix::<f64>::zeros(rows, 10);
    for (i, p) in samples.iter().enumerate() {
        let jet = spec.potential_jet(*p)?;
        let x = p.to_array();
        let mut block = [[0.0; 10]; 6];
        for (k, g) in basis.iter().enumerate() {
            let c = lie_terms(&jet, g, &x).0.components();
            for r in 0..6 {
                block[r][k] = c[r];
            }
        }
        let norm = block.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        let s = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        for r in 0..6 {
            for k in 0..10 {
                m[(6 * i + r, k)] = block[r][k] * s;
            }
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut singular_values = [0.0; 10];
    for (slot, &k) in order.iter().enumerate() {
        singular_values[slot] = svd.singular_values[k];
    }
    let smax = singular_values[0];
    let mut null = Vec::new();
    for &k in &order {
        if svd.singular_values[k] <= tol * smax {
            let mut v: [f64; 10] = std::array::from_fn(|c| v_t[(k, c)]);
            let lead = v.iter().fold(0.0f64, |a, x| if x.abs() > a.abs() { *x } else { a });
            if lead < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            null.push(v);
        }
    }
    let mut residuals = Vec::with_capacity(null.len());
    for v in &null {
        let g = PoincareGenerator::from_basis_coefficients(v);
        let mut worst: f64 = 0.0;
        for p in samples {
            worst = worst.max(lie_derivative_field_strength(spec, &g, *p)?.max_abs());
        }
        residuals.push(worst);
    }
    Ok(SymmetryScanResult {
        basis: null,
        singular_values,
        residuals,
        sample_count: samples.len(),
    })
}

/// Names of the basis generators, in coefficient order.
pub fn basis_names() -> [&'static str; 10] {
    BasisElement::ALL.map(BasisElement::name)
}

/// Relative `𝓛_ξF` level accepted on a gauge-term path.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// Largest accepted disagreement between the two gauge-term routes.
pub const PATH_TOL: f64 = 1e-6;

fn segment_integral(spec: &FieldSpec, g: &PoincareGenerator, from: [f64; 4], to: [f64; 4]) -> Result<f64> {
    let d: [f64; 4] = std::array::from_fn(|k| to[k] - from[k]);
    if d.iter().all(|v| *v == 0.0) {
        return Ok(0.0);
    }
    // check symmetry along the segment before integrating
    for j in 0..=16 {
        let s = j as f64 / 16.0;
        let p = SpacetimePoint::from_array(std::array::from_fn(|k| from[k] + s * d[k]));
        let jet = spec.potential_jet(p)?;
        let (lf, scale) = lie_terms(&jet, g, &p.to_array());
        let residual = lf.max_abs();
        if residual > SYMMETRY_TOL * scale.max(1.0) {
            return Err(Error::NotASymmetry { residual });
        }
    }
    let mut failure = None;
    let opts = QuadOptions {
        abs_tol: 1e-10,
        rel_tol: 1e-13,
        ..Default::default()
    };
    let r = quadrature::integrate(
        |s| {
            let p = SpacetimePoint::from_array(std::array::from_fn(|k| from[k] + s * d[k]));
            match lie_derivative_potential(spec, g, p) {
                Ok(l) => (0..4).map(|mu| l.0[mu] * d[mu]).sum(),
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
        1.0,
        &opts,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(r.value),
    }
}

/// `Λ(p) - Λ(base)` with `∂_μΛ = 𝓛_ξA_μ`, from the line integral along the
/// straight segment, cross-checked against a two-leg route (transverse
/// displacement first, then longitudinal).
pub fn gauge_term(spec: &FieldSpec, g: &PoincareGenerator, p: SpacetimePoint, base: SpacetimePoint) -> Result<f64> {
    let (a, b) = (base.to_array(), p.to_array());
    let straight = segment_integral(spec, g, a, b)?;
    let corner = [a[0], b[1], b[2], a[3]];
    let two_leg = segment_integral(spec, g, a, corner)? + segment_integral(spec, g, corner, b)?;
    let difference = (straight - two_leg).abs();
    if difference > PATH_TOL {
        return Err(Error::PathDependent { difference });
    }
    Ok(straight)
}

/// `Q = ξ·p - Λ` at a state.
pub fn noether_charge(spec: &FieldSpec, g: &PoincareGenerator, lambda: f64, state: &PhasePoint) -> Result<f64> {
    Ok(dynamics::charge(spec, g, state)? - lambda)
}

/// `Q = ξ·p - Λ` with `Λ` from [`gauge_term`] anchored at `base`.
pub fn noether_charge_at(
    spec: &FieldSpec,
    g: &PoincareGenerator,
    state: &PhasePoint,
    base: SpacetimePoint,
) -> Result<f64> {
    let lambda = gauge_term(spec, g, state.event(), base)?;
    noether_charge(spec, g, lambda, state)
}

/// `ẋ^μ 𝓛_ξA_μ`, the rate of change of `ξ·p` along the flow.
pub fn noether_source(spec: &FieldSpec, g: &PoincareGenerator, state: &PhasePoint) -> Result<f64> {
    let v = spacetime_velocity(spec, state)?;
    let l = lie_derivative_potential(spec, g, state.event())?;
    Ok((0..4).map(|mu| v[mu] * l.0[mu]).sum())
}

#[derive(Clone, Debug)]
pub struct NoetherBalance {
    pub times: Vec<f64>,
    /// `ξ·p` at every accepted step.
    pub charge: Vec<f64>,
    /// `∫ ẋ·𝓛_ξA dτ` from launch, integrated with the flow.
    pub source_integral: Vec<f64>,
}

impl NoetherBalance {
    /// Largest per-step mismatch `|Δ(ξ·p) - ΔW|`.
    pub fn max_step_mismatch(&self) -> f64 {
        (1..self.times.len())
            .map(|k| {
                let dq = self.charge[k] - self.charge[k - 1];
                let dw = self.source_integral[k] - self.source_integral[k - 1];
                (dq - dw).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn charge_scale(&self) -> f64 {
        self.charge.iter().fold(1.0f64, |a, v| a.max(v.abs()))
    }
}

struct Augmented<'a> {
    spec: &'a FieldSpec,
    g: &'a PoincareGenerator,
    form: Form,
}

impl Augmented<'_> {
    fn point(&self, t: f64, y: &[f64; 7]) -> PhasePoint {
        PhasePoint::new(self.form, t, [y[0], y[1], y[2]], [y[3], y[4], y[5]])
    }
}

impl OdeSystem<7> for Augmented<'_> {
    type Error = Error;

    fn rhs(&self, t: f64, y: &[f64; 7]) -> Result<[f64; 7]> {
        let pt = self.point(t, y);
        let v = dynamics::hamilton_rhs(self.spec, &pt)?;
        let w = noether_source(self.spec, self.g, &pt)?;
        Ok([v[0], v[1], v[2], v[3], v[4], v[5], w])
    }
}

/// Integrates the flow together with `W' = ẋ·𝓛_ξA` and records `ξ·p`.
pub fn noether_balance(
    spec: &FieldSpec,
    g: &PoincareGenerator,
    initial: &PhasePoint,
    t_end: f64,
    tol: f64,
) -> Result<NoetherBalance> {
    let sys = Augmented {
        spec,
        g,
        form: initial.form,
    };
    let ph = initial.phase();
    let y0 = [ph[0], ph[1], ph[2], ph[3], ph[4], ph[5], 0.0];
    let o = Dopri5Options {
        rel_tol: tol,
        abs_tol: tol,
        ..Default::default()
    };
    let sol = integrator::solve(&sys, initial.time, y0, t_end, &o).map_err(|f| match f {
        Failure::StepUnderflow { last, h } => Error::StepUnderflow {
            last: sys.point(last.t, &last.y),
            step: h,
        },
        Failure::TooManySteps { last } => Error::StepUnderflow {
            last: sys.point(last.t, &last.y),
            step: 0.0,
        },
        Failure::System { error, .. } => error,
    })?;
    let mut out = NoetherBalance {
        times: Vec::with_capacity(sol.nodes.len()),
        charge: Vec::with_capacity(sol.nodes.len()),
        source_integral: Vec::with_capacity(sol.nodes.len()),
    };
    for n in &sol.nodes {
        out.times.push(n.t);
        out.charge.push(dynamics::charge(spec, g, &sys.point(n.t, &n.y))?);
        out.source_integral.push(n.y[6]);
    }
    Ok(out)
}
