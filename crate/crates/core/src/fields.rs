//! Background field specifications.
//!
//! Each background is defined by its gauge potential `A_μ(x)` (lower
//! Cartesian indices), written once over [`Scalar`]. Field strengths and
//! their gradients are exact derivatives of that single definition.
//!
//! Electric and magnetic fields are read off as `E_i = F_{0i}` and
//! `B_i = -½ε_{ijk}F_{jk}`. With lower-index potentials this is the usual
//! `E = -∇φ - ∂_t**A**`, `B = ∇×**A**` for the contravariant
//! `**A**^i = -A_i`, and the charge is `+1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{seed_jet2, unpack_jet2, Dual, Scalar};
use crate::spacetime::{AntisymTensor, Covector, SpacetimePoint};

/// A profile function `f(s)` together with its exact derivative `f'(s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `f = -(a/ω) cos ωs`, `f' = a sin ωs`.
    Sinusoid { amplitude: f64, omega: f64 },
    /// `f = (a/ω) sin ωs`, `f' = a cos ωs`.
    Cosine { amplitude: f64, omega: f64 },
    /// `f = Σ cₖ sᵏ`.
    Polynomial { coefficients: Vec<f64> },
    /// `f = a exp(-((s - s₀)/τ)²) sin ωs`.
    GaussianSinusoid {
        amplitude: f64,
        omega: f64,
        center: f64,
        width: f64,
    },
}

impl Profile {
    pub fn zero() -> Self {
        Profile::Polynomial {
            coefficients: Vec::new(),
        }
    }

    pub fn value<S: Scalar>(&self, s: S) -> S {
        match self {
            Profile::Sinusoid { amplitude, omega } => (s * *omega).cos() * (-amplitude / omega),
            Profile::Cosine { amplitude, omega } => (s * *omega).sin() * (amplitude / omega),
            Profile::Polynomial { coefficients } => horner(coefficients.iter().copied(), s),
            Profile::GaussianSinusoid {
                amplitude,
                omega,
                center,
                width,
            } => envelope(s, *center, *width) * (s * *omega).sin() * *amplitude,
        }
    }

    pub fn derivative<S: Scalar>(&self, s: S) -> S {
        match self {
            Profile::Sinusoid { amplitude, omega } => (s * *omega).sin() * *amplitude,
            Profile::Cosine { amplitude, omega } => (s * *omega).cos() * *amplitude,
            Profile::Polynomial { coefficients } => horner(
                coefficients
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| c * k as f64),
                s,
            ),
            Profile::GaussianSinusoid {
                amplitude,
                omega,
                center,
                width,
            } => {
                let u = s - *center;
                let phase = s * *omega;
                envelope(s, *center, *width)
                    * (phase.cos() * *omega - u * phase.sin() * (2.0 / (width * width)))
                    * *amplitude
            }
        }
    }

    fn validate(&self, label: &str) -> Result<()> {
        let bad = |what: &str| Err(Error::Invalid(format!("{label}: {what}")));
        match self {
            Profile::Sinusoid { amplitude, omega } | Profile::Cosine { amplitude, omega } => {
                if !(*omega > 0.0) || !amplitude.is_finite() || !omega.is_finite() {
                    return bad("profile needs finite amplitude and omega > 0");
                }
            }
            Profile::Polynomial { coefficients } => {
                if coefficients.iter().any(|c| !c.is_finite()) {
                    return bad("polynomial coefficients must be finite");
                }
            }
            Profile::GaussianSinusoid {
                amplitude,
                omega,
                center,
                width,
            } => {
                if !(*omega > 0.0 && *width > 0.0)
                    || ![amplitude, omega, center, width].iter().all(|v| v.is_finite())
                {
                    return bad("gaussian profile needs omega > 0 and width > 0");
                }
            }
        }
        Ok(())
    }
}

fn horner<S: Scalar, I: DoubleEndedIterator<Item = f64>>(coefficients: I, s: S) -> S {
    coefficients.rev().fold(S::cst(0.0), |acc, c| acc * s + c)
}

fn envelope<S: Scalar>(s: S, center: f64, width: f64) -> S {
    let u = (s - center) / width;
    (-(u * u)).exp()
}

/// One of the supported electromagnetic backgrounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Free,
    /// `A_j = f_j'(x⁺)`, light-front gauge.
    PlaneWave { f1: Profile, f2: Profile },
    /// Radially polarised toy TM beam; singular at `x⁺ = 0`.
    TmMode { f: Profile },
    /// Static helical undulator, `A_1 = b₀ cos ωz`, `A_2 = b₀ sin ωz`, `b₀ = B₀/ω`.
    Undulator {
        #[serde(rename = "B0")]
        b0: f64,
        omega: f64,
    },
    /// `A_1 = F₀x⁺y`, `A_2 = F₀x⁺(x - ωx⁺²/3)`.
    HelicalBoost {
        #[serde(rename = "F0")]
        f0: f64,
        omega: f64,
    },
    /// Rotating vortex, `φ = ωx⁺`.
    Vortex {
        #[serde(rename = "B0")]
        b0: f64,
        omega: f64,
    },
}

/// Stable names used in configuration files.
pub const FIELD_NAMES: [&str; 6] = [
    "free",
    "plane_wave",
    "tm_mode",
    "undulator",
    "helical_boost",
    "vortex",
];

impl FieldSpec {
    pub fn name(&self) -> &'static str {
        match self {
            FieldSpec::Free => FIELD_NAMES[0],
            FieldSpec::PlaneWave { .. } => FIELD_NAMES[1],
            FieldSpec::TmMode { .. } => FIELD_NAMES[2],
            FieldSpec::Undulator { .. } => FIELD_NAMES[3],
            FieldSpec::HelicalBoost { .. } => FIELD_NAMES[4],
            FieldSpec::Vortex { .. } => FIELD_NAMES[5],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |label: &str, w: f64, amp: f64| {
            if !(w > 0.0) || !w.is_finite() || !amp.is_finite() {
                Err(Error::Invalid(format!(
                    "{label}: omega must be positive and parameters finite"
                )))
            } else {
                Ok(())
            }
        };
        match self {
            FieldSpec::Free => Ok(()),
            FieldSpec::PlaneWave { f1, f2 } => {
                f1.validate("plane_wave.f1")?;
                f2.validate("plane_wave.f2")
            }
            FieldSpec::TmMode { f } => f.validate("tm_mode.f"),
            FieldSpec::Undulator { b0, omega } => positive("undulator", *omega, *b0),
            FieldSpec::HelicalBoost { f0, omega } => positive("helical_boost", *omega, *f0),
            FieldSpec::Vortex { b0, omega } => positive("vortex", *omega, *b0),
        }
    }

    /// `b₀ = B₀/ω` for the undulator.
    pub fn undulator_b0(&self) -> Option<f64> {
        match self {
            FieldSpec::Undulator { b0, omega } => Some(b0 / omega),
            _ => None,
        }
    }

    /// `A_μ(x)` with lower Cartesian indices at `x = (t, x, y, z)`.
    pub fn potential_at<S: Scalar>(&self, x: &[S; 4]) -> Result<[S; 4]> {
        let zero = S::cst(0.0);
        let x_plus = x[0] + x[3];
        Ok(match self {
            FieldSpec::Free => [zero; 4],
            FieldSpec::PlaneWave { f1, f2 } => {
                [zero, f1.derivative(x_plus), f2.derivative(x_plus), zero]
            }
            FieldSpec::TmMode { f } => {
                if x_plus.re().abs() < 1e-12 {
                    return Err(Error::TmSingular);
                }
                let fv = f.value(x_plus);
                let r2 = x[1] * x[1] + x[2] * x[2];
                let a_plus = -(r2 * fv) / (x_plus * x_plus * 2.0);
                let a_minus = fv * -0.5;
                [
                    a_plus + a_minus,
                    x[1] * fv / x_plus,
                    x[2] * fv / x_plus,
                    a_plus - a_minus,
                ]
            }
            FieldSpec::Undulator { b0, omega } => {
                let b = b0 / omega;
                let phase = x[3] * *omega;
                [zero, phase.cos() * b, phase.sin() * b, zero]
            }
            FieldSpec::HelicalBoost { f0, omega } => [
                zero,
                x_plus * x[2] * *f0,
                x_plus * (x[1] - x_plus * x_plus * (omega / 3.0)) * *f0,
                zero,
            ],
            FieldSpec::Vortex { b0, omega } => {
                let phi = x_plus * *omega;
                let (s, c) = (phi.sin(), phi.cos());
                [
                    zero,
                    (x[1] * s - x[2] * c) * *b0,
                    (-(x[1] * c) - x[2] * s) * *b0,
                    zero,
                ]
            }
        })
    }

    /// `∂_μ A_ν`, indexed `[μ][ν]`.
    pub fn potential_jacobian(&self, p: SpacetimePoint) -> Result<[[f64; 4]; 4]> {
        let c = p.to_array();
        let x: [Dual<f64, 4>; 4] = std::array::from_fn(|k| Dual::variable(c[k], k));
        let a = self.potential_at(&x)?;
        Ok(std::array::from_fn(|mu| std::array::from_fn(|nu| a[nu].d[mu])))
    }

    /// `(A_ν, ∂_μA_ν, ∂_ρ∂_μA_ν)` indexed `[ν]`, `[μ][ν]`, `[ρ][μ][ν]`.
    pub fn potential_jet(&self, p: SpacetimePoint) -> Result<PotentialJet> {
        let a = self.potential_at(&seed_jet2(p.to_array()))?;
        let mut jet = PotentialJet {
            value: [0.0; 4],
            grad: [[0.0; 4]; 4],
            hess: [[[0.0; 4]; 4]; 4],
        };
        for nu in 0..4 {
            let (v, g, h) = unpack_jet2(&a[nu]);
            jet.value[nu] = v;
            for mu in 0..4 {
                jet.grad[mu][nu] = g[mu];
                for rho in 0..4 {
                    jet.hess[rho][mu][nu] = h[rho][mu];
                }
            }
        }
        Ok(jet)
    }
}

/// Potential together with its first and second derivatives at a point.
#[derive(Clone, Copy, Debug)]
pub struct PotentialJet {
    pub value: [f64; 4],
    /// `∂_μ A_ν` at `[μ][ν]`.
    pub grad: [[f64; 4]; 4],
    /// `∂_ρ ∂_μ A_ν` at `[ρ][μ][ν]`.
    pub hess: [[[f64; 4]; 4]; 4],
}

impl PotentialJet {
    pub fn field_strength(&self) -> AntisymTensor {
        AntisymTensor::from_difference(&self.grad)
    }

    /// `∂_ρ F_μν` at `[ρ]`.
    pub fn field_strength_gradient(&self) -> [AntisymTensor; 4] {
        std::array::from_fn(|rho| AntisymTensor::from_difference(&self.hess[rho]))
    }
}

pub fn potential(spec: &FieldSpec, p: SpacetimePoint) -> Result<Covector> {
    spec.potential_at(&p.to_array()).map(Covector)
}

/// `F_μν = ∂_μA_ν - ∂_νA_μ`.
pub fn field_strength(spec: &FieldSpec, p: SpacetimePoint) -> Result<AntisymTensor> {
    Ok(AntisymTensor::from_difference(&spec.potential_jacobian(p)?))
}

/// Electric and magnetic three-vectors.
pub fn eb_fields(spec: &FieldSpec, p: SpacetimePoint) -> Result<([f64; 3], [f64; 3])> {
    Ok(eb_from_tensor(&field_strength(spec, p)?))
}

pub fn eb_from_tensor(f: &AntisymTensor) -> ([f64; 3], [f64; 3]) {
    let f = &f.0;
    (
        [f[0][1], f[0][2], f[0][3]],
        [-f[2][3], -f[3][1], -f[1][2]],
    )
}
