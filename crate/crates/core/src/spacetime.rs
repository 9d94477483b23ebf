//! Coordinates, index conventions, phase-space states and the Poincaré
//! generator basis.
//!
//! Conventions, fixed here and nowhere else:
//!
//! * Cartesian coordinates `x^μ = (t, x, y, z)`, metric `η = diag(1, -1, -1, -1)`.
//! * Light-front coordinates `x⁺ = t + z`, `x⁻ = t - z`, so that
//!   `a·b = ½a⁺b⁻ + ½a⁻b⁺ - a⊥·b⊥` and the kinetic mass shell reads
//!   `4π₊π₋ - π⊥² = 1`.
//! * Covectors (potentials, canonical momenta, Killing one-forms) are stored
//!   with lower Cartesian indices. Light-front components of a covector are
//!   `v₊ = (v₀ + v₃)/2`, `v₋ = (v₀ - v₃)/2`.
//! * Canonical momenta carry lower indices, so for a free particle the
//!   physical velocity is `dx^j/dt = -p_j / p₀`.

use crate::scalar::Scalar;

/// Metric signature entries `η_μμ`.
pub const METRIC: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimePoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl SpacetimePoint {
    pub fn new(t: f64, x: f64, y: f64, z: f64) -> Self {
        SpacetimePoint { t, x, y, z }
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        SpacetimePoint::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.t, self.x, self.y, self.z]
    }

    pub fn x_plus(&self) -> f64 {
        self.t + self.z
    }

    pub fn x_minus(&self) -> f64 {
        self.t - self.z
    }

    pub fn to_light_front(self) -> LightFrontPoint {
        to_light_front(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LightFrontPoint {
    pub x_plus: f64,
    pub x_minus: f64,
    pub x_perp: [f64; 2],
}

impl LightFrontPoint {
    pub fn to_spacetime(self) -> SpacetimePoint {
        from_light_front(self)
    }
}

pub fn to_light_front(p: SpacetimePoint) -> LightFrontPoint {
    LightFrontPoint {
        x_plus: p.t + p.z,
        x_minus: p.t - p.z,
        x_perp: [p.x, p.y],
    }
}

pub fn from_light_front(p: LightFrontPoint) -> SpacetimePoint {
    SpacetimePoint {
        t: 0.5 * (p.x_plus + p.x_minus),
        x: p.x_perp[0],
        y: p.x_perp[1],
        z: 0.5 * (p.x_plus - p.x_minus),
    }
}

/// Cartesian event from light-front coordinates, generic over the scalar type.
#[inline]
pub fn event_from_light_front<S: Scalar>(x_plus: S, x_minus: S, x: S, y: S) -> [S; 4] {
    [(x_plus + x_minus) * 0.5, x, y, (x_plus - x_minus) * 0.5]
}

/// A one-form with lower Cartesian indices.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Covector(pub [f64; 4]);

impl Covector {
    pub fn zero() -> Self {
        Covector([0.0; 4])
    }

    /// Builds a covector from its light-front components `(v₊, v₋, v₁, v₂)`.
    pub fn from_light_front(plus: f64, minus: f64, perp: [f64; 2]) -> Self {
        Covector([plus + minus, perp[0], perp[1], plus - minus])
    }

    pub fn plus(&self) -> f64 {
        0.5 * (self.0[0] + self.0[3])
    }

    pub fn minus(&self) -> f64 {
        0.5 * (self.0[0] - self.0[3])
    }

    pub fn perp(&self) -> [f64; 2] {
        [self.0[1], self.0[2]]
    }

    /// Contravariant components `v^μ = η^{μν} v_ν`.
    pub fn raised(&self) -> [f64; 4] {
        raise(self.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Lowers or raises a Cartesian index (the metric is its own inverse).
#[inline]
pub fn raise<S: Scalar>(v: [S; 4]) -> [S; 4] {
    [v[0], -v[1], -v[2], -v[3]]
}

/// Full contraction `u^μ v_μ` of a contravariant and a covariant vector.
#[inline]
pub fn pair<S: Scalar>(upper: &[S; 4], lower: &[S; 4]) -> S {
    upper[0] * lower[0] + upper[1] * lower[1] + upper[2] * lower[2] + upper[3] * lower[3]
}

/// `ξ·p = η^{μν} ξ_μ p_ν` for two covectors.
pub fn contract(xi: &Covector, momentum: &Covector) -> f64 {
    pair(&xi.raised(), &momentum.0)
}

/// An antisymmetric rank-2 tensor with lower Cartesian indices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AntisymTensor(pub [[f64; 4]; 4]);

impl AntisymTensor {
    pub fn zero() -> Self {
        AntisymTensor([[0.0; 4]; 4])
    }

    /// Antisymmetric part `m_μν - m_νμ` of an arbitrary matrix; exact by
    /// construction since `a - b == -(b - a)` in IEEE arithmetic.
    pub fn from_difference(m: &[[f64; 4]; 4]) -> Self {
        let mut f = [[0.0; 4]; 4];
        for mu in 0..4 {
            for nu in 0..4 {
                f[mu][nu] = m[mu][nu] - m[nu][mu];
            }
        }
        AntisymTensor(f)
    }

    /// Fills the tensor from its six upper-triangle entries, in the order
    /// `(01, 02, 03, 12, 13, 23)`.
    pub fn from_components(c: [f64; 6]) -> Self {
        let mut f = [[0.0; 4]; 4];
        for (k, &(mu, nu)) in PAIRS.iter().enumerate() {
            f[mu][nu] = c[k];
            f[nu][mu] = -c[k];
        }
        AntisymTensor(f)
    }

    pub fn components(&self) -> [f64; 6] {
        std::array::from_fn(|k| {
            let (mu, nu) = PAIRS[k];
            self.0[mu][nu]
        })
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..4).all(|mu| (0..4).all(|nu| self.0[mu][nu] + self.0[nu][mu] == 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Index pairs `μ < ν` in canonical order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Infinitesimal Poincaré transformation `ξ_μ(x) = a_μ + ω_μν x^ν`
/// (lower Cartesian indices).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareGenerator {
    pub a: [f64; 4],
    pub omega: [[f64; 4]; 4],
}

/// The named light-front basis. Contractions with the momentum give
/// `H, p₋, p₁, p₂, L_z, K_z, T₁, T₂, U₁, U₂` where
/// `L_z = x p₂ - y p₁`, `K_z = x⁺H - x⁻p₋`, `T_i = 2xⁱp₋ + x⁺pᵢ`,
/// `U_i = 2xⁱH + x⁻pᵢ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisElement {
    PPlus,
    PMinus,
    P1,
    P2,
    Lz,
    Kz,
    T1,
    T2,
    U1,
    U2,
}

impl BasisElement {
    pub const ALL: [BasisElement; 10] = [
        BasisElement::PPlus,
        BasisElement::PMinus,
        BasisElement::P1,
        BasisElement::P2,
        BasisElement::Lz,
        BasisElement::Kz,
        BasisElement::T1,
        BasisElement::T2,
        BasisElement::U1,
        BasisElement::U2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisElement::PPlus => "P+",
            BasisElement::PMinus => "P-",
            BasisElement::P1 => "P1",
            BasisElement::P2 => "P2",
            BasisElement::Lz => "Lz",
            BasisElement::Kz => "Kz",
            BasisElement::T1 => "T1",
            BasisElement::T2 => "T2",
            BasisElement::U1 => "U1",
            BasisElement::U2 => "U2",
        }
    }

    pub fn generator(self) -> PoincareGenerator {
        match self {
            BasisElement::PPlus => PoincareGenerator::p_plus(),
            BasisElement::PMinus => PoincareGenerator::p_minus(),
            BasisElement::P1 => PoincareGenerator::p_perp(0),
            BasisElement::P2 => PoincareGenerator::p_perp(1),
            BasisElement::Lz => PoincareGenerator::l_z(),
            BasisElement::Kz => PoincareGenerator::k_z(),
            BasisElement::T1 => PoincareGenerator::t_null(0),
            BasisElement::T2 => PoincareGenerator::t_null(1),
            BasisElement::U1 => PoincareGenerator::u_null(0),
            BasisElement::U2 => PoincareGenerator::u_null(1),
        }
    }
}

impl PoincareGenerator {
    pub fn zero() -> Self {
        PoincareGenerator {
            a: [0.0; 4],
            omega: [[0.0; 4]; 4],
        }
    }

    /// Translation part `a` and the six independent `ω_μν` (μ < ν, order
    /// `01, 02, 03, 12, 13, 23`). The lower triangle is filled by negation.
    pub fn new(a: [f64; 4], omega_upper: [f64; 6]) -> Self {
        PoincareGenerator {
            a,
            omega: AntisymTensor::from_components(omega_upper).0,
        }
    }

    pub fn translation(a: [f64; 4]) -> Self {
        PoincareGenerator::new(a, [0.0; 6])
    }

    /// Generator of `x⁺` translations; `ξ·p = p₊ = H`.
    pub fn p_plus() -> Self {
        PoincareGenerator::translation([0.5, 0.0, 0.0, -0.5])
    }

    /// Generator of `x⁻` translations; `ξ·p = p₋`.
    pub fn p_minus() -> Self {
        PoincareGenerator::translation([0.5, 0.0, 0.0, 0.5])
    }

    /// Transverse translation; `ξ·p = p_{i+1}`.
    pub fn p_perp(i: usize) -> Self {
        let mut a = [0.0; 4];
        a[1 + i] = -1.0;
        PoincareGenerator::translation(a)
    }

    /// Cartesian translation `P_μ`; `ξ·p = p_μ` (so `P₀` gives the
    /// instant-form energy).
    pub fn cartesian_translation(mu: usize) -> Self {
        let mut a = [0.0; 4];
        a[mu] = METRIC[mu];
        PoincareGenerator::translation(a)
    }

    /// Rotation about the z axis; `ξ·p = x p₂ - y p₁`.
    pub fn l_z() -> Self {
        PoincareGenerator::new([0.0; 4], [0.0, 0.0, 0.0, 1.0, 0.0, 0.0])
    }

    /// Longitudinal boost; `ξ·p = x⁺p₊ - x⁻p₋`.
    pub fn k_z() -> Self {
        PoincareGenerator::new([0.0; 4], [0.0, 0.0, 1.0, 0.0, 0.0, 0.0])
    }

    /// Null rotation `T_i`; `ξ·p = 2xⁱp₋ + x⁺pᵢ`.
    pub fn t_null(i: usize) -> Self {
        // i = 0: ω₀₁ = 1, ω₁₃ = -1 ; i = 1: ω₀₂ = 1, ω₂₃ = -1
        let mut w = [0.0; 6];
        if i == 0 {
            w[0] = 1.0;
            w[4] = -1.0;
        } else {
            w[1] = 1.0;
            w[5] = -1.0;
        }
        PoincareGenerator::new([0.0; 4], w)
    }

    /// Null rotation `U_i`; `ξ·p = 2xⁱp₊ + x⁻pᵢ`.
    pub fn u_null(i: usize) -> Self {
        let mut w = [0.0; 6];
        if i == 0 {
            w[0] = 1.0;
            w[4] = 1.0;
        } else {
            w[1] = 1.0;
            w[5] = 1.0;
        }
        PoincareGenerator::new([0.0; 4], w)
    }

    /// The ten named basis generators in [`BasisElement::ALL`] order.
    pub fn basis() -> [PoincareGenerator; 10] {
        BasisElement::ALL.map(BasisElement::generator)
    }

    /// `Σ cₖ Gₖ` over the named basis.
    pub fn from_basis_coefficients(c: &[f64; 10]) -> Self {
        PoincareGenerator::basis()
            .iter()
            .zip(c)
            .fold(PoincareGenerator::zero(), |acc, (g, &ck)| acc + *g * ck)
    }

    /// Raw parameter vector `(a₀..a₃, ω₀₁, ω₀₂, ω₀₃, ω₁₂, ω₁₃, ω₂₃)`.
    pub fn parameters(&self) -> [f64; 10] {
        let mut out = [0.0; 10];
        out[..4].copy_from_slice(&self.a);
        for (k, &(mu, nu)) in PAIRS.iter().enumerate() {
            out[4 + k] = self.omega[mu][nu];
        }
        out
    }

    /// Coordinates of this generator in the named basis.
    pub fn basis_coefficients(&self) -> [f64; 10] {
        let basis = PoincareGenerator::basis();
        let m = nalgebra::SMatrix::<f64, 10, 10>::from_fn(|r, c| basis[c].parameters()[r]);
        let rhs = nalgebra::SVector::<f64, 10>::from(self.parameters());
        let sol = m
            .lu()
            .solve(&rhs)
            .expect("named Poincaré basis is non-degenerate");
        std::array::from_fn(|k| sol[k])
    }

    pub fn is_antisymmetric(&self) -> bool {
        (0..4).all(|mu| (0..4).all(|nu| self.omega[mu][nu] == -self.omega[nu][mu]))
    }

    /// `ξ_μ(x)` with lower indices.
    pub fn xi_lower<S: Scalar>(&self, x: &[S; 4]) -> [S; 4] {
        std::array::from_fn(|mu| {
            let mut acc = S::cst(self.a[mu]);
            for (nu, xn) in x.iter().enumerate() {
                if self.omega[mu][nu] != 0.0 {
                    acc = acc + *xn * self.omega[mu][nu];
                }
            }
            acc
        })
    }

    /// `ξ^μ(x)` with upper indices.
    pub fn xi_upper<S: Scalar>(&self, x: &[S; 4]) -> [S; 4] {
        raise(self.xi_lower(x))
    }

    /// `∂_μ ξ^ν = η^{νρ} ω_ρμ`, indexed `[μ][ν]`; constant in spacetime.
    pub fn gradient_upper(&self) -> [[f64; 4]; 4] {
        std::array::from_fn(|mu| std::array::from_fn(|nu| METRIC[nu] * self.omega[nu][mu]))
    }
}

impl std::ops::Add for PoincareGenerator {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut r = self;
        for mu in 0..4 {
            r.a[mu] += o.a[mu];
            for nu in 0..4 {
                r.omega[mu][nu] += o.omega[mu][nu];
            }
        }
        r
    }
}

impl std::ops::Mul<f64> for PoincareGenerator {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        let mut r = self;
        for mu in 0..4 {
            r.a[mu] *= s;
            for nu in 0..4 {
                r.omega[mu][nu] *= s;
            }
        }
        r
    }
}

/// `ξ_μ(x) = a_μ + ω_μν x^ν` at a spacetime point.
pub fn xi_at(g: &PoincareGenerator, p: SpacetimePoint) -> Covector {
    Covector(g.xi_lower(&p.to_array()))
}

/// Which time variable the Hamiltonian evolves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    /// Time `t`; coordinates `(x, y, z)`, momenta `(p₁, p₂, p₃)`.
    Instant,
    /// Time `x⁺`; coordinates `(x⁻, x, y)`, momenta `(p₋, p₁, p₂)`.
    Front,
}

impl Form {
    pub fn column_names(self) -> [&'static str; 7] {
        match self {
            Form::Instant => ["t", "x", "y", "z", "p1", "p2", "p3"],
            Form::Front => ["x_plus", "x_minus", "x", "y", "p_minus", "p1", "p2"],
        }
    }
}

/// A point of extended phase space: evolution time plus canonical pairs
/// `(q_i, p_i)` in the order given by [`Form`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub form: Form,
    pub time: f64,
    pub q: [f64; 3],
    pub p: [f64; 3],
}

impl PhasePoint {
    pub fn new(form: Form, time: f64, q: [f64; 3], p: [f64; 3]) -> Self {
        PhasePoint { form, time, q, p }
    }

    /// The seven extended phase-space coordinates `(time, q, p)`.
    pub fn to_array(&self) -> [f64; 7] {
        [
            self.time, self.q[0], self.q[1], self.q[2], self.p[0], self.p[1], self.p[2],
        ]
    }

    pub fn from_array(form: Form, v: [f64; 7]) -> Self {
        PhasePoint::new(form, v[0], [v[1], v[2], v[3]], [v[4], v[5], v[6]])
    }

    /// The six evolving components `(q, p)`.
    pub fn phase(&self) -> [f64; 6] {
        [self.q[0], self.q[1], self.q[2], self.p[0], self.p[1], self.p[2]]
    }

    pub fn with_phase(&self, time: f64, y: &[f64; 6]) -> Self {
        PhasePoint::new(self.form, time, [y[0], y[1], y[2]], [y[3], y[4], y[5]])
    }

    pub fn event(&self) -> SpacetimePoint {
        SpacetimePoint::from_array(event_of(self.form, self.time, &self.q))
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Cartesian event `(t, x, y, z)` of a phase point, generic over the scalar.
#[inline]
pub fn event_of<S: Scalar>(form: Form, time: S, q: &[S; 3]) -> [S; 4] {
    match form {
        Form::Instant => [time, q[0], q[1], q[2]],
        Form::Front => event_from_light_front(time, q[0], q[1], q[2]),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrontFormState {
    pub x_plus: f64,
    pub x_minus: f64,
    pub x: f64,
    pub y: f64,
    pub p_minus: f64,
    pub p1: f64,
    pub p2: f64,
}

impl FrontFormState {
    pub fn new(x_plus: f64, x_minus: f64, x: f64, y: f64, p_minus: f64, p1: f64, p2: f64) -> Self {
        FrontFormState {
            x_plus,
            x_minus,
            x,
            y,
            p_minus,
            p1,
            p2,
        }
    }
}

impl From<FrontFormState> for PhasePoint {
    fn from(s: FrontFormState) -> Self {
        PhasePoint::new(
            Form::Front,
            s.x_plus,
            [s.x_minus, s.x, s.y],
            [s.p_minus, s.p1, s.p2],
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InstantFormState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl InstantFormState {
    pub fn new(t: f64, x: f64, y: f64, z: f64, p1: f64, p2: f64, p3: f64) -> Self {
        InstantFormState {
            t,
            x,
            y,
            z,
            p1,
            p2,
            p3,
        }
    }
}

impl From<InstantFormState> for PhasePoint {
    fn from(s: InstantFormState) -> Self {
        PhasePoint::new(Form::Instant, s.t, [s.x, s.y, s.z], [s.p1, s.p2, s.p3])
    }
}
