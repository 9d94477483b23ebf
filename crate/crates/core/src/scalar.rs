//! Forward-mode dual numbers.
//!
//! Every field, Hamiltonian and invariant in this crate is written once over
//! the [`Scalar`] trait. Evaluating with `f64` gives values; evaluating with
//! [`Dual`] gives exact first derivatives, and nesting `Dual<Dual<f64, N>, N>`
//! gives exact second derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Real part (the plain value with all derivative parts dropped).
    fn re(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;

    fn powi(self, n: u32) -> Self {
        let mut acc = Self::cst(1.0);
        for _ in 0..n {
            acc = acc * self;
        }
        acc
    }

    fn sq(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    #[inline]
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    #[inline]
    fn powi(self, n: u32) -> Self {
        f64::powi(self, n as i32)
    }
}

/// Value plus `N` directional derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T, const N: usize> {
    pub v: T,
    pub d: [T; N],
}

impl<T: Scalar, const N: usize> Dual<T, N> {
    pub fn constant(v: T) -> Self {
        Dual {
            v,
            d: [T::cst(0.0); N],
        }
    }

    /// The `k`-th independent variable with value `v`.
    pub fn variable(v: T, k: usize) -> Self {
        let mut d = [T::cst(0.0); N];
        d[k] = T::cst(1.0);
        Dual { v, d }
    }

    /// Applies a scalar function given its value and derivative at `self.v`.
    #[inline]
    fn chain(self, value: T, slope: T) -> Self {
        let mut d = self.d;
        for di in d.iter_mut() {
            *di = *di * slope;
        }
        Dual { v: value, d }
    }
}

impl<const N: usize> Dual<f64, N> {
    /// A first-order dual from a value and its gradient. Used for quantities
    /// whose derivatives are known in closed form but whose value is not an
    /// elementary expression (for example quadrature-defined integrals).
    pub fn from_parts(v: f64, d: [f64; N]) -> Self {
        Dual { v, d }
    }
}

/// Scalars that can absorb a value computed outside the scalar algebra,
/// given its partial derivatives with respect to some arguments.
pub trait Lift: Scalar {
    fn lift(value: f64, partials: &[(f64, Self)]) -> Self;
}

impl Lift for f64 {
    fn lift(value: f64, _: &[(f64, f64)]) -> f64 {
        value
    }
}

impl<const N: usize> Lift for Dual<f64, N> {
    fn lift(value: f64, partials: &[(f64, Self)]) -> Self {
        let mut d = [0.0; N];
        for (c, arg) in partials {
            for k in 0..N {
                d[k] += c * arg.d[k];
            }
        }
        Dual::from_parts(value, d)
    }
}

impl<T: Scalar, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a = *a + b;
        }
        Dual { v: self.v + o.v, d }
    }
}

impl<T: Scalar, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a = *a - b;
        }
        Dual { v: self.v - o.v, d }
    }
}

impl<T: Scalar, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a = *a * o.v + self.v * b;
        }
        Dual { v: self.v * o.v, d }
    }
}

impl<T: Scalar, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = T::cst(1.0) / o.v;
        let q = self.v * inv;
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(o.d) {
            *a = (*a - q * b) * inv;
        }
        Dual { v: q, d }
    }
}

impl<T: Scalar, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        let mut d = self.d;
        for a in d.iter_mut() {
            *a = -*a;
        }
        Dual { v: -self.v, d }
    }
}

impl<T: Scalar, const N: usize> Add<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        Dual {
            v: self.v + o,
            d: self.d,
        }
    }
}

impl<T: Scalar, const N: usize> Sub<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn sub(self, o: f64) -> Self {
        Dual {
            v: self.v - o,
            d: self.d,
        }
    }
}

impl<T: Scalar, const N: usize> Mul<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        let mut d = self.d;
        for a in d.iter_mut() {
            *a = *a * o;
        }
        Dual { v: self.v * o, d }
    }
}

impl<T: Scalar, const N: usize> Div<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl<T: Scalar, const N: usize> Scalar for Dual<T, N> {
    fn cst(v: f64) -> Self {
        Dual::constant(T::cst(v))
    }
    fn re(&self) -> f64 {
        self.v.re()
    }
    fn sin(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(s, c)
    }
    fn cos(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(c, -s)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, T::cst(0.5) / r)
    }
    fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c)
    }
    fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s)
    }
}

/// Second-order jet over spacetime: value, gradient and Hessian.
pub type Jet2 = Dual<Dual<f64, 4>, 4>;

/// Seeds the four spacetime coordinates as independent second-order variables.
pub fn seed_jet2(x: [f64; 4]) -> [Jet2; 4] {
    std::array::from_fn(|k| Dual {
        v: Dual::variable(x[k], k),
        d: std::array::from_fn(|j| Dual::constant(if j == k { 1.0 } else { 0.0 })),
    })
}

/// Splits a second-order jet into (value, gradient, Hessian).
pub fn unpack_jet2(j: &Jet2) -> (f64, [f64; 4], [[f64; 4]; 4]) {
    let grad = std::array::from_fn(|k| j.d[k].v);
    let hess = std::array::from_fn(|a| std::array::from_fn(|b| j.d[a].d[b]));
    (j.v.v, grad, hess)
}
