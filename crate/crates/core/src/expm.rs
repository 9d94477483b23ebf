//! Matrix exponential of the rotating-frame oscillator system.
//!
//! The exponential itself is nalgebra's scaling-and-squaring Padé
//! implementation, which stays accurate for the defective and degenerate
//! cases (`ε → 0`, `ε = ±1/4`) where an eigendecomposition would not.

use nalgebra::{Matrix4, Vector4};

/// `exp(M)`.
pub fn expm(m: &Matrix4<f64>) -> Matrix4<f64> {
    m.exp()
}

/// Generator of `d/dφ (α, β, α', β')` for `α'' = β' + ε₊α`,
/// `β'' = -α' + ε₋β` with `ε± = 1/4 ± ε`.
pub fn oscillator_matrix(eps: f64) -> Matrix4<f64> {
    let (ep, em) = (0.25 + eps, 0.25 - eps);
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        ep, 0.0, 0.0, 1.0, //
        0.0, em, -1.0, 0.0,
    )
}

/// Advances `(α, β, α', β')` by `dphi`.
pub fn propagate(eps: f64, y: &Vector4<f64>, dphi: f64) -> Vector4<f64> {
    expm(&(oscillator_matrix(eps) * dphi)) * y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor(m: &Matrix4<f64>) -> Matrix4<f64> {
        let mut term = Matrix4::identity();
        let mut acc = Matrix4::identity();
        for k in 1..60 {
            term = term * m / k as f64;
            acc += term;
        }
        acc
    }

    #[test]
    fn zero_gives_identity() {
        assert_eq!(expm(&Matrix4::zeros()), Matrix4::identity());
    }

    #[test]
    fn matches_taylor_series() {
        for eps in [0.0, 0.1, 0.25, -0.4] {
            let m = oscillator_matrix(eps) * 0.7;
            assert!((expm(&m) - taylor(&m)).amax() < 1e-13);
        }
    }

    #[test]
    fn nilpotent_is_exact() {
        // ε₊ = ε₋ = 0 is impossible, but a strictly upper-triangular matrix
        // has a finite series
        let n = Matrix4::new(0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0);
        let e = expm(&n);
        let expect = Matrix4::identity() + n + n * n / 2.0 + n * n * n / 6.0;
        assert!((e - expect).amax() < 1e-14);
    }
}
