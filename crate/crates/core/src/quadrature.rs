//! Globally adaptive Gauss–Kronrod (7, 15) quadrature with pole detection.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// 15-point Kronrod estimate and the embedded 7-point Gauss difference.
/// `guard` sees every node and may reject the segment.
fn gk15<F, G>(f: &mut F, guard: &mut G, a: f64, b: f64) -> Result<Segment>
where
    F: FnMut(f64) -> f64,
    G: FnMut(f64) -> Result<()>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    guard(c)?;
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        guard(c - x)?;
        guard(c + x)?;
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    Ok(Segment {
        a,
        b,
        value: kron * h,
        error: ((kron - gauss) * h).abs(),
    })
}

/// Integrates `f` over `[a, b]` (either orientation).
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult> {
    integrate_guarded(f, |_| Ok(()), a, b, opts)
}

/// Integrates `numerator(s) / denominator(s)`, failing with
/// [`Error::QuadraturePole`] if the denominator changes sign or vanishes at
/// any node or endpoint visited by the adaptive scheme.
pub fn integrate_ratio<N, D>(
    mut numerator: N,
    denominator: D,
    a: f64,
    b: f64,
    opts: &QuadOptions,
) -> Result<QuadResult>
where
    N: FnMut(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let d0 = denominator(a);
    if d0 == 0.0 || !d0.is_finite() {
        return Err(Error::QuadraturePole { at: a });
    }
    let sign = d0.signum();
    let guard = |s: f64| {
        let d = denominator(s);
        if d * sign <= 0.0 || !d.is_finite() {
            Err(Error::QuadraturePole { at: s })
        } else {
            Ok(())
        }
    };
    integrate_guarded(|s| numerator(s) / denominator(s), guard, a, b, opts)
}

fn integrate_guarded<F, G>(mut f: F, mut guard: G, a: f64, b: f64, opts: &QuadOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
    G: FnMut(f64) -> Result<()>,
{
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    guard(lo)?;
    guard(hi)?;
    let mut segments = vec![gk15(&mut f, &mut guard, lo, hi)?];
    let mut evaluations = 15;
    loop {
        let total: f64 = segments.iter().map(|s| s.value).sum();
        let err: f64 = segments.iter().map(|s| s.error).sum();
        if err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            return Ok(QuadResult {
                value: sign * total,
                error: err,
                evaluations,
            });
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::QuadratureNotConverged { error: err });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, s)| if s.error > be { (i, s.error) } else { (bi, be) });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            return Err(Error::QuadratureNotConverged { error: err });
        }
        segments.push(gk15(&mut f, &mut guard, seg.a, mid)?);
        segments.push(gk15(&mut f, &mut guard, mid, seg.b)?);
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x - 2.0 * x + 1.0, -1.0, 2.0, &QuadOptions::default()).unwrap();
        // x³ - x² + x from -1 to 2: (8 - 4 + 2) - (-1 - 1 - 1) = 9
        assert!((r.value - 9.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let o = QuadOptions::default();
        let f = |x: f64| x.sin();
        let a = integrate(f, 0.0, 2.0, &o).unwrap().value;
        let b = integrate(f, 2.0, 0.0, &o).unwrap().value;
        assert!((a + b).abs() < 1e-15);
        assert!((a - (1.0 - 2f64.cos())).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_converges() {
        let r = integrate(|x| (10.0 * x).cos() * (-x).exp(), 0.0, 20.0, &QuadOptions::default()).unwrap();
        // ∫ e^{-x} cos 10x dx = e^{-x}(10 sin 10x - cos 10x)/101
        let anti = |x: f64| (-x).exp() * (10.0 * (10.0 * x).sin() - (10.0 * x).cos()) / 101.0;
        assert!((r.value - (anti(20.0) - anti(0.0))).abs() < 1e-10);
    }

    #[test]
    fn pole_is_detected() {
        let r = integrate_ratio(|_| 1.0, |s| s - 0.5, 0.0, 1.0, &QuadOptions::default());
        assert!(matches!(r, Err(Error::QuadraturePole { .. })));
        let ok = integrate_ratio(|_| 1.0, |s| s + 1.0, 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((ok.value - 2f64.ln()).abs() < 1e-12);
    }
}
