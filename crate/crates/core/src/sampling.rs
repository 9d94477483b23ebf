//! Seeded low-discrepancy sample points and phase-space states.
//!
//! Points come from a Halton sequence with a random Cranley–Patterson
//! shift drawn from a seeded ChaCha generator, so every sample set is
//! reproducible from its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fields::FieldSpec;
use crate::spacetime::{from_light_front, Form, LightFrontPoint, PhasePoint, SpacetimePoint};

const PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += (index % b) as f64 * f;
        index /= b;
        f *= inv;
    }
    r
}

/// `n` shifted Halton points in `[0, 1)^D` (D ≤ 12).
pub fn halton<const D: usize>(n: usize, seed: u64) -> Vec<[f64; D]> {
    assert!(D <= PRIMES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: [f64; D] = std::array::from_fn(|_| rng.random::<f64>());
    (1..=n as u64)
        .map(|i| std::array::from_fn(|d| (radical_inverse(i, PRIMES[d]) + shift[d]).fract()))
        .collect()
}

fn lerp((lo, hi): (f64, f64), u: f64) -> f64 {
    lo + (hi - lo) * u
}

/// Sampling box in light-front coordinates `(x⁺, x⁻, x, y)`. The TM box
/// stays clear of the singular surface `x⁺ = 0`.
pub fn light_front_box(spec: &FieldSpec) -> [(f64, f64); 4] {
    let x_plus = match spec {
        FieldSpec::TmMode { .. } => (0.5, 3.0),
        _ => (-2.0, 2.0),
    };
    [x_plus, (-2.0, 2.0), (-1.0, 1.0), (-1.0, 1.0)]
}

pub fn sample_points(spec: &FieldSpec, n: usize, seed: u64) -> Vec<SpacetimePoint> {
    let bx = light_front_box(spec);
    halton::<4>(n, seed)
        .into_iter()
        .map(|u| {
            from_light_front(LightFrontPoint {
                x_plus: lerp(bx[0], u[0]),
                x_minus: lerp(bx[1], u[1]),
                x_perp: [lerp(bx[2], u[2]), lerp(bx[3], u[3])],
            })
        })
        .collect()
}

/// In-domain phase-space states. Front-form `p₋` is bounded away from the
/// light cone and takes the sign of `F₀` for the helical boost.
pub fn sample_states(spec: &FieldSpec, form: Form, n: usize, seed: u64) -> Vec<PhasePoint> {
    let bx = light_front_box(spec);
    let sign = match spec {
        FieldSpec::HelicalBoost { f0, .. } if *f0 < 0.0 => -1.0,
        _ => 1.0,
    };
    halton::<7>(n, seed)
        .into_iter()
        .map(|u| match form {
            Form::Front => PhasePoint::new(
                Form::Front,
                lerp(bx[0], u[0]),
                [lerp(bx[1], u[1]), lerp(bx[2], u[2]), lerp(bx[3], u[3])],
                [
                    sign * lerp((0.4, 1.5), u[4]),
                    lerp((-0.5, 0.5), u[5]),
                    lerp((-0.5, 0.5), u[6]),
                ],
            ),
            Form::Instant => PhasePoint::new(
                Form::Instant,
                lerp((-2.0, 2.0), u[0]),
                [lerp((-1.0, 1.0), u[1]), lerp((-1.0, 1.0), u[2]), lerp((-2.0, 2.0), u[3])],
                [
                    lerp((-0.8, 0.8), u[4]),
                    lerp((-0.8, 0.8), u[5]),
                    lerp((-0.8, 0.8), u[6]),
                ],
            ),
        })
        .collect()
}
