//! Dormand–Prince 5(4) embedded Runge–Kutta pair with adaptive step-size
//! control and cubic Hermite dense output.

/// Right-hand side of `dy/dt = f(t, y)`.
pub trait OdeSystem<const N: usize> {
    type Error;

    fn rhs(&self, t: f64, y: &[f64; N]) -> Result<[f64; N], Self::Error>;

    /// Called on every accepted state; an error stops the integration.
    fn check(&self, _t: f64, _y: &[f64; N]) -> Result<(), Self::Error> {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Dopri5Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    /// Steps smaller than `h_min · max(1, |t|)` count as underflow.
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Options {
    fn default() -> Self {
        Dopri5Options {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dydt: [f64; N],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct Solution<const N: usize> {
    pub nodes: Vec<Node<N>>,
    pub stats: Stats,
}

#[derive(Debug)]
pub enum Failure<const N: usize, E> {
    /// Step size fell below the floor.
    StepUnderflow { last: Node<N>, h: f64 },
    /// `max_steps` exhausted.
    TooManySteps { last: Node<N> },
    /// The system reported an error; `last` is the last accepted node.
    System { last: Node<N>, error: E },
}

impl<const N: usize> Solution<N> {
    pub fn last(&self) -> &Node<N> {
        self.nodes.last().expect("solution has at least the initial node")
    }

    /// Cubic Hermite interpolation between accepted nodes.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        hermite(&self.nodes, t)
    }
}

/// Cubic Hermite interpolation over monotone (in either direction) nodes.
/// Times outside the node range are clamped to the nearest end segment.
pub fn hermite<const N: usize>(nodes: &[Node<N>], t: f64) -> [f64; N] {
    if nodes.len() == 1 {
        return nodes[0].y;
    }
    let forward = nodes[nodes.len() - 1].t >= nodes[0].t;
    let key = |n: &Node<N>| if forward { n.t } else { -n.t };
    let target = if forward { t } else { -t };
    let idx = nodes.partition_point(|n| key(n) <= target);
    let i = idx.clamp(1, nodes.len() - 1) - 1;
    let (a, b) = (&nodes[i], &nodes[i + 1]);
    let h = b.t - a.t;
    let s = (t - a.t) / h;
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    std::array::from_fn(|k| h00 * a.y[k] + h10 * h * a.dydt[k] + h01 * b.y[k] + h11 * h * b.dydt[k])
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], o: &Dopri5Options) -> f64 {
    let s: f64 = (0..N)
        .map(|i| {
            let sc = o.abs_tol + o.rel_tol * y0[i].abs().max(y1[i].abs());
            (err[i] / sc).powi(2)
        })
        .sum();
    (s / N as f64).sqrt()
}

fn initial_step<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    o: &Dopri5Options,
    stats: &mut Stats,
) -> Result<f64, S::Error> {
    let scale = |i: usize| o.abs_tol + o.rel_tol * y0[i].abs();
    let d0 = ((0..N).map(|i| (y0[i] / scale(i)).powi(2)).sum::<f64>() / N as f64).sqrt();
    let d1 = ((0..N).map(|i| (f0[i] / scale(i)).powi(2)).sum::<f64>() / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y0, dir * h0, &[(1.0, f0)]);
    let f1 = sys.rhs(t0 + dir * h0, &y1)?;
    stats.evaluations += 1;
    let d2 = ((0..N)
        .map(|i| ((f1[i] - f0[i]) / scale(i)).powi(2))
        .sum::<f64>()
        / N as f64)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    Ok((100.0 * h0).min(h1).min(o.h_max))
}

/// Integrates from `t0` to `t_end` (either direction), returning every
/// accepted node including both endpoints.
pub fn solve<const N: usize, S: OdeSystem<N>>(
    sys: &S,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    o: &Dopri5Options,
) -> Result<Solution<N>, Failure<N, S::Error>> {
    let mut stats = Stats::default();
    let f0 = sys.rhs(t0, &y0).map_err(|error| Failure::System {
        last: Node {
            t: t0,
            y: y0,
            dydt: [f64::NAN; N],
        },
        error,
    })?;
    stats.evaluations += 1;
    let first = Node { t: t0, y: y0, dydt: f0 };
    if let Err(error) = sys.check(t0, &y0) {
        return Err(Failure::System { last: first, error });
    }
    let mut nodes = vec![first];
    if t_end == t0 {
        return Ok(Solution { nodes, stats });
    }
    let dir = (t_end - t0).signum();
    let mut h = match o.h_init {
        Some(h) => h.abs(),
        None => initial_step(sys, t0, &y0, &f0, dir, o, &mut stats)
            .map_err(|error| Failure::System { last: first, error })?,
    };
    let (mut t, mut y, mut k1) = (t0, y0, f0);
    let mut last_rejected = false;
    loop {
        let last = *nodes.last().unwrap();
        if nodes.len() > o.max_steps {
            return Err(Failure::TooManySteps { last });
        }
        let remaining = (t_end - t).abs();
        let mut finishing = false;
        if h >= remaining {
            h = remaining;
            finishing = true;
        }
        if h < o.h_min * t.abs().max(1.0) && !finishing {
            return Err(Failure::StepUnderflow { last, h });
        }
        let hs = dir * h;
        let wrap = |error| Failure::System { last, error };
        let k2 = sys.rhs(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)])).map_err(wrap)?;
        let k3 = sys
            .rhs(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]))
            .map_err(wrap)?;
        let k4 = sys
            .rhs(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]))
            .map_err(wrap)?;
        let k5 = sys
            .rhs(
                t + C5 * hs,
                &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )
            .map_err(wrap)?;
        let t_new = if finishing { t_end } else { t + hs };
        let k6 = sys
            .rhs(
                t_new,
                &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )
            .map_err(wrap)?;
        let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = sys.rhs(t_new, &y_new).map_err(wrap)?;
        stats.evaluations += 6;
        let err_vec: [f64; N] = std::array::from_fn(|i| {
            hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let err = error_norm(&err_vec, &y, &y_new, o);
        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.25;
            last_rejected = true;
            continue;
        }
        if err <= 1.0 {
            sys.check(t_new, &y_new).map_err(wrap)?;
            t = t_new;
            y = y_new;
            k1 = k7;
            nodes.push(Node { t, y, dydt: k1 });
            stats.accepted += 1;
            if finishing {
                return Ok(Solution { nodes, stats });
            }
            let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
            fac = fac.clamp(0.2, 10.0);
            if last_rejected {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(o.h_max);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            last_rejected = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator;
    impl OdeSystem<2> for Oscillator {
        type Error = ();
        fn rhs(&self, _t: f64, y: &[f64; 2]) -> Result<[f64; 2], ()> {
            Ok([y[1], -y[0]])
        }
    }

    struct Blowup;
    impl OdeSystem<1> for Blowup {
        type Error = ();
        fn rhs(&self, _t: f64, y: &[f64; 1]) -> Result<[f64; 1], ()> {
            Ok([y[0] * y[0]])
        }
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let o = Dopri5Options {
            rel_tol: 1e-11,
            abs_tol: 1e-11,
            ..Default::default()
        };
        let sol = solve(&Oscillator, 0.0, [1.0, 0.0], 10.0, &o).unwrap();
        let end = sol.last();
        assert_eq!(end.t, 10.0);
        assert!((end.y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((end.y[1] + 10f64.sin()).abs() < 1e-9);
        let mid = sol.interpolate(3.3);
        assert!((mid[0] - 3.3f64.cos()).abs() < 1e-7);
    }

    #[test]
    fn backward_integration() {
        let sol = solve(&Oscillator, 2.0, [2f64.cos(), -2f64.sin()], 0.0, &Dopri5Options::default()).unwrap();
        let end = sol.last();
        assert_eq!(end.t, 0.0);
        assert!((end.y[0] - 1.0).abs() < 1e-8);
        assert!(sol.nodes.windows(2).all(|w| w[1].t < w[0].t));
    }

    #[test]
    fn finite_time_blowup_underflows() {
        // y' = y², y(0) = 1 blows up at t = 1
        let r = solve(&Blowup, 0.0, [1.0], 2.0, &Dopri5Options::default());
        assert!(matches!(
            r,
            Err(Failure::StepUnderflow { .. }) | Err(Failure::TooManySteps { .. })
        ));
    }

    #[test]
    fn tighter_tolerance_reduces_error() {
        let err = |tol: f64| {
            let o = Dopri5Options {
                rel_tol: tol,
                abs_tol: tol,
                ..Default::default()
            };
            let end = *solve(&Oscillator, 0.0, [1.0, 0.0], 20.0, &o).unwrap().last();
            (end.y[0] - 20f64.cos()).abs()
        };
        assert!(err(1e-9) < err(1e-6));
    }
}
