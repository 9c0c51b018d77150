//! Adaptive Gauss-Kronrod quadrature and a few helpers for endpoint
//! singularities and log-log regression.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    pub fn zero() -> Self {
        Self { value: 0.0, abs_error: 0.0, evaluations: 0, converged: true }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, ..Self::zero() }
    }

    pub fn combine(self, other: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }
}

impl std::iter::Sum for QuadResult {
    fn sum<I: Iterator<Item = QuadResult>>(iter: I) -> Self {
        iter.fold(QuadResult::zero(), QuadResult::combine)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-13, rel: 1e-11, max_intervals: 4000 }
    }
}

/// One 15-point Kronrod panel: (estimate, |K15 - G7|).
pub fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Globally adaptive bisection: always splits the panel with the largest
/// error estimate until the total meets `max(abs, rel·|I|)`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: Tolerance) -> QuadResult {
    if a == b {
        return QuadResult::zero();
    }
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, err: e });
    let (mut total, mut err, mut evals) = (v, e, 15usize);
    while err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= tol.max_intervals {
            break;
        }
        let p = heap.pop().expect("heap never empties");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        evals += 30;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.err;
        heap.push(Panel { a: p.a, b: m, value: v1, err: e1 });
        heap.push(Panel { a: m, b: p.b, value: v2, err: e2 });
    }
    // Re-sum to shed the running-update round-off.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let abs_error: f64 = heap.iter().map(|p| p.err).sum();
    QuadResult {
        value,
        abs_error,
        evaluations: evals,
        converged: abs_error <= tol.abs.max(tol.rel * value.abs()) * 1.000001,
    }
}

/// ∫ over consecutive breakpoints.
pub fn integrate_pieces(f: impl Fn(f64) -> f64, points: &[f64], tol: Tolerance) -> QuadResult {
    points.windows(2).map(|w| integrate(&f, w[0], w[1], tol)).sum()
}

/// ∫_0^d F(ζ) dζ (d may be negative) for `F(ζ) ~ |ζ|^γ·smooth`, γ > -1,
/// via |ζ| = u^p, p = 1/(γ+1), which turns the weight into a constant.
/// `F` receives the signed offset ζ, so callers never form s + ζ - s.
pub fn integrate_endpoint_power(
    f: impl Fn(f64) -> f64,
    d: f64,
    gamma: f64,
    tol: Tolerance,
) -> QuadResult {
    assert!(gamma > -1.0, "endpoint exponent must exceed -1");
    let p = 1.0 / (gamma + 1.0);
    let umax = d.abs().powf(gamma + 1.0);
    let dir = d.signum();
    integrate(
        |u| {
            let z = u.powf(p);
            if z == 0.0 {
                return 0.0;
            }
            f(dir * z) * p * u.powf(p - 1.0)
        },
        0.0,
        umax,
        tol,
    )
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Least-squares line through (x, y): (slope, intercept, R²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).min(1.0) };
    (slope, my - slope * mx, r2)
}
