//! Named operators: D^s, J^s, ℋ, W_a(t), the cutoff χ and the DGBO parameters.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, Field, MultiplierSymbol, Parity};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionParams {
    /// Dispersion exponent: 0 is Benjamin-Ono, 1 is KdV.
    pub a: f64,
    /// Nonlinearity u^k ∂ₓu.
    #[serde(default = "one")]
    pub k_power: u32,
}

fn one() -> u32 {
    1
}

impl DispersionParams {
    pub fn new(a: f64, k_power: u32) -> Result<Self> {
        let p = Self { a, k_power };
        p.validate()?;
        Ok(p)
    }

    pub fn with_a(a: f64) -> Result<Self> {
        Self::new(a, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.a) {
            return Err(Error::InvalidParameter(format!("a = {} outside [0, 1]", self.a)));
        }
        if self.k_power == 0 {
            return Err(Error::InvalidParameter("k_power must be at least 1".into()));
        }
        Ok(())
    }

    /// Dispersive symbol σ(ξ) = |ξ|^{1+a}ξ.
    pub fn dispersion(&self, xi: f64) -> f64 {
        xi.abs().powf(1.0 + self.a) * xi
    }
}

/// |ξ|^s with |0|^s = 0 for s > 0.
pub fn abs_pow(xi: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if xi == 0.0 {
        0.0
    } else {
        xi.abs().powf(s)
    }
}

/// sgn with sgn(0) = 0.
pub fn sgn(xi: f64) -> f64 {
    if xi > 0.0 {
        1.0
    } else if xi < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn homogeneous_symbol(s: f64) -> MultiplierSymbol {
    MultiplierSymbol::real(format!("|k|^{s}"), move |k| abs_pow(k, s))
}

/// |ξ|^s for s < 0 with the zero mode dropped; only meaningful on mean-zero data.
pub fn negative_order_symbol(s: f64) -> MultiplierSymbol {
    MultiplierSymbol::real(format!("|k|^{s} (k≠0)"), move |k| if k == 0.0 { 0.0 } else { k.abs().powf(s) })
}

pub fn bessel_symbol(s: f64) -> MultiplierSymbol {
    MultiplierSymbol::real(format!("<k>^{s}"), move |k| (1.0 + k * k).powf(s / 2.0))
}

pub fn hilbert_symbol() -> MultiplierSymbol {
    MultiplierSymbol::new("-i sgn k", Parity::OddImaginary, |k| Complex64::new(0.0, -sgn(k)))
}

pub fn propagator_symbol(t: f64, p: DispersionParams) -> MultiplierSymbol {
    MultiplierSymbol::new(format!("W_{}({t})", p.a), Parity::Hermitian, move |k| {
        Complex64::from_polar(1.0, -t * p.dispersion(k))
    })
}

pub fn homogeneous_derivative(f: &Field, s: f64) -> Result<Field> {
    if s < 0.0 || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("D^s needs s ≥ 0, got {s}")));
    }
    if s == 0.0 {
        return Ok(f.clone());
    }
    apply_multiplier(f, &homogeneous_symbol(s))
}

/// D^s for s < 0 on mean-zero fields.
pub fn negative_order_derivative(f: &Field, s: f64, mean_tol: f64) -> Result<Field> {
    let mean = f.spectrum()[0].norm();
    let scale = f.values().iter().map(|v| v.abs()).sum::<f64>() * f.grid().spacing();
    if mean > mean_tol * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!(
            "D^{s} needs mean-zero input (|f^(0)| = {mean:e})"
        )));
    }
    apply_multiplier(f, &negative_order_symbol(s))
}

pub fn bessel_derivative(f: &Field, s: f64) -> Result<Field> {
    if s == 0.0 {
        return Ok(f.clone());
    }
    apply_multiplier(f, &bessel_symbol(s))
}

pub fn hilbert(f: &Field) -> Result<Field> {
    apply_multiplier(f, &hilbert_symbol())
}

pub fn linear_propagator(f: &Field, t: f64, p: DispersionParams) -> Result<Field> {
    if t == 0.0 {
        return Ok(f.clone());
    }
    apply_multiplier(f, &propagator_symbol(t, p))
}

/// Smooth even plateau: 1 on |ξ| ≤ 1, 0 on |ξ| ≥ 2, with transition
/// ψ(2-|ξ|) / (ψ(2-|ξ|) + ψ(|ξ|-1)), ψ(s) = e^{-1/s} for s > 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CutoffChi;

impl CutoffChi {
    pub fn eval(&self, xi: f64) -> f64 {
        let r = xi.abs();
        if r <= 1.0 {
            1.0
        } else if r >= 2.0 {
            0.0
        } else {
            let psi = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
            let (p, q) = (psi(2.0 - r), psi(r - 1.0));
            p / (p + q)
        }
    }

    /// χ(ξ+z) - χ(ξ) without cancellation for small z. In the transition
    /// band the log-ratios of ψ are formed exactly.
    pub fn increment(&self, xi: f64, z: f64) -> f64 {
        let (r, s) = (xi.abs(), (xi + z).abs());
        let in_band = |v: f64| v > 1.0 && v < 2.0;
        if xi * (xi + z) <= 0.0 || !in_band(r) || !in_band(s) {
            return self.eval(xi + z) - self.eval(xi);
        }
        // χ = σ(L) with σ the logistic function and L = ln p - ln q,
        // p = ψ(2-·), q = ψ(·-1); ΔL is formed without cancellation.
        let d = z * xi.signum();
        let dl = -d / ((2.0 - r) * (2.0 - s)) - d / ((r - 1.0) * (s - 1.0));
        if dl.abs() > 1.0 {
            return self.eval(xi + z) - self.eval(xi);
        }
        let l = -1.0 / (2.0 - r) + 1.0 / (r - 1.0);
        let sigma = |v: f64| 1.0 / (1.0 + (-v).exp());
        sigma(l + dl) * sigma(-l) * -(-dl).exp_m1()
    }

    /// Points where χ is not analytic.
    pub fn breakpoints(&self) -> [f64; 4] {
        [-2.0, -1.0, 1.0, 2.0]
    }

    pub fn symbol(&self) -> MultiplierSymbol {
        let c = *self;
        MultiplierSymbol::real("chi", move |k| c.eval(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{derivative, SpectralGrid};

    fn close(a: &Field, b: &Field, tol: f64) -> bool {
        a.sub(b).unwrap().sup_norm() <= tol
    }

    #[test]
    fn params_validation() {
        assert!(DispersionParams::new(0.5, 1).is_ok());
        assert!(DispersionParams::new(1.5, 1).is_err());
        assert!(DispersionParams::new(0.5, 0).is_err());
    }

    #[test]
    fn d_zero_is_identity_and_eigenfunctions() {
        let g = SpectralGrid::new(64, std::f64::consts::PI).unwrap();
        let f = g.sample(|x| (2.0 * x).cos());
        assert_eq!(homogeneous_derivative(&f, 0.0).unwrap().values(), f.values());
        let d = homogeneous_derivative(&f, 1.5).unwrap();
        assert!(close(&d, &f.scale(2f64.powf(1.5)), 1e-12));
        assert!(homogeneous_derivative(&f, -0.5).is_err());
    }

    #[test]
    fn d_squared_is_minus_laplacian() {
        let g = SpectralGrid::new(512, 40.0).unwrap();
        let f = g.sample(|x| 1.5 / (x / 2.0).cosh().powi(2));
        let d2 = homogeneous_derivative(&f, 2.0).unwrap();
        let lap = derivative(&f, 2).unwrap().scale(-1.0);
        assert!(close(&d2, &lap, 1e-12));
    }

    #[test]
    fn bessel_inverse_and_monotone() {
        let g = SpectralGrid::new(256, 15.0).unwrap();
        let f = g.sample(|x| (-x * x / 2.0).exp() * (2.0 * x).sin());
        let back = bessel_derivative(&bessel_derivative(&f, 1.3).unwrap(), -1.3).unwrap();
        assert!(close(&back, &f, 1e-12));
        assert!(bessel_derivative(&f, 0.7).unwrap().l2_norm() >= f.l2_norm());
    }

    #[test]
    fn propagator_examples() {
        let p = DispersionParams::with_a(0.5).unwrap();
        let g = SpectralGrid::new(512, 30.0).unwrap();
        let f = g.sample(|x| (-x * x).exp());
        assert_eq!(linear_propagator(&f, 0.0, p).unwrap().values(), f.values());
        let w = linear_propagator(&f, 0.8, p).unwrap();
        assert!((w.l2_norm() - f.l2_norm()).abs() < 1e-13);
    }

    #[test]
    fn kdv_limit_matches_airy_on_positive_modes() {
        let p = DispersionParams::with_a(1.0).unwrap();
        let s = propagator_symbol(0.7, p);
        for &k in &[0.3, 1.0, 2.5] {
            let airy = Complex64::from_polar(1.0, -0.7 * k * k * k);
            assert!((s.eval(k) - airy).norm() < 1e-14);
        }
    }

    #[test]
    fn bo_limit_symbol() {
        let p = DispersionParams::with_a(0.0).unwrap();
        let s = propagator_symbol(1.1, p);
        for &k in &[-2.0, -0.5, 0.5, 3.0] {
            assert!((s.eval(k) - Complex64::from_polar(1.0, -1.1 * k.abs() * k)).norm() < 1e-14);
        }
    }

    #[test]
    fn d_one_is_hilbert_derivative() {
        let g = SpectralGrid::new(256, 20.0).unwrap();
        let f = g.sample(|x| (-x * x / 4.0).exp() * (1.0 + 0.3 * x));
        let d1 = homogeneous_derivative(&f, 1.0).unwrap();
        let hd = hilbert(&derivative(&f, 1).unwrap()).unwrap();
        assert!(close(&d1, &hd, 1e-12));
        let lhs = homogeneous_derivative(&f, 1.5).unwrap();
        let rhs = homogeneous_derivative(&hd, 0.5).unwrap();
        assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn cutoff_shape() {
        let c = CutoffChi;
        assert_eq!(c.eval(0.0), 1.0);
        assert_eq!(c.eval(1.0), 1.0);
        assert_eq!(c.eval(-2.0), 0.0);
        assert!((c.eval(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = c.eval(1.0 + i as f64 / 100.0);
            assert!(v <= prev + 1e-15 && (0.0..=1.0).contains(&v));
            assert_eq!(v, c.eval(-(1.0 + i as f64 / 100.0)));
            prev = v;
        }
    }

    #[test]
    fn cutoff_increment_matches_difference() {
        let c = CutoffChi;
        for &(x, z) in &[(1.3, 0.2), (-1.7, 0.1), (1.5, -0.4), (0.5, 1.0), (1.9, 0.5), (1.2, -0.5)] {
            let want = c.eval(x + z) - c.eval(x);
            assert!((c.increment(x, z) - want).abs() < 1e-14, "{x} {z}");
        }
        // tiny steps keep full relative accuracy: compare with ξ-derivative
        let (x, h) = (1.4, 1e-12);
        let slope = c.increment(x, h) / h;
        let fd = (c.eval(x + 1e-5) - c.eval(x - 1e-5)) / 2e-5;
        assert!((slope - fd).abs() < 1e-8 * fd.abs());
    }

    #[test]
    fn symbols_have_declared_parity() {
        let g = SpectralGrid::new(64, 5.0).unwrap();
        let p = DispersionParams::with_a(0.3).unwrap();
        for s in [
            homogeneous_symbol(0.7),
            bessel_symbol(-1.2),
            hilbert_symbol(),
            propagator_symbol(2.0, p),
            CutoffChi.symbol(),
        ] {
            assert!(s.parity_consistent(&g, 1e-14), "{s:?}");
        }
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::grid::SpectralGrid;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn propagator_is_a_unitary_group(a in 0.0f64..=1.0, t in -2.0f64..2.0, s in -2.0f64..2.0, c in -3.0f64..3.0) {
            let p = DispersionParams::with_a(a).unwrap();
            let g = SpectralGrid::new(256, 20.0).unwrap();
            let f = g.sample(|x| (-(x - c) * (x - c)).exp() * (1.0 + 0.3 * x.sin()));
            let ws = linear_propagator(&f, s, p).unwrap();
            let wts = linear_propagator(&ws, t, p).unwrap();
            let direct = linear_propagator(&f, t + s, p).unwrap();
            prop_assert!((wts.l2_norm() - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
            prop_assert!(wts.sub(&direct).unwrap().sup_norm() <= 1e-11);
        }

        #[test]
        fn bessel_orders_compose(s1 in -2.0f64..2.0, s2 in -2.0f64..2.0) {
            let g = SpectralGrid::new(256, 15.0).unwrap();
            let f = g.sample(|x| (-x * x / 2.0).exp());
            let two = bessel_derivative(&bessel_derivative(&f, s1).unwrap(), s2).unwrap();
            let one = bessel_derivative(&f, s1 + s2).unwrap();
            prop_assert!(two.sub(&one).unwrap().sup_norm() <= 1e-10 * one.sup_norm().max(1.0));
        }
    }
}
