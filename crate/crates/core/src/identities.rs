//! Weight/operator commutator identities, the Γ commutation law and the
//! closed-form ξ-derivatives F_j of e^{-it|ξ|^{1+a}ξ}û₀.
//!
//! Every identity is a continuum statement. Multiplying by x is not a
//! periodic operation and D^{1+a} of a compactly supported field has
//! |x|^{-(2+a)} tails, so each side is evaluated on a box extended by
//! [`CONTINUUM_PAD`] with the same spacing and compared on the interior
//! of the original box.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, Field, MultiplierSymbol, Parity, SpectralGrid};
use crate::ops::{abs_pow, hilbert_symbol, homogeneous_symbol, linear_propagator, negative_order_symbol, sgn, DispersionParams};
use crate::par::{self, Execution};
use crate::tolerances::{CONTINUUM_PAD, INTERIOR_FRACTION, MEAN_ZERO_TOL, SUPPORT_FRACTION};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub lhs_norm: f64,
    pub residual_norm: f64,
    pub relative_residual: f64,
    pub grid: String,
}

impl IdentityReport {
    fn new(identity: &str, lhs_norm: f64, residual_norm: f64, grid: &SpectralGrid) -> Self {
        Self {
            identity: identity.to_string(),
            lhs_norm,
            residual_norm,
            relative_residual: residual_norm / lhs_norm.max(1e-300),
            grid: grid.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Identity {
    /// x·D^{1+a}∂ₓf = -(2+a)D^{1+a}f + D^{1+a}∂ₓ(xf)
    Weight1,
    /// x·D^{1+a}f = D^{1+a}(xf) - (1+a)D^aℋf
    Weight1NoDerivative,
    /// x²D^{1+a}∂ₓf = (2+a)(1+a)D^aℋf - 2(2+a)D^{1+a}(xf) + D^{1+a}∂ₓ(x²f)
    Weight2,
    /// x²D^{1+a}f = -(1+a)aD^{a-1}f - 2(1+a)D^aℋ(xf) + D^{1+a}(x²f)
    Weight2NoDerivative,
}

impl Identity {
    pub const ALL: [Identity; 4] =
        [Identity::Weight1, Identity::Weight1NoDerivative, Identity::Weight2, Identity::Weight2NoDerivative];

    pub fn name(self) -> &'static str {
        match self {
            Identity::Weight1 => "weight1",
            Identity::Weight1NoDerivative => "weight1-noderivative",
            Identity::Weight2 => "weight2",
            Identity::Weight2NoDerivative => "weight2-noderivative",
        }
    }

    pub fn check(self, f: &Field, p: DispersionParams) -> Result<IdentityReport> {
        match self {
            Identity::Weight1 => check_weight1_identity(f, p),
            Identity::Weight1NoDerivative => check_weight1_noderivative_identity(f, p),
            Identity::Weight2 => Ok(check_weight2_identities(f, p)?.0),
            Identity::Weight2NoDerivative => {
                check_weight2_identities(f, p)?.1.ok_or_else(|| {
                    Error::Precondition("the D^{a-1} identity needs mean-zero data".into())
                })
            }
        }
    }
}

fn d_sym(s: f64) -> MultiplierSymbol {
    homogeneous_symbol(s)
}

/// D^{1+a}∂ₓ: |k|^{1+a}·ik
fn d_dx_sym(a: f64) -> MultiplierSymbol {
    MultiplierSymbol::new("|k|^{1+a} ik", Parity::OddImaginary, move |k| Complex64::new(0.0, abs_pow(k, 1.0 + a) * k))
}

/// D^aℋ: -i sgn(k)|k|^a
fn d_hilbert_sym(a: f64) -> MultiplierSymbol {
    homogeneous_symbol(a).then(&hilbert_symbol())
}

fn check_support(f: &Field) -> Result<()> {
    let g = f.grid();
    let half = 0.5 * g.half_length();
    let max = f.sup_norm();
    let outside = g
        .nodes()
        .iter()
        .zip(f.values())
        .filter(|(x, _)| x.abs() > half)
        .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    if outside > SUPPORT_FRACTION * max {
        return Err(Error::Precondition(format!(
            "field not supported in |x| ≤ L/2: outside max {outside:e} vs {max:e}"
        )));
    }
    Ok(())
}

/// Padded working copy plus the original grid for restriction.
struct Padded {
    f: Field,
    grid: SpectralGrid,
}

impl Padded {
    fn new(f: &Field) -> Result<Self> {
        check_support(f)?;
        Ok(Self { f: f.zero_padded(CONTINUUM_PAD)?, grid: *f.grid() })
    }

    fn apply(&self, g: &Field, m: &MultiplierSymbol) -> Result<Field> {
        apply_multiplier(g, m)
    }

    fn report(&self, name: &str, lhs: &Field, rhs: &Field) -> Result<IdentityReport> {
        let lhs = lhs.restrict_to(&self.grid)?;
        let rhs = rhs.restrict_to(&self.grid)?;
        let mask = self.grid.interior_mask(INTERIOR_FRACTION);
        let res = lhs.sub(&rhs)?.masked_l2_norm(&mask);
        Ok(IdentityReport::new(name, lhs.masked_l2_norm(&mask), res, &self.grid))
    }
}

pub fn check_weight1_identity(f: &Field, p: DispersionParams) -> Result<IdentityReport> {
    p.validate()?;
    let w = Padded::new(f)?;
    let a = p.a;
    let dd = d_dx_sym(a);
    let lhs = w.apply(&w.f, &dd)?.times_x();
    let rhs = w
        .apply(&w.f, &d_sym(1.0 + a))?
        .scale(-(2.0 + a))
        .add(&w.apply(&w.f.times_x(), &dd)?)?;
    w.report(Identity::Weight1.name(), &lhs, &rhs)
}

pub fn check_weight1_noderivative_identity(f: &Field, p: DispersionParams) -> Result<IdentityReport> {
    p.validate()?;
    let w = Padded::new(f)?;
    let a = p.a;
    let d = d_sym(1.0 + a);
    let lhs = w.apply(&w.f, &d)?.times_x();
    let rhs = w
        .apply(&w.f.times_x(), &d)?
        .sub(&w.apply(&w.f, &d_hilbert_sym(a))?.scale(1.0 + a))?;
    w.report(Identity::Weight1NoDerivative.name(), &lhs, &rhs)
}

/// Both x² identities. The second needs D^{a-1}f and is `None` unless f is
/// mean-zero; use [`Identity::check`] to get that case as an error.
pub fn check_weight2_identities(
    f: &Field,
    p: DispersionParams,
) -> Result<(IdentityReport, Option<IdentityReport>)> {
    p.validate()?;
    let w = Padded::new(f)?;
    let a = p.a;
    let x_f = w.f.times_x();
    let x2_f = x_f.times_x();
    let dh = d_hilbert_sym(a);
    let d = d_sym(1.0 + a);
    let dd = d_dx_sym(a);

    let lhs = w.apply(&w.f, &dd)?.times_x().times_x();
    let rhs = w
        .apply(&w.f, &dh)?
        .scale((2.0 + a) * (1.0 + a))
        .sub(&w.apply(&x_f, &d)?.scale(2.0 * (2.0 + a)))?
        .add(&w.apply(&x2_f, &dd)?)?;
    let first = w.report(Identity::Weight2.name(), &lhs, &rhs)?;

    let mean = f.integral().abs();
    let scale = f.values().iter().map(|v| v.abs()).sum::<f64>() * f.grid().spacing();
    if mean > MEAN_ZERO_TOL * scale.max(f64::MIN_POSITIVE) {
        return Ok((first, None));
    }
    let lhs = w.apply(&w.f, &d)?.times_x().times_x();
    let rhs = w
        .apply(&w.f, &negative_order_symbol(a - 1.0))?
        .scale(-(1.0 + a) * a)
        .sub(&w.apply(&x_f, &dh)?.scale(2.0 * (1.0 + a)))?
        .add(&w.apply(&x2_f, &d)?)?;
    Ok((first, Some(w.report(Identity::Weight2NoDerivative.name(), &lhs, &rhs)?)))
}

/// W_a(t)(x·u₀) against (x - (2+a)t·D^{1+a})W_a(t)u₀.
pub fn check_gamma_commutation(u0: &Field, t: f64, p: DispersionParams) -> Result<IdentityReport> {
    p.validate()?;
    let w = Padded::new(u0)?;
    let lhs = linear_propagator(&w.f.times_x(), t, p)?;
    let wu = linear_propagator(&w.f, t, p)?;
    let rhs = wu.times_x().sub(&w.apply(&wu, &d_sym(1.0 + p.a))?.scale((2.0 + p.a) * t))?;
    w.report("gamma-commutation", &lhs, &rhs)
}

/// Residual of one identity for `f` sampled on grids of increasing n at
/// fixed L.
pub fn refinement_study(
    identity: Identity,
    f: impl Fn(f64) -> f64 + Sync,
    half_length: f64,
    ns: &[usize],
    p: DispersionParams,
    exec: Execution,
) -> Result<Vec<IdentityReport>> {
    par::map(exec, ns, |&n| {
        let g = SpectralGrid::new(n, half_length)?;
        identity.check(&g.sample(&f), p)
    })
    .into_iter()
    .collect()
}

/// True when the relative residual drops at least `factor`× per doubling
/// until it first reaches `floor`.
pub fn converges_spectrally(reports: &[IdentityReport], factor: f64, floor: f64) -> bool {
    for w in reports.windows(2) {
        let (r0, r1) = (w[0].relative_residual, w[1].relative_residual);
        if r0 <= floor {
            return true;
        }
        if r1 > r0 / factor && r1 > floor {
            return false;
        }
    }
    true
}

/// One term c·t^m·|ξ|^e·sgn(ξ)^s·e^{-it|ξ|^{1+a}ξ}·∂_ξ^d û₀.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionTerm {
    pub label: String,
    pub coefficient: Complex64,
    pub t_power: u32,
    pub xi_power: f64,
    pub signed: bool,
    pub data_order: u32,
}

impl ExpansionTerm {
    fn eval(&self, t: f64, xi: f64, phase: Complex64, data: &[Complex64]) -> Complex64 {
        let s = if self.signed { sgn(xi) } else { 1.0 };
        let x = if self.xi_power == 0.0 { 1.0 } else { xi.abs().powf(self.xi_power) };
        self.coefficient * t.powi(self.t_power as i32) * x * s * phase * data[self.data_order as usize]
    }
}

/// F_j = ∂_ξ^j(e^{-it|ξ|^{1+a}ξ}û₀) as the sum of its closed-form terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolDerivativeExpansion {
    pub order: u32,
    pub a: f64,
    pub terms: Vec<ExpansionTerm>,
}

impl SymbolDerivativeExpansion {
    pub fn new(order: u32, a: f64) -> Result<Self> {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let (b, c) = (2.0 + a, 1.0 + a);
        let term = |label: &str, coef: Complex64, tp: u32, e: f64, s: bool, d: u32| ExpansionTerm {
            label: label.to_string(),
            coefficient: coef,
            t_power: tp,
            xi_power: e,
            signed: s,
            data_order: d,
        };
        let terms = match order {
            1 => vec![term("A1", -i * b, 1, c, false, 0), term("A2", one, 0, 0.0, false, 1)],
            2 => vec![
                term("B1", -i * b * c, 1, a, true, 0),
                term("B2", -one * b * b, 2, 2.0 * c, false, 0),
                term("B3", -2.0 * i * b, 1, c, false, 1),
                term("B4", one, 0, 0.0, false, 2),
            ],
            3 => vec![
                term("D1", -i * a * c * b, 1, a - 1.0, false, 0),
                term("D2", -3.0 * one * b * b * c, 2, 2.0 * a + 1.0, true, 0),
                term("D3", i * b.powi(3), 3, 3.0 * c, false, 0),
                term("D4", -3.0 * i * b * c, 1, a, true, 1),
                term("D5", -3.0 * one * b * b, 2, 2.0 * c, false, 1),
                term("D7", -3.0 * i * b, 1, c, false, 2),
                term("D8", one, 0, 0.0, false, 3),
            ],
            4 => vec![
                term("E1", -i * b * c * a * (a - 1.0), 1, a - 2.0, true, 0),
                term("E2", -one * b * b * c * (7.0 * a + 3.0), 2, 2.0 * a, false, 0),
                term("E3", 6.0 * i * b.powi(3) * c, 3, 3.0 * a + 2.0, true, 0),
                term("E4", one * b.powi(4), 4, 4.0 * c, false, 0),
                term("E5", -4.0 * i * a * c * b, 1, a - 1.0, false, 1),
                term("E6", -12.0 * one * b * b * c, 2, 2.0 * a + 1.0, true, 1),
                term("E7", 4.0 * i * b.powi(3), 3, 3.0 * c, false, 1),
                term("E8", -6.0 * one * b * b, 2, 2.0 * c, false, 2),
                term("E9", -6.0 * i * b * c, 1, a, true, 2),
                term("E10", -4.0 * i * b, 1, c, false, 3),
                term("E11", one, 0, 0.0, false, 4),
            ],
            _ => return Err(Error::InvalidParameter(format!("F_j needs j in 1..=4, got {order}"))),
        };
        Ok(Self { order, a, terms })
    }

    /// Σ terms at ξ; `data[d]` = ∂_ξ^d û₀(ξ).
    pub fn eval(&self, t: f64, xi: f64, data: &[Complex64]) -> Complex64 {
        let phase = Complex64::from_polar(1.0, -t * abs_pow(xi, 1.0 + self.a) * xi);
        self.terms.iter().map(|term| term.eval(t, xi, phase, data)).sum()
    }
}

/// ∂_ξ^d û(ξ) for d = 0..=order from the continuum transform
/// û(ξ) = ∫ e^{-ixξ}u(x)dx, summed directly over the nodes.
fn transform_derivatives(u: &Field, xi: f64, order: u32) -> Vec<Complex64> {
    let h = u.grid().spacing();
    let mut out = vec![Complex64::new(0.0, 0.0); order as usize + 1];
    for (x, v) in u.grid().nodes().into_iter().zip(u.values()) {
        if *v == 0.0 {
            continue;
        }
        let base = Complex64::from_polar(h * v, -x * xi);
        let step = Complex64::new(0.0, -x);
        let mut w = base;
        for o in out.iter_mut() {
            *o += w;
            w *= step;
        }
    }
    out
}

/// Smallest |ξ| a stencil may touch: the singular factors |ξ|^{a-2} etc.
/// are not difference-resolvable near 0.
pub const XI_MIN: f64 = 0.05;

/// j-th derivative of `g` at ξ by a 5-point centered stencil with two
/// Richardson levels.
fn richardson_derivative(g: &impl Fn(f64) -> Complex64, xi: f64, h: f64, j: u32) -> Complex64 {
    let stencil = |h: f64| -> Complex64 {
        let f = |k: f64| g(xi + k * h);
        match j {
            1 => (f(-2.0) - 8.0 * f(-1.0) + 8.0 * f(1.0) - f(2.0)) / (12.0 * h),
            2 => (-f(-2.0) + 16.0 * f(-1.0) - 30.0 * f(0.0) + 16.0 * f(1.0) - f(2.0)) / (12.0 * h * h),
            3 => (-f(-2.0) + 2.0 * f(-1.0) - 2.0 * f(1.0) + f(2.0)) / (2.0 * h.powi(3)),
            _ => (f(-2.0) - 4.0 * f(-1.0) + 6.0 * f(0.0) - 4.0 * f(1.0) + f(2.0)) / h.powi(4),
        }
    };
    // leading error orders of the stencils
    let p = if j <= 2 { 4 } else { 2 };
    let (r1, r2) = (2f64.powi(p), 2f64.powi(p + 2));
    let (d0, d1, d2) = (stencil(h), stencil(h / 2.0), stencil(h / 4.0));
    let e0 = (r1 * d1 - d0) / (r1 - 1.0);
    let e1 = (r1 * d2 - d1) / (r1 - 1.0);
    (r2 * e1 - e0) / (r2 - 1.0)
}

/// Closed-form F_j against Richardson differences of e^{-it|ξ|^{1+a}ξ}û₀
/// on |ξ| ∈ [xi_lo, xi_hi]: norm-wise relative error over the evaluation set.
pub fn verify_fj_expansion_on(
    u0: &Field,
    t: f64,
    p: DispersionParams,
    j: u32,
    xi_lo: f64,
    xi_hi: f64,
    points: usize,
    exec: Execution,
) -> Result<IdentityReport> {
    p.validate()?;
    let exp = SymbolDerivativeExpansion::new(j, p.a)?;
    if xi_lo <= XI_MIN || xi_hi <= xi_lo || points < 2 {
        return Err(Error::InvalidParameter(format!("evaluation band [{xi_lo}, {xi_hi}] must sit above {XI_MIN}")));
    }
    let mut xs = Vec::with_capacity(2 * points);
    for m in 0..points {
        let xi = xi_lo * (xi_hi / xi_lo).powf(m as f64 / (points - 1) as f64);
        xs.extend([xi, -xi]);
    }
    let g = |xi: f64| {
        Complex64::from_polar(1.0, -t * abs_pow(xi, 1.0 + p.a) * xi) * transform_derivatives(u0, xi, 0)[0]
    };
    let pairs = par::map(exec, &xs, |&xi| {
        let closed = exp.eval(t, xi, &transform_derivatives(u0, xi, j));
        // step: a fraction of the local phase wavelength, stencil kept off 0
        let freq = 1.0 + t.abs() * (2.0 + p.a) * xi.abs().powf(1.0 + p.a);
        let h = (0.08 / freq).min((xi.abs() - XI_MIN) / 2.0);
        (closed, richardson_derivative(&g, xi, h, j))
    });
    let num: f64 = pairs.iter().map(|(c, d)| (c - d).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = pairs.iter().map(|(_, d)| d.norm_sqr()).sum::<f64>().sqrt();
    Ok(IdentityReport::new(&format!("F{j}"), den, num, u0.grid()))
}

/// [`verify_fj_expansion_on`] over |ξ| ∈ [0.1, 10].
pub fn verify_fj_expansion(u0: &Field, t: f64, p: DispersionParams, j: u32) -> Result<IdentityReport> {
    verify_fj_expansion_on(u0, t, p, j, 0.1, 10.0, 200, Execution::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss(n: usize, l: f64) -> Field {
        SpectralGrid::new(n, l).unwrap().sample(|x| (-x * x).exp())
    }

    fn p(a: f64) -> DispersionParams {
        DispersionParams::with_a(a).unwrap()
    }

    #[test]
    fn weight1_gaussian() {
        let f = gauss(1024, 60.0);
        let r = check_weight1_identity(&f, p(0.5)).unwrap();
        assert!(r.relative_residual < 1e-8, "{r:?}");
        let r = check_weight1_identity(&f, p(1.0)).unwrap();
        assert!(r.relative_residual < 1e-8, "{r:?}");
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let z = Field::zeros(SpectralGrid::new(256, 60.0).unwrap());
        for id in Identity::ALL {
            assert_eq!(id.check(&z, p(0.5)).unwrap().residual_norm, 0.0);
        }
    }

    #[test]
    fn weight1_noderivative_even_and_odd() {
        let g = SpectralGrid::new(1024, 60.0).unwrap();
        for f in [g.sample(|x| (-x * x).exp()), g.sample(|x| x * (-x * x).exp())] {
            let r = check_weight1_noderivative_identity(&f, p(0.5)).unwrap();
            assert!(r.relative_residual < 1e-8, "{r:?}");
        }
    }

    #[test]
    fn flipped_sign_is_detected() {
        // same check with +(1+a)D^aℋf must fail badly
        let f = gauss(512, 60.0);
        let w = Padded::new(&f).unwrap();
        let a = 0.5;
        let lhs = apply_multiplier(&w.f, &d_sym(1.5)).unwrap().times_x();
        let rhs = apply_multiplier(&w.f.times_x(), &d_sym(1.5))
            .unwrap()
            .add(&apply_multiplier(&w.f, &d_hilbert_sym(a)).unwrap().scale(1.5))
            .unwrap();
        assert!(w.report("flipped", &lhs, &rhs).unwrap().relative_residual > 0.1);
    }

    #[test]
    fn weight2_pair() {
        let g = SpectralGrid::new(1024, 60.0).unwrap();
        let f = g.sample(|x| -2.0 * x * (-x * x).exp());
        let (r1, r2) = check_weight2_identities(&f, p(0.5)).unwrap();
        assert!(r1.relative_residual < 1e-7, "{r1:?}");
        assert!(r2.unwrap().relative_residual < 1e-7);
        let mean = gauss(1024, 60.0);
        assert!(matches!(Identity::Weight2NoDerivative.check(&mean, p(0.5)), Err(Error::Precondition(_))));
    }

    #[test]
    fn support_violation_rejected() {
        let f = SpectralGrid::new(256, 10.0).unwrap().sample(|x| (-x * x / 20.0).exp());
        assert!(matches!(check_weight1_identity(&f, p(0.5)), Err(Error::Precondition(_))));
    }

    #[test]
    fn refinement_drops_fast() {
        let r = refinement_study(Identity::Weight1, |x| (-x * x).exp(), 60.0, &[128, 256, 512], p(0.5), Execution::default())
            .unwrap();
        assert!(converges_spectrally(&r, 10.0, 1e-10), "{r:?}");
        assert!(r[0].relative_residual > 1e-6);
    }

    #[test]
    fn gamma_commutes_with_flow() {
        let u0 = gauss(1024, 60.0);
        let r = check_gamma_commutation(&u0, 0.5, p(0.5)).unwrap();
        assert!(r.relative_residual < 1e-8, "{r:?}");
    }

    #[test]
    fn fj_t_zero_is_data_derivative() {
        let u0 = gauss(512, 20.0);
        let r = verify_fj_expansion_on(&u0, 0.0, p(0.5), 1, 0.1, 10.0, 50, Execution::default()).unwrap();
        assert!(r.relative_residual < 1e-10, "{r:?}");
    }

    #[test]
    fn fj_expansions_match_differences() {
        let u0 = gauss(512, 20.0);
        for j in 1..=4 {
            let r = verify_fj_expansion_on(&u0, 1.0, p(0.5), j, 0.1, 10.0, 60, Execution::default()).unwrap();
            let tol = if j == 4 { 1e-4 } else { 1e-5 };
            assert!(r.relative_residual < tol, "{r:?}");
        }
        assert!(SymbolDerivativeExpansion::new(5, 0.5).is_err());
    }

    #[test]
    fn fj_kdv_limit_is_tight() {
        // a = 1, u₀ = e^{-x²}: G = exp(P), P = -itξ³ - ξ²/4 + ln√π, so
        // G^{(j)} = Σ_m C(j-1, m) P^{(m+1)} G^{(j-1-m)} exactly.
        let (t, u0) = (0.7, gauss(512, 20.0));
        let i = Complex64::new(0.0, 1.0);
        for j in 1..=4u32 {
            let exp = SymbolDerivativeExpansion::new(j, 1.0).unwrap();
            let (mut num, mut den) = (0.0, 0.0);
            for m in 0..60 {
                let xi = if m % 2 == 0 { 0.1 + 0.05 * m as f64 } else { -0.1 - 0.05 * m as f64 };
                let dp = [
                    -3.0 * i * t * xi * xi - xi / 2.0,
                    -6.0 * i * t * xi - 0.5,
                    -6.0 * i * t + 0.0,
                    Complex64::new(0.0, 0.0),
                ];
                let mut g = vec![Complex64::from_polar(std::f64::consts::PI.sqrt() * (-xi * xi / 4.0).exp(), -t * xi.powi(3))];
                for k in 1..=j as usize {
                    let mut acc = Complex64::new(0.0, 0.0);
                    let mut binom = 1.0;
                    for mm in 0..k {
                        acc += binom * dp[mm] * g[k - 1 - mm];
                        binom = binom * (k - 1 - mm) as f64 / (mm + 1) as f64;
                    }
                    g.push(acc);
                }
                let closed = exp.eval(t, xi, &transform_derivatives(&u0, xi, j));
                num += (closed - g[j as usize]).norm_sqr();
                den += g[j as usize].norm_sqr();
            }
            assert!((num / den).sqrt() < 1e-10, "j={j}: {}", (num / den).sqrt());
        }
    }
}
