//! Periodic grid on [-L, L), spectral transforms and Fourier multipliers.
//!
//! Spectra are stored in FFT order (index `i` carries mode `m = i` for
//! `i < n/2`, `m = i - n` otherwise) and are normalized to approximate the
//! continuum transform `f^(k) = ∫ e^{-ikx} f(x) dx`, i.e.
//! `spectrum[m] = h Σ_j e^{-i k_m x_j} f(x_j)`.

use std::cell::RefCell;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn fft_plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    n: usize,
    half_length: f64,
}

impl SpectralGrid {
    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("n = {n} must be even and at least 8")));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!("half-length {half_length} must be positive")));
        }
        Ok(Self { n, half_length })
    }

    /// Grid with spacing `h` on [-L, L); `2L/h` must round to an even integer.
    pub fn with_spacing(half_length: f64, h: f64) -> Result<Self> {
        let n = (2.0 * half_length / h).round() as usize;
        Self::new(n, half_length)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + self.spacing() * j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Signed mode number of FFT slot `i`.
    pub fn mode(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        std::f64::consts::PI * self.mode(i) as f64 / self.half_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    /// FFT slot of the unpaired mode `m = -n/2`.
    pub fn nyquist_index(&self) -> usize {
        self.n / 2
    }

    pub fn max_wavenumber(&self) -> f64 {
        std::f64::consts::PI * (self.n / 2) as f64 / self.half_length
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_values_unchecked(*self, self.nodes().into_iter().map(f).collect())
    }

    /// Nodes with |x| ≤ frac·L.
    pub fn interior_mask(&self, frac: f64) -> Vec<bool> {
        let r = frac * self.half_length;
        self.nodes().into_iter().map(|x| x.abs() <= r).collect()
    }

    /// Same spacing, `factor` times longer box.
    pub fn padded(&self, factor: usize) -> Result<Self> {
        Self::new(self.n * factor, self.half_length * factor as f64)
    }
}

impl fmt::Display for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} L={} h={:.4e}", self.n, self.half_length, self.spacing())
    }
}

/// Real samples on a grid with a lazily computed, cached spectrum.
#[derive(Clone)]
pub struct Field {
    grid: SpectralGrid,
    values: Arc<Vec<f64>>,
    spectrum: OnceLock<Arc<Vec<Complex64>>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("grid", &self.grid)
            .field("l2", &self.l2_norm())
            .finish()
    }
}

impl Field {
    pub fn new(grid: SpectralGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidParameter(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.n
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("value at node {j}")));
        }
        Ok(Self::from_values_unchecked(grid, values))
    }

    pub(crate) fn from_values_unchecked(grid: SpectralGrid, values: Vec<f64>) -> Self {
        Self { grid, values: Arc::new(values), spectrum: OnceLock::new() }
    }

    pub fn zeros(grid: SpectralGrid) -> Self {
        Self::from_values_unchecked(grid, vec![0.0; grid.n])
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        Arc::try_unwrap(self.values).unwrap_or_else(|v| (*v).clone())
    }

    /// Continuum-normalized spectrum in FFT order.
    pub fn spectrum(&self) -> &[Complex64] {
        self.spectrum.get_or_init(|| Arc::new(forward_raw(&self.grid, &self.values)))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Self::from_values_unchecked(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise `f(x_j, u_j)`.
    pub fn map_with_x(&self, f: impl Fn(f64, f64) -> f64) -> Field {
        let g = self.grid;
        Self::from_values_unchecked(
            g,
            self.values.iter().enumerate().map(|(j, &v)| f(g.node(j), v)).collect(),
        )
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(Self::from_values_unchecked(
            self.grid,
            self.values.iter().zip(other.values.iter()).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    /// Multiplication by x.
    pub fn times_x(&self) -> Field {
        self.map_with_x(|x, v| x * v)
    }

    /// h·Σ f_j.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.values.iter().sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// L² norm over the nodes where `mask` holds.
    pub fn masked_l2_norm(&self, mask: &[bool]) -> f64 {
        let s: f64 =
            self.values.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| v * v).sum();
        (self.grid.spacing() * s).sqrt()
    }

    /// Embeds the field in a box `factor` times longer with the same spacing,
    /// zero outside the original box.
    pub fn zero_padded(&self, factor: usize) -> Result<Field> {
        let big = self.grid.padded(factor)?;
        let offset = (factor - 1) * self.grid.n / 2;
        let mut v = vec![0.0; big.n];
        v[offset..offset + self.grid.n].copy_from_slice(&self.values);
        Ok(Self::from_values_unchecked(big, v))
    }

    /// Inverse of [`Field::zero_padded`]: the central block of nodes matching `grid`.
    pub fn restrict_to(&self, grid: &SpectralGrid) -> Result<Field> {
        let (n, big) = (grid.n, self.grid.n);
        let same_h = (grid.spacing() - self.grid.spacing()).abs() <= 1e-12 * grid.spacing();
        if n > big || (big - n) % 2 != 0 || !same_h {
            return Err(Error::GridMismatch);
        }
        let offset = (big - n) / 2;
        Ok(Self::from_values_unchecked(*grid, self.values[offset..offset + n].to_vec()))
    }

    /// Reflection f(x) -> f(-x) on nodes (x_0 = -L maps to itself).
    pub fn reflected(&self) -> Field {
        let n = self.grid.n;
        let v = (0..n).map(|j| self.values[(n - j) % n]).collect();
        Self::from_values_unchecked(self.grid, v)
    }

    /// Largest |spectrum| over the top third of modes relative to the peak.
    pub fn high_mode_fraction(&self) -> f64 {
        let s = self.spectrum();
        let peak = s.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        if peak == 0.0 {
            return 0.0;
        }
        let cut = self.grid.n as i64 / 3;
        let top = (0..self.grid.n)
            .filter(|&i| self.grid.mode(i).abs() > cut)
            .fold(0.0f64, |m, i| m.max(s[i].norm()));
        top / peak
    }
}

/// A pair of real fields standing for `re + i·im`.
#[derive(Debug, Clone)]
pub struct ComplexField {
    pub re: Field,
    pub im: Field,
}

/// Spectrum detached from its field (see module docs for ordering).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: SpectralGrid,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn coefficient(&self, m: i64) -> Complex64 {
        let n = self.grid.n as i64;
        self.coeffs[m.rem_euclid(n) as usize]
    }
}

fn forward_raw(grid: &SpectralGrid, values: &[f64]) -> Vec<Complex64> {
    let n = grid.n;
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_plan(n, false).process(&mut buf);
    // e^{-i k_m x_j} = (-1)^m e^{-2πi mj/n} because x_0 = -L.
    let h = grid.spacing();
    for (i, c) in buf.iter_mut().enumerate() {
        *c *= if i % 2 == 0 { h } else { -h };
    }
    buf
}

fn inverse_raw(grid: &SpectralGrid, coeffs: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n;
    let scale = 1.0 / (2.0 * grid.half_length);
    let mut buf: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| c * if i % 2 == 0 { scale } else { -scale })
        .collect();
    fft_plan(n, true).process(&mut buf);
    buf
}

pub fn forward_transform(f: &Field) -> Spectrum {
    Spectrum { grid: f.grid, coeffs: f.spectrum().to_vec() }
}

/// Real part of the inverse transform. Use [`inverse_transform_complex`] for
/// spectra without Hermitian symmetry.
pub fn inverse_transform(s: &Spectrum) -> Result<Field> {
    if s.coeffs.len() != s.grid.n {
        return Err(Error::InvalidParameter("spectrum length does not match grid".into()));
    }
    if s.coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite("spectrum coefficient".into()));
    }
    let buf = inverse_raw(&s.grid, &s.coeffs);
    Ok(Field::from_values_unchecked(s.grid, buf.iter().map(|c| c.re).collect()))
}

pub fn inverse_transform_complex(s: &Spectrum) -> Result<ComplexField> {
    if s.coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
        return Err(Error::NonFinite("spectrum coefficient".into()));
    }
    let buf = inverse_raw(&s.grid, &s.coeffs);
    Ok(ComplexField {
        re: Field::from_values_unchecked(s.grid, buf.iter().map(|c| c.re).collect()),
        im: Field::from_values_unchecked(s.grid, buf.iter().map(|c| c.im).collect()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    /// m(-k) = m(k) ∈ ℝ
    EvenReal,
    /// m(-k) = conj(m(k)) = -m(k)
    OddImaginary,
    /// m(-k) = conj(m(k)); real-preserving but neither of the above (e.g. W_a(t))
    Hermitian,
    General,
}

impl Parity {
    pub fn preserves_real(self) -> bool {
        !matches!(self, Parity::General)
    }
}

type SymbolFn = dyn Fn(f64) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub struct MultiplierSymbol {
    eval: Arc<SymbolFn>,
    parity: Parity,
    label: String,
}

impl fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiplierSymbol({}, {:?})", self.label, self.parity)
    }
}

impl MultiplierSymbol {
    pub fn new(
        label: impl Into<String>,
        parity: Parity,
        eval: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { eval: Arc::new(eval), parity, label: label.into() }
    }

    pub fn real(
        label: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(label, Parity::EvenReal, move |k| Complex64::new(eval(k), 0.0))
    }

    pub fn eval(&self, k: f64) -> Complex64 {
        (self.eval)(k)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// m₂ ∘ m₁, parity inferred conservatively.
    pub fn then(&self, other: &MultiplierSymbol) -> MultiplierSymbol {
        use Parity::*;
        let parity = match (self.parity, other.parity) {
            (General, _) | (_, General) => General,
            (EvenReal, EvenReal) | (OddImaginary, OddImaginary) => EvenReal,
            (EvenReal, OddImaginary) | (OddImaginary, EvenReal) => OddImaginary,
            _ => Hermitian,
        };
        let (a, b) = (self.eval.clone(), other.eval.clone());
        MultiplierSymbol {
            eval: Arc::new(move |k| a(k) * b(k)),
            parity,
            label: format!("{}*{}", other.label, self.label),
        }
    }

    /// Checks the declared parity on the grid's paired wavenumbers.
    pub fn parity_consistent(&self, grid: &SpectralGrid, tol: f64) -> bool {
        (1..grid.n / 2).all(|m| {
            let k = grid.wavenumber(m);
            let (p, q) = (self.eval(k), self.eval(-k));
            let scale = tol * (1.0 + p.norm());
            match self.parity {
                Parity::EvenReal => (p - q).norm() <= scale && p.im.abs() <= scale,
                Parity::OddImaginary => (p + q).norm() <= scale && p.re.abs() <= scale,
                Parity::Hermitian => (p - q.conj()).norm() <= scale,
                Parity::General => true,
            }
        })
    }

    fn table(&self, grid: &SpectralGrid) -> Result<Vec<Complex64>> {
        let mut t = Vec::with_capacity(grid.n);
        for i in 0..grid.n {
            let v = self.eval(grid.wavenumber(i));
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "symbol {} is not finite at k = {}",
                    self.label,
                    grid.wavenumber(i)
                )));
            }
            t.push(v);
        }
        let ny = grid.nyquist_index();
        match self.parity {
            Parity::OddImaginary => t[ny] = Complex64::new(0.0, 0.0),
            Parity::Hermitian => t[ny] = Complex64::new(t[ny].re, 0.0),
            _ => {}
        }
        Ok(t)
    }
}

/// Applies a real-preserving multiplier.
pub fn apply_multiplier(f: &Field, m: &MultiplierSymbol) -> Result<Field> {
    if !m.parity.preserves_real() {
        return Err(Error::InvalidParameter(format!(
            "symbol {} is general; use apply_multiplier_complex",
            m.label
        )));
    }
    let table = m.table(&f.grid)?;
    let coeffs: Vec<Complex64> = f.spectrum().iter().zip(&table).map(|(c, s)| c * s).collect();
    let buf = inverse_raw(&f.grid, &coeffs);
    let out = Field::from_values_unchecked(f.grid, buf.iter().map(|c| c.re).collect());
    let _ = out.spectrum.set(Arc::new(coeffs));
    Ok(out)
}

pub fn apply_multiplier_complex(f: &Field, m: &MultiplierSymbol) -> Result<ComplexField> {
    let table = m.table(&f.grid)?;
    let coeffs: Vec<Complex64> = f.spectrum().iter().zip(&table).map(|(c, s)| c * s).collect();
    inverse_transform_complex(&Spectrum { grid: f.grid, coeffs })
}

/// ∂ₓ^order via the (ik)^order multiplier.
pub fn derivative(f: &Field, order: u32) -> Result<Field> {
    if order == 0 {
        return Ok(f.clone());
    }
    let parity = if order % 2 == 1 { Parity::OddImaginary } else { Parity::EvenReal };
    let sym = MultiplierSymbol::new(format!("d^{order}"), parity, move |k| {
        Complex64::new(0.0, k).powu(order)
    });
    apply_multiplier(f, &sym)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn max_err(a: &Field, b: impl Fn(f64) -> f64) -> f64 {
        a.grid()
            .nodes()
            .iter()
            .zip(a.values())
            .fold(0.0, |m, (&x, &v)| m.max((v - b(x)).abs()))
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SpectralGrid::new(7, 1.0).is_err());
        assert!(SpectralGrid::new(6, 1.0).is_err());
        assert!(SpectralGrid::new(8, 0.0).is_err());
        assert!(SpectralGrid::new(8, 1.0).is_ok());
    }

    #[test]
    fn cosine_spectrum_has_two_lines() {
        let g = SpectralGrid::new(64, PI).unwrap();
        let s = forward_transform(&g.sample(|x| (4.0 * x).cos()));
        for m in -32..32i64 {
            let c = s.coefficient(m);
            let want = if m.abs() == 4 { PI } else { 0.0 };
            assert!((c - Complex64::new(want, 0.0)).norm() < 1e-12, "m={m} c={c}");
        }
    }

    #[test]
    fn zero_field_has_zero_spectrum() {
        let g = SpectralGrid::new(32, 3.0).unwrap();
        assert!(Field::zeros(g).spectrum().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn gaussian_spectrum_matches_closed_form() {
        let g = SpectralGrid::new(512, 20.0).unwrap();
        let f = g.sample(|x| (-x * x).exp());
        for (i, c) in f.spectrum().iter().enumerate() {
            let k = g.wavenumber(i);
            if k.abs() <= 5.0 {
                let want = PI.sqrt() * (-k * k / 4.0).exp();
                assert!((c - want).norm() < 1e-12 * want, "k={k}");
            }
        }
    }

    #[test]
    fn round_trip_and_non_finite_rejection() {
        let g = SpectralGrid::new(128, 10.0).unwrap();
        let f = g.sample(|x| (-(x - 1.0).powi(2)).exp() * (3.0 * x).sin());
        let back = inverse_transform(&forward_transform(&f)).unwrap();
        let err = f.sub(&back).unwrap().sup_norm();
        assert!(err < 10.0 * f64::EPSILON * f.l2_norm().max(1.0));
        let mut v = vec![0.0; 128];
        v[3] = f64::NAN;
        assert!(Field::new(g, v).is_err());
    }

    #[test]
    fn multiplier_examples() {
        let g = SpectralGrid::new(64, PI).unwrap();
        let f = g.sample(|x| (4.0 * x).cos());
        let half = MultiplierSymbol::real("|k|^0.5", |k| k.abs().sqrt());
        let out = apply_multiplier(&f, &half).unwrap();
        assert!(max_err(&out, |x| 2.0 * (4.0 * x).cos()) < 1e-12);

        let hilbert = MultiplierSymbol::new("H", Parity::OddImaginary, |k| {
            Complex64::new(0.0, -k.signum() * (k != 0.0) as i32 as f64)
        });
        let out = apply_multiplier(&g.sample(f64::cos), &hilbert).unwrap();
        assert!(max_err(&out, f64::sin) < 1e-12);
    }

    #[test]
    fn general_symbols_need_complex_path() {
        let g = SpectralGrid::new(32, PI).unwrap();
        let shift = MultiplierSymbol::new("e^{ik}", Parity::General, |k| Complex64::new(0.0, k).exp());
        let f = g.sample(f64::cos);
        assert!(apply_multiplier(&f, &shift).is_err());
        let c = apply_multiplier_complex(&f, &shift).unwrap();
        // e^{ik} is translation by -1: cos(x + 1)
        assert!(max_err(&c.re, |x| (x + 1.0).cos()) < 1e-12);
        assert!(c.im.sup_norm() < 1e-12);
    }

    #[test]
    fn singular_symbol_rejected() {
        let g = SpectralGrid::new(32, PI).unwrap();
        let bad = MultiplierSymbol::real("|k|^-0.5", |k| k.abs().powf(-0.5));
        assert!(apply_multiplier(&g.sample(f64::cos), &bad).is_err());
    }

    #[test]
    fn derivatives() {
        let g = SpectralGrid::new(64, PI).unwrap();
        let d = derivative(&g.sample(f64::sin), 1).unwrap();
        assert!(max_err(&d, f64::cos) < 1e-12);
        let d2 = derivative(&g.sample(|x| (3.0 * x).cos()), 2).unwrap();
        assert!(max_err(&d2, |x| -9.0 * (3.0 * x).cos()) < 1e-11);

        let g = SpectralGrid::new(512, 20.0).unwrap();
        let d = derivative(&g.sample(|x| (-x * x).exp()), 1).unwrap();
        assert!(max_err(&d, |x| -2.0 * x * (-x * x).exp()) < 1e-10);
    }

    #[test]
    fn parseval() {
        let g = SpectralGrid::new(256, 12.0).unwrap();
        let f = g.sample(|x| (-(x * x) / 3.0).exp() * (1.0 + x.sin()));
        let lhs = f.l2_norm().powi(2);
        let rhs: f64 = f.spectrum().iter().map(|c| c.norm_sqr()).sum::<f64>() / (2.0 * 12.0);
        assert!((lhs - rhs).abs() < 1e-12 * lhs);
    }

    #[test]
    fn padding_round_trip() {
        let g = SpectralGrid::new(64, 8.0).unwrap();
        let f = g.sample(|x| (-x * x).exp());
        let p = f.zero_padded(4).unwrap();
        assert_eq!(p.grid().n(), 256);
        assert!((p.grid().spacing() - g.spacing()).abs() < 1e-15);
        assert!((p.l2_norm() - f.l2_norm()).abs() < 1e-15);
        let back = p.restrict_to(&g).unwrap();
        assert_eq!(back.values(), f.values());
    }

    #[test]
    fn reflection_fixes_even_functions() {
        let g = SpectralGrid::new(64, 8.0).unwrap();
        let f = g.sample(|x| (-x * x).exp());
        assert!(f.sub(&f.reflected()).unwrap().sup_norm() < 1e-15);
        let o = g.sample(|x| x * (-x * x).exp());
        assert!(o.add(&o.reflected()).unwrap().sup_norm() < 1e-15);
    }
}
