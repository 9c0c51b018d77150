//! Pseudospectral time stepping for
//!
//! ```text
//! ∂ₜu + σ·D^{1+a}∂ₓu + u^k∂ₓu = 0,   σ = +1 (Dgbo form) or -1 (Reflected form)
//! ```
//!
//! with the nonlinearity in conservative form ∂ₓ(u^{k+1}/(k+1)), 2/3-rule
//! dealiasing and an exponential integrator. The reflected form is what
//! v(x,t) = -u(x,-t) satisfies; its solitary waves move right.
//!
//! The first moment M = ∫xu of a periodic solution is corrected for the
//! flux through the seam x = ±L: with F = σD^{1+a}u + u^{k+1}/(k+1),
//! d/dt h·Σx_j u_j = ∫F - 2L·F(-L), so adding ∫2L·F(-L)dt restores the
//! continuum law dM/dt = ∫u^{k+1}/(k+1) even after tails reach the seam.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::Fft;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{fft_plan, Field, SpectralGrid};
use crate::ops::DispersionParams;
use crate::tolerances::{ESCAPE_FRACTION, INTERIOR_FRACTION, RESOLUTION_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    #[default]
    Dgbo,
    Reflected,
}

impl Form {
    pub fn sign(self) -> f64 {
        match self {
            Form::Dgbo => 1.0,
            Form::Reflected => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    #[default]
    Etdrk4,
    IfRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dealias {
    #[default]
    TwoThirds,
    None,
}

fn default_stride() -> usize {
    1
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub params: DispersionParams,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub dealias: Dealias,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default)]
    pub integrator: Integrator,
    #[serde(default)]
    pub form: Form,
    /// false drops u^k∂ₓu (linear flow).
    #[serde(default = "default_true")]
    pub nonlinear: bool,
}

impl EvolutionConfig {
    pub fn new(params: DispersionParams, dt: f64, t_end: f64) -> Self {
        Self {
            params,
            dt,
            t_end,
            dealias: Dealias::TwoThirds,
            snapshot_stride: 1,
            integrator: Integrator::Etdrk4,
            form: Form::Dgbo,
            nonlinear: true,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.snapshot_stride = stride;
        self
    }

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }

    pub fn linear(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn with_integrator(mut self, integrator: Integrator) -> Self {
        self.integrator = integrator;
        self
    }

    /// Number of steps; t_end must be a whole number of steps.
    pub fn steps(&self) -> Result<usize> {
        self.params.validate()?;
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return Err(Error::InvalidParameter(format!("dt = {} must lie in (0, 0.1]", self.dt)));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidParameter(format!("t_end = {} must be ≥ 0", self.t_end)));
        }
        let s = (self.t_end / self.dt).round();
        if (s * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(self.dt) {
            return Err(Error::InvalidParameter(format!(
                "t_end = {} is not a multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("snapshot stride must be ≥ 1".into()));
        }
        Ok(s as usize)
    }
}

/// Conserved quantities and momentum bookkeeping at each snapshot.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConservedLedger {
    pub times: Vec<f64>,
    /// ∫u
    pub i1: Vec<f64>,
    /// ∫u²
    pub i2: Vec<f64>,
    /// ∫(σ/2·|D^{(1+a)/2}u|² + u^{k+2}/((k+1)(k+2)))
    pub i3: Vec<f64>,
    /// Seam-corrected first moment.
    pub m: Vec<f64>,
    /// h·Σx_j u_j with the seam node weighted 0.
    pub m_box: Vec<f64>,
    /// ∫₀ᵗ∫u^{k+1}/(k+1), trapezoid over every step.
    pub source: Vec<f64>,
    /// ∫_{|x|>0.8L}u² / ∫u².
    pub escape: Vec<f64>,
}

impl ConservedLedger {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, q: Quantities, flux_integral: f64, source: f64) {
        self.times.push(t);
        self.i1.push(q.i1);
        self.i2.push(q.i2);
        self.i3.push(q.i3);
        self.m_box.push(q.m_box);
        self.m.push(q.m_box + flux_integral);
        self.source.push(source);
        self.escape.push(q.escape);
    }

    /// max |I(t) - I(0)| for I1, and relative drifts for I2 and I3.
    pub fn drifts(&self) -> (f64, f64, f64) {
        let abs = |v: &[f64]| v.iter().map(|x| (x - v[0]).abs()).fold(0.0, f64::max);
        let rel = |v: &[f64]| abs(v) / v[0].abs().max(1e-300);
        (abs(&self.i1), rel(&self.i2), rel(&self.i3))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub t: f64,
    #[serde(skip)]
    pub field: Field,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    pub ledger: ConservedLedger,
    pub config: EvolutionConfig,
}

impl Trajectory {
    pub fn last(&self) -> &Field {
        &self.snapshots.last().expect("trajectory has the initial snapshot").field
    }

    pub fn grid(&self) -> &SpectralGrid {
        self.snapshots[0].field.grid()
    }
}

#[derive(Debug, Clone, Copy)]
struct Quantities {
    i1: f64,
    i2: f64,
    i3: f64,
    m_box: f64,
    escape: f64,
}

/// Raw (unnormalized FFT) spectral stepper. Mode arrays are in FFT order.
struct Stepper {
    n: usize,
    h: f64,
    half_length: f64,
    k_power: u32,
    sign: f64,
    nonlinear: bool,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// -ik/(k+1) with the dealiasing mask folded in
    g: Vec<Complex64>,
    /// |k|^{1+a}, for the seam flux
    dsym: Vec<f64>,
    /// |k|^{(1+a)/2}, for I3
    half_sym: Vec<f64>,
    e: Vec<Complex64>,
    e2: Vec<Complex64>,
    // ETDRK4 coefficients (or dt·E2 slots for IF-RK4)
    q: Vec<Complex64>,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    f3: Vec<Complex64>,
    integrator: Integrator,
    dt: f64,
    nodes: Vec<f64>,
    interior: Vec<bool>,
    buf: Vec<Complex64>,
}

/// Contour points for the ETDRK4 φ-functions.
const CONTOUR_POINTS: usize = 32;

impl Stepper {
    fn new(grid: &SpectralGrid, cfg: &EvolutionConfig) -> Result<Self> {
        let n = grid.n();
        let a = cfg.params.a;
        let kp = cfg.params.k_power;
        let sign = cfg.form.sign();
        let dt = cfg.dt;
        let ny = grid.nyquist_index();
        let mut lin = Vec::with_capacity(n);
        let mut g = Vec::with_capacity(n);
        let mut dsym = Vec::with_capacity(n);
        let mut half_sym = Vec::with_capacity(n);
        for i in 0..n {
            let k = grid.wavenumber(i);
            let m = grid.mode(i).unsigned_abs() as usize;
            let keep = match cfg.dealias {
                Dealias::TwoThirds => 3 * m < n,
                Dealias::None => true,
            };
            // the unpaired Nyquist mode gets no odd symbol
            let kk = if i == ny { 0.0 } else { k };
            lin.push(Complex64::new(0.0, -sign * kk.abs().powf(1.0 + a) * kk));
            g.push(if keep && cfg.nonlinear {
                Complex64::new(0.0, -kk / (kp as f64 + 1.0))
            } else {
                Complex64::new(0.0, 0.0)
            });
            dsym.push(k.abs().powf(1.0 + a));
            half_sym.push(k.abs().powf(0.5 * (1.0 + a)));
        }
        if lin.iter().any(|l| !(l.im * dt).is_finite()) {
            return Err(Error::InvalidParameter("dt·max|k|^{2+a} overflows".into()));
        }
        let e: Vec<Complex64> = lin.iter().map(|l| (l * dt).exp()).collect();
        let e2: Vec<Complex64> = lin.iter().map(|l| (l * dt * 0.5).exp()).collect();
        let (mut q, mut f1, mut f2, mut f3) = (vec![], vec![], vec![], vec![]);
        match cfg.integrator {
            Integrator::Etdrk4 => {
                let roots: Vec<Complex64> = (1..=CONTOUR_POINTS)
                    .map(|j| Complex64::from_polar(1.0, PI * (j as f64 - 0.5) / CONTOUR_POINTS as f64))
                    .collect();
                for l in &lin {
                    let zero = Complex64::new(0.0, 0.0);
                    let (mut sq, mut s1, mut s2, mut s3) = (zero, zero, zero, zero);
                    for r in &roots {
                        let z: Complex64 = l * dt + r;
                        let ez = z.exp();
                        let z3 = z * z * z;
                        sq += ((z * 0.5).exp() - 1.0) / z;
                        s1 += (-4.0 - z + ez * (4.0 - 3.0 * z + z * z)) / z3;
                        s2 += (2.0 + z + ez * (z - 2.0)) / z3;
                        s3 += (-4.0 - 3.0 * z - z * z + ez * (4.0 - z)) / z3;
                    }
                    // the linear symbol is imaginary, so the contour has no
                    // conjugate symmetry to exploit: full-circle complex mean
                    let m = CONTOUR_POINTS as f64;
                    q.push(sq * dt / m);
                    f1.push(s1 * dt / m);
                    f2.push(s2 * dt / m);
                    f3.push(s3 * dt / m);
                }
            }
            Integrator::IfRk4 => {}
        }
        Ok(Self {
            n,
            h: grid.spacing(),
            half_length: grid.half_length(),
            k_power: kp,
            sign,
            nonlinear: cfg.nonlinear,
            fwd: fft_plan(n, false),
            inv: fft_plan(n, true),
            g,
            dsym,
            half_sym,
            e,
            e2,
            q,
            f1,
            f2,
            f3,
            integrator: cfg.integrator,
            dt,
            nodes: grid.nodes(),
            interior: grid.interior_mask(INTERIOR_FRACTION),
            buf: vec![Complex64::new(0.0, 0.0); n],
        })
    }

    fn to_physical(&mut self, v: &[Complex64]) -> Vec<f64> {
        self.buf.copy_from_slice(v);
        self.inv.process(&mut self.buf);
        let s = 1.0 / self.n as f64;
        self.buf.iter().map(|c| c.re * s).collect()
    }

    fn to_spectral(&mut self, u: &[f64]) -> Vec<Complex64> {
        let mut b: Vec<Complex64> = u.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut b);
        b
    }

    /// -ik/(k+1)·(u^{k+1})^ with dealiasing.
    fn nonlinear_term(&mut self, v: &[Complex64]) -> Vec<Complex64> {
        if !self.nonlinear {
            return vec![Complex64::new(0.0, 0.0); self.n];
        }
        let kp = self.k_power as i32 + 1;
        let u = self.to_physical(v);
        let p: Vec<f64> = u.iter().map(|x| x.powi(kp)).collect();
        let mut s = self.to_spectral(&p);
        for (c, g) in s.iter_mut().zip(&self.g) {
            *c *= g;
        }
        s
    }

    fn step(&mut self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let nv = self.nonlinear_term(v);
        match self.integrator {
            Integrator::Etdrk4 => {
                let a: Vec<Complex64> = (0..n).map(|i| self.e2[i] * v[i] + self.q[i] * nv[i]).collect();
                let na = self.nonlinear_term(&a);
                let b: Vec<Complex64> = (0..n).map(|i| self.e2[i] * v[i] + self.q[i] * na[i]).collect();
                let nb = self.nonlinear_term(&b);
                let c: Vec<Complex64> =
                    (0..n).map(|i| self.e2[i] * a[i] + self.q[i] * (2.0 * nb[i] - nv[i])).collect();
                let nc = self.nonlinear_term(&c);
                (0..n)
                    .map(|i| {
                        self.e[i] * v[i]
                            + nv[i] * self.f1[i]
                            + 2.0 * (na[i] + nb[i]) * self.f2[i]
                            + nc[i] * self.f3[i]
                    })
                    .collect()
            }
            Integrator::IfRk4 => {
                let dt = self.dt;
                let a: Vec<Complex64> = (0..n).map(|i| self.e2[i] * (v[i] + 0.5 * dt * nv[i])).collect();
                let k2 = self.nonlinear_term(&a);
                let b: Vec<Complex64> = (0..n).map(|i| self.e2[i] * v[i] + 0.5 * dt * k2[i]).collect();
                let k3 = self.nonlinear_term(&b);
                let c: Vec<Complex64> = (0..n).map(|i| self.e[i] * v[i] + dt * self.e2[i] * k3[i]).collect();
                let k4 = self.nonlinear_term(&c);
                (0..n)
                    .map(|i| {
                        self.e[i] * v[i]
                            + dt / 6.0
                                * (self.e[i] * nv[i] + 2.0 * self.e2[i] * (k2[i] + k3[i]) + k4[i])
                    })
                    .collect()
            }
        }
    }

    /// 2L·F(-L); the seam is node 0, where the inverse FFT is a plain sum.
    fn seam_flux(&self, v: &[Complex64], u0: f64) -> f64 {
        let d: f64 = v.iter().zip(&self.dsym).map(|(c, s)| c.re * s).sum::<f64>() / self.n as f64;
        2.0 * self.half_length * (self.sign * d + u0.powi(self.k_power as i32 + 1) / (self.k_power as f64 + 1.0))
    }

    fn source(&self, u: &[f64]) -> f64 {
        let kp = self.k_power as i32 + 1;
        self.h * u.iter().map(|x| x.powi(kp)).sum::<f64>() / (kp as f64)
    }

    fn quantities(&mut self, v: &[Complex64], u: &[f64]) -> Quantities {
        let h = self.h;
        let kp = self.k_power as f64;
        let scaled: Vec<Complex64> = v.iter().zip(&self.half_sym).map(|(c, s)| c * s).collect();
        let dh = self.to_physical(&scaled);
        let i1 = h * u.iter().sum::<f64>();
        let i2 = h * u.iter().map(|x| x * x).sum::<f64>();
        let i3 = h
            * u.iter()
                .zip(&dh)
                .map(|(x, d)| 0.5 * self.sign * d * d + x.powi(self.k_power as i32 + 2) / ((kp + 1.0) * (kp + 2.0)))
                .sum::<f64>();
        // seam node sits on the jump of the sawtooth x: weight it by the mean, 0
        let m_box = h * self.nodes.iter().zip(u).skip(1).map(|(x, v)| x * v).sum::<f64>();
        let outside: f64 =
            h * u.iter().zip(&self.interior).filter(|(_, &m)| !m).map(|(x, _)| x * x).sum::<f64>();
        Quantities { i1, i2, i3, m_box, escape: outside / i2.max(1e-300) }
    }
}

/// Advances `u0` to `cfg.t_end`, recording a snapshot and ledger entry
/// every `snapshot_stride` steps and at the final time.
pub fn evolve(u0: &Field, cfg: &EvolutionConfig) -> Result<Trajectory> {
    let steps = cfg.steps()?;
    let frac = u0.high_mode_fraction();
    if frac > RESOLUTION_FRACTION {
        return Err(Error::Unresolved(format!(
            "top-third modes at {frac:e} of the peak (limit {RESOLUTION_FRACTION:e})"
        )));
    }
    let grid = *u0.grid();
    let mut st = Stepper::new(&grid, cfg)?;
    let mut v = st.to_spectral(u0.values());
    let mut traj = Trajectory { snapshots: vec![], ledger: ConservedLedger::default(), config: *cfg };

    let mut u = u0.values().to_vec();
    let mut flux_prev = st.seam_flux(&v, u[0]);
    let mut src_prev = st.source(&u);
    let (mut flux_int, mut src_int) = (0.0, 0.0);
    let q = st.quantities(&v, &u);
    traj.ledger.push(0.0, q, 0.0, 0.0);
    traj.snapshots.push(Snapshot { t: 0.0, field: u0.clone() });

    for s in 1..=steps {
        let t = s as f64 * cfg.dt;
        v = st.step(&v);
        u = st.to_physical(&v);
        if u.iter().any(|x| !x.is_finite()) {
            return Err(Error::Diverged { t, last_good: Box::new(traj) });
        }
        let flux = st.seam_flux(&v, u[0]);
        let src = st.source(&u);
        flux_int += 0.5 * cfg.dt * (flux + flux_prev);
        src_int += 0.5 * cfg.dt * (src + src_prev);
        flux_prev = flux;
        src_prev = src;
        if s % cfg.snapshot_stride == 0 || s == steps {
            let q = st.quantities(&v, &u);
            traj.ledger.push(t, q, flux_int, src_int);
            traj.snapshots.push(Snapshot { t, field: Field::new(grid, u.clone())? });
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumReport {
    /// max |M(t) - M(0) - predicted(t)| over the valid snapshots
    pub max_residual: f64,
    pub residuals: Vec<f64>,
    /// First snapshot time whose escape fraction exceeds the threshold;
    /// residuals after it are excluded.
    pub escaped_at: Option<f64>,
}

/// Momentum law: M(t) - M(0) = t/2·‖u₀‖² for k = 1 and
/// (1/(k+1))∫₀ᵗ∫u^{k+1} for k ≥ 2.
pub fn momentum_law_residual(traj: &Trajectory) -> MomentumReport {
    let l = &traj.ledger;
    let k = traj.config.params.k_power;
    let escaped_at = l.times.iter().zip(&l.escape).find(|(_, &e)| e > ESCAPE_FRACTION).map(|(t, _)| *t);
    let residuals: Vec<f64> = (0..l.len())
        .map(|i| {
            let predicted = if k == 1 { 0.5 * l.times[i] * l.i2[0] } else { l.source[i] };
            (l.m[i] - l.m[0] - predicted).abs()
        })
        .collect();
    let max_residual = l
        .times
        .iter()
        .zip(&residuals)
        .filter(|(t, _)| escaped_at.map_or(true, |e| **t < e))
        .map(|(_, r)| *r)
        .fold(0.0, f64::max);
    MomentumReport { max_residual, residuals, escaped_at }
}

/// Composite Simpson weights for m+1 equally spaced samples; an odd number
/// of intervals closes with the 3/8 rule.
fn simpson_weights(m: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    let (simpson_end, tail) = if m % 2 == 0 { (m, false) } else { (m - 3, true) };
    for i in (0..simpson_end).step_by(2) {
        w[i] += dt / 3.0;
        w[i + 1] += 4.0 * dt / 3.0;
        w[i + 2] += dt / 3.0;
    }
    if tail {
        let s = simpson_end;
        for (j, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
            w[s + j] += 3.0 * dt / 8.0 * c;
        }
    }
    w
}

/// Rebuilds û(t) from û(t) = W(t)û₀ - ∫₀ᵗ W(t-s)·(ik/(k+1))(u^{k+1})^(s) ds
/// by Simpson over the snapshots and returns the relative L² mismatch with
/// the evolved spectrum.
pub fn duhamel_residual(traj: &Trajectory, t: f64) -> Result<f64> {
    let idx = traj
        .snapshots
        .iter()
        .position(|s| (s.t - t).abs() <= 1e-9 * t.abs().max(1.0))
        .ok_or_else(|| Error::InvalidParameter(format!("no snapshot at t = {t}")))?;
    if idx == 0 {
        return Ok(0.0);
    }
    if idx < 20 {
        return Err(Error::Precondition(format!("Duhamel quadrature needs ≥ 20 snapshots in [0, t], have {}", idx + 1)));
    }
    let snaps = &traj.snapshots[..=idx];
    let ds = snaps[1].t - snaps[0].t;
    if snaps.windows(2).any(|w| ((w[1].t - w[0].t) - ds).abs() > 1e-9 * ds) {
        return Err(Error::Precondition("snapshots must be equally spaced on [0, t]".into()));
    }
    let cfg = &traj.config;
    let grid = *traj.grid();
    let n = grid.n();
    let (a, kp, sign) = (cfg.params.a, cfg.params.k_power, cfg.form.sign());
    let ny = grid.nyquist_index();
    let sym = |i: usize| if i == ny { 0.0 } else { grid.wavenumber(i) };
    let phase = |i: usize, tau: f64| {
        let k = sym(i);
        Complex64::from_polar(1.0, -sign * tau * k.abs().powf(1.0 + a) * k)
    };
    let keep = |i: usize| match cfg.dealias {
        Dealias::TwoThirds => 3 * grid.mode(i).unsigned_abs() as usize * 1 < n,
        Dealias::None => true,
    };
    let w = simpson_weights(idx, ds);
    let mut rebuilt: Vec<Complex64> = snaps[0].field.spectrum().iter().enumerate().map(|(i, c)| c * phase(i, t)).collect();
    if cfg.nonlinear {
        for (j, s) in snaps.iter().enumerate() {
            let p = s.field.map(|x| x.powi(kp as i32 + 1));
            let ps = p.spectrum();
            for i in 0..n {
                if !keep(i) {
                    continue;
                }
                let g = Complex64::new(0.0, sym(i) / (kp as f64 + 1.0));
                rebuilt[i] -= w[j] * phase(i, t - s.t) * g * ps[i];
            }
        }
    }
    let target = snaps[idx].field.spectrum();
    let num: f64 = rebuilt.iter().zip(target).map(|(r, v)| (r - v).norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = target.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    Ok(num / den.max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::linear_propagator;

    fn p(a: f64, k: u32) -> DispersionParams {
        DispersionParams::new(a, k).unwrap()
    }

    fn gaussian(n: usize, l: f64, amp: f64) -> Field {
        SpectralGrid::new(n, l).unwrap().sample(|x| amp * (-x * x).exp())
    }

    #[test]
    fn zero_stays_zero() {
        let u0 = Field::zeros(SpectralGrid::new(256, 20.0).unwrap());
        let tr = evolve(&u0, &EvolutionConfig::new(p(0.5, 1), 0.01, 0.1)).unwrap();
        assert_eq!(tr.last().sup_norm(), 0.0);
    }

    #[test]
    fn config_checks() {
        let u0 = gaussian(256, 20.0, 0.5);
        assert!(evolve(&u0, &EvolutionConfig::new(p(0.5, 1), 0.2, 1.0)).is_err());
        assert!(evolve(&u0, &EvolutionConfig::new(p(0.5, 1), 0.03, 0.1)).is_err());
        let rough = SpectralGrid::new(64, 20.0).unwrap().sample(|x| (-x * x).exp());
        assert!(matches!(evolve(&rough, &EvolutionConfig::new(p(0.5, 1), 0.01, 0.1)), Err(Error::Unresolved(_))));
    }

    #[test]
    fn linear_run_matches_propagator() {
        let u0 = gaussian(512, 30.0, 1.0);
        let cfg = EvolutionConfig::new(p(0.5, 1), 0.01, 0.5).linear();
        let tr = evolve(&u0, &cfg).unwrap();
        let exact = linear_propagator(&u0, 0.5, p(0.5, 1)).unwrap();
        assert!(tr.last().sub(&exact).unwrap().l2_norm() < 1e-12);
    }

    #[test]
    fn conservation_and_momentum() {
        let u0 = gaussian(1024, 40.0, 0.5);
        let tr = evolve(&u0, &EvolutionConfig::new(p(0.5, 1), 1e-3, 0.5).with_stride(50)).unwrap();
        let (d1, d2, d3) = tr.ledger.drifts();
        assert!(d1 < 1e-13 && d2 < 1e-8 && d3 < 1e-8, "{d1:e} {d2:e} {d3:e}");
        let m = momentum_law_residual(&tr);
        assert!(m.max_residual < 1e-6 * (1.0 + tr.ledger.m[0].abs()), "{m:?}");
    }

    #[test]
    fn even_data_momentum_grows_linearly() {
        // even u₀ has M(0) = 0, so M(t) = t‖u₀‖²/2 outright
        let g = SpectralGrid::new(1024, 40.0).unwrap();
        let u0 = g.sample(|x| 0.5 * (-x * x).exp() * (1.0 + x * x));
        let tr = evolve(&u0, &EvolutionConfig::new(p(0.5, 1), 1e-3, 0.5).with_stride(100)).unwrap();
        assert!(tr.ledger.m[0].abs() < 1e-14);
        assert!(momentum_law_residual(&tr).max_residual < 1e-6);
    }

    #[test]
    fn k_momentum_uses_source_integral() {
        let u0 = gaussian(1024, 40.0, 0.4);
        let tr = evolve(&u0, &EvolutionConfig::new(p(0.5, 2), 1e-3, 0.5).with_stride(50)).unwrap();
        assert!(momentum_law_residual(&tr).max_residual < 1e-5);
    }

    #[test]
    fn integrators_agree() {
        let u0 = gaussian(512, 30.0, 1.0);
        let c = EvolutionConfig::new(p(0.5, 1), 2e-3, 0.2);
        let a = evolve(&u0, &c).unwrap();
        let b = evolve(&u0, &c.with_integrator(Integrator::IfRk4)).unwrap();
        assert!(a.last().sub(b.last()).unwrap().l2_norm() < 1e-8);
    }

    #[test]
    fn reflection_symmetry() {
        // v(x,t) = -u(x,-t): running the reflected form from -u(T) for T
        // returns to -u₀
        let u0 = gaussian(512, 30.0, 1.0);
        let c = EvolutionConfig::new(p(0.5, 1), 1e-3, 0.3);
        let fwd = evolve(&u0, &c).unwrap();
        let back = evolve(&fwd.last().scale(-1.0), &c.with_form(Form::Reflected)).unwrap();
        let err = back.last().add(&u0).unwrap().l2_norm() / u0.l2_norm();
        assert!(err < 1e-9, "{err:e}");
    }

    #[test]
    fn small_amplitude_approaches_linear_flow_quadratically() {
        let c = EvolutionConfig::new(p(0.5, 1), 1e-3, 0.3);
        let gap = |eps: f64| {
            let u0 = gaussian(512, 30.0, eps);
            let nl = evolve(&u0, &c).unwrap();
            nl.last().sub(&linear_propagator(&u0, 0.3, c.params).unwrap()).unwrap().l2_norm()
        };
        let r = gap(0.02) / gap(0.01);
        assert!((r - 4.0).abs() < 0.1, "{r}");
    }

    #[test]
    fn duhamel_consistency() {
        let u0 = gaussian(512, 30.0, 0.5);
        let lin = evolve(&u0, &EvolutionConfig::new(p(0.5, 1), 1e-2, 1.0).linear()).unwrap();
        assert!(duhamel_residual(&lin, 1.0).unwrap() < 1e-12);
        assert_eq!(duhamel_residual(&lin, 0.0).unwrap(), 0.0);
        let c = EvolutionConfig::new(p(0.5, 1), 1e-3, 1.0);
        let fine = evolve(&u0, &c.with_stride(10)).unwrap();
        let coarse = evolve(&u0, &c.with_stride(20)).unwrap();
        let (rf, rc) = (duhamel_residual(&fine, 1.0).unwrap(), duhamel_residual(&coarse, 1.0).unwrap());
        assert!(rf < 1e-5, "{rf:e}");
        assert!(rc / rf > 8.0, "{rc:e} {rf:e}");
        assert!(duhamel_residual(&evolve(&u0, &c.with_stride(100)).unwrap(), 1.0).is_err());
    }

    #[test]
    fn simpson_weights_integrate_cubics() {
        for m in [20, 21] {
            let w = simpson_weights(m, 0.1);
            let s: f64 = w.iter().enumerate().map(|(i, w)| w * (0.1 * i as f64).powi(3)).sum();
            let end = 0.1 * m as f64;
            assert!((s - end.powi(4) / 4.0).abs() < 1e-12);
        }
    }
}
