//! Boundedness probes for the commutator and product estimates used in the
//! local theory. Each probe evaluates lhs/rhs on randomized trials; what is
//! checked is that the worst ratio stays put under grid refinement, never a
//! particular constant.
//!
//! Multipliers ψ are truncated weights ⟨x⟩_N^θ with N ≤ L/4, so they are
//! constant near the seam and the periodic box is harmless. Test functions
//! f are random combinations of low wavenumbers under a Gaussian envelope;
//! nothing about them depends on n.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{apply_multiplier, derivative, Field, MultiplierSymbol, SpectralGrid};
use crate::ops::{abs_pow, bessel_derivative, hilbert};
use crate::par::{self, Execution};
use crate::stein::{stein_derivative_at, SteinSymbol};
use crate::weighted::{weighted_l2_norm, WeightSpec, MIN_TRUNCATION};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum ProbeKind {
    /// ‖∂^l[ℋ,ψ]∂^m f‖ / (‖∂^{l+m}ψ‖_∞‖f‖)
    #[serde(rename = "dmp1")]
    Dmp1 { l: u32, m: u32 },
    /// ‖D^α[D^β,ψ]D^{1-α-β}f‖ / (‖J^δ∂ψ‖₂‖f‖)
    #[serde(rename = "dmp2")]
    Dmp2 { alpha: f64, beta: f64, delta: f64 },
    /// ‖[J^θ,φ]f‖ / (‖J∂φ‖₂‖f‖)
    #[serde(rename = "prop*-i")]
    PropStarI { theta: f64 },
    /// ‖J^η(φg) - φJ^η g‖ / (‖(∂φ)^‖₁‖g‖)
    #[serde(rename = "prop*-ii")]
    PropStarII { eta: f64 },
    /// ‖J^θ(φf)‖ / ((‖φ‖_∞ + ‖J∂φ‖₂)‖J^θ f‖)
    #[serde(rename = "prop**")]
    PropStarStar { theta: f64 },
    /// 𝒟^b(e^{-it|x|^{1+a}x})(x) / (t^{b/(2+a)} + t^b|x|^{(1+a)b}), pointwise
    #[serde(rename = "propositionB")]
    PropositionB { a: f64, b: f64 },
    /// ‖J^{θα}(⟨x⟩_N^{(1-θ)b}f)‖ / (‖⟨x⟩_N^b f‖^{1-θ}‖J^α f‖^θ)
    #[serde(rename = "lemma1")]
    Lemma1 { alpha: f64, b: f64, theta: f64 },
}

impl ProbeKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProbeKind::Dmp1 { .. } => "dmp1",
            ProbeKind::Dmp2 { .. } => "dmp2",
            ProbeKind::PropStarI { .. } => "prop*-i",
            ProbeKind::PropStarII { .. } => "prop*-ii",
            ProbeKind::PropStarStar { .. } => "prop**",
            ProbeKind::PropositionB { .. } => "propositionB",
            ProbeKind::Lemma1 { .. } => "lemma1",
        }
    }

    /// Default parameters for a probe named as on the command line.
    pub fn by_name(name: &str) -> Result<Self> {
        Ok(match name {
            "dmp1" => ProbeKind::Dmp1 { l: 0, m: 1 },
            "dmp2" => ProbeKind::Dmp2 { alpha: 0.25, beta: 0.5, delta: 0.75 },
            "prop*-i" => ProbeKind::PropStarI { theta: 0.5 },
            "prop*-ii" => ProbeKind::PropStarII { eta: 0.5 },
            "prop**" => ProbeKind::PropStarStar { theta: 0.5 },
            "propositionB" => ProbeKind::PropositionB { a: 0.5, b: 0.3 },
            "lemma1" => ProbeKind::Lemma1 { alpha: 2.0, b: 1.0, theta: 0.5 },
            _ => return Err(Error::InvalidParameter(format!("unknown probe {name:?}"))),
        })
    }

    pub const NAMES: [&'static str; 7] = ["dmp1", "dmp2", "prop*-i", "prop*-ii", "prop**", "propositionB", "lemma1"];

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("{}: {m}", self.name())));
        let unit = |v: f64| v > 0.0 && v < 1.0;
        match *self {
            ProbeKind::Dmp1 { l, m } if l + m > 2 => bad("l + m ≤ 2 (weights are C² at their joins)"),
            ProbeKind::Dmp2 { alpha, beta, delta } => {
                if !((0.0..1.0).contains(&alpha) && unit(beta) && alpha + beta <= 1.0 && delta > 0.5) {
                    bad("need α ∈ [0,1), β ∈ (0,1), α+β ≤ 1, δ > 1/2")
                } else {
                    Ok(())
                }
            }
            ProbeKind::PropStarI { theta } | ProbeKind::PropStarStar { theta } if !unit(theta) => bad("θ ∈ (0,1)"),
            ProbeKind::PropStarII { eta } if !(eta > 0.0 && eta <= 1.0) => bad("η ∈ (0,1]"),
            ProbeKind::PropositionB { a, b } if !((0.0..=1.0).contains(&a) && unit(b)) => bad("a ∈ [0,1], b ∈ (0,1)"),
            ProbeKind::Lemma1 { alpha, b, theta } if !(alpha > 0.0 && b > 0.0 && unit(theta)) => {
                bad("α, b > 0 and θ ∈ (0,1)")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub trials: usize,
    pub seed: u64,
    pub n: usize,
    #[serde(default = "default_half_length")]
    pub half_length: f64,
    /// Lebesgue exponent; only 2 is implemented.
    #[serde(default = "default_p")]
    pub p: f64,
    /// Times for the pointwise phase probe.
    #[serde(default = "default_times")]
    pub times: [f64; 3],
    #[serde(default)]
    pub exec: Execution,
}

fn default_half_length() -> f64 {
    40.0
}
fn default_p() -> f64 {
    2.0
}
fn default_times() -> [f64; 3] {
    [0.1, 1.0, 10.0]
}

impl ProbeConfig {
    pub fn new(trials: usize, seed: u64, n: usize) -> Self {
        Self { trials, seed, n, half_length: 40.0, p: 2.0, times: default_times(), exec: Execution::Parallel }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub kind: ProbeKind,
    pub n: usize,
    pub trials: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub worst_trial: usize,
    /// |ratio(λf) - ratio(f)| / ratio(f) on the first trial; None when the
    /// probe has no input function.
    pub scaling_defect: Option<f64>,
}

/// Amplitude used in the scaling check.
pub const SCALING_AMPLITUDE: f64 = 7.3;

/// Random f: Gaussian envelope of width in [2, 4] around a center in
/// [-3, 3], carrying six modes with wavenumbers in [0, 2].
pub fn random_field(grid: &SpectralGrid, rng: &mut impl Rng) -> Field {
    let w = rng.gen_range(2.0..4.0);
    let c = rng.gen_range(-3.0..3.0);
    let modes: Vec<(f64, f64, f64)> =
        (0..6).map(|_| (rng.gen_range(0.0..2.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    grid.sample(|x| {
        let s: f64 = modes.iter().map(|(k, p, q)| p * (k * x).cos() + q * (k * x).sin()).sum();
        s * (-(x - c) * (x - c) / (2.0 * w * w)).exp()
    })
}

/// Random truncated weight ⟨x⟩_N^θ with θ ∈ [0.3, 1], N ∈ [1.5, L/4].
pub fn random_weight(grid: &SpectralGrid, rng: &mut impl Rng) -> Result<(WeightSpec, Field)> {
    let theta = rng.gen_range(0.3..1.0);
    let n = rng.gen_range(MIN_TRUNCATION..grid.half_length() / 4.0);
    let w = WeightSpec::truncated(theta, n)?;
    Ok((w, grid.sample(|x| w.eval(x))))
}

/// lhs/rhs; when rhs vanishes (constant multiplier) the lhs is round-off
/// of an identically zero commutator and the ratio is 0.
fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 || rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

/// ‖J∂φ‖₂ with exact zero for constant φ.
fn derivative_h1(phi: &Field) -> Result<f64> {
    if is_constant(phi) {
        return Ok(0.0);
    }
    Ok(bessel_derivative(&derivative(phi, 1)?, 1.0)?.l2_norm())
}

fn is_constant(phi: &Field) -> bool {
    let v = phi.values();
    v.iter().all(|x| *x == v[0])
}

fn homogeneous(f: &Field, s: f64) -> Result<Field> {
    if s == 0.0 {
        return Ok(f.clone());
    }
    apply_multiplier(f, &MultiplierSymbol::real("|k|^s", move |k| abs_pow(k, s)))
}

/// ‖(∂φ)^‖₁ by the rectangle rule in ξ.
fn fourier_l1_of_derivative(phi: &Field) -> f64 {
    let g = phi.grid();
    let dk = std::f64::consts::PI / g.half_length();
    phi.spectrum().iter().zip(g.wavenumbers()).map(|(c, k)| (c * Complex64::new(0.0, k)).norm()).sum::<f64>() * dk
}

pub fn dmp1_ratio(psi: &Field, f: &Field, l: u32, m: u32) -> Result<f64> {
    let g = derivative(f, m)?;
    let comm = hilbert(&psi.mul(&g)?)?.sub(&psi.mul(&hilbert(&g)?)?)?;
    let lhs = derivative(&comm, l)?.l2_norm();
    let d = if is_constant(psi) && l + m > 0 { 0.0 } else { derivative(psi, l + m)?.sup_norm() };
    Ok(ratio(lhs, d * f.l2_norm()))
}

pub fn dmp2_ratio(psi: &Field, f: &Field, alpha: f64, beta: f64, delta: f64) -> Result<f64> {
    let g = homogeneous(f, 1.0 - alpha - beta)?;
    let comm = homogeneous(&psi.mul(&g)?, beta)?.sub(&psi.mul(&homogeneous(&g, beta)?)?)?;
    let lhs = homogeneous(&comm, alpha)?.l2_norm();
    let d = if is_constant(psi) { 0.0 } else { bessel_derivative(&derivative(psi, 1)?, delta)?.l2_norm() };
    let rhs = d * f.l2_norm();
    Ok(ratio(lhs, rhs))
}

pub fn prop_star_i_ratio(phi: &Field, f: &Field, theta: f64) -> Result<f64> {
    let comm = bessel_derivative(&phi.mul(f)?, theta)?.sub(&phi.mul(&bessel_derivative(f, theta)?)?)?;
    Ok(ratio(comm.l2_norm(), derivative_h1(phi)? * f.l2_norm()))
}

pub fn prop_star_ii_ratio(phi: &Field, g: &Field, eta: f64) -> Result<f64> {
    let comm = bessel_derivative(&phi.mul(g)?, eta)?.sub(&phi.mul(&bessel_derivative(g, eta)?)?)?;
    let d = if is_constant(phi) { 0.0 } else { fourier_l1_of_derivative(phi) };
    Ok(ratio(comm.l2_norm(), d * g.l2_norm()))
}

pub fn prop_star_star_ratio(phi: &Field, f: &Field, theta: f64) -> Result<f64> {
    let lhs = bessel_derivative(&phi.mul(f)?, theta)?.l2_norm();
    let c = phi.sup_norm() + derivative_h1(phi)?;
    Ok(ratio(lhs, c * bessel_derivative(f, theta)?.l2_norm()))
}

pub fn lemma1_ratio(f: &Field, alpha: f64, b: f64, theta: f64, truncation: Option<f64>) -> Result<f64> {
    let inner = WeightSpec::new((1.0 - theta) * b, truncation)?;
    let wf = f.map_with_x(|x, v| inner.eval(x) * v);
    let lhs = bessel_derivative(&wf, theta * alpha)?.l2_norm();
    let rhs = weighted_l2_norm(f, &WeightSpec::new(b, truncation)?).powf(1.0 - theta)
        * bessel_derivative(f, alpha)?.l2_norm().powf(theta);
    Ok(ratio(lhs, rhs))
}

/// 𝒟^b of the phase symbol at x, over the predicted growth.
pub fn proposition_b_ratio(a: f64, b: f64, t: f64, x: f64) -> Result<f64> {
    let d = stein_derivative_at(&SteinSymbol::DgboPhase { t, a }, b, x)?;
    Ok(d / (t.abs().powf(b / (2.0 + a)) + t.abs().powf(b) * x.abs().powf((1.0 + a) * b)))
}

/// Range of x for the pointwise probe.
pub const PROPOSITION_B_RANGE: f64 = 50.0;

fn one_trial(kind: &ProbeKind, grid: &SpectralGrid, seed: u64, trial: usize, scale: f64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let (w, psi) = random_weight(grid, &mut rng)?;
    let f = random_field(grid, &mut rng).scale(scale);
    match *kind {
        ProbeKind::Dmp1 { l, m } => dmp1_ratio(&psi, &f, l, m),
        ProbeKind::Dmp2 { alpha, beta, delta } => dmp2_ratio(&psi, &f, alpha, beta, delta),
        ProbeKind::PropStarI { theta } => prop_star_i_ratio(&psi, &f, theta),
        ProbeKind::PropStarII { eta } => prop_star_ii_ratio(&psi, &f, eta),
        ProbeKind::PropStarStar { theta } => prop_star_star_ratio(&psi, &f, theta),
        ProbeKind::Lemma1 { alpha, b, theta } => lemma1_ratio(&f, alpha, b, theta, w.truncation),
        ProbeKind::PropositionB { .. } => unreachable!("pointwise probe has no field trials"),
    }
}

/// Worst lhs/rhs over the trials. For the pointwise phase probe the trials
/// are n/8 evenly spaced points of [0, 50] at each configured time, so
/// refining n refines the sample set.
pub fn probe_estimate(kind: &ProbeKind, cfg: &ProbeConfig) -> Result<ProbeReport> {
    kind.validate()?;
    if cfg.p != 2.0 {
        return Err(Error::InvalidParameter(format!("only p = q = 2 is supported, got p = {}", cfg.p)));
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let (ratios, scaling_defect) = if let ProbeKind::PropositionB { a, b } = *kind {
        let m = (cfg.n / 8).max(2);
        let pts: Vec<(f64, f64)> = cfg
            .times
            .iter()
            .flat_map(|&t| (0..m).map(move |j| (t, PROPOSITION_B_RANGE * j as f64 / (m - 1) as f64)))
            .collect();
        let r = par::map(cfg.exec, &pts, |&(t, x)| proposition_b_ratio(a, b, t, x));
        (r.into_iter().collect::<Result<Vec<_>>>()?, None)
    } else {
        let grid = SpectralGrid::new(cfg.n, cfg.half_length)?;
        let r = par::map_range(cfg.exec, cfg.trials, |i| one_trial(kind, &grid, cfg.seed, i, 1.0));
        let r = r.into_iter().collect::<Result<Vec<_>>>()?;
        let scaled = one_trial(kind, &grid, cfg.seed, 0, SCALING_AMPLITUDE)?;
        let defect = if r[0] == 0.0 { (scaled - r[0]).abs() } else { (scaled - r[0]).abs() / r[0] };
        (r, Some(defect))
    };
    let (worst_trial, max_ratio) =
        ratios.iter().cloned().enumerate().fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(ProbeReport { kind: *kind, n: cfg.n, trials: ratios.len(), max_ratio, mean_ratio, worst_trial, scaling_defect })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRefinement {
    pub reports: Vec<ProbeReport>,
    /// (max - min)/min of the worst ratios across resolutions
    pub drift: f64,
}

pub fn probe_refinement(kind: &ProbeKind, cfg: &ProbeConfig, ns: &[usize]) -> Result<ProbeRefinement> {
    let reports = ns
        .iter()
        .map(|&n| probe_estimate(kind, &ProbeConfig { n, ..*cfg }))
        .collect::<Result<Vec<_>>>()?;
    let hi = reports.iter().map(|r| r.max_ratio).fold(f64::NEG_INFINITY, f64::max);
    let lo = reports.iter().map(|r| r.max_ratio).fold(f64::INFINITY, f64::min);
    let drift = if hi == 0.0 { 0.0 } else { (hi - lo) / lo };
    Ok(ProbeRefinement { reports, drift })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize) -> ProbeConfig {
        ProbeConfig { trials: 12, ..ProbeConfig::new(12, 7, n) }
    }

    #[test]
    fn constant_multiplier_has_zero_commutator() {
        let g = SpectralGrid::new(512, 40.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_field(&g, &mut rng);
        let one = g.sample(|_| 3.0);
        assert_eq!(prop_star_i_ratio(&one, &f, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn rejects_other_exponents() {
        let c = ProbeConfig { p: 3.0, ..cfg(512) };
        assert!(probe_estimate(&ProbeKind::by_name("dmp1").unwrap(), &c).is_err());
        assert!(probe_estimate(&ProbeKind::Dmp1 { l: 2, m: 1 }, &cfg(512)).is_err());
        assert!(ProbeKind::by_name("nope").is_err());
    }

    #[test]
    fn ratios_are_bounded_and_scale_free() {
        for name in ProbeKind::NAMES.iter().filter(|n| **n != "propositionB") {
            let k = ProbeKind::by_name(name).unwrap();
            let r = probe_estimate(&k, &cfg(512)).unwrap();
            assert!(r.max_ratio.is_finite() && r.max_ratio > 0.0, "{name}: {r:?}");
            assert!(r.scaling_defect.unwrap() < 1e-12, "{name}: {r:?}");
        }
    }

    #[test]
    fn modes_agree() {
        let k = ProbeKind::by_name("prop**").unwrap();
        let a = probe_estimate(&k, &ProbeConfig { exec: Execution::Sequential, ..cfg(512) }).unwrap();
        let b = probe_estimate(&k, &cfg(512)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dmp1_stable_under_refinement() {
        let k = ProbeKind::by_name("dmp1").unwrap();
        let r = probe_refinement(&k, &cfg(512), &[512, 1024]).unwrap();
        assert!(r.drift < 0.05, "{r:?}");
    }

    #[test]
    fn calderon_commutator_single_case() {
        let g = SpectralGrid::new(1024, 40.0).unwrap();
        let psi = g.sample(|x| WeightSpec::truncated(1.0, 8.0).unwrap().eval(x));
        let f = g.sample(|x| (-x * x / 4.0).exp());
        let r = dmp1_ratio(&psi, &f, 0, 1).unwrap();
        assert!(r > 0.0 && r < 2.0, "{r}");
    }

    #[test]
    fn phase_probe_small_sample() {
        let c = ProbeConfig { times: [1.0, 1.0, 1.0], ..ProbeConfig::new(1, 0, 32) };
        let r = probe_estimate(&ProbeKind::PropositionB { a: 0.5, b: 0.3 }, &c).unwrap();
        assert!(r.max_ratio.is_finite() && r.max_ratio > 0.1 && r.scaling_defect.is_none(), "{r:?}");
    }
}
