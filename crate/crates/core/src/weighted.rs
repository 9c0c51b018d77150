//! Weighted norms, the truncated weights ⟨x⟩_N^r, Z_{s,r} norms, tail
//! exponents and the box-growth test for weighted-L² membership.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::ops::bessel_derivative;
use crate::quad::linear_fit;
use crate::tolerances::{BOX_CONVERGENT_MAX, BOX_DIVERGENT_MIN, INTERIOR_FRACTION, MEAN_ZERO_TOL};

/// Smallest truncation level for which the blended weight is monotone.
pub const MIN_TRUNCATION: f64 = 1.5;

/// ⟨x⟩^r, or its truncation ⟨x⟩_N^r: equal to ⟨x⟩^r on |x| ≤ N, to (2N)^r on
/// |x| ≥ 3N, and on N ≤ |x| ≤ 3N the log-weight is the quintic Hermite
/// interpolant matching value, slope and curvature of r·ln⟨x⟩ at N and
/// r·ln(2N) with zero slope and curvature at 3N. The result is C², even and
/// nondecreasing in |x| for N ≥ [`MIN_TRUNCATION`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub r: f64,
    /// None means N = ∞.
    #[serde(default)]
    pub truncation: Option<f64>,
}

impl WeightSpec {
    pub fn full(r: f64) -> Result<Self> {
        Self::new(r, None)
    }

    pub fn truncated(r: f64, n: f64) -> Result<Self> {
        Self::new(r, Some(n))
    }

    pub fn new(r: f64, truncation: Option<f64>) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!("weight exponent r = {r} must be ≥ 0")));
        }
        if let Some(n) = truncation {
            if !(n >= MIN_TRUNCATION && n.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "truncation N = {n} must be ≥ {MIN_TRUNCATION}"
                )));
            }
        }
        Ok(Self { r, truncation })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.abs();
        let log_bracket = |x: f64| 0.5 * self.r * (1.0 + x * x).ln();
        let Some(n) = self.truncation else {
            return log_bracket(x).exp();
        };
        if x <= n {
            return log_bracket(x).exp();
        }
        if x >= 3.0 * n {
            return (2.0 * n).powf(self.r);
        }
        let s = (x - n) / (2.0 * n);
        let (s2, s3) = (s * s, s * s * s);
        let (s4, s5) = (s3 * s, s3 * s2);
        let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
        let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
        let h2 = 0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5);
        let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
        let q = 1.0 + n * n;
        // derivatives of r·ln⟨x⟩ at N, in units of s
        let slope = 2.0 * n * self.r * n / q;
        let curv = 4.0 * n * n * self.r * (1.0 - n * n) / (q * q);
        (log_bracket(n) * h0 + slope * h1 + curv * h2 + self.r * (2.0 * n).ln() * h5).exp()
    }
}

/// (h·Σ w(x_j)² f_j²)^{1/2}.
pub fn weighted_l2_norm(f: &Field, w: &WeightSpec) -> f64 {
    weighted_sq(f, w, None).sqrt()
}

fn weighted_sq(f: &Field, w: &WeightSpec, mask: Option<&[bool]>) -> f64 {
    let h = f.grid().spacing();
    let nodes = f.grid().nodes();
    h * nodes
        .iter()
        .zip(f.values())
        .enumerate()
        .filter(|(j, _)| mask.map_or(true, |m| m[*j]))
        .map(|(_, (x, v))| {
            let wv = w.eval(*x) * v;
            wv * wv
        })
        .sum::<f64>()
}

/// Squared weighted norm restricted to the interior |x| ≤ 0.8L.
pub fn interior_weighted_sq(f: &Field, w: &WeightSpec) -> f64 {
    let mask = f.grid().interior_mask(INTERIOR_FRACTION);
    weighted_sq(f, w, Some(&mask))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZNorm {
    /// ‖J^s f‖₂
    pub sobolev: f64,
    /// ‖⟨x⟩^r f‖₂
    pub weight: f64,
    /// f̂(0) = 0 to tolerance, i.e. the dotted class.
    pub mean_zero: bool,
}

pub fn z_norm(f: &Field, s: f64, r: f64) -> Result<ZNorm> {
    let sobolev = bessel_derivative(f, s)?.l2_norm();
    let weight = weighted_l2_norm(f, &WeightSpec::full(r)?);
    let l1 = f.values().iter().map(|v| v.abs()).sum::<f64>() * f.grid().spacing();
    let mean_zero = f.integral().abs() <= MEAN_ZERO_TOL * l1;
    Ok(ZNorm { sobolev, weight, mean_zero })
}

/// ‖J^{θα}(⟨x⟩^{(1-θ)b}f)‖ / (‖⟨x⟩^b f‖^{1-θ}·‖J^α f‖^θ).
pub fn interpolation_ratio(f: &Field, alpha: f64, b: f64, theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("θ = {theta} outside [0, 1]")));
    }
    let wf = f.map_with_x(|x, v| (1.0 + x * x).powf(0.5 * (1.0 - theta) * b) * v);
    let lhs = bessel_derivative(&wf, theta * alpha)?.l2_norm();
    let rhs = weighted_l2_norm(f, &WeightSpec::full(b)?).powf(1.0 - theta)
        * bessel_derivative(f, alpha)?.l2_norm().powf(theta);
    Ok(lhs / rhs.max(1e-300))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    pub slope: f64,
    pub window: (f64, f64),
    pub r2: f64,
    /// Bins that entered the fit.
    pub samples: usize,
    pub reliable: bool,
}

pub const DEFAULT_TAIL_BINS: usize = 12;

/// Log-log slope of bin-averaged |f| over geometric bins of |x| in the
/// window; both tails are pooled.
pub fn tail_exponent(f: &Field, window: (f64, f64)) -> Result<TailFit> {
    tail_exponent_bins(f, window, DEFAULT_TAIL_BINS)
}

pub fn tail_exponent_bins(f: &Field, window: (f64, f64), bins: usize) -> Result<TailFit> {
    let (lo, hi) = window;
    let l = f.grid().half_length();
    if !(lo > 0.0 && hi > lo && hi <= INTERIOR_FRACTION * l * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "tail window [{lo}, {hi}] must sit inside (0, {}]",
            INTERIOR_FRACTION * l
        )));
    }
    if bins < 8 {
        return Err(Error::InvalidParameter(format!("need ≥ 8 bins, got {bins}")));
    }
    let max = f.sup_norm();
    let ratio = hi / lo;
    let edges: Vec<f64> = (0..=bins).map(|i| lo * ratio.powf(i as f64 / bins as f64)).collect();
    let mut sums = vec![(0.0, 0usize); bins];
    for (x, v) in f.grid().nodes().iter().zip(f.values()) {
        let ax = x.abs();
        if ax < lo || ax >= hi {
            continue;
        }
        let i = (((ax / lo).ln() / ratio.ln()) * bins as f64).floor() as usize;
        let i = i.min(bins - 1);
        sums[i].0 += v.abs();
        sums[i].1 += 1;
    }
    let (mut xs, mut ys) = (vec![], vec![]);
    for (i, (s, c)) in sums.iter().enumerate() {
        if *c == 0 {
            continue;
        }
        let mean = s / *c as f64;
        if mean < 1e-14 * max || mean == 0.0 {
            continue;
        }
        xs.push((edges[i] * edges[i + 1]).sqrt().ln());
        ys.push(mean.ln());
    }
    if xs.len() < 2 {
        return Ok(TailFit { slope: f64::NAN, window, r2: 0.0, samples: xs.len(), reliable: false });
    }
    let (slope, _, r2) = linear_fit(&xs, &ys);
    Ok(TailFit { slope, window, r2, samples: xs.len(), reliable: xs.len() >= 4 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxVerdict {
    Convergent,
    Divergent,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxGrowth {
    pub half_lengths: Vec<f64>,
    /// Interior weighted norms squared on each box.
    pub norms_sq: Vec<f64>,
    /// (N₃ - N₂)/(N₂ - N₁) for the last three boxes.
    pub increment_ratio: f64,
    pub verdict: BoxVerdict,
}

/// Verdict from squared weighted norms on three boxes, each twice the
/// last. A tail |x|^{-p} under weight |x|^r contributes increments in the
/// ratio 2^{2r+1-2p}, below 1 exactly when the full-line norm is finite.
pub fn box_growth_verdict(half_lengths: &[f64], norms_sq: &[f64]) -> Result<BoxGrowth> {
    if norms_sq.len() < 3 || half_lengths.len() != norms_sq.len() {
        return Err(Error::InvalidParameter("box-growth needs ≥ 3 boxes".into()));
    }
    let k = norms_sq.len();
    let (d1, d2) = (norms_sq[k - 2] - norms_sq[k - 3], norms_sq[k - 1] - norms_sq[k - 2]);
    let scale = norms_sq.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // both increments at round-off: already converged (zero data included)
    let settled = d1.abs().max(d2.abs()) <= 1e-12 * scale || scale == 0.0;
    let ratio = if settled {
        0.0
    } else if d1 > 0.0 {
        d2 / d1
    } else {
        f64::NAN
    };
    let verdict = if ratio.is_nan() {
        BoxVerdict::Indeterminate
    } else if ratio <= BOX_CONVERGENT_MAX {
        BoxVerdict::Convergent
    } else if ratio >= BOX_DIVERGENT_MIN {
        BoxVerdict::Divergent
    } else {
        BoxVerdict::Indeterminate
    };
    Ok(BoxGrowth { half_lengths: half_lengths.to_vec(), norms_sq: norms_sq.to_vec(), increment_ratio: ratio, verdict })
}

/// Box growth of ‖⟨x⟩^r f_L‖² over the interior of each box for fields
/// computed on growing boxes.
pub fn box_growth(fields: &[Field], r: f64) -> Result<BoxGrowth> {
    let w = WeightSpec::full(r)?;
    let ls: Vec<f64> = fields.iter().map(|f| f.grid().half_length()).collect();
    let ns: Vec<f64> = fields.iter().map(|f| interior_weighted_sq(f, &w)).collect();
    box_growth_verdict(&ls, &ns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpectralGrid;
    use proptest::prelude::*;

    #[test]
    fn zero_has_zero_norm() {
        let z = Field::zeros(SpectralGrid::new(64, 10.0).unwrap());
        assert_eq!(weighted_l2_norm(&z, &WeightSpec::full(2.0).unwrap()), 0.0);
    }

    #[test]
    fn gaussian_moment_closed_form() {
        // ∫(1+x²)²e^{-2x²} = √(π/2)(1 + 1/2 + 3/16)
        let f = SpectralGrid::new(512, 20.0).unwrap().sample(|x| (-x * x).exp());
        let got = weighted_l2_norm(&f, &WeightSpec::full(2.0).unwrap()).powi(2);
        let want = (std::f64::consts::PI / 2.0).sqrt() * (1.0 + 0.5 + 3.0 / 16.0);
        assert!((got - want).abs() < 1e-10 * want, "{got} {want}");
    }

    #[test]
    fn truncated_weight_shape() {
        let w = WeightSpec::truncated(1.5, 10.0).unwrap();
        assert_eq!(w.eval(5.0), WeightSpec::full(1.5).unwrap().eval(5.0));
        assert_eq!(w.eval(-40.0), 20f64.powf(1.5));
        assert_eq!(w.eval(3.0), w.eval(-3.0));
        // C¹ at N
        let d = |x: f64| (w.eval(x + 1e-6) - w.eval(x - 1e-6)) / 2e-6;
        assert!((d(10.0 + 1e-5) - d(10.0 - 1e-5)).abs() < 1e-4 * d(10.0));
        assert!(WeightSpec::truncated(1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn truncated_weight_nondecreasing(r in 0.0f64..4.0, n in 1.5f64..1e4) {
            let w = WeightSpec::truncated(r, n).unwrap();
            let mut prev = w.eval(0.0);
            for i in 1..=2000 {
                let v = w.eval(3.5 * n * i as f64 / 2000.0);
                prop_assert!(v >= prev * (1.0 - 1e-14));
                prev = v;
            }
        }

        #[test]
        fn norm_monotone_in_truncation(seed in 0u64..1000, n1 in 1.5f64..10.0, dn in 0.1f64..10.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let g = SpectralGrid::new(256, 40.0).unwrap();
            let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = g.sample(|x| (c[0] + c[1] * x + c[2] * (x / 3.0).sin() + c[3] * x * x / 10.0) * (-x * x / 200.0).exp());
            let a = weighted_l2_norm(&f, &WeightSpec::truncated(1.2, n1).unwrap());
            let b = weighted_l2_norm(&f, &WeightSpec::truncated(1.2, n1 + dn).unwrap());
            let full = weighted_l2_norm(&f, &WeightSpec::full(1.2).unwrap());
            prop_assert!(a <= b * (1.0 + 1e-14) && b <= full * (1.0 + 1e-14));
        }
    }

    #[test]
    fn large_truncation_equals_full_weight() {
        let f = SpectralGrid::new(256, 30.0).unwrap().sample(|x| (-x * x / 9.0).exp());
        let full = weighted_l2_norm(&f, &WeightSpec::full(2.0).unwrap());
        assert_eq!(weighted_l2_norm(&f, &WeightSpec::truncated(2.0, 100.0).unwrap()), full);
    }

    #[test]
    fn z_norm_trivial_and_mean_flag() {
        let g = SpectralGrid::new(256, 20.0).unwrap();
        let f = g.sample(|x| (-x * x).exp());
        let z = z_norm(&f, 0.0, 0.0).unwrap();
        assert!((z.sobolev - f.l2_norm()).abs() < 1e-14 && (z.weight - f.l2_norm()).abs() < 1e-14);
        assert!(!z.mean_zero);
        assert!(z_norm(&g.sample(|x| x * (-x * x).exp()), 1.0, 1.0).unwrap().mean_zero);
    }

    #[test]
    fn interpolation_ratio_below_one_for_gaussian() {
        let f = SpectralGrid::new(512, 30.0).unwrap().sample(|x| (-x * x / 2.0).exp());
        for th in [0.25, 0.5, 0.75] {
            let r = interpolation_ratio(&f, 2.0, 2.0, th).unwrap();
            assert!(r > 0.1 && r < 2.0, "{r}");
        }
    }

    #[test]
    fn tail_of_exact_power_law() {
        let f = SpectralGrid::new(16384, 400.0).unwrap().sample(|x| 1.0 / (1.0 + x * x));
        let t = tail_exponent(&f, (10.0, 100.0)).unwrap();
        assert!((t.slope + 2.0).abs() < 0.02 && t.reliable, "{t:?}");
        assert!(tail_exponent(&f, (10.0, 390.0)).is_err());
        assert!(tail_exponent_bins(&f, (10.0, 100.0), 6).is_err());
    }

    #[test]
    fn tiny_tails_are_unreliable() {
        let f = SpectralGrid::new(1024, 100.0).unwrap().sample(|x| (-x * x).exp());
        assert!(!tail_exponent(&f, (20.0, 70.0)).unwrap().reliable);
    }

    #[test]
    fn verdict_thresholds() {
        let l = [1.0, 2.0, 4.0];
        assert_eq!(box_growth_verdict(&l, &[1.0, 2.0, 2.5]).unwrap().verdict, BoxVerdict::Convergent);
        assert_eq!(box_growth_verdict(&l, &[1.0, 2.0, 3.5]).unwrap().verdict, BoxVerdict::Divergent);
        assert_eq!(box_growth_verdict(&l, &[1.0, 2.0, 3.0]).unwrap().verdict, BoxVerdict::Indeterminate);
        assert_eq!(box_growth_verdict(&l, &[0.0; 3]).unwrap().verdict, BoxVerdict::Convergent);
        assert_eq!(box_growth_verdict(&l, &[2.0, 2.0, 2.0]).unwrap().verdict, BoxVerdict::Convergent);
    }
}
