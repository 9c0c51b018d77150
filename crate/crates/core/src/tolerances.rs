//! Numerical thresholds shared by the library and its acceptance suite.
//!
//! Each constant is one number with one justification; tests reference
//! these names instead of repeating literals.

/// Fraction of |x| < frac·L treated as interior: x-weights are meaningless
/// near the periodic seam.
pub const INTERIOR_FRACTION: f64 = 0.8;

/// A field counts as resolved when its top-third modes are below this
/// fraction of the spectral peak.
pub const RESOLUTION_FRACTION: f64 = 1e-12;

/// Effective support: |f| outside |x| ≤ L/2 must be below this fraction of
/// max |f| for the weight identities.
pub const SUPPORT_FRACTION: f64 = 1e-12;

/// Mean-zero test for D^{a-1}: |f^(0)| relative to ‖f‖₁.
pub const MEAN_ZERO_TOL: f64 = 1e-10;

/// Box extension factor used when an identity or commutation law is
/// evaluated as a continuum statement. Images of the algebraic
/// |x|^{-(2+a)} tails decay like this factor to the power -(2+a).
pub const CONTINUUM_PAD: usize = 256;

/// Relative accuracy requested from every Stein quadrature panel.
pub const STEIN_REL_TOL: f64 = 1e-11;

/// A Stein value is accepted when the summed panel error estimate is below
/// this fraction of the total. Looser than the panel request so that one
/// stubborn panel does not sink an otherwise accurate sum.
pub const STEIN_ACCEPT_TOL: f64 = 1e-10;

/// Exponent margin around θ = α + 1/2 inside which membership is not decided.
pub const STEIN_BOUNDARY_MARGIN: f64 = 0.02;

/// Box-growth verdicts from the increment ratio
/// ρ = (N(4L) - N(2L)) / (N(2L) - N(L)) of squared weighted norms; a tail
/// |x|^{-p} gives ρ = 2^{2r+1-2p}, below 1 exactly when the norm converges.
pub const BOX_CONVERGENT_MAX: f64 = 0.9;
pub const BOX_DIVERGENT_MIN: f64 = 1.1;

/// Bulk mass-escape monitor: ∫_{|x|>0.8L} u² relative to ∫u².
pub const ESCAPE_FRACTION: f64 = 1e-6;

/// Petviashvili stopping gap and iteration cap.
pub const PETVIASHVILI_GAP: f64 = 1e-12;
pub const PETVIASHVILI_MAX_ITER: usize = 10_000;
