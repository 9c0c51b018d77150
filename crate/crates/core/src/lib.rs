//! Numerical laboratory for the dispersion-generalized Benjamin-Ono equation
//!
//! ```text
//! ∂ₜu + D^{1+a}∂ₓu + u^k ∂ₓu = 0,   0 ≤ a ≤ 1,
//! ```
//!
//! on a periodic box standing in for the real line: fractional operators,
//! weight commutator identities, Stein derivatives, an exponential time
//! integrator with conserved-quantity bookkeeping, weighted decay
//! diagnostics and solitary-wave profiles.

pub mod error;
pub mod evolution;
pub mod experiments;
pub mod grid;
pub mod ground_state;
pub mod identities;
pub mod ops;
pub mod par;
pub mod probes;
pub mod quad;
pub mod stein;
pub mod tolerances;
pub mod weighted;

pub use error::{Error, Result};
pub use grid::{Field, SpectralGrid};
pub use ops::DispersionParams;
