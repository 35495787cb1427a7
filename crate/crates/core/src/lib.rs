//! Numerics for the asymptotic mean value characterization of the
//! variational p-Laplacian and its fixed-radius dynamic programming
//! principle.
//!
//! The library computes the normalization constants `C_{d,p}` and `D_{d,p}`
//! pairing the nonlinear sphere and ball averages
//!
//! ```text
//!   𝓘ᵣᵖ[φ](x) = (1/(C_{d,p} rᵖ)) ⨏_{∂B_r} J_p(φ(x+y) − φ(x)) dσ(y),
//!   𝓜ᵣᵖ[φ](x) = (1/(D_{d,p} rᵖ)) ⨏_{B_r}  J_p(φ(x+y) − φ(x)) dy,
//! ```
//!
//! with `J_p(t) = |t|^{p−2} t`, verifies their consistency
//! `𝓜ᵣᵖ[φ](x) → Δ_p φ(x)` on smooth test functions as `r → 0`, solves the
//! boundary-value problem `−𝓜ᵣᵖ[U] = f` with collar data by a monotone
//! fixed-point iteration on a uniform grid, evaluates the plane's
//! homogeneous solutions (spiral exponents, their thresholds, and the
//! hodograph parametrization) whose averages vanish identically, and
//! stress-tests the pointwise inequalities that the error analysis leans on.
//!
//! Everything is deterministic: quadrature rules are fixed or refined by
//! doubling, random sampling is seeded, and parallel sweeps reduce in a
//! fixed order.

pub mod constants;
pub mod error;
pub mod exponent;
pub mod grid;
pub mod inequalities;
pub mod meanvalue;
pub mod plane;
pub mod quad1d;
pub mod quadrature;
pub mod solver;
pub mod study;
pub mod testfn;

pub use error::{Error, Result};
pub use exponent::PExponent;
