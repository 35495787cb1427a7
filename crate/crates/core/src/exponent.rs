//! The exponent `p` and the scalar nonlinearity it induces.
//!
//! Everything in this crate is parameterized by an exponent `p` in `(1, ∞)`.
//! The associated odd, strictly increasing nonlinearity
//!
//! ```text
//!     J_p(t) = |t|^{p-2} t = |t|^{p-1} sign(t)
//! ```
//!
//! is the workhorse: mean value operators average `J_p` of increments, the
//! lattice solver inverts sums of `J_p` terms, and the auxiliary inequality
//! harness bounds its increments. Its inverse is `J_p^{-1}(s) =
//! |s|^{1/(p-1)} sign(s)`.
//!
//! [`PExponent`] validates the range once at construction and then offers
//! branch-free evaluation. The common exponents 3/2, 2, 3, 4 dispatch to
//! `sqrt`/multiply fast paths; everything else goes through `exp`/`ln`,
//! short-circuiting `t = 0` so the log never sees zero. All paths compute
//! the magnitude from `|t|` and re-attach the sign, so `J_p(-t) == -J_p(t)`
//! holds bit-exactly — quadrature rules below rely on that to cancel odd
//! integrands without round-off residue.

use crate::error::{Error, Result};

/// Which evaluation path `J_p` and `J_p^{-1}` take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Path {
    /// p = 3/2: `J_p(t) = sqrt(|t|) sign(t)`.
    ThreeHalves,
    /// p = 2: identity.
    Two,
    /// p = 3: `J_p(t) = |t| t`.
    Three,
    /// p = 4: `J_p(t) = t^3`.
    Four,
    /// Anything else: `exp((p-1) ln|t|) sign(t)`.
    General,
}

/// A validated exponent `p ∈ (1, ∞)` with cached derived quantities.
#[derive(Debug, Clone, Copy)]
pub struct PExponent {
    p: f64,
    pm1: f64,
    inv_pm1: f64,
    path: Path,
}

impl PExponent {
    /// Validates `1 < p < ∞`.
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let path = if p == 1.5 {
            Path::ThreeHalves
        } else if p == 2.0 {
            Path::Two
        } else if p == 3.0 {
            Path::Three
        } else if p == 4.0 {
            Path::Four
        } else {
            Path::General
        };
        Ok(PExponent { p, pm1: p - 1.0, inv_pm1: 1.0 / (p - 1.0), path })
    }

    /// The exponent itself.
    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    /// `p - 1`, the homogeneity degree of `J_p`.
    #[inline]
    pub fn pm1(&self) -> f64 {
        self.pm1
    }

    /// The dual exponent `p/(p-1)`; radial powers with this exponent have
    /// constant p-Laplacian.
    #[inline]
    pub fn conjugate(&self) -> f64 {
        self.p / self.pm1
    }

    /// True in the singular range `p < 2`, where `J_p` has unbounded slope
    /// at the origin and gradient-degenerate points need special care.
    #[inline]
    pub fn is_singular(&self) -> bool {
        self.p < 2.0
    }

    /// `J_p(t) = |t|^{p-2} t`. Odd bit-exactly; strictly increasing.
    #[inline]
    pub fn jp(&self, t: f64) -> f64 {
        match self.path {
            Path::ThreeHalves => t.abs().sqrt().copysign(t),
            Path::Two => t,
            Path::Three => t.abs() * t,
            Path::Four => t * t * t,
            Path::General => {
                if t == 0.0 {
                    0.0
                } else {
                    (self.pm1 * t.abs().ln()).exp().copysign(t)
                }
            }
        }
    }

    /// `J_p^{-1}(s) = |s|^{1/(p-1)} sign(s)`.
    #[inline]
    pub fn jp_inverse(&self, s: f64) -> f64 {
        match self.path {
            Path::ThreeHalves => s * s.abs(),
            Path::Two => s,
            Path::Three => s.abs().sqrt().copysign(s),
            Path::Four => s.cbrt(),
            Path::General => {
                if s == 0.0 {
                    0.0
                } else {
                    (self.inv_pm1 * s.abs().ln()).exp().copysign(s)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Reference implementation: always the exp/ln route.
    fn jp_reference(p: f64, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else {
            ((p - 1.0) * t.abs().ln()).exp().copysign(t)
        }
    }

    /// Independent oracle for the inverse: bisection on `J_p(t) = s`.
    fn invert_by_bisection(p: f64, s: f64) -> f64 {
        let px = PExponent::new(p).unwrap();
        let (mut lo, mut hi) = (-1e6f64, 1e6f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if px.jp(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn rejects_out_of_range_exponents() {
        assert!(PExponent::new(1.0).is_err());
        assert!(PExponent::new(0.5).is_err());
        assert!(PExponent::new(f64::NAN).is_err());
        assert!(PExponent::new(f64::INFINITY).is_err());
        assert!(PExponent::new(1.0 + 1e-12).is_ok());
    }

    #[test]
    fn inverse_matches_frozen_value_and_bisection_oracle() {
        // J_{3/2}(t) = sqrt(t) on t >= 0, so the root of J(t) = 1/4 is
        // t = 1/16 = 0.0625.
        let px = PExponent::new(1.5).unwrap();
        assert_eq!(px.jp_inverse(0.25), 0.0625);
        let oracle = invert_by_bisection(1.5, 0.25);
        assert!((oracle - 0.0625).abs() < 1e-9, "bisection oracle gave {oracle}");
    }

    #[test]
    fn fast_paths_agree_with_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9a3c);
        for &p in &[1.5, 2.0, 3.0, 4.0, 1.17, 2.7, 5.3] {
            let px = PExponent::new(p).unwrap();
            for _ in 0..500 {
                let mag = 10f64.powf(rng.gen_range(-8.0..8.0));
                let t = if rng.gen::<bool>() { mag } else { -mag };
                let got = px.jp(t);
                let want = jp_reference(p, t);
                assert!(
                    (got - want).abs() <= 1e-13 * want.abs(),
                    "p={p} t={t}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn jp_is_odd_bit_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x51f0);
        for &p in &[1.5, 2.0, 2.31, 3.0, 4.0, 6.25] {
            let px = PExponent::new(p).unwrap();
            for _ in 0..200 {
                let t = 10f64.powf(rng.gen_range(-12.0..12.0));
                assert_eq!(px.jp(-t).to_bits(), (-px.jp(t)).to_bits());
                assert_eq!(px.jp_inverse(-t).to_bits(), (-px.jp_inverse(t)).to_bits());
            }
        }
        let px = PExponent::new(2.5).unwrap();
        assert_eq!(px.jp(0.0), 0.0);
        assert_eq!(px.jp_inverse(0.0), 0.0);
    }

    #[test]
    fn jp_is_strictly_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xbead);
        for &p in &[1.2, 1.5, 2.0, 3.0, 4.7] {
            let px = PExponent::new(p).unwrap();
            for _ in 0..500 {
                let a = rng.gen_range(-50.0..50.0);
                let b = a + 10f64.powf(rng.gen_range(-6.0..1.0));
                assert!(px.jp(a) < px.jp(b), "p={p}: J({a}) >= J({b})");
            }
        }
    }

    #[test]
    fn round_trips_under_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x77aa);
        for &p in &[1.5, 2.0, 2.2, 3.0, 4.0, 5.5] {
            let px = PExponent::new(p).unwrap();
            for _ in 0..300 {
                let mag = 10f64.powf(rng.gen_range(-6.0..6.0));
                let t = if rng.gen::<bool>() { mag } else { -mag };
                let back = px.jp_inverse(px.jp(t));
                assert!(
                    (back - t).abs() <= 1e-12 * t.abs(),
                    "p={p}: round trip {t} -> {back}"
                );
            }
        }
    }

    #[test]
    fn conjugate_exponent_identity() {
        for &p in &[1.5, 2.0, 3.0, 7.0] {
            let px = PExponent::new(p).unwrap();
            let q = px.conjugate();
            assert!((1.0 / p + 1.0 / q - 1.0).abs() < 1e-15);
        }
    }
}
