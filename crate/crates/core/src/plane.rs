//! Planar pointwise theory: the exponent family `λ_k^{(n)}`, the derived
//! exponent `γ`, the threshold root `p₀`, and the hodograph-represented
//! functions with their vanishing mean value identity.
//!
//! The exponents are
//!
//! ```text
//!     λ_k^{(n)} = ½(−np + √(4k²(p−1) + n²(p−2)²)),
//!     γ = 1 + λ_{n+2}^{(n)} / (λ_{n+1}^{(n)})²,
//! ```
//!
//! and `p₀(n)` is the root in `(1,2)` of `γ(p) = p/(p−1)` — above it the
//! pointwise asymptotic expansion at a critical point carries information at
//! the order the mean value formula needs; below it, it does not.
//!
//! The hodograph side studies the quasi-conformal map
//!
//! ```text
//!     𝒜(re^{iθ}) = r^β (e^{iθ} + ε e^{−i(2n+1)θ}),     |ε| < 1/(2n+1),
//! ```
//!
//! and the composed profile `𝔄(𝒜(re^{iθ})) = C r^α cos((n+1)θ)`. The key
//! computational fact is that `∫_{B_R} J_p(𝔄) dA = 0` for every admissible
//! parameter set: changing variables to the preimage turns the integral into
//! an angular integral of an odd function under `θ ↦ π/(n+1) − θ`. The
//! quadrature here chooses node counts closed under that reflection, so the
//! cancellation happens inside the rule itself and the computed value sits at
//! roundoff level rather than decaying slowly with refinement.

use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::quadrature::SphereRule;

/// `λ_k^{(n)} = ½(−np + √(4k²(p−1) + n²(p−2)²))`.
///
/// Requires `n ≥ 1`, `k ≥ 1`, `p > 1`.
pub fn lambda_kn(n: usize, k: usize, p: f64) -> f64 {
    assert!(n >= 1 && k >= 1, "need n ≥ 1 and k ≥ 1");
    assert!(p > 1.0 && p.is_finite(), "need p ∈ (1,∞)");
    let nf = n as f64;
    let kf = k as f64;
    0.5 * (-nf * p + (4.0 * kf * kf * (p - 1.0) + nf * nf * (p - 2.0) * (p - 2.0)).sqrt())
}

/// `γ = 1 + λ_{n+2}/(λ_{n+1})²`.
pub fn gamma_exponent(n: usize, p: f64) -> f64 {
    let l1 = lambda_kn(n, n + 1, p);
    let l2 = lambda_kn(n, n + 2, p);
    1.0 + l2 / (l1 * l1)
}

/// `1/η_n = ½(−p + √(4(1+1/n)²(p−1) + (p−2)²))`, the auxiliary exponent
/// reciprocal; carried as its own formula, with no asserted relation to
/// `λ_k^{(n)}`.
pub fn eta_reciprocal(n: usize, p: f64) -> f64 {
    assert!(n >= 1, "need n ≥ 1");
    assert!(p > 1.0 && p.is_finite(), "need p ∈ (1,∞)");
    let a = 1.0 + 1.0 / n as f64;
    0.5 * (-p + (4.0 * a * a * (p - 1.0) + (p - 2.0) * (p - 2.0)).sqrt())
}

/// The exponent family at one `(n, p)`, with the threshold comparison
/// `γ vs p/(p−1)` already evaluated.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ExponentTable {
    pub n: usize,
    pub p: f64,
    /// `λ_{n+1}^{(n)}`.
    pub lambda_n1: f64,
    /// `λ_{n+2}^{(n)}`.
    pub lambda_n2: f64,
    pub gamma: f64,
    /// `p/(p−1)`.
    pub threshold: f64,
    pub gamma_exceeds_threshold: bool,
    /// `1/η_n`.
    pub eta_inv: f64,
}

impl ExponentTable {
    pub fn new(n: usize, p: f64) -> Self {
        let lambda_n1 = lambda_kn(n, n + 1, p);
        let lambda_n2 = lambda_kn(n, n + 2, p);
        let gamma = 1.0 + lambda_n2 / (lambda_n1 * lambda_n1);
        let threshold = p / (p - 1.0);
        ExponentTable {
            n,
            p,
            lambda_n1,
            lambda_n2,
            gamma,
            threshold,
            gamma_exceeds_threshold: gamma > threshold,
            eta_inv: eta_reciprocal(n, p),
        }
    }
}

/// Root of `F(p) = λ_{n+2}/(λ_{n+1})² − 1/(p−1)` in `bracket`, by bisection
/// to interval width `tol`. `F` changes sign exactly where the
/// [`ExponentTable`] inequality flag flips.
pub fn find_p0(n: usize, bracket: (f64, f64), tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 1.0 && hi > lo && tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need 1 < lo < hi and tol > 0; got ({lo}, {hi}), tol = {tol}"
        )));
    }
    let f = |p: f64| {
        let l1 = lambda_kn(n, n + 1, p);
        let l2 = lambda_kn(n, n + 2, p);
        l2 / (l1 * l1) - 1.0 / (p - 1.0)
    };
    let (g_lo, g_hi) = (f(lo), f(hi));
    if !(g_lo * g_hi < 0.0) {
        return Err(Error::BracketFailure { lo, hi, g_lo, g_hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) * g_lo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Parameters of the hodograph pair `(𝒜, 𝔄)`:
/// `𝒜(re^{iθ}) = r^β(e^{iθ} + ε e^{−i(2n+1)θ})` and
/// `𝔄(𝒜(re^{iθ})) = c r^α cos((n+1)θ)`.
#[derive(Debug, Clone, Copy)]
pub struct HodographParams {
    n: usize,
    c: f64,
    alpha: f64,
    beta: f64,
    epsilon: f64,
}

impl HodographParams {
    /// Validates `n ≥ 1`, `c > 0`, `β > 0`, `|ε| < 1/(2n+1)` (which makes the
    /// Jacobian factor positive — also asserted on a θ grid).
    pub fn new(n: usize, c: f64, alpha: f64, beta: f64, epsilon: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("need n ≥ 1".into()));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("need c > 0; got {c}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidArgument(format!("need β > 0; got {beta}")));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument("α must be finite".into()));
        }
        let eps_max = 1.0 / (2 * n + 1) as f64;
        if !(epsilon.abs() < eps_max) {
            return Err(Error::InvalidArgument(format!(
                "need |ε| < 1/(2n+1) = {eps_max}; got ε = {epsilon}"
            )));
        }
        let params = HodographParams { n, c, alpha, beta, epsilon };
        for j in 0..1024 {
            let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / 1024.0;
            if !(params.jacobian_factor(theta) > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "Jacobian factor not positive at θ = {theta}"
                )));
            }
        }
        Ok(params)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `m(θ) = √(1 + ε² + 2ε·cos(2(n+1)θ))`, so that `|𝒜(re^{iθ})| = r^β m(θ)`.
    pub fn modulus_factor(&self, theta: f64) -> f64 {
        let e = self.epsilon;
        (1.0 + e * e + 2.0 * e * (2.0 * (self.n as f64 + 1.0) * theta).cos()).sqrt()
    }

    /// `j(θ) = 1 − (2n+1)ε² − 2nε·cos(2(n+1)θ)`, the angular factor of the
    /// Jacobian determinant `J = β r^{2(β−1)} j(θ)`.
    pub fn jacobian_factor(&self, theta: f64) -> f64 {
        let e = self.epsilon;
        let nf = self.n as f64;
        1.0 - (2.0 * nf + 1.0) * e * e - 2.0 * nf * e * (2.0 * (nf + 1.0) * theta).cos()
    }
}

/// A point in the image of the hodograph map, with its modulus and the
/// Jacobian determinant of the map at its preimage.
#[derive(Debug, Clone, Copy)]
pub struct HodographPoint {
    /// `𝒜(re^{iθ})` as Cartesian coordinates.
    pub point: [f64; 2],
    /// `r^β · m(θ)`.
    pub modulus: f64,
    /// `β r^{2(β−1)} j(θ)` — the Cartesian area distortion, so
    /// `dA = jacobian · r dr dθ` in preimage polar coordinates.
    pub jacobian: f64,
}

/// Evaluate `𝒜` at `re^{iθ}`.
pub fn hodograph_map(params: &HodographParams, r: f64, theta: f64) -> Result<HodographPoint> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("need r > 0; got {r}")));
    }
    let n = params.n as f64;
    let rb = r.powf(params.beta);
    let phi = (2.0 * n + 1.0) * theta;
    let point = [
        rb * (theta.cos() + params.epsilon * phi.cos()),
        rb * (theta.sin() - params.epsilon * phi.sin()),
    ];
    Ok(HodographPoint {
        point,
        modulus: rb * params.modulus_factor(theta),
        jacobian: params.beta * r.powf(2.0 * (params.beta - 1.0)) * params.jacobian_factor(theta),
    })
}

/// The integral `∫_{B_R} J_p(𝔄) dA` pushed to the preimage of the ball, with
/// its refinement history.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HodographIntegral {
    /// The (near-zero) value of the signed integral.
    pub value: f64,
    /// `∫_{B_R} |J_p(𝔄)| dA`, the natural scale for judging `value`.
    pub abs_integral: f64,
    /// `(angular nodes, signed value)` per refinement rung.
    pub history: Vec<(usize, f64)>,
    /// Whether the last doubling changed the value by ≤ the internal target.
    pub converged: bool,
}

/// Compute `∫_{B_R} J_p(𝔄) dA` by the exact change of variables to the
/// preimage domain `{(r,θ) : r^β m(θ) < R}`:
///
/// ```text
///   c^{p−1} β ∫₀^{2π} J_p(cos((n+1)θ)) j(θ) · (R/m(θ))^{E/β} / E dθ,
///   E = α(p−1) + 2β  (must be positive for radial integrability),
/// ```
///
/// the radial factor being closed-form. The angular rule uses node counts
/// divisible by `2(n+1)` so the node set is closed under the reflection
/// `θ ↦ π/(n+1) − θ` that makes the exact integral vanish; the returned
/// `value` is then a pure roundoff residual, and the history across
/// doublings demonstrates that it stays one.
pub fn mvf_of_a(params: &HodographParams, p: &PExponent, radius: f64) -> Result<HodographIntegral> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!("need R > 0; got {radius}")));
    }
    let exponent = params.alpha * p.pm1() + 2.0 * params.beta;
    if !(exponent > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radial integral diverges: α(p−1) + 2β = {exponent} ≤ 0"
        )));
    }
    let n = params.n as f64;
    let front = params.c.powf(p.pm1()) * params.beta / exponent;
    let angular = |theta: f64| -> (f64, f64) {
        let m = params.modulus_factor(theta);
        let j = params.jacobian_factor(theta);
        let radial = (radius / m).powf(exponent / params.beta);
        let core = p.jp(((n + 1.0) * theta).cos()) * j * radial;
        (front * core, front * core.abs())
    };
    // Node ladder: multiples of lcm(4, 2(n+1)), doubling.
    let base = {
        let a = 2 * (params.n + 1);
        let mut b = a;
        while b % 4 != 0 {
            b += a;
        }
        b
    };
    let mut nodes = base * 4;
    let mut history: Vec<(usize, f64)> = Vec::new();
    let mut abs_integral = 0.0;
    let mut converged = false;
    let tau = std::f64::consts::TAU;
    for _ in 0..12 {
        let rule = SphereRule::new(2, nodes)?;
        debug_assert_eq!(rule.node_count(), nodes);
        let mut signed = 0.0f64;
        let mut absolute = 0.0f64;
        for i in 0..rule.node_count() {
            let om = rule.node(i);
            let theta = om[1].atan2(om[0]);
            let (s, a) = angular(theta);
            signed += s;
            absolute += a;
        }
        let signed = signed * tau / nodes as f64;
        let absolute = absolute * tau / nodes as f64;
        if !(signed.is_finite() && absolute.is_finite()) {
            return Err(Error::NonFiniteIntegrand(
                "hodograph angular integrand is not finite".into(),
            ));
        }
        abs_integral = absolute;
        if let Some(&(_, prev)) = history.last() {
            if (signed - prev).abs() <= 1e-12 * absolute.max(f64::MIN_POSITIVE) {
                history.push((nodes, signed));
                converged = true;
                break;
            }
        }
        history.push((nodes, signed));
        nodes *= 2;
    }
    Ok(HodographIntegral {
        value: history.last().unwrap().1,
        abs_integral,
        history,
        converged,
    })
}

/// Result of numerically inverting the hodograph map at one point.
#[derive(Debug, Clone, Copy)]
pub struct Inversion {
    pub r: f64,
    pub theta: f64,
    pub iterations: usize,
    /// `|𝒜(r,θ) − w|` at the returned point.
    pub residual: f64,
}

/// Solve `𝒜(r,θ) = w` by damped Newton from `r₀ = |w|^{1/β}`,
/// `θ₀ = atan2(w₂, w₁)`; the map is a diffeomorphism off the origin for
/// admissible ε, so the iteration is a spot-check utility, not a load-bearing
/// path (integrals use the exact change of variables instead).
pub fn invert_a(params: &HodographParams, w: [f64; 2], newton_tol: f64) -> Result<Inversion> {
    let wn = (w[0] * w[0] + w[1] * w[1]).sqrt();
    if !(wn > 0.0 && wn.is_finite()) {
        return Err(Error::InvalidArgument(
            "cannot invert at w = 0 (the map is singular there)".into(),
        ));
    }
    if !(newton_tol > 0.0) {
        return Err(Error::InvalidArgument("newton_tol must be positive".into()));
    }
    let n = params.n as f64;
    let eps = params.epsilon;
    let beta = params.beta;
    let value = |r: f64, th: f64| -> [f64; 2] {
        let rb = r.powf(beta);
        let phi = (2.0 * n + 1.0) * th;
        [
            rb * (th.cos() + eps * phi.cos()) - w[0],
            rb * (th.sin() - eps * phi.sin()) - w[1],
        ]
    };
    let norm = |f: [f64; 2]| (f[0] * f[0] + f[1] * f[1]).sqrt();
    let mut r = wn.powf(1.0 / beta);
    let mut th = w[1].atan2(w[0]);
    let mut f = value(r, th);
    let mut fn_ = norm(f);
    for it in 0..100 {
        if fn_ <= newton_tol {
            return Ok(Inversion { r, theta: th, iterations: it, residual: fn_ });
        }
        let rb = r.powf(beta);
        let rbm = beta * r.powf(beta - 1.0);
        let phi = (2.0 * n + 1.0) * th;
        // Columns: ∂/∂r, ∂/∂θ of (𝒜 − w).
        let j00 = rbm * (th.cos() + eps * phi.cos());
        let j10 = rbm * (th.sin() - eps * phi.sin());
        let j01 = rb * (-th.sin() - eps * (2.0 * n + 1.0) * phi.sin());
        let j11 = rb * (th.cos() - eps * (2.0 * n + 1.0) * phi.cos());
        let det = j00 * j11 - j01 * j10;
        if det.abs() < 1e-300 {
            break;
        }
        let dr = (f[0] * j11 - f[1] * j01) / det;
        let dth = (j00 * f[1] - j10 * f[0]) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let rc = r - lambda * dr;
            let tc = th - lambda * dth;
            if rc > 0.0 {
                let fc = value(rc, tc);
                let fcn = norm(fc);
                if fcn < fn_ {
                    r = rc;
                    th = tc;
                    f = fc;
                    fn_ = fcn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if fn_ <= newton_tol {
        return Ok(Inversion { r, theta: th, iterations: 100, residual: fn_ });
    }
    let last = value(r, th);
    Err(Error::NewtonDiverged {
        target: w.to_vec(),
        last: vec![last[0] + w[0], last[1] + w[1]],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lambda_at_p_two_is_k_minus_n_scaled() {
        // n=1, p=2: λ_k = ½(−2 + 2k) = k − 1 exactly.
        for k in 1..=6 {
            assert_eq!(lambda_kn(1, k, 2.0), (k - 1) as f64);
        }
    }

    #[test]
    fn lambda_frozen_value() {
        // n=2, k=4, p=1.5: ½(−3 + √33).
        let want = 0.5 * (-3.0 + 33f64.sqrt());
        assert_eq!(lambda_kn(2, 4, 1.5), want);
        assert!((want - 1.372_281_323_269_014_3).abs() < 1e-15);
    }

    #[test]
    fn lambda_is_strictly_increasing_in_k() {
        for n in 1..=3 {
            for &p in &[1.05, 1.2, 1.5, 1.9] {
                for k in 1..6 {
                    assert!(
                        lambda_kn(n, k + 1, p) > lambda_kn(n, k, p),
                        "n={n} k={k} p={p}"
                    );
                }
            }
        }
    }

    #[test]
    fn exponent_table_invariants_hold_in_singular_range() {
        for n in 1..=3 {
            for &p in &[1.05, 1.3, 1.7, 1.95] {
                let t = ExponentTable::new(n, p);
                assert!(t.lambda_n2 > t.lambda_n1 && t.lambda_n1 > 0.0, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn gamma_at_two_is_three() {
        assert_eq!(gamma_exponent(1, 2.0), 3.0);
        // And 3 > 2 = p/(p−1): the flag holds strictly at p = 2.
        assert!(ExponentTable::new(1, 2.0).gamma_exceeds_threshold);
    }

    #[test]
    fn gamma_frozen_value() {
        // n=1, p=1.2: λ₂ = ½(−1.2+√3.84), λ₃ = 0.8 (frozen independently).
        assert!((lambda_kn(1, 3, 1.2) - 0.8).abs() < 1e-15);
        assert!((gamma_exponent(1, 1.2) - 6.546_122_392_302_057).abs() < 1e-12);
        // γ − 1 > 1/(p−1) = 5 in the flagged region.
        assert!(gamma_exponent(1, 1.2) - 1.0 > 5.0);
    }

    #[test]
    fn p0_roots_match_frozen_bisection() {
        let p1 = find_p0(1, (1.001, 1.999), 1e-10).unwrap();
        assert!((p1 - 1.117_299_191_162_192_7).abs() < 1e-8, "{p1}");
        let p2 = find_p0(2, (1.001, 1.999), 1e-10).unwrap();
        assert!((p2 - 1.051_852_416_400_639_5).abs() < 1e-8, "{p2}");
    }

    #[test]
    fn inequality_flag_flips_exactly_at_the_root() {
        let p0 = find_p0(1, (1.001, 1.999), 1e-10).unwrap();
        assert!(ExponentTable::new(1, p0 + 1e-4).gamma_exceeds_threshold);
        assert!(!ExponentTable::new(1, p0 - 1e-4).gamma_exceeds_threshold);
        for &p in &[1.2, 1.5, 1.9] {
            assert!(ExponentTable::new(1, p).gamma_exceeds_threshold);
        }
    }

    #[test]
    fn find_p0_reports_brackets_without_sign_change() {
        assert!(matches!(
            find_p0(1, (1.5, 1.9), 1e-8),
            Err(Error::BracketFailure { .. })
        ));
    }

    #[test]
    fn eta_remark_for_large_n() {
        // For n ≥ 3 the auxiliary exponent satisfies 1/η_n < p−1 throughout
        // (1,2); for n=1 it fails at e.g. p=1.5 (0.686 > 0.5).
        for n in 3..=5 {
            for &p in &[1.01, 1.2, 1.5, 1.9] {
                assert!(eta_reciprocal(n, p) < p - 1.0, "n={n} p={p}");
            }
        }
        assert!(eta_reciprocal(1, 1.5) > 0.5);
        assert!((eta_reciprocal(1, 1.5) - 0.686_140_661_634_507_2).abs() < 1e-15);
    }

    fn params(n: usize, eps: f64) -> HodographParams {
        HodographParams::new(n, 1.3, 0.8, 1.4, eps).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(HodographParams::new(0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(HodographParams::new(1, 0.0, 1.0, 1.0, 0.0).is_err());
        assert!(HodographParams::new(1, 1.0, 1.0, -1.0, 0.0).is_err());
        // |ε| = 1/(2n+1) exactly is out.
        assert!(HodographParams::new(1, 1.0, 1.0, 1.0, 1.0 / 3.0).is_err());
        assert!(HodographParams::new(1, 1.0, 1.0, 1.0, 0.33).is_ok());
    }

    #[test]
    fn map_modulus_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x9a31);
        for _ in 0..200 {
            let n = rng.gen_range(1..=3);
            let eps_max = 1.0 / (2 * n + 1) as f64;
            let pp = params(n, rng.gen_range(-0.99..0.99) * eps_max);
            let r = rng.gen_range(0.2..2.0);
            let th = rng.gen_range(-3.1..3.1);
            let pt = hodograph_map(&pp, r, th).unwrap();
            let modulus = (pt.point[0] * pt.point[0] + pt.point[1] * pt.point[1]).sqrt();
            assert!(
                (modulus - pt.modulus).abs() <= 1e-12 * pt.modulus.max(1.0),
                "n={n} r={r} θ={th}: {} vs {}",
                modulus,
                pt.modulus
            );
        }
    }

    #[test]
    fn map_degenerate_conformal_case() {
        let pp = params(2, 0.0);
        let pt = hodograph_map(&pp, 0.7, 1.1).unwrap();
        assert!((pt.modulus - 0.7f64.powf(1.4)).abs() < 1e-15);
        assert!((pt.jacobian - 1.4 * 0.7f64.powf(0.8)).abs() < 1e-14);
        // m(0) = 1 + ε at θ = 0.
        let pe = params(1, 0.2);
        assert!((pe.modulus_factor(0.0) - 1.2).abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences_in_cartesian_coordinates() {
        // J is the Cartesian area distortion: compare with a central
        // difference of the map w(x) at x = (r cos θ, r sin θ).
        let mut rng = ChaCha8Rng::seed_from_u64(0x77aa);
        for _ in 0..50 {
            let n = rng.gen_range(1..=2);
            let eps_max = 1.0 / (2 * n + 1) as f64;
            let pp = params(n, rng.gen_range(-0.9..0.9) * eps_max);
            let r = rng.gen_range(0.5..1.5);
            let th: f64 = rng.gen_range(-3.0..3.0);
            let x = [r * th.cos(), r * th.sin()];
            let map_xy = |q: [f64; 2]| {
                let rr = (q[0] * q[0] + q[1] * q[1]).sqrt();
                let tt = q[1].atan2(q[0]);
                hodograph_map(&pp, rr, tt).unwrap().point
            };
            let h = 1e-6;
            let mut jac = [[0.0; 2]; 2];
            for col in 0..2 {
                let mut xp = x;
                let mut xm = x;
                xp[col] += h;
                xm[col] -= h;
                let (wp, wm) = (map_xy(xp), map_xy(xm));
                jac[0][col] = (wp[0] - wm[0]) / (2.0 * h);
                jac[1][col] = (wp[1] - wm[1]) / (2.0 * h);
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            let want = hodograph_map(&pp, r, th).unwrap().jacobian;
            assert!(
                (det - want).abs() <= 1e-6 * want.abs().max(1.0),
                "n={n} r={r} θ={th}: FD {det} vs formula {want}"
            );
        }
    }

    #[test]
    fn jacobian_factor_positive_on_dense_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x51ab);
        for _ in 0..100 {
            let n = rng.gen_range(1..=3);
            let eps_max = 1.0 / (2 * n + 1) as f64;
            let pp = params(n, rng.gen_range(-0.999..0.999) * eps_max);
            for j in 0..10_000 {
                let th = std::f64::consts::TAU * (j as f64 + 0.5) / 10_000.0;
                assert!(pp.jacobian_factor(th) > 0.0, "n={n} ε={} θ={th}", pp.epsilon());
            }
        }
    }

    #[test]
    fn mean_value_of_hodograph_profile_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xbead);
        for trial in 0..20 {
            let n = rng.gen_range(1..=2);
            let eps_max = 1.0 / (2 * n + 1) as f64;
            let pp = HodographParams::new(
                n,
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.8..2.0),
                rng.gen_range(-0.95..0.95) * eps_max,
            )
            .unwrap();
            let p = PExponent::new(rng.gen_range(1.1..1.9)).unwrap();
            let out = mvf_of_a(&pp, &p, rng.gen_range(0.5..1.5)).unwrap();
            assert!(
                out.value.abs() <= 1e-8 * out.abs_integral,
                "trial {trial}: {} vs scale {}",
                out.value,
                out.abs_integral
            );
            assert!(out.converged);
            // Refinement stability: the last doubling moved the value by
            // less than 1e−10 × scale.
            let k = out.history.len();
            assert!(k >= 2);
            let delta = (out.history[k - 1].1 - out.history[k - 2].1).abs();
            assert!(delta <= 1e-10 * out.abs_integral, "{delta}");
        }
    }

    #[test]
    fn mean_value_vanishes_under_sign_flip_of_epsilon() {
        let p = PExponent::new(1.5).unwrap();
        for &eps in &[0.25, -0.25] {
            let pp = HodographParams::new(1, 1.0, 1.0, 1.2, eps).unwrap();
            let out = mvf_of_a(&pp, &p, 1.0).unwrap();
            assert!(out.value.abs() <= 1e-8 * out.abs_integral, "ε={eps}");
        }
    }

    #[test]
    fn mean_value_rejects_divergent_radial_exponent() {
        // α(p−1) + 2β ≤ 0.
        let pp = HodographParams::new(1, 1.0, -10.0, 0.9, 0.1).unwrap();
        let p = PExponent::new(1.5).unwrap();
        assert!(matches!(
            mvf_of_a(&pp, &p, 1.0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn inversion_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1ce);
        for _ in 0..100 {
            let n = rng.gen_range(1..=3);
            let eps_max = 1.0 / (2 * n + 1) as f64;
            let pp = params(n, rng.gen_range(-0.9..0.9) * eps_max);
            let r = rng.gen_range(0.3..2.0);
            let th: f64 = rng.gen_range(-3.1..3.1);
            let w = hodograph_map(&pp, r, th).unwrap().point;
            let inv = invert_a(&pp, w, 1e-13).unwrap();
            let dth = (inv.theta - th).rem_euclid(std::f64::consts::TAU);
            let dth = dth.min(std::f64::consts::TAU - dth);
            assert!(
                (inv.r - r).abs() < 1e-9 && dth < 1e-9,
                "({r},{th}) -> ({},{})",
                inv.r,
                inv.theta
            );
        }
    }

    #[test]
    fn inversion_degenerate_case_is_immediate() {
        let pp = params(1, 0.0);
        let w = hodograph_map(&pp, 0.9, 0.4).unwrap().point;
        let inv = invert_a(&pp, w, 1e-10).unwrap();
        assert!(inv.iterations <= 2, "{}", inv.iterations);
    }

    #[test]
    fn inversion_rejects_origin() {
        let pp = params(1, 0.1);
        assert!(invert_a(&pp, [0.0, 0.0], 1e-10).is_err());
    }
}
