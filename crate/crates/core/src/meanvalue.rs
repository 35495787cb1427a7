//! The asymptotic mean value operators and their consistency experiments.
//!
//! For an exponent `p`, radius `r`, and function `φ`, the sphere and ball
//! operators are
//!
//! ```text
//!     sphere:  (1/(C_{d,p} r^p)) ⨏_{∂B_r} J_p(φ(x+y) - φ(x)) dσ(y)
//!     ball:    (1/(D_{d,p} r^p)) ⨏_{B_r}  J_p(φ(x+y) - φ(x)) dy
//! ```
//!
//! and both converge to the p-Laplacian `Δ_p φ(x)` as `r → 0` (for `p < 2`
//! under the extra hypothesis `∇φ(x) ≠ 0`). The experiments here evaluate the
//! operators at finite radii and track the error against the analytic
//! `Δ_p φ(x)`, which is the quantitative content behind that limit.
//!
//! Two evaluation methods are offered. The fixed antipodal rule makes odd
//! increments cancel bit-exactly — linear functions give exactly zero — and
//! is cheap enough for property sweeps. The adaptive method concentrates
//! panels near the kinks of `J_p` (where the increment changes sign) and is
//! required for `p < 2` at small radii, where a fixed rule's error floor
//! masks the very decay under measurement.
//!
//! The increment `φ(x+y) - φ(x)` is of size `~r` while `φ` is of size one,
//! so at the smallest radii a naive subtraction costs five digits; pass a
//! [`SmoothTestFunction`] (whose increments are cancellation-free) rather
//! than a raw closure whenever the function is one of the built-in families.

use crate::constants::NormalizationConstants;
use crate::error::{Error, Result};
use crate::exponent::PExponent;
use crate::quadrature::{sphere_average_tight, BallRule, SphereRule};
use crate::quad1d;
use crate::testfn::{p_laplacian, SmoothTestFunction, GRADIENT_FLOOR};

/// Default radius schedule `{0.1·2^{-k}}`, spanning two decades without
/// pushing `r^p` division into underflow.
pub const DEFAULT_RADII: [f64; 5] = [0.1, 0.05, 0.025, 0.0125, 0.00625];

/// How a mean value operator evaluates its average.
#[derive(Debug, Clone, Copy)]
pub enum MvfMethod {
    /// Fixed antipodal product rule ([`SphereRule`]/[`BallRule`]); odd parts
    /// cancel bit-exactly. `resolution` as in the rule constructors.
    FixedRule { resolution: usize },
    /// Adaptive panels to absolute tolerance `abs_tol` **on the normalized
    /// operator value** (the inner integral tolerance is scaled by
    /// `C r^p` accordingly).
    Adaptive { abs_tol: f64, max_panels: usize },
}

impl Default for MvfMethod {
    fn default() -> Self {
        MvfMethod::Adaptive { abs_tol: 1e-9, max_panels: 40_000 }
    }
}

/// One row of a consistency experiment at radius `r`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MvfSample {
    pub r: f64,
    /// Sphere operator value.
    pub value_sphere: f64,
    /// Ball operator value.
    pub value_ball: f64,
    /// `Δ_p φ(x)`.
    pub reference: f64,
    pub error_sphere: f64,
    pub error_ball: f64,
}

fn check_point(k: &NormalizationConstants, x: &[f64]) -> Result<()> {
    if x.len() != k.dim {
        return Err(Error::InvalidArgument(format!(
            "point dimension {} does not match constants dimension {}",
            x.len(),
            k.dim
        )));
    }
    Ok(())
}

/// Average of `J_p ∘ inc` over the antipodal pair `{y, −y}`.
///
/// Spheres and balls are symmetric under `y ↦ −y`, so averaging the pair
/// leaves every average unchanged — but it cancels the odd part of the
/// increment analytically instead of numerically. Without it the quadrature
/// sums terms of size `(|∇φ| r)^{p−1}` that cancel down to an `O(rᵖ)`
/// result, and the summation roundoff `ε·Σ|J_p|` — a floor that grows like
/// `1/r` relative to the result — swamps the consistency error of smooth
/// fields at small radii. Paired terms already sit at the result's scale.
fn paired_jp<F: Fn(&[f64]) -> f64>(p: &PExponent, inc: &F, y: &[f64]) -> f64 {
    let mut ym = [0.0; 3];
    for (i, yi) in y.iter().enumerate() {
        ym[i] = -yi;
    }
    0.5 * (p.jp(inc(y)) + p.jp(inc(&ym[..y.len()])))
}

/// Sphere operator with an explicit increment closure `inc(y) = φ(x+y)-φ(x)`
/// (`y` is the actual offset, `|y| = r`).
fn sphere_operator<F: Fn(&[f64]) -> f64>(
    k: &NormalizationConstants,
    p: &PExponent,
    r: f64,
    inc: F,
    method: &MvfMethod,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let scale = k.c * r.powf(p.p());
    let scaled = |omega: &[f64]| {
        let mut y = [0.0; 3];
        for i in 0..k.dim {
            y[i] = r * omega[i];
        }
        paired_jp(p, &inc, &y[..k.dim])
    };
    let avg = match *method {
        MvfMethod::FixedRule { resolution } => {
            let rule = SphereRule::new(k.dim, resolution)?;
            let v = rule.average(scaled);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand(
                    "sphere operator integrand is not finite".into(),
                ));
            }
            v
        }
        MvfMethod::Adaptive { abs_tol, max_panels } => {
            sphere_average_tight(k.dim, scaled, abs_tol * scale, max_panels)?
        }
    };
    Ok(avg / scale)
}

/// Ball operator with an explicit increment closure; see [`sphere_operator`].
fn ball_operator<F: Fn(&[f64]) -> f64>(
    k: &NormalizationConstants,
    p: &PExponent,
    r: f64,
    inc: F,
    method: &MvfMethod,
) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let scale = k.d * r.powf(p.p());
    let scaled = |y_unit: &[f64]| {
        let mut y = [0.0; 3];
        for i in 0..k.dim {
            y[i] = r * y_unit[i];
        }
        paired_jp(p, &inc, &y[..k.dim])
    };
    let avg = match *method {
        MvfMethod::FixedRule { resolution } => {
            let rule = BallRule::new(k.dim, (resolution / 2).max(4), resolution)?;
            let v = rule.average(scaled);
            if !v.is_finite() {
                return Err(Error::NonFiniteIntegrand(
                    "ball operator integrand is not finite".into(),
                ));
            }
            v
        }
        MvfMethod::Adaptive { abs_tol, max_panels } => {
            // d·∫₀¹ ρ^{d-1} (sphere average at radius ρr) dρ, each shell by
            // the tight sphere quadrature.
            let d = k.dim as f64;
            let shell = |rho: f64| -> Result<f64> {
                sphere_average_tight(
                    k.dim,
                    |omega: &[f64]| {
                        let mut y = [0.0; 3];
                        for i in 0..k.dim {
                            y[i] = rho * r * omega[i];
                        }
                        paired_jp(p, &inc, &y[..k.dim])
                    },
                    0.2 * abs_tol * scale,
                    max_panels,
                )
            };
            // Shell failures abort the radial integral through NaN; keep
            // the first real error so the caller sees the cause rather than
            // the NaN symptom.
            let inner_err: std::cell::RefCell<Option<Error>> =
                std::cell::RefCell::new(None);
            let res = quad1d::integrate_adaptive(
                |rho| match shell(rho) {
                    Ok(v) => d * rho.powi(k.dim as i32 - 1) * v,
                    Err(e) => {
                        inner_err.borrow_mut().get_or_insert(e);
                        f64::NAN
                    }
                },
                0.0,
                1.0,
                0.5 * abs_tol * scale,
                max_panels,
            );
            match res {
                Ok(res) => res.value,
                Err(outer) => {
                    return Err(inner_err.into_inner().unwrap_or(outer));
                }
            }
        }
    };
    Ok(avg / scale)
}

/// Sphere operator on a raw value-only function.
pub fn mvf_sphere<F: Fn(&[f64]) -> f64>(
    k: &NormalizationConstants,
    p: &PExponent,
    phi: F,
    x: &[f64],
    r: f64,
    method: &MvfMethod,
) -> Result<f64> {
    check_point(k, x)?;
    let phix = phi(x);
    sphere_operator(
        k,
        p,
        r,
        |y| {
            let mut q = [0.0; 3];
            for i in 0..x.len() {
                q[i] = x[i] + y[i];
            }
            phi(&q[..x.len()]) - phix
        },
        method,
    )
}

/// Sphere operator on a [`SmoothTestFunction`], through its
/// cancellation-free increment.
pub fn mvf_sphere_test(
    k: &NormalizationConstants,
    p: &PExponent,
    f: &SmoothTestFunction,
    x: &[f64],
    r: f64,
    method: &MvfMethod,
) -> Result<f64> {
    check_point(k, x)?;
    check_validity(f, x, r)?;
    sphere_operator(k, p, r, |y| f.increment(x, y), method)
}

/// Ball operator on a raw value-only function.
pub fn mvf_ball<F: Fn(&[f64]) -> f64>(
    k: &NormalizationConstants,
    p: &PExponent,
    phi: F,
    x: &[f64],
    r: f64,
    method: &MvfMethod,
) -> Result<f64> {
    check_point(k, x)?;
    let phix = phi(x);
    ball_operator(
        k,
        p,
        r,
        |y| {
            let mut q = [0.0; 3];
            for i in 0..x.len() {
                q[i] = x[i] + y[i];
            }
            phi(&q[..x.len()]) - phix
        },
        method,
    )
}

/// Ball operator on a [`SmoothTestFunction`].
pub fn mvf_ball_test(
    k: &NormalizationConstants,
    p: &PExponent,
    f: &SmoothTestFunction,
    x: &[f64],
    r: f64,
    method: &MvfMethod,
) -> Result<f64> {
    check_point(k, x)?;
    check_validity(f, x, r)?;
    ball_operator(k, p, r, |y| f.increment(x, y), method)
}

fn check_validity(f: &SmoothTestFunction, x: &[f64], r: f64) -> Result<()> {
    let base = f.base();
    let dist: f64 = x
        .iter()
        .zip(base)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if dist + r > f.radius() {
        return Err(Error::InvalidArgument(format!(
            "B_{r}({x:?}) leaves the validity ball of `{}`",
            f.label()
        )));
    }
    Ok(())
}

/// Evaluate both operators on `f` at `x` for each radius and compare against
/// the analytic `Δ_p f(x)`.
///
/// Radii must be strictly decreasing and stay inside the validity ball; for
/// `p < 2` the gradient at `x` must not vanish (the limit statement itself
/// requires it).
pub fn consistency_sweep(
    k: &NormalizationConstants,
    p: &PExponent,
    f: &SmoothTestFunction,
    x: &[f64],
    radii: &[f64],
    method: &MvfMethod,
) -> Result<Vec<MvfSample>> {
    if radii.is_empty() {
        return Err(Error::InvalidArgument("no radii given".into()));
    }
    for w in radii.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidArgument(
                "radii must be strictly decreasing".into(),
            ));
        }
    }
    if !(*radii.last().unwrap() > 0.0) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    check_validity(f, x, radii[0])?;
    if p.p() < 2.0 {
        let g = f.gradient(x);
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gn <= GRADIENT_FLOOR {
            return Err(Error::SingularGradient { gradient_norm: gn });
        }
    }
    let reference = p_laplacian(f, p, x)?;
    radii
        .iter()
        .map(|&r| {
            let value_sphere = mvf_sphere_test(k, p, f, x, r, method)?;
            let value_ball = mvf_ball_test(k, p, f, x, r, method)?;
            Ok(MvfSample {
                r,
                value_sphere,
                value_ball,
                reference,
                error_sphere: (value_sphere - reference).abs(),
                error_ball: (value_ball - reference).abs(),
            })
        })
        .collect()
}

/// The planar consistency battery: a quadratic with non-vanishing gradient,
/// the radial power `|x-z|^{p/(p-1)}` with constant p-Laplacian, and (for
/// `p ≠ d`) the p-harmonic fundamental radial power. Returns `(function,
/// evaluation point)` pairs compatible with [`DEFAULT_RADII`].
pub fn battery_cases(p: &PExponent) -> Result<Vec<(SmoothTestFunction, Vec<f64>)>> {
    let mut cases = vec![
        (
            SmoothTestFunction::quadratic(
                vec![1.2, 0.3, 0.3, -0.7],
                vec![1.0, 0.5],
                -0.2,
            )?,
            vec![0.3, -0.2],
        ),
        (
            SmoothTestFunction::radial_power(
                vec![2.0, 0.0],
                p.conjugate(),
                vec![0.0, 0.0],
                1.5,
            )?,
            vec![0.3, 0.1],
        ),
    ];
    if p.p() != 2.0 {
        cases.push((
            SmoothTestFunction::fundamental(2, p, vec![1.0, 0.0], 0.5)?,
            vec![1.0, 0.2],
        ));
    }
    Ok(cases)
}

/// Probe the un-normalized sphere average `(1/r^p)⨏_{∂B_r}J_p(φ(x+y)-φ(x))`
/// for `φ(x) = |x|^β` along a shrinking sequence of `(r, x)` pairs.
///
/// For `p ∈ (1,2)` and `β > p/(p-1)` the probe tends to zero even though the
/// gradient of `φ` degenerates at the origin — the quantitative form of the
/// critical-point behavior. The threshold `β = p/(p-1)` is excluded: there
/// the probe does *not* vanish.
pub fn critical_point_probe(
    p: &PExponent,
    beta: f64,
    sequence: &[(f64, Vec<f64>)],
    method: &MvfMethod,
) -> Result<Vec<f64>> {
    if p.p() >= 2.0 {
        return Err(Error::InvalidArgument(format!(
            "the probe targets the singular range p ∈ (1,2); got p = {}",
            p.p()
        )));
    }
    if beta <= p.conjugate() {
        return Err(Error::InvalidArgument(format!(
            "need β > p/(p-1) = {} (got β = {beta})",
            p.conjugate()
        )));
    }
    sequence
        .iter()
        .map(|(r, x)| {
            if !(*r > 0.0) {
                return Err(Error::InvalidArgument("radii must be positive".into()));
            }
            let dim = x.len();
            let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let phix = xnorm.powf(beta);
            let inc = |y: &[f64]| {
                let mut s = 0.0;
                for i in 0..dim {
                    let q = x[i] + y[i];
                    s += q * q;
                }
                s.sqrt().powf(beta) - phix
            };
            let scale = r.powf(p.p());
            let avg = match *method {
                MvfMethod::FixedRule { resolution } => {
                    let rule = SphereRule::new(dim, resolution)?;
                    let mut buf = [0.0; 3];
                    rule.average(|omega| {
                        for i in 0..dim {
                            buf[i] = r * omega[i];
                        }
                        p.jp(inc(&buf[..dim]))
                    })
                }
                MvfMethod::Adaptive { abs_tol, max_panels } => sphere_average_tight(
                    dim,
                    |omega| {
                        let mut buf = [0.0; 3];
                        for i in 0..dim {
                            buf[i] = r * omega[i];
                        }
                        p.jp(inc(&buf[..dim]))
                    },
                    abs_tol * scale,
                    max_panels,
                )?,
            };
            if !avg.is_finite() {
                return Err(Error::NonFiniteIntegrand(
                    "critical point probe integrand is not finite".into(),
                ));
            }
            Ok(avg / scale)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::compute_constants;

    fn consts(dim: usize, p: f64) -> (NormalizationConstants, PExponent) {
        let px = PExponent::new(p).unwrap();
        (compute_constants(dim, &px, 1e-13).unwrap(), px)
    }

    const FIXED: MvfMethod = MvfMethod::FixedRule { resolution: 32 };
    const TIGHT: MvfMethod = MvfMethod::Adaptive { abs_tol: 1e-10, max_panels: 40_000 };

    #[test]
    fn linear_functions_give_exactly_zero() {
        for p in [1.5, 2.0, 3.0, 4.4] {
            let (k, px) = consts(2, p);
            let f = SmoothTestFunction::linear(vec![2.0, -1.3], 0.4);
            let s = mvf_sphere_test(&k, &px, &f, &[0.2, 0.7], 0.3, &FIXED).unwrap();
            assert_eq!(s, 0.0, "p={p}");
            let b = mvf_ball_test(&k, &px, &f, &[0.2, 0.7], 0.3, &FIXED).unwrap();
            assert_eq!(b, 0.0, "p={p}");
        }
    }

    #[test]
    fn constant_functions_give_zero() {
        let (k, px) = consts(2, 2.5);
        let v = mvf_sphere(&k, &px, |_: &[f64]| 7.25, &[0.0, 0.0], 0.1, &FIXED).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn operator_is_p_homogeneous_in_phi() {
        // J_p(λt) = |λ|^{p-2}λ·J_p(t), so scaling φ scales the operator.
        let (k, px) = consts(2, 3.0);
        let phi = |x: &[f64]| (x[0] + 0.3).powi(2) - 0.7 * x[1] * (x[0] - 1.0);
        let x = [0.25, -0.4];
        let base = mvf_sphere(&k, &px, phi, &x, 0.15, &FIXED).unwrap();
        for lam in [-2.3f64, 0.5, 10.0] {
            let scaled = mvf_sphere(&k, &px, |y: &[f64]| lam * phi(y), &x, 0.15, &FIXED).unwrap();
            let want = lam.abs().powf(px.p() - 2.0) * lam * base;
            assert!(
                (scaled - want).abs() <= 1e-10 * want.abs().max(1e-30),
                "λ={lam}: {scaled} vs {want}"
            );
        }
    }

    #[test]
    fn operator_is_translation_invariant() {
        let (k, px) = consts(2, 2.5);
        let phi = |x: &[f64]| 0.5 * x[0] * x[0] - 0.3 * x[0] * x[1] + x[1] + 1.0;
        let v = [0.7, -1.1];
        let x = [0.2, 0.3];
        let xv = [x[0] + v[0], x[1] + v[1]];
        let a = mvf_sphere(&k, &px, phi, &x, 0.2, &FIXED).unwrap();
        let b = mvf_sphere(
            &k,
            &px,
            |y: &[f64]| phi(&[y[0] - v[0], y[1] - v[1]]),
            &xv,
            0.2,
            &FIXED,
        )
        .unwrap();
        assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn operator_is_monotone_in_phi() {
        // ψ = φ + nonnegative bump vanishing at x ⇒ every increment grows,
        // and J_p is increasing, so the value cannot decrease.
        let (k, px) = consts(2, 1.5);
        let phi = |y: &[f64]| (y[0] * 1.3 - y[1]).sin();
        let x = [0.1, 0.6];
        let bump = move |y: &[f64]| 0.3 * ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2));
        let lo = mvf_sphere(&k, &px, phi, &x, 0.2, &FIXED).unwrap();
        let hi = mvf_sphere(&k, &px, |y: &[f64]| phi(y) + bump(y), &x, 0.2, &FIXED).unwrap();
        assert!(hi >= lo - 1e-13 * lo.abs().max(1.0), "{hi} < {lo}");
    }

    #[test]
    fn quadratic_case_is_linear_in_phi() {
        let (k, px) = consts(2, 2.0);
        let f1 = |y: &[f64]| y[0] * y[0] + 0.2 * y[1];
        let f2 = |y: &[f64]| -0.5 * y[0] * y[1] + y[1] * y[1];
        let x = [0.3, 0.4];
        let a = mvf_sphere(&k, &px, f1, &x, 0.1, &FIXED).unwrap();
        let b = mvf_sphere(&k, &px, f2, &x, 0.1, &FIXED).unwrap();
        let ab = mvf_sphere(&k, &px, |y: &[f64]| f1(y) + f2(y), &x, 0.1, &FIXED).unwrap();
        assert!((ab - (a + b)).abs() < 1e-10 * (1.0 + ab.abs()));
    }

    #[test]
    fn radial_conjugate_power_recovers_constant_p_laplacian() {
        // Δ_p |x-z|^{p/(p-1)} = d(p/(p-1))^{p-1} = 4.5 for d=2, p=3; at
        // r = 1e-3 the operator should sit on it to a few digits.
        let (k, px) = consts(2, 3.0);
        let f = SmoothTestFunction::radial_power(
            vec![2.0, 0.0],
            1.5,
            vec![0.0, 0.0],
            1.5,
        )
        .unwrap();
        let x = [0.3, 0.1];
        let v = mvf_sphere_test(&k, &px, &f, &x, 1e-3, &TIGHT).unwrap();
        assert!((v - 4.5).abs() < 1e-3, "{v}");
        let vb = mvf_ball_test(&k, &px, &f, &x, 1e-3, &TIGHT).unwrap();
        assert!((vb - 4.5).abs() < 1e-3, "{vb}");
    }

    #[test]
    fn fundamental_solution_values_tend_to_zero() {
        let (k, px) = consts(2, 4.0);
        let f = SmoothTestFunction::fundamental(2, &px, vec![1.0, 0.0], 0.5).unwrap();
        let x = [1.0, 0.2];
        let samples = consistency_sweep(&k, &px, &f, &x, &DEFAULT_RADII, &TIGHT).unwrap();
        // The closed-form operator value is zero away from the pole; the
        // expanded expression evaluates to roundoff, not to exact 0.0.
        assert!(samples[0].reference.abs() < 1e-12, "{}", samples[0].reference);
        let first = samples.first().unwrap().value_sphere.abs();
        let last = samples.last().unwrap().value_sphere.abs();
        assert!(last < first, "{last} !< {first}");
        assert!(last < 1e-4, "{last}");
    }

    #[test]
    fn consistency_errors_decrease_for_radial_case() {
        let (k, px) = consts(2, 3.0);
        let f = SmoothTestFunction::radial_power(
            vec![2.0, 0.0],
            1.5,
            vec![0.0, 0.0],
            1.5,
        )
        .unwrap();
        let samples =
            consistency_sweep(&k, &px, &f, &[0.3, 0.1], &DEFAULT_RADII, &TIGHT).unwrap();
        for w in samples.windows(2) {
            assert!(
                w[1].error_sphere < w[0].error_sphere,
                "sphere errors not decreasing: {} -> {}",
                w[0].error_sphere,
                w[1].error_sphere
            );
            assert!(
                w[1].error_ball < w[0].error_ball,
                "ball errors not decreasing: {} -> {}",
                w[0].error_ball,
                w[1].error_ball
            );
        }
    }

    #[test]
    fn sweep_validates_inputs() {
        let (k, px) = consts(2, 1.5);
        let f = SmoothTestFunction::quadratic(vec![2.0, 0.0, 0.0, 1.0], vec![0.0, 0.0], 0.0)
            .unwrap();
        // Gradient vanishes at the origin and p < 2.
        let r = consistency_sweep(&k, &px, &f, &[0.0, 0.0], &[0.1, 0.05], &FIXED);
        assert!(matches!(r, Err(Error::SingularGradient { .. })));
        // Radii must decrease.
        let r = consistency_sweep(&k, &px, &f, &[0.3, 0.0], &[0.05, 0.1], &FIXED);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        // Validity ball violation.
        let g = SmoothTestFunction::radial_power(vec![2.0, 0.0], 1.5, vec![0.0, 0.0], 0.5)
            .unwrap();
        let r = consistency_sweep(&k, &px, &g, &[0.45, 0.0], &[0.1, 0.05], &FIXED);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn battery_has_expected_shape() {
        let p15 = PExponent::new(1.5).unwrap();
        assert_eq!(battery_cases(&p15).unwrap().len(), 3);
        let p2 = PExponent::new(2.0).unwrap();
        assert_eq!(battery_cases(&p2).unwrap().len(), 2);
    }

    #[test]
    fn critical_point_probe_decreases_at_origin() {
        // φ = |x|^3.5, p = 1.5: strictly above the critical growth
        // p/(p-1) = 3, probed at the degenerate critical point itself.
        let px = PExponent::new(1.5).unwrap();
        let seq = vec![(0.1, vec![0.0, 0.0]), (0.01, vec![0.0, 0.0])];
        let vals = critical_point_probe(&px, 3.5, &seq, &TIGHT).unwrap();
        assert!(
            vals[1].abs() < vals[0].abs(),
            "probe not decreasing: {vals:?}"
        );
    }

    #[test]
    fn critical_point_probe_decreases_along_shrinking_pairs() {
        let px = PExponent::new(1.5).unwrap();
        let seq: Vec<(f64, Vec<f64>)> = (1..=4)
            .map(|k| {
                let t = 10f64.powi(-k);
                (t, vec![t, 0.0])
            })
            .collect();
        let vals = critical_point_probe(&px, 4.0, &seq, &TIGHT).unwrap();
        for w in vals.windows(2) {
            assert!(w[1].abs() < w[0].abs(), "{vals:?}");
        }
    }

    #[test]
    fn critical_point_probe_validates_hypotheses() {
        let p3 = PExponent::new(3.0).unwrap();
        assert!(critical_point_probe(&p3, 4.0, &[], &FIXED).is_err());
        let p15 = PExponent::new(1.5).unwrap();
        // β = p/(p-1) = 3 exactly: the boundary case is excluded.
        assert!(critical_point_probe(&p15, 3.0, &[], &FIXED).is_err());
    }
}
