//! Smooth test functions with analytic derivatives, and the pointwise
//! p-Laplacian they feed.
//!
//! Consistency experiments compare mean value averages of a function against
//! its p-Laplacian at a point, so each test function carries closed-form
//! gradient and Hessian. The operator is evaluated in expanded form
//!
//! ```text
//!     Δ_p φ = |∇φ|^{p-2} ( Δφ + (p-2) ⟨D²φ ĝ, ĝ⟩ ),     ĝ = ∇φ/|∇φ|,
//! ```
//!
//! which for `p < 2` divides by a power of the gradient norm: below
//! [`GRADIENT_FLOOR`] the value is reported as [`Error::SingularGradient`]
//! rather than an arbitrary large number. For `p = 2` the formula reduces to
//! the Laplacian (Hessian trace) and for `p > 2` it extends continuously by
//! zero across critical points.
//!
//! Test functions also expose a cancellation-free `increment` evaluation of
//! `φ(x+y) - φ(x)`. Mean value averages need increments of size `~r` at
//! points where `φ` itself is of size one; the naive subtraction loses five
//! digits at the smallest radii used by the consistency sweeps, masking the
//! very error decay under study. Radial powers therefore compute the
//! increment through `expm1`/`ln_1p` of `(|x+y-z|² - |x-z|²)/|x-z|²`, whose
//! numerator `2⟨x-z, y⟩ + |y|²` is exact to round-off.

use crate::error::{Error, Result};
use crate::exponent::PExponent;

/// Gradient norms below this floor count as critical points: the expanded
/// p-Laplacian formula is singular there for `p < 2`.
pub const GRADIENT_FLOOR: f64 = 1e-10;

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type IncrementFn = Box<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// A C² scalar function with analytic gradient and Hessian, valid on a ball.
pub struct SmoothTestFunction {
    dim: usize,
    label: String,
    base: Vec<f64>,
    radius: f64,
    value: ValueFn,
    gradient: VectorFn,
    /// Row-major `dim × dim` symmetric matrix.
    hessian: VectorFn,
    increment: Option<IncrementFn>,
}

impl std::fmt::Debug for SmoothTestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothTestFunction")
            .field("dim", &self.dim)
            .field("label", &self.label)
            .field("base", &self.base)
            .field("radius", &self.radius)
            .finish()
    }
}

impl SmoothTestFunction {
    /// `φ(x) = ⟨coeffs, x⟩ + offset`, valid everywhere.
    pub fn linear(coeffs: Vec<f64>, offset: f64) -> Self {
        let dim = coeffs.len();
        let c = coeffs.clone();
        let c2 = coeffs.clone();
        SmoothTestFunction {
            dim,
            label: "linear".into(),
            base: vec![0.0; dim],
            radius: f64::INFINITY,
            value: Box::new(move |x| {
                dot(&c, x) + offset
            }),
            gradient: Box::new(move |_| c2.clone()),
            hessian: Box::new(move |_| vec![0.0; dim * dim]),
            increment: Some(Box::new(move |_, y| dot(&coeffs, y))),
        }
    }

    /// `φ(x) = ½ xᵀ A x + ⟨b, x⟩ + c` with `A` symmetric (row-major).
    pub fn quadratic(a: Vec<f64>, b: Vec<f64>, c: f64) -> Result<Self> {
        let dim = b.len();
        if a.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "quadratic form size {} does not match dimension {dim}",
                a.len()
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                if (a[i * dim + j] - a[j * dim + i]).abs()
                    > 1e-12 * a[i * dim + j].abs().max(1.0)
                {
                    return Err(Error::InvalidArgument(
                        "quadratic form must be symmetric".into(),
                    ));
                }
            }
        }
        let a_v = a.clone();
        let a_g = a.clone();
        let a_h = a.clone();
        let a_i = a;
        let b_v = b.clone();
        let b_g = b.clone();
        let b_i = b;
        Ok(SmoothTestFunction {
            dim,
            label: "quadratic".into(),
            base: vec![0.0; dim],
            radius: f64::INFINITY,
            value: Box::new(move |x| 0.5 * quad_form(&a_v, x, x) + dot(&b_v, x) + c),
            gradient: Box::new(move |x| mat_vec(&a_g, x, &b_g)),
            hessian: Box::new(move |_| a_h.clone()),
            increment: Some(Box::new(move |x, y| {
                // g(x)·y + ½ yᵀAy, exact up to round-off in each term.
                let mut s = 0.5 * quad_form(&a_i, y, y);
                for i in 0..y.len() {
                    let mut gi = b_i[i];
                    for j in 0..y.len() {
                        gi += a_i[i * y.len() + j] * x[j];
                    }
                    s += gi * y[i];
                }
                s
            })),
        })
    }

    /// `φ(x) = |x - center|^exponent`, valid on the ball
    /// `|x - base| ≤ radius`, which must stay clear of the center whenever
    /// the power is singular there (any exponent that is not an even
    /// positive integer).
    pub fn radial_power(
        center: Vec<f64>,
        exponent: f64,
        base: Vec<f64>,
        radius: f64,
    ) -> Result<Self> {
        let dim = center.len();
        if base.len() != dim {
            return Err(Error::InvalidArgument(
                "base point dimension does not match center".into(),
            ));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument("validity radius must be positive".into()));
        }
        let even_integer = exponent > 0.0
            && exponent.fract() == 0.0
            && (exponent as i64) % 2 == 0;
        let sep = dist(&base, &center);
        if !even_integer && sep <= radius {
            return Err(Error::InvalidArgument(format!(
                "validity ball (radius {radius}) reaches the singular center \
                 (distance {sep}) of |x-z|^{exponent}"
            )));
        }
        let s = exponent;
        let c_v = center.clone();
        let c_g = center.clone();
        let c_h = center.clone();
        let c_i = center;
        Ok(SmoothTestFunction {
            dim,
            label: format!("radial|x-z|^{exponent}"),
            base,
            radius,
            value: Box::new(move |x| norm2_sq(x, &c_v).powf(0.5 * s)),
            gradient: Box::new(move |x| {
                let a2 = norm2_sq(x, &c_g);
                let f = s * a2.powf(0.5 * s - 1.0);
                (0..x.len()).map(|i| f * (x[i] - c_g[i])).collect()
            }),
            hessian: Box::new(move |x| {
                let d = x.len();
                let a2 = norm2_sq(x, &c_h);
                let f1 = s * a2.powf(0.5 * s - 1.0);
                let f2 = s * (s - 2.0) * a2.powf(0.5 * s - 2.0);
                let mut h = vec![0.0; d * d];
                for i in 0..d {
                    let wi = x[i] - c_h[i];
                    for j in 0..d {
                        let wj = x[j] - c_h[j];
                        h[i * d + j] = f2 * wi * wj + if i == j { f1 } else { 0.0 };
                    }
                }
                h
            }),
            increment: Some(Box::new(move |x, y| {
                // |x+y-z|^s - |x-z|^s = a^s expm1((s/2) ln(1 + u/a²)) with
                // u = 2⟨x-z, y⟩ + |y|² — no subtraction of close values.
                let a2 = norm2_sq(x, &c_i);
                let mut u = 0.0;
                for i in 0..x.len() {
                    u += (2.0 * (x[i] - c_i[i]) + y[i]) * y[i];
                }
                let ratio = u / a2;
                if ratio <= -1.0 {
                    // x+y lands on (or numerically past) the center.
                    return if s > 0.0 { -a2.powf(0.5 * s) } else { f64::INFINITY };
                }
                a2.powf(0.5 * s) * (0.5 * s * ratio.ln_1p()).exp_m1()
            })),
        })
    }

    /// The radial power `|x|^{(p-d)/(p-1)}` that is p-harmonic away from the
    /// origin, on a validity ball that must exclude the origin.
    pub fn fundamental(dim: usize, p: &PExponent, base: Vec<f64>, radius: f64) -> Result<Self> {
        let s = (p.p() - dim as f64) / p.pm1();
        if s == 0.0 {
            return Err(Error::InvalidArgument(
                "p = d has a logarithmic profile, not a radial power".into(),
            ));
        }
        let mut f = SmoothTestFunction::radial_power(vec![0.0; dim], s, base, radius)?;
        f.label = format!("fundamental p={}", p.p());
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Center of the validity ball.
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// Radius of the validity ball.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Whether `x` lies inside the validity ball.
    pub fn contains(&self, x: &[f64]) -> bool {
        dist(x, &self.base) <= self.radius
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.gradient)(x)
    }

    /// Row-major `dim × dim` Hessian.
    pub fn hessian(&self, x: &[f64]) -> Vec<f64> {
        (self.hessian)(x)
    }

    /// `φ(x+y) - φ(x)`, through the cancellation-free path when available.
    pub fn increment(&self, x: &[f64], y: &[f64]) -> f64 {
        match &self.increment {
            Some(inc) => inc(x, y),
            None => {
                let xp: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
                (self.value)(&xp) - (self.value)(x)
            }
        }
    }
}

/// The p-Laplacian of `f` at `x` in expanded (non-divergence) form.
///
/// Returns [`Error::SingularGradient`] when `p < 2` and `|∇f(x)|` is below
/// [`GRADIENT_FLOOR`]; for `p = 2` the critical-point value is the Hessian
/// trace and for `p > 2` it is zero (the continuous extension).
pub fn p_laplacian(f: &SmoothTestFunction, p: &PExponent, x: &[f64]) -> Result<f64> {
    if !f.contains(x) {
        return Err(Error::InvalidArgument(format!(
            "point {x:?} lies outside the validity ball of `{}`",
            f.label()
        )));
    }
    let d = f.dim();
    let g = f.gradient(x);
    let h = f.hessian(x);
    let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let lap: f64 = (0..d).map(|i| h[i * d + i]).sum();
    if gn <= GRADIENT_FLOOR {
        return if p.p() < 2.0 {
            Err(Error::SingularGradient { gradient_norm: gn })
        } else if p.p() == 2.0 {
            Ok(lap)
        } else {
            Ok(0.0)
        };
    }
    // ⟨D²f ĝ, ĝ⟩ with the unit gradient direction.
    let mut quad = 0.0;
    for i in 0..d {
        for j in 0..d {
            quad += h[i * d + j] * g[i] * g[j];
        }
    }
    quad /= gn * gn;
    let scale = ((p.p() - 2.0) * gn.ln()).exp();
    Ok(scale * (lap + (p.p() - 2.0) * quad))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn norm2_sq(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn quad_form(a: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let d = x.len();
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            s += a[i * d + j] * x[i] * y[j];
        }
    }
    s
}

fn mat_vec(a: &[f64], x: &[f64], b: &[f64]) -> Vec<f64> {
    let d = x.len();
    (0..d)
        .map(|i| {
            let mut s = b[i];
            for j in 0..d {
                s += a[i * d + j] * x[j];
            }
            s
        })
        .collect()
}
