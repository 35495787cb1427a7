//! Surface and solid averages over spheres and balls.
//!
//! Everything here computes *averages* (integrals divided by the measure of
//! the domain), which is the normalization the mean value formulas use. Three
//! tiers serve different needs:
//!
//! * [`SphereRule`] / [`BallRule`] — fixed product rules, built once and
//!   reused in hot loops (the lattice solver evaluates a ball average inside
//!   every pointwise root solve). Antipodal nodes are stored as adjacent
//!   pairs and summed together, so odd integrands cancel bit-exactly:
//!   `w·(f(y) + f(-y))` is exactly zero when `f(-y) = -f(y)` to the last bit.
//!   This matters because the mean value operators measure exactly the tiny
//!   even residue left after the odd part of an increment cancels.
//! * [`sphere_average_adaptive`] — uniform node doubling until two successive
//!   rule values agree. Robust for periodic integrands with isolated kinks,
//!   where a fixed rule's accuracy is hard to predict.
//! * [`sphere_average_tight`] / [`ball_average_tight`] — adaptive
//!   Gauss–Legendre panels (see [`crate::quad1d`]) in spherical coordinates,
//!   for integrands with integrable singularities such as `|y₁|^{p-2}` with
//!   `p < 2` near the equator. Fixed rules stall at such singularities; the
//!   adaptive panels concentrate work there.
//!
//! Node placement avoids the coordinate axes: angles are offset
//! (`θ_j = 2π(j+½)/N` with `N` a multiple of 4), so no node ever has a zero
//! coordinate. Integrands of the form `|y₁|^{p-2}` with `p < 2` are then
//! evaluated only where they are finite.
//!
//! A Monte Carlo tier ([`mc_sphere_average`], [`mc_ball_average`]) provides a
//! statistically independent cross-check with a reported standard error.

use crate::error::{Error, Result};
use crate::quad1d::{self, GaussLegendre};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A quadrature rule for averages over the unit sphere `∂B₁ ⊂ ℝᵈ`,
/// `d ∈ {1, 2, 3}`, with antipodal nodes stored pairwise.
#[derive(Debug, Clone)]
pub struct SphereRule {
    dim: usize,
    /// Flat node coordinates: pair `k` occupies entries
    /// `[2k·dim, (2k+1)·dim)` and `[(2k+1)·dim, (2k+2)·dim)`, the second
    /// being the exact negation of the first.
    nodes: Vec<f64>,
    /// One weight per pair (each node of the pair carries this weight).
    pair_weights: Vec<f64>,
}

impl SphereRule {
    /// Build a rule with roughly `resolution` controlling the node count.
    ///
    /// * `d = 1`: the two-point rule `{±1}` with weights ½ (exact).
    /// * `d = 2`: `N` offset-uniform angles `θ_j = 2π(j+½)/N`, `N` rounded up
    ///   to a multiple of 4 and at least `max(4, resolution)`. Exact for
    ///   trigonometric polynomials of degree `< N`, and no node touches a
    ///   coordinate axis.
    /// * `d = 3`: tensor rule in polar angle and azimuth with first
    ///   coordinate as the pole. The polar variable `t = y₁` uses two
    ///   Gauss–Legendre panels `[-1,0]` and `[0,1]` with `resolution` nodes
    ///   each (so `|t|^{p-2}`-type kinks at the equator sit on a panel
    ///   boundary, never on a node), and the azimuth uses offset-uniform
    ///   angles like `d = 2`.
    pub fn new(dim: usize, resolution: usize) -> Result<Self> {
        match dim {
            1 => Ok(SphereRule {
                dim,
                nodes: vec![1.0, -1.0],
                pair_weights: vec![0.5],
            }),
            2 => {
                let n = round_up_multiple_of_4(resolution.max(4));
                let half = n / 2;
                let mut nodes = Vec::with_capacity(2 * n);
                let mut pair_weights = Vec::with_capacity(half);
                for j in 0..half {
                    let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / n as f64;
                    let (s, c) = theta.sin_cos();
                    nodes.extend_from_slice(&[c, s, -c, -s]);
                    pair_weights.push(1.0 / n as f64);
                }
                Ok(SphereRule { dim, nodes, pair_weights })
            }
            3 => {
                let n_polar = resolution.max(2);
                let m = round_up_multiple_of_4((2 * n_polar).max(4));
                let gl = GaussLegendre::new(n_polar);
                let mut nodes = Vec::with_capacity(2 * n_polar * m * 3);
                let mut pair_weights = Vec::with_capacity(n_polar * m);
                for (i, &xi) in gl.nodes().iter().enumerate() {
                    // Panel [0,1]; the mirror panel [-1,0] is covered by the
                    // antipodes.
                    let t = 0.5 * (xi + 1.0);
                    let wt = 0.5 * gl.weights()[i];
                    let s = (1.0 - t * t).sqrt();
                    for k in 0..m {
                        let phi =
                            2.0 * std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
                        let (sp, cp) = phi.sin_cos();
                        let y = [t, s * cp, s * sp];
                        nodes.extend_from_slice(&y);
                        nodes.extend_from_slice(&[-y[0], -y[1], -y[2]]);
                        // Surface average = ½∫dt · (1/2π)∫dφ; the panel with
                        // t < 0 is carried by the antipode of each node.
                        pair_weights.push(0.5 * wt / m as f64);
                    }
                }
                Ok(SphereRule { dim, nodes, pair_weights })
            }
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Total number of nodes (twice the pair count).
    pub fn node_count(&self) -> usize {
        2 * self.pair_weights.len()
    }

    /// Node `i` as a coordinate slice.
    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    /// Weight of node `i` (nodes of a pair share the weight).
    pub fn weight(&self, i: usize) -> f64 {
        self.pair_weights[i / 2]
    }

    /// Average of `f` over the unit sphere. Each antipodal pair is summed
    /// before scaling so odd integrands cancel exactly.
    pub fn average<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        let d = self.dim;
        let mut sum = 0.0;
        for (k, &w) in self.pair_weights.iter().enumerate() {
            let a = f(&self.nodes[2 * k * d..(2 * k + 1) * d]);
            let b = f(&self.nodes[(2 * k + 1) * d..(2 * k + 2) * d]);
            sum += w * (a + b);
        }
        sum
    }
}

/// A product rule for averages over the unit ball `B₁ ⊂ ℝᵈ`: Gauss–Legendre
/// in the radius against the weight `ρ^{d-1}`, tensored with a [`SphereRule`].
#[derive(Debug, Clone)]
pub struct BallRule {
    sphere: SphereRule,
    radii: Vec<f64>,
    radial_weights: Vec<f64>,
}

impl BallRule {
    /// `n_radial` Gauss–Legendre nodes on `(0,1)`; the radial weights are
    /// normalized to sum to one, so the rule averages constants exactly.
    pub fn new(dim: usize, n_radial: usize, sphere_resolution: usize) -> Result<Self> {
        if n_radial == 0 {
            return Err(Error::InvalidArgument(
                "ball rule needs at least one radial node".into(),
            ));
        }
        let sphere = SphereRule::new(dim, sphere_resolution)?;
        let gl = GaussLegendre::new(n_radial);
        let mut radii = Vec::with_capacity(n_radial);
        let mut radial_weights = Vec::with_capacity(n_radial);
        for (i, &xi) in gl.nodes().iter().enumerate() {
            let rho = 0.5 * (xi + 1.0);
            radii.push(rho);
            radial_weights.push(0.5 * gl.weights()[i] * rho.powi(dim as i32 - 1));
        }
        let total: f64 = radial_weights.iter().sum();
        for w in &mut radial_weights {
            *w /= total;
        }
        Ok(BallRule { sphere, radii, radial_weights })
    }

    pub fn dim(&self) -> usize {
        self.sphere.dim
    }

    pub fn node_count(&self) -> usize {
        self.radii.len() * self.sphere.node_count()
    }

    /// Average of `f` over the unit ball, antipodal pairs summed first on
    /// every radial shell.
    pub fn average<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        let d = self.sphere.dim;
        let mut y = vec![0.0; d];
        let mut sum = 0.0;
        for (q, &rho) in self.radii.iter().enumerate() {
            let mut shell = 0.0;
            for (k, &w) in self.sphere.pair_weights.iter().enumerate() {
                for i in 0..d {
                    y[i] = rho * self.sphere.nodes[2 * k * d + i];
                }
                let a = f(&y);
                for i in 0..d {
                    y[i] = rho * self.sphere.nodes[(2 * k + 1) * d + i];
                }
                let b = f(&y);
                shell += w * (a + b);
            }
            sum += self.radial_weights[q] * shell;
        }
        sum
    }

    /// Visit every node as `(offset_index, coordinates, weight)` without
    /// evaluating anything; lets callers precompute per-node data. Nodes of
    /// an antipodal pair on the same shell are visited consecutively.
    pub fn for_each_node<F: FnMut(&[f64], f64)>(&self, mut f: F) {
        let d = self.sphere.dim;
        let mut y = vec![0.0; d];
        for (q, &rho) in self.radii.iter().enumerate() {
            for (k, &w) in self.sphere.pair_weights.iter().enumerate() {
                for node in 0..2 {
                    for i in 0..d {
                        y[i] = rho * self.sphere.nodes[(2 * k + node) * d + i];
                    }
                    f(&y, self.radial_weights[q] * w);
                }
            }
        }
    }
}

fn round_up_multiple_of_4(n: usize) -> usize {
    n.div_ceil(4) * 4
}

/// Result of a node-doubling refinement.
#[derive(Debug, Clone)]
pub struct Refined {
    /// Last (finest) rule value.
    pub value: f64,
    /// `(node_count, value)` for every rule tried, coarsest first.
    pub history: Vec<(usize, f64)>,
    /// Whether the last two values agreed to the requested tolerance.
    pub converged: bool,
}

/// Average `f` over the unit sphere with node-doubling until two successive
/// rule values differ by at most `abs_tol`, or `max_nodes` would be exceeded
/// (then `converged = false`). Non-finite rule values abort with
/// [`Error::NonFiniteIntegrand`].
pub fn sphere_average_adaptive<F: FnMut(&[f64]) -> f64>(
    dim: usize,
    mut f: F,
    abs_tol: f64,
    max_nodes: usize,
) -> Result<Refined> {
    if dim == 1 {
        // The two-point rule is already exact.
        let rule = SphereRule::new(1, 1)?;
        let value = rule.average(&mut f);
        if !value.is_finite() {
            return Err(Error::NonFiniteIntegrand(
                "sphere average is not finite".into(),
            ));
        }
        return Ok(Refined { value, history: vec![(2, value)], converged: true });
    }
    let mut resolution = if dim == 2 { 16 } else { 4 };
    let mut history = Vec::new();
    let mut prev: Option<f64> = None;
    loop {
        let rule = SphereRule::new(dim, resolution)?;
        if rule.node_count() > max_nodes {
            let value = prev.unwrap_or(f64::NAN);
            return Ok(Refined { value, history, converged: false });
        }
        let value = rule.average(&mut f);
        if !value.is_finite() {
            return Err(Error::NonFiniteIntegrand(format!(
                "sphere average is not finite at {} nodes",
                rule.node_count()
            )));
        }
        history.push((rule.node_count(), value));
        if let Some(p) = prev {
            if (value - p).abs() <= abs_tol {
                return Ok(Refined { value, history, converged: true });
            }
        }
        prev = Some(value);
        resolution *= 2;
    }
}

/// Average of `f` over the unit sphere by adaptive panel quadrature in
/// spherical coordinates, to absolute tolerance `abs_tol`.
///
/// Handles integrable singularities (panel nodes never touch panel ends, so
/// `|y₁|^{p-2}` with `1 < p < 2` is never evaluated at its pole). For `d = 3`
/// the polar integral is split at the equator and the azimuthal average is
/// itself computed adaptively at each polar node.
///
/// The embedded-pair panel estimate under-reports the true error on panels
/// that end at an integrable singularity, so a single adaptive pass cannot be
/// trusted to `abs_tol` there. This routine therefore re-runs the whole
/// average at successively tighter working tolerances and only returns once
/// two successive passes agree to within `abs_tol / 2` — the difference of
/// full passes measures the true error directly.
pub fn sphere_average_tight<F>(dim: usize, f: F, abs_tol: f64, max_panels: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if dim == 1 {
        let v = 0.5 * (f(&[1.0]) + f(&[-1.0]));
        return if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand("sphere average is not finite".into()))
        };
    }
    let mut prev: Option<f64> = None;
    let mut achieved = f64::INFINITY;
    let mut work_tol = abs_tol / 4.0;
    for _ in 0..4 {
        let (value, abs_scale) = sphere_average_pass(dim, &f, work_tol, max_panels)?;
        // Callers may scale the tolerance below the rounding granularity of
        // the quadrature (e.g. normalized operators at tiny radii). The
        // granularity is relative to Σ|panel| — far above ulps of the result
        // when signed contributions cancel — and below it agreement is
        // indistinguishable from exact.
        let floor = 64.0 * f64::EPSILON * abs_scale.max(value.abs());
        if let Some(p) = prev {
            achieved = (value - p).abs();
            if achieved <= (0.5 * abs_tol).max(floor) {
                return Ok(value);
            }
        }
        prev = Some(value);
        work_tol = (work_tol / 4.0).max(0.25 * floor);
    }
    Err(Error::AccuracyNotReached { requested: abs_tol, achieved })
}

/// One adaptive pass of [`sphere_average_tight`] at working tolerance
/// `abs_tol`, for `d ∈ {2, 3}`. Returns the average and the roundoff scale
/// `Σ|panel| / measure` of the quadrature behind it.
fn sphere_average_pass<F>(dim: usize, f: &F, abs_tol: f64, max_panels: usize) -> Result<(f64, f64)>
where
    F: Fn(&[f64]) -> f64,
{
    match dim {
        2 => {
            let two_pi = 2.0 * std::f64::consts::PI;
            // Quarter splits keep the |cos θ|- and |sin θ|-type kinks on
            // panel boundaries.
            let mut total = 0.0;
            let mut abs_scale = 0.0;
            for q in 0..4 {
                let a = two_pi * q as f64 / 4.0;
                let b = two_pi * (q + 1) as f64 / 4.0;
                let r = quad1d::integrate_adaptive(
                    |theta| {
                        let (s, c) = theta.sin_cos();
                        f(&[c, s])
                    },
                    a,
                    b,
                    abs_tol * two_pi / 4.0,
                    max_panels,
                )?;
                total += r.value;
                abs_scale += r.abs_sum;
            }
            Ok((total / two_pi, abs_scale / two_pi))
        }
        3 => {
            let two_pi = 2.0 * std::f64::consts::PI;
            // ⨏ = ½ ∫_{-1}^{1} [ (1/2π) ∫_0^{2π} f dφ ] dt, split at t = 0.
            let azimuthal = |t: f64| -> Result<f64> {
                let s = (1.0 - t * t).max(0.0).sqrt();
                // Near an equatorial pole of f (e.g. |y₁|^{p-2} as t → 0) the
                // azimuthal integrand grows without bound, and a fixed
                // absolute tolerance would sit below the roundoff floor of
                // the panel sums. Probe the local magnitude and keep the
                // azimuthal tolerance relative to it; the extra error is
                // ~1e-13·|f|, which stays integrable whenever f itself is.
                let mut mag = 0.0f64;
                for k in 0..8 {
                    let phi = two_pi * k as f64 / 8.0;
                    let (sp, cp) = phi.sin_cos();
                    let v = f(&[t, s * cp, s * sp]);
                    if v.is_finite() {
                        mag = mag.max(v.abs());
                    }
                }
                let quarter_tol = (0.1 * abs_tol * two_pi / 4.0).max(1e-13 * mag * two_pi / 4.0);
                let mut total = 0.0;
                for q in 0..4 {
                    let a = two_pi * q as f64 / 4.0;
                    let b = two_pi * (q + 1) as f64 / 4.0;
                    let r = quad1d::integrate_adaptive(
                        |phi| {
                            let (sp, cp) = phi.sin_cos();
                            f(&[t, s * cp, s * sp])
                        },
                        a,
                        b,
                        quarter_tol,
                        max_panels,
                    )?;
                    total += r.value;
                }
                Ok(total / two_pi)
            };
            let mut total = 0.0;
            let mut abs_scale = 0.0;
            // Inner failures abort the outer integral through NaN (panels
            // reject non-finite values); the first real error is kept so the
            // caller sees the cause, not the NaN symptom.
            let inner_err: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
            for (a, b) in [(-1.0, 0.0), (0.0, 1.0)] {
                let r = quad1d::integrate_adaptive(
                    |t| match azimuthal(t) {
                        Ok(v) => v,
                        Err(e) => {
                            inner_err.borrow_mut().get_or_insert(e);
                            f64::NAN
                        }
                    },
                    a,
                    b,
                    0.45 * abs_tol,
                    max_panels,
                );
                match r {
                    Ok(r) => {
                        total += r.value;
                        abs_scale += r.abs_sum;
                    }
                    Err(outer) => return Err(inner_err.into_inner().unwrap_or(outer)),
                }
            }
            Ok((0.5 * total, 0.5 * abs_scale))
        }
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// Average of `f` over the unit ball by adaptive quadrature: an adaptive
/// radial integral of `d·ρ^{d-1}` times adaptive sphere averages.
pub fn ball_average_tight<F>(dim: usize, f: F, abs_tol: f64, max_panels: usize) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
{
    if dim == 0 || dim > 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    let d = dim as f64;
    let shell = |rho: f64| -> Result<f64> {
        sphere_average_tight(
            dim,
            |omega: &[f64]| {
                let mut y = [0.0; 3];
                for i in 0..dim {
                    y[i] = rho * omega[i];
                }
                f(&y[..dim])
            },
            0.2 * abs_tol,
            max_panels,
        )
    };
    // Shell failures abort the radial integral through NaN; keep the first
    // real error so the caller sees the cause, not the NaN symptom.
    let inner_err: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let r = quad1d::integrate_adaptive(
        |rho| match shell(rho) {
            Ok(v) => d * rho.powi(dim as i32 - 1) * v,
            Err(e) => {
                inner_err.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        1.0,
        0.5 * abs_tol,
        max_panels,
    );
    match r {
        Ok(r) => Ok(r.value),
        Err(outer) => Err(inner_err.into_inner().unwrap_or(outer)),
    }
}

/// Monte Carlo average of `f` over the unit sphere with `samples` draws.
/// Returns `(mean, standard_error)`. Deterministic for a fixed `seed`.
pub fn mc_sphere_average<F: FnMut(&[f64]) -> f64>(
    dim: usize,
    mut f: F,
    samples: u64,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; dim];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        unit_vector(&mut rng, &mut y);
        let v = f(&y);
        sum += v;
        sum_sq += v * v;
    }
    mean_and_se(sum, sum_sq, samples)
}

/// Monte Carlo average of `f` over the unit ball with `samples` draws.
/// Returns `(mean, standard_error)`. Deterministic for a fixed `seed`.
pub fn mc_ball_average<F: FnMut(&[f64]) -> f64>(
    dim: usize,
    mut f: F,
    samples: u64,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = vec![0.0; dim];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        unit_vector(&mut rng, &mut y);
        let rho: f64 = rng.gen::<f64>().powf(1.0 / dim as f64);
        for c in y.iter_mut() {
            *c *= rho;
        }
        let v = f(&y);
        sum += v;
        sum_sq += v * v;
    }
    mean_and_se(sum, sum_sq, samples)
}

fn mean_and_se(sum: f64, sum_sq: f64, n: u64) -> (f64, f64) {
    let n = n as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    (mean, (var / n).sqrt())
}

/// Uniform direction via normalized Gaussians (Box–Muller).
fn unit_vector(rng: &mut ChaCha8Rng, out: &mut [f64]) {
    loop {
        let mut i = 0;
        while i < out.len() {
            let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
            let u2: f64 = rng.gen();
            let m = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
            out[i] = m * c;
            i += 1;
            if i < out.len() {
                out[i] = m * s;
                i += 1;
            }
        }
        let norm = out.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-150 {
            for c in out.iter_mut() {
                *c /= norm;
            }
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Circle average of |y₁|^a equals (2/π)∫₀^{π/2} cosᵃ; sphere (d=3)
    /// average of |y₁|^a equals 1/(a+1). Values frozen from a 30-digit
    /// computation.
    const CIRCLE_ABS_COS_3: f64 = 0.424413181578387562; // = 4/(3π)
    const CIRCLE_ABS_COS_15: f64 = 0.556417894449382124;
    const CIRCLE_ABS_COS_M05: f64 = 1.669253683348146; // a = -1/2, singular

    #[test]
    fn rejects_unsupported_dimensions() {
        assert!(matches!(SphereRule::new(0, 8), Err(Error::UnsupportedDimension(0))));
        assert!(matches!(SphereRule::new(4, 8), Err(Error::UnsupportedDimension(4))));
        assert!(matches!(
            sphere_average_tight(5, |_| 1.0, 1e-6, 100),
            Err(Error::UnsupportedDimension(5))
        ));
    }

    #[test]
    fn circle_rule_is_exact_for_even_monomials() {
        // ⨏ y₁^{2k} over the circle = binom(2k,k)/4^k.
        let rule = SphereRule::new(2, 16).unwrap();
        let cases = [(1u32, 0.5), (2, 0.375), (3, 0.3125), (4, 35.0 / 128.0)];
        for &(k, want) in &cases {
            let got = rule.average(|y| y[0].powi(2 * k as i32));
            assert!((got - want).abs() < 1e-15, "k={k}: {got} vs {want}");
            let got_mixed = rule.average(|y| y[0].powi(2) * y[1].powi(2));
            assert!((got_mixed - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn sphere_rule_is_exact_for_low_moments() {
        // ⨏ y₁^{2k} over ∂B₁ ⊂ ℝ³ = 1/(2k+1); mixed ⨏ y₁²y₂² = 1/15; and
        // y₂⁴ exercises the azimuthal factor: ⨏ y₂⁴ = 1/5 by symmetry.
        let rule = SphereRule::new(3, 6).unwrap();
        for (k, want) in [(1, 1.0 / 3.0), (2, 0.2), (3, 1.0 / 7.0)] {
            let got = rule.average(|y| y[0].powi(2 * k));
            assert!((got - want).abs() < 1e-14, "k={k}: {got} vs {want}");
        }
        let mixed = rule.average(|y| y[0] * y[0] * y[1] * y[1]);
        assert!((mixed - 1.0 / 15.0).abs() < 1e-14, "{mixed}");
        let azim = rule.average(|y| y[1].powi(4));
        assert!((azim - 0.2).abs() < 1e-14, "{azim}");
    }

    #[test]
    fn odd_integrands_cancel_bit_exactly() {
        for dim in [1usize, 2, 3] {
            let rule = SphereRule::new(dim, 12).unwrap();
            let v = rule.average(|y| {
                let mut s = y[0] * y[0] * y[0] + 5.0 * y[dim - 1];
                if dim > 1 {
                    s += 0.3 * y[0] * y[0] * y[1];
                }
                s
            });
            assert_eq!(v, 0.0, "d={dim}");
            let ball = BallRule::new(dim, 5, 12).unwrap();
            let v = ball.average(|y| y[0].powi(3) - 2.0 * y[dim - 1]);
            assert_eq!(v, 0.0, "ball d={dim}");
        }
    }

    #[test]
    fn rules_average_constants_to_one() {
        for dim in [1usize, 2, 3] {
            let rule = SphereRule::new(dim, 10).unwrap();
            assert!((rule.average(|_| 1.0) - 1.0).abs() < 1e-14);
            let ball = BallRule::new(dim, 7, 10).unwrap();
            assert!((ball.average(|_| 1.0) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ball_rule_matches_radial_moments() {
        // ⨏_{B₁} |y|² = d/(d+2); ⨏_{B₁} y₁² = 1/(d+2).
        for dim in [1usize, 2, 3] {
            let d = dim as f64;
            let ball = BallRule::new(dim, 6, 16).unwrap();
            let r2 = ball.average(|y| y.iter().map(|v| v * v).sum::<f64>());
            assert!((r2 - d / (d + 2.0)).abs() < 1e-14, "d={dim}: {r2}");
            let y1sq = ball.average(|y| y[0] * y[0]);
            assert!((y1sq - 1.0 / (d + 2.0)).abs() < 1e-14, "d={dim}: {y1sq}");
        }
    }

    #[test]
    fn no_node_touches_a_coordinate_axis() {
        for res in [4usize, 6, 10, 16, 64] {
            let rule = SphereRule::new(2, res).unwrap();
            for i in 0..rule.node_count() {
                let y = rule.node(i);
                assert!(y[0] != 0.0 && y[1] != 0.0, "res={res}, node {y:?}");
            }
        }
        let rule = SphereRule::new(3, 8).unwrap();
        for i in 0..rule.node_count() {
            let y = rule.node(i);
            assert!(y[0] != 0.0 && y[1] != 0.0 && y[2] != 0.0, "node {y:?}");
        }
    }

    #[test]
    fn node_accessors_agree_with_average() {
        let rule = SphereRule::new(2, 8).unwrap();
        let mut manual = 0.0;
        for i in 0..rule.node_count() {
            manual += rule.weight(i) * rule.node(i)[0].powi(2);
        }
        let auto = rule.average(|y| y[0] * y[0]);
        assert!((manual - auto).abs() < 1e-15);
    }

    #[test]
    fn ball_node_visitor_reproduces_average() {
        let ball = BallRule::new(2, 4, 8).unwrap();
        let mut manual = 0.0;
        ball.for_each_node(|y, w| manual += w * (y[0] * y[0] + 0.5 * y[1]));
        let auto = ball.average(|y| y[0] * y[0] + 0.5 * y[1]);
        assert!((manual - auto).abs() < 1e-15);
        let mut total = 0.0;
        ball.for_each_node(|_, w| total += w);
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_doubling_converges_on_smooth_integrands() {
        let r = sphere_average_adaptive(2, |y| (3.0 * y[0]).exp(), 1e-12, 1 << 16).unwrap();
        // (1/2π)∫ e^{3cosθ} dθ = I₀(3) = 4.88079258586502...
        assert!(r.converged);
        assert!((r.value - 4.880792585865024).abs() < 1e-11, "{}", r.value);
        assert!(r.history.len() >= 2);
        let r3 = sphere_average_adaptive(3, |y| y[0] * y[0] + y[2].powi(4), 1e-12, 1 << 18)
            .unwrap();
        assert!(r3.converged);
        assert!((r3.value - (1.0 / 3.0 + 0.2)).abs() < 1e-11, "{}", r3.value);
    }

    #[test]
    fn adaptive_doubling_reports_budget_exhaustion() {
        // A kink forces slow decay; a tiny budget cannot reach 1e-14.
        let r = sphere_average_adaptive(2, |y| y[0].abs().powf(0.3), 1e-14, 64).unwrap();
        assert!(!r.converged);
        assert!(!r.history.is_empty());
    }

    #[test]
    fn adaptive_doubling_rejects_non_finite_values() {
        let r = sphere_average_adaptive(2, |y| 1.0 / (y[0] - y[0]), 1e-6, 1 << 12);
        assert!(matches!(r, Err(Error::NonFiniteIntegrand(_))));
    }

    #[test]
    fn tight_average_matches_frozen_circle_moments() {
        let v = sphere_average_tight(2, |y| y[0].abs().powi(3), 1e-12, 4000).unwrap();
        assert!((v - CIRCLE_ABS_COS_3).abs() < 1e-12, "{v}");
        let v = sphere_average_tight(2, |y| y[0].abs().powf(1.5), 1e-12, 4000).unwrap();
        assert!((v - CIRCLE_ABS_COS_15).abs() < 1e-12, "{v}");
    }

    #[test]
    fn tight_average_handles_integrable_singularities() {
        // ⨏ |y₁|^{-1/2} over the circle: the integrand blows up at θ = ±π/2
        // but the average is finite. Fixed rules cannot get 1e-9 here.
        let v = sphere_average_tight(2, |y| y[0].abs().powf(-0.5), 1e-9, 40000).unwrap();
        assert!((v - CIRCLE_ABS_COS_M05).abs() < 1e-9, "{v}");
    }

    #[test]
    fn tight_average_d3_matches_polar_moments() {
        let v = sphere_average_tight(3, |y| y[0].abs().powf(1.5), 1e-11, 20000).unwrap();
        assert!((v - 0.4).abs() < 1e-11, "{v}");
        // Azimuth-dependent: ⨏ y₂² = 1/3 by symmetry.
        let v = sphere_average_tight(3, |y| y[1] * y[1], 1e-11, 20000).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-11, "{v}");
        // Singular at the equator: ⨏ |y₁|^{-1/2} = ½∫|t|^{-1/2} dt = 2.
        let v = sphere_average_tight(3, |y| y[0].abs().powf(-0.5), 1e-9, 40000).unwrap();
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn tight_ball_average_matches_moments() {
        let v = ball_average_tight(2, |y| y[0] * y[0], 1e-10, 20000).unwrap();
        assert!((v - 0.25).abs() < 1e-10, "{v}");
        let v = ball_average_tight(3, |y| y.iter().map(|c| c * c).sum::<f64>(), 1e-10, 20000)
            .unwrap();
        assert!((v - 0.6).abs() < 1e-10, "{v}");
    }

    #[test]
    fn monte_carlo_agrees_within_standard_error() {
        let (mean, se) = mc_sphere_average(3, |y| y[0] * y[0], 200_000, 41);
        assert!(se < 2e-3);
        assert!((mean - 1.0 / 3.0).abs() < 5.0 * se, "mean {mean} se {se}");
        let (mean, se) = mc_ball_average(2, |y| y[0] * y[0] + y[1] * y[1], 200_000, 42);
        assert!((mean - 0.5).abs() < 5.0 * se, "mean {mean} se {se}");
        // Dimensions beyond the fixed rules are fine for Monte Carlo.
        let (mean, se) = mc_sphere_average(5, |y| y[0] * y[0], 200_000, 43);
        assert!((mean - 0.2).abs() < 5.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let (a, _) = mc_ball_average(2, |y| y[0].sin() + y[1], 10_000, 7);
        let (b, _) = mc_ball_average(2, |y| y[0].sin() + y[1], 10_000, 7);
        assert_eq!(a, b);
        let (c, _) = mc_ball_average(2, |y| y[0].sin() + y[1], 10_000, 8);
        assert_ne!(a, c);
    }
}
