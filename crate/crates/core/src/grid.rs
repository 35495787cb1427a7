//! Uniform planar grids for the fixed-radius dynamic programming principle.
//!
//! The solver works on a uniform grid covering the domain `Ω`, the collar
//! `{0 ≤ dist(x, Ω) ≤ r}` where boundary data lives, and a thin halo of
//! extra nodes beyond the collar that exist purely so interpolation stencils
//! never leave the grid. Every averaging point `x + ρ r ω` sampled by the
//! ball quadrature around an interior node `x` satisfies
//! `dist(·, Ω) < r` (the distance function is 1-Lipschitz), and a cubic
//! stencil reaches at most two cells past such a point, so a halo of width
//! `3h` is always sufficient. Boundary data is therefore evaluated on the
//! slightly inflated collar `{0 ≤ dist ≤ r + 3h}`; exterior nodes beyond it
//! hold NaN so that any out-of-design read poisons the result loudly instead
//! of silently biasing it.
//!
//! Interpolation is separable Lagrange: multilinear (2×2) or cubic (4×4).
//! Cubic restores the accuracy that bilinear interpolation destroys — the
//! averaging operator integrates the interpolant over a ball of radius
//! `r = 4h`, and bilinear's `O(h²)` kinks alias into an `O(h²)` bias of the
//! average, flattening the scheme's convergence; cubic's `O(h⁴)` error stays
//! subordinate to it. Because the grid is uniform and the quadrature offsets
//! are shared by all nodes, each quadrature node has one index-space stencil
//! (integer offset + tensor weights) valid at every interior node; the
//! [`StencilTable`] precomputes exactly that.

use crate::error::{Error, Result};
use std::sync::Arc;

/// Nodes the halo extends past the collar, in grid cells.
pub const HALO_CELLS: usize = 3;

/// A planar computational domain with an exact signed distance function.
#[derive(Debug, Clone, serde::Serialize)]
pub enum Domain {
    /// The open ball `B_radius(center)`.
    Ball { center: [f64; 2], radius: f64 },
    /// The open axis-aligned box `(lo₁,hi₁) × (lo₂,hi₂)`.
    Box { lo: [f64; 2], hi: [f64; 2] },
}

impl Domain {
    pub fn dim(&self) -> usize {
        2
    }

    /// Negative inside, zero on the boundary, positive outside (Euclidean).
    pub fn signed_distance(&self, x: &[f64; 2]) -> f64 {
        match self {
            Domain::Ball { center, radius } => {
                let dx = x[0] - center[0];
                let dy = x[1] - center[1];
                (dx * dx + dy * dy).sqrt() - radius
            }
            Domain::Box { lo, hi } => {
                let qx = (lo[0] - x[0]).max(x[0] - hi[0]);
                let qy = (lo[1] - x[1]).max(x[1] - hi[1]);
                if qx <= 0.0 && qy <= 0.0 {
                    qx.max(qy)
                } else {
                    let px = qx.max(0.0);
                    let py = qy.max(0.0);
                    (px * px + py * py).sqrt()
                }
            }
        }
    }

    /// Tight axis-aligned bounding box of `Ω`.
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        match self {
            Domain::Ball { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            Domain::Box { lo, hi } => (*lo, *hi),
        }
    }

    /// Geometric centroid (used for placing barrier poles).
    pub fn centroid(&self) -> [f64; 2] {
        match self {
            Domain::Ball { center, .. } => *center,
            Domain::Box { lo, hi } => [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])],
        }
    }

    /// Diameter of the bounding box (an upper bound for `diam Ω`).
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        let dx = hi[0] - lo[0];
        let dy = hi[1] - lo[1];
        (dx * dx + dy * dy).sqrt()
    }

    fn validate(&self) -> Result<()> {
        match self {
            Domain::Ball { radius, center } => {
                if !(radius.is_finite() && *radius > 0.0)
                    || !center.iter().all(|c| c.is_finite())
                {
                    return Err(Error::InvalidArgument(format!(
                        "invalid ball: center {center:?}, radius {radius}"
                    )));
                }
            }
            Domain::Box { lo, hi } => {
                if !(lo[0] < hi[0] && lo[1] < hi[1])
                    || !lo.iter().chain(hi.iter()).all(|c| c.is_finite())
                {
                    return Err(Error::InvalidArgument(format!(
                        "invalid box: lo {lo:?}, hi {hi:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Role of a grid node in the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum NodeClass {
    /// Inside `Ω`: unknown, updated by the iteration.
    Interior,
    /// On the collar `{0 ≤ dist ≤ r}`: carries boundary data.
    Collar,
    /// Past the collar but within stencil reach: carries boundary data,
    /// exists only so interpolation never leaves the grid.
    Halo,
    /// Beyond any legitimate read: value is NaN poison.
    Exterior,
}

/// Uniform grid with node classification.
#[derive(Debug)]
pub struct Grid {
    origin: [f64; 2],
    h: f64,
    shape: [usize; 2],
    class: Vec<NodeClass>,
    interior: Vec<usize>,
}

impl Grid {
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn shape(&self) -> [usize; 2] {
        self.shape
    }
    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }
    pub fn node_count(&self) -> usize {
        self.shape[0] * self.shape[1]
    }
    /// Flat indices of interior nodes, in row-major order.
    pub fn interior_nodes(&self) -> &[usize] {
        &self.interior
    }
    pub fn flat(&self, ix: usize, iy: usize) -> usize {
        ix * self.shape[1] + iy
    }
    pub fn coords(&self, flat: usize) -> (usize, usize) {
        (flat / self.shape[1], flat % self.shape[1])
    }
    pub fn class(&self, flat: usize) -> NodeClass {
        self.class[flat]
    }
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let (ix, iy) = self.coords(flat);
        [
            self.origin[0] + ix as f64 * self.h,
            self.origin[1] + iy as f64 * self.h,
        ]
    }
}

/// Build the grid for domain `Ω`, averaging radius `r`, spacing `h`.
///
/// Requires `h ≤ r/3` (`GridTooCoarse` otherwise): the averaging ball must
/// span several cells for the interpolated scheme to make sense. Fails with
/// `EmptyDomain` if no node falls strictly inside `Ω`.
pub fn build_grid(domain: &Domain, r: f64, h: f64) -> Result<Grid> {
    domain.validate()?;
    if !(r > 0.0 && r.is_finite() && h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need positive finite r, h; got r = {r}, h = {h}"
        )));
    }
    if h > r / 3.0 {
        return Err(Error::GridTooCoarse { h, r });
    }
    let pad = r + HALO_CELLS as f64 * h;
    let (lo, hi) = domain.bounding_box();
    let origin = [lo[0] - pad, lo[1] - pad];
    let shape = [
        ((hi[0] + pad - origin[0]) / h).ceil() as usize + 1,
        ((hi[1] + pad - origin[1]) / h).ceil() as usize + 1,
    ];
    let halo_limit = r + HALO_CELLS as f64 * h;
    let mut class = Vec::with_capacity(shape[0] * shape[1]);
    let mut interior = Vec::new();
    for ix in 0..shape[0] {
        for iy in 0..shape[1] {
            let x = [
                origin[0] + ix as f64 * h,
                origin[1] + iy as f64 * h,
            ];
            let sd = domain.signed_distance(&x);
            let c = if sd < 0.0 {
                interior.push(ix * shape[1] + iy);
                NodeClass::Interior
            } else if sd <= r {
                NodeClass::Collar
            } else if sd <= halo_limit {
                NodeClass::Halo
            } else {
                NodeClass::Exterior
            };
            class.push(c);
        }
    }
    if interior.is_empty() {
        return Err(Error::EmptyDomain);
    }
    Ok(Grid { origin, h, shape, class, interior })
}

/// Values attached to every node of a shared grid.
#[derive(Debug, Clone)]
pub struct GridField {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
}

impl GridField {
    /// Fill from a closure receiving the node point and its class.
    pub fn from_fn<F: Fn(&[f64; 2], NodeClass) -> f64>(grid: Arc<Grid>, f: F) -> Self {
        let values = (0..grid.node_count())
            .map(|n| f(&grid.point(n), grid.class(n)))
            .collect();
        GridField { grid, values }
    }

    /// Supremum of |self − other| over interior nodes.
    pub fn sup_diff_interior(&self, other: &GridField) -> f64 {
        self.grid
            .interior_nodes()
            .iter()
            .map(|&n| (self.values[n] - other.values[n]).abs())
            .fold(0.0, f64::max)
    }

    /// Supremum of |self(x) − f(x)| over interior nodes.
    pub fn sup_error_interior<F: Fn(&[f64; 2]) -> f64>(&self, f: F) -> f64 {
        self.grid
            .interior_nodes()
            .iter()
            .map(|&n| (self.values[n] - f(&self.grid.point(n))).abs())
            .fold(0.0, f64::max)
    }
}

/// Separable Lagrange interpolation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Interpolation {
    /// 2×2 tensor-linear: exact on linear functions, `O(h²)` with kinks.
    Multilinear,
    /// 4×4 tensor-cubic: exact on cubics, `O(h⁴)`, kink-free inside cells.
    Cubic,
}

/// Lagrange weights on nodes `{0,1,2,3}` evaluated at `t` (exact for cubics).
fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0,
        t * (t - 2.0) * (t - 3.0) / 2.0,
        -t * (t - 1.0) * (t - 3.0) / 2.0,
        t * (t - 1.0) * (t - 2.0) / 6.0,
    ]
}

/// One quadrature offset's index-space stencil: the same integer offset and
/// tensor weights serve every interior node.
#[derive(Debug, Clone)]
pub struct Stencil {
    /// Flat index deltas relative to the center node.
    pub deltas: Vec<i64>,
    /// Matching weights (tensor products, sum to 1).
    pub weights: Vec<f64>,
}

/// Precomputed stencils for a fixed family of offsets on a fixed grid.
#[derive(Debug)]
pub struct StencilTable {
    pub stencils: Vec<Stencil>,
}

impl StencilTable {
    /// Build stencils for evaluating a grid field at `x + offset` for every
    /// interior node `x`. Verifies that no stencil can leave the grid from
    /// any interior node.
    pub fn build(grid: &Grid, interp: Interpolation, offsets: &[[f64; 2]]) -> Result<Self> {
        let ny = grid.shape[1] as i64;
        let mut stencils = Vec::with_capacity(offsets.len());
        let mut reach_min = [0i64; 2];
        let mut reach_max = [0i64; 2];
        for off in offsets {
            let (bases, wx, wy, width) = match interp {
                Interpolation::Multilinear => {
                    let ux = off[0] / grid.h;
                    let uy = off[1] / grid.h;
                    let bx = ux.floor();
                    let by = uy.floor();
                    let sx = ux - bx;
                    let sy = uy - by;
                    (
                        [bx as i64, by as i64],
                        [1.0 - sx, sx, 0.0, 0.0],
                        [1.0 - sy, sy, 0.0, 0.0],
                        2usize,
                    )
                }
                Interpolation::Cubic => {
                    let ux = off[0] / grid.h;
                    let uy = off[1] / grid.h;
                    let bx = ux.floor() - 1.0;
                    let by = uy.floor() - 1.0;
                    (
                        [bx as i64, by as i64],
                        cubic_weights(ux - bx),
                        cubic_weights(uy - by),
                        4usize,
                    )
                }
            };
            let mut deltas = Vec::with_capacity(width * width);
            let mut weights = Vec::with_capacity(width * width);
            for a in 0..width {
                for b in 0..width {
                    deltas.push((bases[0] + a as i64) * ny + (bases[1] + b as i64));
                    weights.push(wx[a] * wy[b]);
                }
            }
            reach_min[0] = reach_min[0].min(bases[0]);
            reach_min[1] = reach_min[1].min(bases[1]);
            reach_max[0] = reach_max[0].max(bases[0] + width as i64 - 1);
            reach_max[1] = reach_max[1].max(bases[1] + width as i64 - 1);
            stencils.push(Stencil { deltas, weights });
        }
        // Every interior node plus the extreme stencil reach must stay on
        // the grid (guaranteed by the halo padding; verified anyway).
        let mut ix_range = (i64::MAX, i64::MIN);
        let mut iy_range = (i64::MAX, i64::MIN);
        for &n in grid.interior_nodes() {
            let (ix, iy) = grid.coords(n);
            ix_range = (ix_range.0.min(ix as i64), ix_range.1.max(ix as i64));
            iy_range = (iy_range.0.min(iy as i64), iy_range.1.max(iy as i64));
        }
        if ix_range.0 + reach_min[0] < 0
            || iy_range.0 + reach_min[1] < 0
            || ix_range.1 + reach_max[0] >= grid.shape[0] as i64
            || iy_range.1 + reach_max[1] >= grid.shape[1] as i64
        {
            return Err(Error::InvalidArgument(
                "interpolation stencil leaves the grid (offsets exceed halo reach)".into(),
            ));
        }
        Ok(StencilTable { stencils })
    }

    /// Evaluate stencil `j` at the interior node with flat index `n`.
    #[inline]
    pub fn apply(&self, j: usize, values: &[f64], n: usize) -> f64 {
        let st = &self.stencils[j];
        let mut acc = 0.0;
        for (d, w) in st.deltas.iter().zip(&st.weights) {
            acc += w * values[(n as i64 + d) as usize];
        }
        acc
    }
}

/// Interpolate a field at an arbitrary point (stencil clamped at the grid
/// edge; exactness properties preserved). Used for transferring a solution
/// between grids, not in the solver's hot path.
pub fn interpolate(field: &GridField, interp: Interpolation, x: &[f64; 2]) -> f64 {
    let g = &field.grid;
    let width = match interp {
        Interpolation::Multilinear => 2usize,
        Interpolation::Cubic => 4usize,
    };
    let mut base = [0usize; 2];
    let mut t = [0.0f64; 2];
    for d in 0..2 {
        let u = (x[d] - g.origin[d]) / g.h;
        let mut b = match interp {
            Interpolation::Multilinear => u.floor(),
            Interpolation::Cubic => u.floor() - 1.0,
        };
        let max_base = (g.shape[d] - width) as f64;
        if b < 0.0 {
            b = 0.0;
        } else if b > max_base {
            b = max_base;
        }
        base[d] = b as usize;
        t[d] = u - b;
    }
    let (wx, wy) = match interp {
        Interpolation::Multilinear => (
            [1.0 - t[0], t[0], 0.0, 0.0],
            [1.0 - t[1], t[1], 0.0, 0.0],
        ),
        Interpolation::Cubic => (cubic_weights(t[0]), cubic_weights(t[1])),
    };
    let mut acc = 0.0;
    for a in 0..width {
        for b in 0..width {
            acc += wx[a] * wy[b] * field.values[g.flat(base[0] + a, base[1] + b)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn signed_distance_ball() {
        let d = Domain::Ball { center: [1.0, -2.0], radius: 2.0 };
        assert_eq!(d.signed_distance(&[1.0, -2.0]), -2.0);
        assert_eq!(d.signed_distance(&[3.0, -2.0]), 0.0);
        assert!((d.signed_distance(&[1.0, 1.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn signed_distance_box() {
        let d = Domain::Box { lo: [0.0, 0.0], hi: [2.0, 1.0] };
        assert_eq!(d.signed_distance(&[1.0, 0.5]), -0.5);
        assert_eq!(d.signed_distance(&[1.0, 0.0]), 0.0);
        assert_eq!(d.signed_distance(&[3.0, 0.5]), 1.0);
        // Corner: Euclidean diagonal distance.
        let c = d.signed_distance(&[3.0, 2.0]);
        assert!((c - 2f64.sqrt()).abs() < 1e-15, "{c}");
    }

    #[test]
    fn signed_distance_is_one_lipschitz() {
        let domains = [
            Domain::Ball { center: [0.3, -0.1], radius: 1.2 },
            Domain::Box { lo: [-1.0, -0.5], hi: [0.7, 1.3] },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(0xd15);
        for d in &domains {
            for _ in 0..500 {
                let a: [f64; 2] = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
                let b: [f64; 2] = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
                let dist = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                assert!(
                    (d.signed_distance(&a) - d.signed_distance(&b)).abs() <= dist + 1e-12
                );
            }
        }
    }

    #[test]
    fn build_rejects_coarse_grids_and_empty_domains() {
        let ball = Domain::Ball { center: [0.0, 0.0], radius: 1.0 };
        assert!(matches!(
            build_grid(&ball, 0.2, 0.1),
            Err(Error::GridTooCoarse { .. })
        ));
        let dot = Domain::Ball { center: [0.0, 0.0], radius: 1e-9 };
        assert!(matches!(build_grid(&dot, 0.02, 0.005), Err(Error::EmptyDomain)));
    }

    #[test]
    fn classification_partitions_and_orders() {
        let ball = Domain::Ball { center: [0.0, 0.0], radius: 1.0 };
        let g = build_grid(&ball, 0.2, 0.05).unwrap();
        assert!(!g.interior_nodes().is_empty());
        let mut saw_collar = false;
        for n in 0..g.node_count() {
            let sd = ball.signed_distance(&g.point(n));
            match g.class(n) {
                NodeClass::Interior => assert!(sd < 0.0),
                NodeClass::Collar => {
                    saw_collar = true;
                    assert!((0.0..=0.2).contains(&sd));
                }
                NodeClass::Halo => assert!(sd > 0.2 && sd <= 0.2 + 3.0 * 0.05 + 1e-12),
                NodeClass::Exterior => assert!(sd > 0.2 + 3.0 * 0.05 - 1e-12),
            }
        }
        assert!(saw_collar);
    }

    #[test]
    fn quadrature_points_never_touch_exterior() {
        // The load-bearing geometric invariant: a cubic stencil around any
        // point x + y with |y| ≤ r, x interior, reads no Exterior node.
        let ball = Domain::Ball { center: [0.2, -0.3], radius: 0.9 };
        let r = 0.15;
        let h = r / 4.0;
        let g = build_grid(&ball, r, h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0xfee1);
        for &n in g.interior_nodes() {
            let x = g.point(n);
            for _ in 0..20 {
                let ang = rng.gen_range(0.0..std::f64::consts::TAU);
                let rho: f64 = rng.gen_range(0.0..1.0);
                let q = [x[0] + r * rho * ang.cos(), x[1] + r * rho * ang.sin()];
                let ux = ((q[0] - g.origin()[0]) / h).floor() as i64 - 1;
                let uy = ((q[1] - g.origin()[1]) / h).floor() as i64 - 1;
                for a in 0..4i64 {
                    for b in 0..4i64 {
                        let ix = ux + a;
                        let iy = uy + b;
                        assert!(ix >= 0 && iy >= 0);
                        let c = g.class(g.flat(ix as usize, iy as usize));
                        assert!(c != NodeClass::Exterior, "at {q:?}");
                    }
                }
            }
        }
    }

    fn test_field<F: Fn(&[f64; 2]) -> f64>(g: &Arc<Grid>, f: F) -> GridField {
        GridField::from_fn(g.clone(), |x, _| f(x))
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let ball = Domain::Ball { center: [0.0, 0.0], radius: 1.0 };
        let g = Arc::new(build_grid(&ball, 0.2, 0.05).unwrap());
        let poly = |x: &[f64; 2]| {
            1.5 - 0.3 * x[0] + x[1] + 0.25 * x[0] * x[0] * x[0] - x[0] * x[1] * x[1]
                + 0.7 * x[1] * x[1]
        };
        let field = test_field(&g, poly);
        let mut rng = ChaCha8Rng::seed_from_u64(0xcafe);
        for _ in 0..300 {
            let x = [rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)];
            let v = interpolate(&field, Interpolation::Cubic, &x);
            assert!((v - poly(&x)).abs() < 1e-12, "at {x:?}: {v} vs {}", poly(&x));
        }
    }

    #[test]
    fn multilinear_interpolation_reproduces_linears() {
        let ball = Domain::Ball { center: [0.0, 0.0], radius: 1.0 };
        let g = Arc::new(build_grid(&ball, 0.2, 0.05).unwrap());
        let lin = |x: &[f64; 2]| 0.4 - 1.3 * x[0] + 2.2 * x[1];
        let field = test_field(&g, lin);
        let mut rng = ChaCha8Rng::seed_from_u64(0xbee);
        for _ in 0..300 {
            let x = [rng.gen_range(-0.9..0.9), rng.gen_range(-0.9..0.9)];
            let v = interpolate(&field, Interpolation::Multilinear, &x);
            assert!((v - lin(&x)).abs() < 1e-13);
        }
    }

    #[test]
    fn stencil_table_matches_point_interpolation() {
        let ball = Domain::Ball { center: [0.0, 0.0], radius: 1.0 };
        let g = Arc::new(build_grid(&ball, 0.2, 0.05).unwrap());
        let f = |x: &[f64; 2]| (1.3 * x[0] - 0.4 * x[1]).sin() + x[0] * x[1];
        let field = test_field(&g, f);
        let offsets = [
            [0.07, -0.11],
            [-0.13, 0.05],
            [0.0, 0.0],
            [0.2, 0.0],
            [-0.09, -0.17],
        ];
        for interp in [Interpolation::Multilinear, Interpolation::Cubic] {
            let table = StencilTable::build(&g, interp, &offsets).unwrap();
            for &n in g.interior_nodes().iter().step_by(37) {
                let x = g.point(n);
                for (j, off) in offsets.iter().enumerate() {
                    let q = [x[0] + off[0], x[1] + off[1]];
                    let a = table.apply(j, &field.values, n);
                    let b = interpolate(&field, interp, &q);
                    assert!(
                        (a - b).abs() < 1e-12 * (1.0 + b.abs()),
                        "{interp:?} node {n} offset {j}: {a} vs {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn stencil_weights_sum_to_one() {
        let ball = Domain::Ball { center: [0.0, 0.0], radius: 1.0 };
        let g = build_grid(&ball, 0.2, 0.05).unwrap();
        let offsets: Vec<[f64; 2]> = (0..50)
            .map(|i| {
                let t = i as f64 / 50.0 * std::f64::consts::TAU;
                [0.19 * t.cos(), 0.19 * t.sin()]
            })
            .collect();
        for interp in [Interpolation::Multilinear, Interpolation::Cubic] {
            let table = StencilTable::build(&g, interp, &offsets).unwrap();
            for st in &table.stencils {
                let s: f64 = st.weights.iter().sum();
                assert!((s - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn stencil_build_rejects_offsets_beyond_halo() {
        let ball = Domain::Ball { center: [0.0, 0.0], radius: 1.0 };
        let g = build_grid(&ball, 0.2, 0.05).unwrap();
        let too_far = [[0.7, 0.0]];
        assert!(StencilTable::build(&g, Interpolation::Cubic, &too_far).is_err());
    }

    #[test]
    fn box_domain_builds() {
        let bx = Domain::Box { lo: [-0.5, -0.25], hi: [0.75, 0.5] };
        let g = build_grid(&bx, 0.12, 0.03).unwrap();
        assert!(!g.interior_nodes().is_empty());
        for &n in g.interior_nodes() {
            assert!(bx.signed_distance(&g.point(n)) < 0.0);
        }
    }
}
