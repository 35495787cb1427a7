//! Radius-refinement studies for the dynamic programming principle.
//!
//! The solved field `U_r` converges uniformly to the continuum solution as
//! `r → 0`; no rate is available in general, so the study reports the
//! measured sup errors per radius and leaves the trend to the caller. The
//! grid spacing follows a caller-supplied rule (default `h = r/4`), which
//! keeps the interpolation error subordinate to the scheme error while cost
//! grows like `1/r²` per sweep.
//!
//! Consecutive radii are solved with continuation: each solve starts from
//! the previous radius' field interpolated onto the new grid, which puts the
//! starting point within the two solutions' distance of the fixed point and
//! cuts the sweep count by an order of magnitude compared to a cold start.

use crate::error::{Error, Result};
use crate::solver::{solve, DppProblem, InitStrategy, SolveOutcome, SolverOptions};

/// One radius of a convergence study.
#[derive(Debug, Clone, serde::Serialize)]
pub struct StudyRow {
    pub r: f64,
    pub h: f64,
    /// Sup over interior nodes of `|U_r − exact|`.
    pub sup_error: f64,
    pub iterations: usize,
    pub scheme_residual: f64,
    pub interior_nodes: usize,
}

/// Solve the problem at each radius (strictly decreasing) with `h = h_rule(r)`
/// and report the error trend against the attached exact solution.
///
/// The first radius starts from `options.init`; later radii continue from
/// the previous solution.
pub fn convergence_study(
    problem: &DppProblem,
    radii: &[f64],
    h_rule: impl Fn(f64) -> f64,
    options: &SolverOptions,
) -> Result<Vec<StudyRow>> {
    if problem.exact.is_none() {
        return Err(Error::InvalidArgument(
            "convergence_study needs a problem with an exact solution attached".into(),
        ));
    }
    if radii.is_empty() {
        return Err(Error::InvalidArgument("need at least one radius".into()));
    }
    for pair in radii.windows(2) {
        if !(pair[1] < pair[0]) {
            return Err(Error::InvalidArgument(format!(
                "radii must be strictly decreasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    if !(radii[radii.len() - 1] > 0.0) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    let mut rows = Vec::with_capacity(radii.len());
    let mut previous: Option<SolveOutcome> = None;
    for &r in radii {
        let h = h_rule(r);
        let sub = DppProblem { r, ..problem.clone() };
        let row_options = SolverOptions {
            mode: options.mode,
            init: match &previous {
                Some(out) => InitStrategy::Interpolated(out.field.clone()),
                None => match &options.init {
                    InitStrategy::Zero => InitStrategy::Zero,
                    InitStrategy::CollarMean => InitStrategy::CollarMean,
                    InitStrategy::LowerEnvelope => InitStrategy::LowerEnvelope,
                    InitStrategy::Interpolated(f) => InitStrategy::Interpolated(f.clone()),
                },
            },
            interpolation: options.interpolation,
            tol: options.tol,
            max_sweeps: options.max_sweeps,
            root_tol_a: options.root_tol_a,
            root_tol_residual: options.root_tol_residual,
            relaxation: options.relaxation,
            n_radial: options.n_radial,
            n_angular: options.n_angular,
        };
        let out = solve(&sub, h, &row_options)?;
        rows.push(StudyRow {
            r,
            h,
            sup_error: out.report.sup_error.expect("exact is attached"),
            iterations: out.report.iterations,
            scheme_residual: out.report.scheme_residual,
            interior_nodes: out.report.interior_nodes,
        });
        previous = Some(out);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::PExponent;
    use crate::grid::Domain;
    use crate::solver::{Relaxation, ScalarFn, SweepMode};
    use std::sync::Arc;

    fn manufactured() -> DppProblem {
        let u = |x: &[f64; 2]| {
            let dx = x[0] - 2.0;
            (dx * dx + x[1] * x[1]).powf(0.75)
        };
        DppProblem::new(
            Domain::Ball { center: [0.0, 0.0], radius: 1.0 },
            PExponent::new(3.0).unwrap(),
            0.3,
            Arc::new(|_: &[f64; 2]| -4.5),
            Arc::new(u),
            Some(Arc::new(u) as ScalarFn),
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        let pr = manufactured();
        let opts = SolverOptions::default();
        assert!(convergence_study(&pr, &[], |r| r / 4.0, &opts).is_err());
        assert!(convergence_study(&pr, &[0.2, 0.2], |r| r / 4.0, &opts).is_err());
        assert!(convergence_study(&pr, &[0.1, 0.2], |r| r / 4.0, &opts).is_err());
        let mut no_exact = pr.clone();
        no_exact.exact = None;
        assert!(convergence_study(&no_exact, &[0.2], |r| r / 4.0, &opts).is_err());
    }

    #[test]
    fn linear_solution_sits_at_the_noise_floor() {
        let lin = |x: &[f64; 2]| 0.4 + 1.1 * x[0] - 0.6 * x[1];
        let pr = DppProblem::new(
            Domain::Ball { center: [0.0, 0.0], radius: 1.0 },
            PExponent::new(3.0).unwrap(),
            0.3,
            Arc::new(|_: &[f64; 2]| 0.0),
            Arc::new(lin),
            Some(Arc::new(lin) as ScalarFn),
        )
        .unwrap();
        let opts = SolverOptions {
            n_radial: 6,
            n_angular: 48,
            ..SolverOptions::default()
        };
        let rows = convergence_study(&pr, &[0.3, 0.2], |r| r / 4.0, &opts).unwrap();
        for row in &rows {
            assert!(row.sup_error < 1e-9, "r={}: {}", row.r, row.sup_error);
        }
    }

    #[test]
    fn manufactured_errors_decrease_with_radius() {
        let pr = manufactured();
        let opts = SolverOptions {
            mode: SweepMode::GaussSeidel,
            relaxation: Relaxation::Auto,
            ..SolverOptions::default()
        };
        let rows = convergence_study(&pr, &[0.3, 0.2], |r| r / 4.0, &opts).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(
            rows[1].sup_error < rows[0].sup_error,
            "{} vs {}",
            rows[1].sup_error,
            rows[0].sup_error
        );
        // Continuation warm start keeps the second solve short.
        assert!(rows[1].iterations < 120, "{}", rows[1].iterations);
    }
}
