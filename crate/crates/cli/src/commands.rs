//! One driver per subcommand. Each returns the finished output text; the
//! caller decides whether it lands on stdout or in `--out`.

use std::path::Path;
use std::sync::Arc;

use plap::exponent::PExponent;
use plap::solver::{DppProblem, ScalarFn, SolverOptions, SolverReport, SweepMode};

use crate::config::{
    ConsistencyConfig, ConvergeConfig, HodographConfig, InequalityConfig, ModeSpec, SolveConfig,
};
use crate::fmt::{csv_row, float17, json_float_array, json_object, Field};
use crate::{CliError, Lemma};

/// `plap constants --d <dim> --p <p>`: the normalization pair `(C, D)`.
pub fn constants(dim: usize, p: f64, abs_tol: f64) -> Result<String, CliError> {
    let p = PExponent::new(p)?;
    let k = plap::constants::compute_constants(dim, &p, abs_tol)?;
    Ok(json_object(
        0,
        &[
            Field::Uint("schema_version", crate::config::SCHEMA_VERSION as u64),
            Field::Uint("dim", dim as u64),
            Field::Float("p", p.p()),
            Field::Float("abs_tol", abs_tol),
            Field::Float("C", k.c),
            Field::Float("D", k.d),
        ],
    ))
}

/// `plap consistency`: operator values vs. the classical reference along a
/// radius sweep, as CSV.
pub fn consistency(cfg: &ConsistencyConfig) -> Result<String, CliError> {
    crate::config::check_schema_version(cfg.schema_version)?;
    let p = PExponent::new(cfg.p)?;
    let dim = cfg.x.len();
    let f = cfg.function.build(dim, &p)?;
    let radii: Vec<f64> = match &cfg.radii {
        Some(r) => r.clone(),
        None => plap::meanvalue::DEFAULT_RADII.to_vec(),
    };
    let method = cfg
        .method
        .as_ref()
        .map_or_else(plap::meanvalue::MvfMethod::default, |m| m.build());
    let k = plap::constants::compute_constants(dim, &p, cfg.constants_tol.unwrap_or(1e-12))?;
    let samples = plap::meanvalue::consistency_sweep(&k, &p, &f, &cfg.x, &radii, &method)?;

    let mut out = String::from("r,value_sphere,value_ball,reference,error_sphere,error_ball\n");
    for s in &samples {
        csv_row(
            &mut out,
            &[
                float17(s.r),
                float17(s.value_sphere),
                float17(s.value_ball),
                float17(s.reference),
                float17(s.error_sphere),
                float17(s.error_ball),
            ],
        );
    }
    Ok(out)
}

fn mode_name(mode: ModeSpec) -> &'static str {
    match mode {
        ModeSpec::Picard => "picard",
        ModeSpec::GaussSeidel => "gauss_seidel",
    }
}

fn report_json(report: &SolverReport, indent: usize) -> String {
    json_object(
        indent,
        &[
            Field::Uint("iterations", report.iterations as u64),
            Field::Bool("converged", report.converged),
            Field::Float("gap_estimate", report.gap_estimate),
            Field::OptFloat("contraction_estimate", report.contraction_estimate),
            Field::Float("scheme_residual", report.scheme_residual),
            Field::OptFloat("sup_error", report.sup_error),
            Field::Uint("monotone_violations", report.monotone_violations as u64),
            Field::Uint("bracket_failures", report.bracket_failures as u64),
            Field::Uint("residual_violations", report.residual_violations as u64),
            Field::Uint("relaxation_resets", report.relaxation_resets as u64),
            Field::Uint("interior_nodes", report.interior_nodes as u64),
            Field::Raw("sweep_deltas", json_float_array(&report.sweep_deltas)),
        ],
    )
}

/// `plap solve`: one boundary-value solve; JSON report, optional field CSV.
pub fn solve(
    cfg: &SolveConfig,
    seed_override: Option<u64>,
    field_out: Option<&Path>,
) -> Result<String, CliError> {
    crate::config::check_schema_version(cfg.schema_version)?;
    let p = PExponent::new(cfg.p)?;
    cfg.f.validate()?;
    cfg.g.validate()?;
    let source = cfg.f.scalar(&p);
    let boundary = cfg.g.scalar(&p);
    let exact: Option<ScalarFn> = match &cfg.exact {
        Some(e) => {
            e.validate()?;
            Some(e.scalar(&p))
        }
        None => None,
    };
    let problem =
        DppProblem::new(cfg.domain.build(), p, cfg.r, source, boundary, exact.clone())?;
    let options = cfg.options();
    let outcome = plap::solver::solve(&problem, cfg.h, &options)?;

    if let Some(path) = field_out {
        let mut csv = String::from("x0,x1,value,exact,error\n");
        for &node in outcome.field.grid.interior_nodes() {
            let x = outcome.field.grid.point(node);
            let value = outcome.field.values[node];
            let (exact_cell, error_cell) = match &exact {
                Some(u) => {
                    let e = u(&x);
                    (float17(e), float17(value - e))
                }
                None => (String::new(), String::new()),
            };
            csv_row(
                &mut csv,
                &[float17(x[0]), float17(x[1]), float17(value), exact_cell, error_cell],
            );
        }
        std::fs::write(path, csv).map_err(|e| {
            CliError::Usage(format!("cannot write field dump {}: {e}", path.display()))
        })?;
    }

    let seed = seed_override.or(cfg.seed);
    Ok(json_object(
        0,
        &[
            Field::Uint("schema_version", crate::config::SCHEMA_VERSION as u64),
            Field::Float("p", cfg.p),
            Field::Float("r", cfg.r),
            Field::Float("h", cfg.h),
            Field::Str("mode", mode_name(cfg.mode)),
            Field::Raw("seed", seed.map_or_else(|| "null".to_string(), |s| s.to_string())),
            Field::Raw("report", report_json(&outcome.report, 1)),
        ],
    ))
}

/// `plap converge`: error trend across a decreasing radius schedule, as CSV.
pub fn converge(cfg: &ConvergeConfig) -> Result<String, CliError> {
    crate::config::check_schema_version(cfg.schema_version)?;
    let p = PExponent::new(cfg.p)?;
    cfg.f.validate()?;
    cfg.g.validate()?;
    cfg.exact.validate()?;
    let problem = DppProblem::new(
        cfg.domain.build(),
        p,
        // The per-radius value is set by the study; this seeds validation.
        *cfg.radii.first().unwrap_or(&0.1),
        cfg.f.scalar(&p),
        cfg.g.scalar(&p),
        Some(cfg.exact.scalar(&p)),
    )?;
    let h_factor = cfg.h_factor.unwrap_or(0.25);
    if !(h_factor > 0.0 && h_factor.is_finite()) {
        return Err(CliError::Usage(format!("h_factor must be positive, got {h_factor}")));
    }
    let options = cfg.options();
    let rows =
        plap::study::convergence_study(&problem, &cfg.radii, |r| h_factor * r, &options)?;

    let mut out = String::from("r,h,sup_error,iterations,scheme_residual,interior_nodes\n");
    for row in &rows {
        csv_row(
            &mut out,
            &[
                float17(row.r),
                float17(row.h),
                float17(row.sup_error),
                row.iterations.to_string(),
                float17(row.scheme_residual),
                row.interior_nodes.to_string(),
            ],
        );
    }
    Ok(out)
}

/// `plap p0 --n <n>`: the exponent where the `n`-th plane profile changes
/// character, found by bisection on a frozen bracket.
pub fn p0(n: usize, lo: f64, hi: f64, tol: f64) -> Result<String, CliError> {
    let root = plap::plane::find_p0(n, (lo, hi), tol)?;
    Ok(json_object(
        0,
        &[
            Field::Uint("schema_version", crate::config::SCHEMA_VERSION as u64),
            Field::Uint("n", n as u64),
            Field::Raw("bracket", json_float_array(&[lo, hi])),
            Field::Float("tol", tol),
            Field::Float("p0", root),
        ],
    ))
}

/// `plap hodograph`: the signed disc integral of the composed profile, its
/// absolute-value scale, and the angular refinement history.
pub fn hodograph(cfg: &HodographConfig) -> Result<String, CliError> {
    crate::config::check_schema_version(cfg.schema_version)?;
    let p = PExponent::new(cfg.p)?;
    let params = plap::plane::HodographParams::new(cfg.n, cfg.c, cfg.alpha, cfg.beta, cfg.epsilon)?;
    let out = plap::plane::mvf_of_a(&params, &p, cfg.radius)?;

    let mut history = String::from("[");
    for (i, (nodes, value)) in out.history.iter().enumerate() {
        if i > 0 {
            history.push_str(", ");
        }
        history.push_str(&format!("[{nodes}, {}]", float17(*value)));
    }
    history.push(']');

    let ratio = if out.abs_integral > 0.0 { out.value.abs() / out.abs_integral } else { f64::NAN };
    Ok(json_object(
        0,
        &[
            Field::Uint("schema_version", crate::config::SCHEMA_VERSION as u64),
            Field::Float("p", cfg.p),
            Field::Uint("n", cfg.n as u64),
            Field::Float("c", cfg.c),
            Field::Float("alpha", cfg.alpha),
            Field::Float("beta", cfg.beta),
            Field::Float("epsilon", cfg.epsilon),
            Field::Float("radius", cfg.radius),
            Field::Float("value", out.value),
            Field::Float("abs_integral", out.abs_integral),
            Field::OptFloat("ratio", ratio.is_finite().then_some(ratio)),
            Field::Bool("converged", out.converged),
            Field::Raw("history", history),
        ],
    ))
}

/// `plap verify-inequalities --lemma <a1|a2|a3>`: randomized checks of the
/// three pointwise estimates the scheme analysis leans on.
pub fn verify_inequalities(
    lemma: Lemma,
    cfg: &InequalityConfig,
    seed_override: Option<u64>,
) -> Result<String, CliError> {
    crate::config::check_schema_version(cfg.schema_version)?;
    let seed = seed_override.or(cfg.seed).unwrap_or(0);
    match lemma {
        Lemma::A1 | Lemma::A2 => {
            let Some(p_raw) = cfg.p else {
                return Err(CliError::Usage(format!(
                    "lemma {} needs \"p\" in the config",
                    lemma.name()
                )));
            };
            let p = PExponent::new(p_raw)?;
            let samples = cfg.samples.unwrap_or(100_000);
            if samples == 0 {
                return Err(CliError::Usage("samples must be positive".to_string()));
            }
            let eps = cfg.eps.unwrap_or(1e-3);
            let run = |n: usize| -> plap::Result<plap::inequalities::RatioStats> {
                match lemma {
                    Lemma::A1 => plap::inequalities::check_lemma_a1(&p, eps, n, seed),
                    Lemma::A2 => plap::inequalities::check_lemma_a2(&p, n, seed),
                    Lemma::A3 => unreachable!(),
                }
            };
            // Stability is judged by doubling the sample count with the same
            // seed: the first half of the draws is shared, so drift measures
            // new extremes, not re-randomization.
            let half = run(samples)?;
            let full = run(2 * samples)?;
            let scale = half.sup_ratio.abs().max(full.sup_ratio.abs());
            let stable = (full.sup_ratio - half.sup_ratio).abs() <= 0.1 * scale.max(f64::MIN_POSITIVE);
            let mut fields = vec![
                Field::Uint("schema_version", crate::config::SCHEMA_VERSION as u64),
                Field::Str("lemma", lemma.name()),
                Field::Float("p", p_raw),
            ];
            if matches!(lemma, Lemma::A1) {
                fields.push(Field::Float("eps", eps));
            }
            fields.extend([
                Field::Uint("seed", seed),
                Field::Uint("samples", full.samples as u64),
                Field::Float("sup_ratio", full.sup_ratio),
                Field::Float("sup_ratio_at_half_samples", half.sup_ratio),
                Field::Bool("stable", stable),
            ]);
            Ok(json_object(0, &fields))
        }
        Lemma::A3 => {
            let dim = cfg.dim.unwrap_or(2);
            let s = cfg.s.unwrap_or(0.5);
            let n_forms = cfg.n_forms.unwrap_or(8);
            let rel_tol = cfg.rel_tol.unwrap_or(1e-2);
            let max_nodes = cfg.max_nodes.unwrap_or(1 << 22);
            let stats =
                plap::inequalities::check_lemma_a3(dim, s, n_forms, seed, rel_tol, max_nodes)?;
            Ok(json_object(
                0,
                &[
                    Field::Uint("schema_version", crate::config::SCHEMA_VERSION as u64),
                    Field::Str("lemma", lemma.name()),
                    Field::Uint("dim", dim as u64),
                    Field::Float("s", s),
                    Field::Uint("seed", seed),
                    Field::Uint("samples", n_forms as u64),
                    Field::Float("rel_tol", rel_tol),
                    Field::Float("sup_ratio", stats.sup_average),
                    Field::Bool("stable", stats.all_stable),
                ],
            ))
        }
    }
}

/// One selftest step: push an `ok` line or fail the whole battery.
macro_rules! check {
    ($lines:expr, $name:literal, $cond:expr, $detail:expr) => {
        if $cond {
            $lines.push(format!("ok {} {}", $name, $detail));
        } else {
            $lines.push(format!("FAILED {} {}", $name, $detail));
            return Err(CliError::Numerics($lines.join("\n")));
        }
    };
}

/// `plap selftest`: a fast invariant battery over every subsystem. Exit 0
/// means all checks passed; a numerical mismatch reports exit code 2.
pub fn selftest(seed_override: Option<u64>) -> Result<String, CliError> {
    let seed = seed_override.unwrap_or(17);
    let mut lines: Vec<String> = Vec::new();

    // Normalization constants: exact on the interval, quadratic closed form,
    // planar quartic closed form, and deterministic-vs-Monte-Carlo agreement.
    for p_raw in [1.5, 3.0] {
        let p = PExponent::new(p_raw)?;
        let k = plap::constants::compute_constants(1, &p, 1e-14)?;
        check!(
            lines,
            "constants_unit_interval",
            (k.c - 0.5).abs() < 1e-15,
            format!("C(1,{p_raw}) = {}", float17(k.c))
        );
    }
    for (dim, expected) in [(2usize, 0.25), (3, 1.0 / 6.0)] {
        let p = PExponent::new(2.0)?;
        let k = plap::constants::compute_constants(dim, &p, 1e-13)?;
        check!(
            lines,
            "constants_quadratic",
            (k.c - expected).abs() < 1e-12,
            format!("C({dim},2) = {}", float17(k.c))
        );
    }
    {
        let p = PExponent::new(4.0)?;
        let k = plap::constants::compute_constants(2, &p, 1e-12)?;
        check!(
            lines,
            "constants_quartic_plane",
            (k.c - 0.1875).abs() < 1e-10 && (k.d - 0.0625).abs() < 1e-10,
            format!("C = {}, D = {}", float17(k.c), float17(k.d))
        );
    }
    {
        let p = PExponent::new(3.0)?;
        let det = plap::constants::compute_constants(2, &p, 1e-12)?;
        let (mc, se) = plap::constants::compute_constants_mc(2, &p, 200_000, seed);
        check!(
            lines,
            "constants_monte_carlo",
            (det.c - mc.c).abs() <= 4.0 * se,
            format!("|det - mc| = {}, 4se = {}", float17((det.c - mc.c).abs()), float17(4.0 * se))
        );
    }
    {
        let p = PExponent::new(3.0)?;
        let check = plap::constants::check_ibp_identity(2, &p, 2, 1e-8)?;
        let residual = check.residual().unwrap_or(f64::NAN);
        check!(
            lines,
            "integration_by_parts",
            residual < 1e-6,
            format!("residual = {}", float17(residual))
        );
    }

    // Operator consistency: the averaged operator tracks the classical one
    // on a smooth quadratic as the radius shrinks.
    {
        let p = PExponent::new(3.0)?;
        let k = plap::constants::compute_constants(2, &p, 1e-12)?;
        let cases = plap::meanvalue::battery_cases(&p)?;
        let (f, x) = &cases[0];
        let method = plap::meanvalue::MvfMethod::default();
        let samples =
            plap::meanvalue::consistency_sweep(&k, &p, f, x, &[0.1, 0.05], &method)?;
        let e0 = samples[0].error_sphere.abs();
        let e1 = samples[1].error_sphere.abs();
        check!(
            lines,
            "operator_consistency",
            e1 < e0,
            format!("errors {} -> {}", float17(e0), float17(e1))
        );
    }

    // Plane profiles: frozen windows for the first two critical exponents,
    // and the vanishing disc integral of a composed profile.
    {
        let p1 = plap::plane::find_p0(1, (1.001, 1.6), 1e-12)?;
        let p2 = plap::plane::find_p0(2, (1.001, 1.6), 1e-12)?;
        check!(
            lines,
            "plane_spectral_roots",
            (1.116..1.118).contains(&p1) && (1.05..1.07).contains(&p2),
            format!("p0(1) = {}, p0(2) = {}", float17(p1), float17(p2))
        );
    }
    {
        let p = PExponent::new(1.5)?;
        let params = plap::plane::HodographParams::new(1, 1.0, 1.0, 1.2, 0.1)?;
        let out = plap::plane::mvf_of_a(&params, &p, 1.0)?;
        check!(
            lines,
            "hodograph_vanishing",
            out.value.abs() <= 1e-8 * out.abs_integral,
            format!("|value|/scale = {}", float17(out.value.abs() / out.abs_integral))
        );
    }

    // Solver: linear data is reproduced to scheme accuracy, constant data to
    // root tolerance, and random ordered data pairs stay ordered.
    let p = PExponent::new(3.0)?;
    let domain = plap::grid::Domain::Ball { center: [0.0, 0.0], radius: 1.0 };
    let zero: ScalarFn = Arc::new(|_x: &[f64; 2]| 0.0);
    let linear: ScalarFn = Arc::new(|x: &[f64; 2]| 0.25 + 0.75 * x[0] - 0.5 * x[1]);
    let (r, h) = (0.25, 0.0625);
    let gs = SolverOptions {
        mode: SweepMode::GaussSeidel,
        relaxation: plap::solver::Relaxation::Auto,
        ..SolverOptions::default()
    };
    {
        let problem = DppProblem::new(
            domain.clone(),
            p,
            r,
            zero.clone(),
            linear.clone(),
            Some(linear.clone()),
        )?;
        let outcome = plap::solver::solve(&problem, h, &gs)?;
        let sup = outcome.report.sup_error.unwrap_or(f64::NAN);
        check!(
            lines,
            "solve_linear_boundary",
            outcome.report.converged && sup <= 1e-4,
            format!("sup_error = {}", float17(sup))
        );
    }
    {
        let constant: ScalarFn = Arc::new(|_x: &[f64; 2]| 0.7);
        let problem = DppProblem::new(
            domain.clone(),
            p,
            r,
            zero.clone(),
            constant.clone(),
            Some(constant.clone()),
        )?;
        // A constant is a fixed point of the averaging, so the error floor is
        // set by the pointwise root tolerance (each sweep's roots wobble by
        // about root_tol_a — at p = 3 the root is degenerate, so the residual
        // cannot see below it) plus the iteration gap. Both must sit well
        // under the check's 1e−12 bar.
        let tight = SolverOptions {
            tol: 1e-13,
            root_tol_a: 1e-14,
            root_tol_residual: 1e-16,
            ..SolverOptions::default()
        };
        let outcome = plap::solver::solve(&problem, h, &tight)?;
        let sup = outcome.report.sup_error.unwrap_or(f64::NAN);
        check!(
            lines,
            "solve_constant_boundary",
            outcome.report.converged && sup <= 1e-12,
            format!("sup_error = {}", float17(sup))
        );
    }
    {
        let problem = DppProblem::new(domain.clone(), p, r, zero.clone(), linear.clone(), None)?;
        let violations = plap::solver::comparison_check(&problem, h, &gs, 2, seed)?;
        check!(lines, "comparison_principle", violations == 0, format!("violations = {violations}"));
    }
    {
        let problem = DppProblem::new(domain, p, r, zero, linear, None)?;
        let sup = plap::solver::shift_equivariance_check(&problem, h, &gs, 0.37)?;
        check!(
            lines,
            "shift_equivariance",
            sup <= 2.0 * gs.tol,
            format!("sup = {}", float17(sup))
        );
    }

    lines.push(format!("selftest passed: {} checks", lines.len()));
    lines.push(String::new());
    Ok(lines.join("\n"))
}
