//! `plap` — command-line driver for the mean value operators, plane
//! profiles, and lattice solver in the `plap` library.
//!
//! Contract:
//! - exit 0 on success, 1 on a validation/usage error, 2 on a numerical
//!   failure (an invariant that should hold numerically did not);
//! - every subcommand is deterministic given its config and seed: identical
//!   invocations produce byte-identical output, independent of `--threads`;
//! - JSON configs in, CSV or JSON out; floats carry 17 significant digits.

mod commands;
mod config;
mod expr;
mod fmt;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// What went wrong, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or invalid config, impossible geometry: the
    /// request itself was malformed. Exit code 1.
    Usage(String),
    /// The computation ran and failed: iteration budget exhausted, accuracy
    /// unreachable, invariant violated. Exit code 2.
    Numerics(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Numerics(msg) => f.write_str(msg),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerics(_) => 2,
        }
    }
}

impl From<plap::Error> for CliError {
    fn from(e: plap::Error) -> Self {
        match e {
            plap::Error::InvalidExponent(_)
            | plap::Error::UnsupportedDimension(_)
            | plap::Error::InvalidArgument(_)
            | plap::Error::GridTooCoarse { .. }
            | plap::Error::EmptyDomain => CliError::Usage(e.to_string()),
            plap::Error::SingularGradient { .. }
            | plap::Error::NonFiniteIntegrand(_)
            | plap::Error::AccuracyNotReached { .. }
            | plap::Error::BracketFailure { .. }
            | plap::Error::MaxIterExceeded(_)
            | plap::Error::NewtonDiverged { .. } => CliError::Numerics(e.to_string()),
        }
    }
}

/// The three pointwise estimates `verify-inequalities` can probe.
#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Lemma {
    /// Two-point expansion bound for `p ≥ 2`.
    A1,
    /// Two-point difference bound for `p ∈ (1, 2)`.
    A2,
    /// Integrability of the singular quadratic-form average.
    A3,
}

impl Lemma {
    pub fn name(self) -> &'static str {
        match self {
            Lemma::A1 => "a1",
            Lemma::A2 => "a2",
            Lemma::A3 => "a3",
        }
    }
}

#[derive(Parser)]
#[command(
    name = "plap",
    version,
    about = "Mean value operators and a monotone lattice solver for the variational p-Laplacian",
    long_about = "Numerical toolkit for the averaged p-Laplacian: normalization constants, \
                  operator consistency sweeps, a dynamic-programming lattice solver with \
                  comparison diagnostics, plane-profile roots, and randomized inequality checks.\n\n\
                  Exit codes: 0 success, 1 validation error, 2 numerical failure.\n\
                  All output is deterministic given (config, --seed) and independent of --threads; \
                  floats are printed with 17 significant digits."
)]
struct Cli {
    /// JSON config file (subcommands document their schema in --help).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Write the primary output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Worker threads for parallel sweeps (default: all cores). Output does
    /// not depend on this.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Override the config's random seed (where a subcommand uses one).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalization constants C and D for one (dimension, exponent) pair.
    #[command(long_about = "Compute the normalization constants: C is half the boundary-sphere \
                            average of |y_1|^p, and D = dim·C/(p + dim) is the matching source \
                            weight of the averaged operator.\n\n\
                            Output: JSON {schema_version, dim, p, abs_tol, C, D}.\n\
                            Example: `plap constants --d 2 --p 4` gives C = 0.1875, D = 0.0625.")]
    Constants {
        /// Space dimension (1, 2, or 3).
        #[arg(long)]
        d: usize,
        /// Exponent p in (1, inf).
        #[arg(long)]
        p: f64,
        /// Absolute quadrature tolerance.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },

    /// Averaged-operator values vs. the classical operator over shrinking radii.
    #[command(long_about = "Evaluate the sphere and ball averaged operators of a smooth test \
                            function at a point, against the classical p-Laplacian.\n\n\
                            Config: {schema_version, p, function, x, radii?, method?, constants_tol?} \
                            where `function` is one of {linear, quadratic, radial_power, fundamental}, \
                            `x` is the evaluation point (its length sets the dimension), `radii` \
                            defaults to 0.1·2^-k for k = 0..4, and `method` is \
                            {type: adaptive, abs_tol, max_panels?} or {type: fixed_rule, resolution}.\n\n\
                            Output: CSV with columns\n\
                            r            averaging radius\n\
                            value_sphere sphere-average operator value\n\
                            value_ball   ball-average operator value\n\
                            reference    classical p-Laplacian at x\n\
                            error_sphere value_sphere - reference\n\
                            error_ball   value_ball - reference")]
    Consistency,

    /// Solve one boundary-value problem on a lattice.
    #[command(long_about = "Run the fixed-point lattice solver for the averaged p-Laplacian \
                            with source f and collar data G.\n\n\
                            Config: {schema_version, domain, p, r, h, f, G, exact?, mode, tol?, \
                            max_iter?, seed?, interpolation?, init?, relaxation?, root_tol_a?, \
                            root_tol_residual?, n_radial?, n_angular?} where `domain` is \
                            {type: ball, center, radius} or {type: box, lo, hi}, scalar fields are \
                            expressions {id: zero | constant | linear | wave | radial_power | \
                            conjugate_power, ...}, `mode` is picard or gauss_seidel, and \
                            `relaxation` is \"off\", \"auto\", or a literal omega.\n\n\
                            Output: JSON {schema_version, p, r, h, mode, seed, report} with the \
                            report carrying iterations, converged, gap_estimate, \
                            contraction_estimate, scheme_residual, sup_error, counters, and \
                            per-sweep update norms.\n\n\
                            --field-out writes the solved field as CSV with columns\n\
                            x0, x1  node coordinates (interior nodes, row-major)\n\
                            value   solved value\n\
                            exact   exact solution at the node (empty without `exact`)\n\
                            error   value - exact (empty without `exact`)")]
    Solve {
        /// Also dump the solved field as CSV to this path.
        #[arg(long, value_name = "PATH")]
        field_out: Option<PathBuf>,
    },

    /// Error trend of the solver across a decreasing radius schedule.
    #[command(long_about = "Solve the same boundary-value problem at each radius r with lattice \
                            spacing h = h_factor·r, continuing each solve from the previous one, \
                            and report the error against the exact solution.\n\n\
                            Config: {schema_version, domain, p, radii, h_factor?, f, G, exact, \
                            mode, tol?, max_iter?, interpolation?, relaxation?, root_tol_a?, \
                            root_tol_residual?, n_radial?, n_angular?}; `radii` must be strictly \
                            decreasing and `exact` is required.\n\n\
                            Output: CSV with columns\n\
                            r               averaging radius\n\
                            h               lattice spacing used\n\
                            sup_error       sup over interior nodes of |U - exact|\n\
                            iterations      sweeps used at this radius\n\
                            scheme_residual sup of the pointwise scheme mismatch\n\
                            interior_nodes  lattice size")]
    Converge,

    /// Critical exponent of the n-th plane profile.
    #[command(long_about = "Find the exponent p where the n-th angular plane profile changes \
                            character, by bisection of the spectral balance on [lo, hi].\n\n\
                            Output: JSON {schema_version, n, bracket, tol, p0}.\n\
                            Example: `plap p0 --n 1` lies within 0.001 of 1.117.")]
    P0 {
        /// Angular frequency n >= 1.
        #[arg(long)]
        n: usize,
        /// Lower bracket end (must satisfy 1 < lo).
        #[arg(long, default_value_t = 1.001)]
        lo: f64,
        /// Upper bracket end.
        #[arg(long, default_value_t = 1.6)]
        hi: f64,
        /// Bisection tolerance on p.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },

    /// Disc integral of a composed plane profile (should vanish).
    #[command(long_about = "Integrate the signed composed profile over a disc via the exact \
                            change of variables to its preimage, reporting the value, the \
                            absolute-integral scale, and the angular refinement history.\n\n\
                            Config: {schema_version, p, n, c, alpha, beta, epsilon, radius}.\n\n\
                            Output: JSON {schema_version, ..., value, abs_integral, ratio, \
                            converged, history} with history = [[angular_nodes, value], ...].")]
    Hodograph,

    /// Randomized checks of the pointwise estimates behind the scheme.
    #[command(long_about = "Probe one of the three pointwise estimates with seeded random \
                            samples and report the worst ratio and its stability under doubling.\n\n\
                            Config: {schema_version, p?, eps?, samples?, seed?, s?, dim?, \
                            n_forms?, rel_tol?, max_nodes?}; a1 reads p (>= 2), eps, samples; \
                            a2 reads p (in (1,2)), samples; a3 reads dim, s, n_forms, rel_tol, \
                            max_nodes.\n\n\
                            Output: JSON {schema_version, lemma, ..., sup_ratio, samples, stable}.")]
    VerifyInequalities {
        /// Which estimate to probe.
        #[arg(long, value_enum)]
        lemma: Lemma,
    },

    /// Fast invariant battery across every subsystem.
    #[command(long_about = "Run quick versions of the constant, operator, plane-profile, and \
                            solver invariants. Prints one `ok` line per check; exits 0 when all \
                            hold and 2 at the first numerical mismatch.")]
    Selftest,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version land here by design and exit 0; genuine flag
            // errors are usage errors (exit 1).
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Usage("--threads must be at least 1".to_string()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot set up {threads} threads: {e}")))?;
    }

    let output = match &cli.command {
        Command::Constants { d, p, tol } => commands::constants(*d, *p, *tol)?,
        Command::Consistency => {
            let cfg = config::load(&cli.config, "consistency")?;
            commands::consistency(&cfg)?
        }
        Command::Solve { field_out } => {
            let cfg = config::load(&cli.config, "solve")?;
            commands::solve(&cfg, cli.seed, field_out.as_deref())?
        }
        Command::Converge => {
            let cfg = config::load(&cli.config, "converge")?;
            commands::converge(&cfg)?
        }
        Command::P0 { n, lo, hi, tol } => commands::p0(*n, *lo, *hi, *tol)?,
        Command::Hodograph => {
            let cfg = config::load(&cli.config, "hodograph")?;
            commands::hodograph(&cfg)?
        }
        Command::VerifyInequalities { lemma } => {
            let cfg = config::load(&cli.config, "verify-inequalities")?;
            commands::verify_inequalities(*lemma, &cfg, cli.seed)?
        }
        Command::Selftest => commands::selftest(cli.seed)?,
    };

    // JSON objects get a trailing newline here; CSV/selftest already end
    // with one.
    let text = if output.ends_with('\n') { output } else { output + "\n" };
    match &cli.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
