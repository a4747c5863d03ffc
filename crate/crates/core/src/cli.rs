//! Command-line front end: flag parsing, problem construction, CSV output and the summary table.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, ValueEnum};

use crate::cycles::{solve, ConvergenceLog, MatrixKind, Mode, SolverConfig};
use crate::error::{Result, SvdAmgError};
use crate::gsvd::{triplet_residuals, TripletSet};
use crate::problems::ProblemSpec;
use crate::sparskit::SparseMat;

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "SVDAMG_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemArg {
    Fd,
    Graph,
    Incidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Dominant,
    Minimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Rectangular,
    Square,
    Symmetric,
}

/// Compute a few extremal singular triplets or eigenpairs with self-learning AMG.
#[derive(Debug, Parser)]
#[command(name = "svdamg", version)]
pub struct Args {
    /// Built-in test problem.
    #[arg(long, value_enum)]
    pub problem: Option<ProblemArg>,
    /// Grid size for fd (k×k interior points) and incidence (k×k nodes).
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of random points for graph.
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed for the graph point cloud.
    #[arg(long)]
    pub graph_seed: Option<u64>,
    /// Matrix Market file to solve.
    #[arg(long)]
    pub matrix: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "dominant")]
    pub mode: ModeArg,
    /// Defaults to symmetric for fd/graph and rectangular otherwise.
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long, default_value_t = 8)]
    pub nb: usize,
    #[arg(long, default_value_t = 5)]
    pub nt: usize,
    #[arg(long, default_value_t = 0.05)]
    pub theta: f64,
    #[arg(long, default_value_t = 4)]
    pub mu_t: usize,
    #[arg(long, default_value_t = 4)]
    pub mu_b: usize,
    #[arg(long, default_value_t = 1)]
    pub mu_tj: usize,
    #[arg(long, default_value_t = 1)]
    pub mu_bj: usize,
    /// Jacobi damping.
    #[arg(long, default_value_t = 0.7)]
    pub omega: f64,
    /// Multiplicative (setup) cycles.
    #[arg(long, default_value_t = 10)]
    pub mult: usize,
    /// Additive (solve) cycles.
    #[arg(long, default_value_t = 30)]
    pub add: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Diagonal shift added to a square matrix.
    #[arg(long, default_value_t = 0.0)]
    pub shift: f64,
    #[arg(long, default_value_t = 100)]
    pub coarsest_max: usize,
    /// Residual tolerance relative to ‖A‖_F that triggers a refit of lagging triplets; 0 disables.
    #[arg(long, default_value_t = 0.0)]
    pub refit_tol: f64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,

    /// Convergence CSV destination; `-` writes to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `analytic` or a file with one reference value per line.
    #[arg(long)]
    pub reference: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    Analytic,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Stdout,
    File(PathBuf),
}

/// A fully validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub config: SolverConfig,
    pub problem: ProblemSpec,
    pub out: Option<Output>,
    pub reference: Option<Reference>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelSummary {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub triplets: TripletSet,
    pub log: ConvergenceLog,
    pub levels: Vec<LevelSummary>,
    pub mult_time: Duration,
    pub add_time: Duration,
    /// Residual sum ‖Av − σu‖ + ‖Aᵗu − σv‖ per triplet on the solved operator.
    pub residuals: Vec<f64>,
    pub reference: Option<Vec<f64>>,
    pub frobenius: f64,
}

fn conflict(msg: impl Into<String>) -> SvdAmgError {
    SvdAmgError::InvalidConfig(msg.into())
}

fn to_invocation(args: Args, env_seed: Option<&str>) -> Result<Invocation> {
    let problem = match (args.problem, &args.matrix) {
        (Some(_), Some(_)) => return Err(conflict("--problem and --matrix are mutually exclusive")),
        (None, None) => return Err(conflict("one of --problem or --matrix is required")),
        (None, Some(path)) => {
            if args.k.is_some() || args.n.is_some() || args.graph_seed.is_some() {
                return Err(conflict("--k, --n and --graph-seed do not apply to --matrix"));
            }
            ProblemSpec::MatrixMarket { path: path.clone() }
        }
        (Some(ProblemArg::Graph), None) => {
            if args.k.is_some() {
                return Err(conflict("--k does not apply to --problem graph (use --n)"));
            }
            ProblemSpec::GraphLaplacian {
                n: args.n.unwrap_or(1024),
                seed: args.graph_seed.unwrap_or(1),
            }
        }
        (Some(p), None) => {
            if args.n.is_some() || args.graph_seed.is_some() {
                return Err(conflict("--n and --graph-seed only apply to --problem graph"));
            }
            let k = args.k.unwrap_or(32);
            if p == ProblemArg::Fd {
                ProblemSpec::FdLaplacian { k }
            } else {
                ProblemSpec::GridIncidence { k }
            }
        }
    };

    let seed = match env_seed {
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| conflict(format!("{SEED_ENV}={s:?} is not an unsigned integer")))?,
        None => args.seed,
    };
    let config = SolverConfig {
        theta: args.theta,
        n_b: args.nb,
        n_t: args.nt,
        mu_t: args.mu_t,
        mu_b: args.mu_b,
        mu_tj: args.mu_tj,
        mu_bj: args.mu_bj,
        omega_j: args.omega,
        n_mult: args.mult,
        n_add: args.add,
        mode: match args.mode {
            ModeArg::Dominant => Mode::Dominant,
            ModeArg::Minimal => Mode::Minimal,
        },
        kind: match args.kind {
            Some(KindArg::Rectangular) => MatrixKind::Rectangular,
            Some(KindArg::Square) => MatrixKind::Square,
            Some(KindArg::Symmetric) => MatrixKind::Symmetric,
            None => problem.default_kind(),
        },
        coarsest_max: args.coarsest_max,
        seed,
        refit_tol: args.refit_tol,
        shift: args.shift,
        threads: args.threads,
        ..SolverConfig::default()
    };
    config.validate()?;

    let reference = match args.reference.as_deref() {
        None => None,
        Some("analytic") => {
            if problem.analytic_reference(config.n_b, config.mode, config.shift).is_none() {
                return Err(conflict("--reference analytic is only available for fd and incidence"));
            }
            Some(Reference::Analytic)
        }
        Some(path) => Some(Reference::File(PathBuf::from(path))),
    };
    let out = args.out.map(|p| if p.as_os_str() == "-" { Output::Stdout } else { Output::File(p) });
    Ok(Invocation {
        config,
        problem,
        out,
        reference,
    })
}

/// Parses argv (program name first) with an explicit value for the seed override.
pub fn parse_args_with_env<I, T>(argv: I, env_seed: Option<&str>) -> std::result::Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(CliError::Usage)?;
    to_invocation(args, env_seed).map_err(CliError::Run)
}

/// Parses argv, honouring `SVDAMG_SEED` from the environment.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let env = std::env::var(SEED_ENV).ok();
    parse_args_with_env(argv, env.as_deref())
}

#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Run(SvdAmgError),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(e) => write!(f, "{e}"),
            CliError::Run(e) => write!(f, "error: {e}"),
        }
    }
}

fn read_reference(path: &PathBuf, needed: usize) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|source| SvdAmgError::Io {
        path: path.clone(),
        source,
    })?;
    let vals = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.parse::<f64>()
                .map_err(|_| conflict(format!("{}: line {} is not a number: {l:?}", path.display(), i + 1)))
        })
        .collect::<Result<Vec<f64>>>()?;
    if vals.len() < needed {
        return Err(conflict(format!("{}: {} reference values, {needed} needed", path.display(), vals.len())));
    }
    Ok(vals)
}

/// Builds the problem, solves it and writes the CSV if requested.
pub fn run(inv: &Invocation, stdout: &mut dyn Write) -> Result<RunReport> {
    let cfg = &inv.config;
    let a = inv.problem.build()?;
    let reference = match &inv.reference {
        None => None,
        Some(Reference::Analytic) => inv.problem.analytic_reference(cfg.n_b, cfg.mode, cfg.shift),
        Some(Reference::File(p)) => Some(read_reference(p, cfg.n_b)?),
    };
    let out = solve(&a, cfg, reference.as_deref())?;

    match &inv.out {
        None => {}
        Some(Output::Stdout) => out.log.write_csv(&mut *stdout).map_err(|source| SvdAmgError::Io {
            path: PathBuf::from("-"),
            source,
        })?,
        Some(Output::File(p)) => {
            let io_err = |source| SvdAmgError::Io { path: p.clone(), source };
            let mut buf = Vec::new();
            out.log.write_csv(&mut buf).map_err(io_err)?;
            fs::write(p, buf).map_err(io_err)?;
        }
    }

    let residuals = final_residuals(&out.operator, &out.triplets);
    Ok(RunReport {
        levels: out
            .hierarchy
            .summary()
            .into_iter()
            .map(|(rows, cols, nnz)| LevelSummary { rows, cols, nnz })
            .collect(),
        mult_time: out.timings.mult,
        add_time: out.timings.add,
        frobenius: out.operator.frobenius_norm(),
        triplets: out.triplets,
        log: out.log,
        residuals,
        reference,
    })
}

fn final_residuals(a: &SparseMat, t: &TripletSet) -> Vec<f64> {
    let id_m = SparseMat::identity(a.nrows());
    let id_n = SparseMat::identity(a.ncols());
    (0..t.len())
        .map(|j| {
            let (ru, rv) = triplet_residuals(a, &id_m, &id_n, t.sigmas[j], t.u.col(j), t.v.col(j));
            ru + rv
        })
        .collect()
}

/// Human-readable summary: hierarchy, timings and the final value table.
pub fn write_report(report: &RunReport, w: &mut dyn Write) -> io::Result<()> {
    writeln!(w, "hierarchy ({} levels)", report.levels.len())?;
    for (l, s) in report.levels.iter().enumerate() {
        writeln!(w, "  level {l}: {} x {}, nnz {}", s.rows, s.cols, s.nnz)?;
    }
    writeln!(
        w,
        "time: multiplicative {:.3} s, additive {:.3} s",
        report.mult_time.as_secs_f64(),
        report.add_time.as_secs_f64()
    )?;
    writeln!(w, "{:>4}  {:>24}  {:>12}  {:>12}", "j", "sigma", "resid/|A|_F", "rel_error")?;
    for j in 0..report.triplets.len() {
        let err = report
            .reference
            .as_ref()
            .map(|r| format!("{:.3e}", (report.triplets.sigmas[j] - r[j]).abs() / r[j].abs()))
            .unwrap_or_default();
        writeln!(
            w,
            "{:>4}  {:>24.16e}  {:>12.3e}  {:>12}",
            j,
            report.triplets.sigmas[j],
            report.residuals[j] / report.frobenius,
            err
        )?;
    }
    Ok(())
}

/// Entry point used by the binary. Returns the process exit code.
pub fn main_with<I, T>(argv: I, env_seed: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let inv = match parse_args_with_env(argv, env_seed) {
        Ok(inv) => inv,
        Err(CliError::Usage(e)) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            return 2;
        }
    };
    match run(&inv, stdout) {
        Ok(report) => {
            // keep stdout clean when it carries the CSV
            let sink: &mut dyn Write = if inv.out == Some(Output::Stdout) { stderr } else { stdout };
            let _ = write_report(&report, sink);
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}
