//! The `minpert` command line: `solve`, `sweep` and `lowerbound`.
//!
//! Exit codes: 0 success, 1 a verdict failed, 2 bad input or failed
//! hypotheses, 3 a solver did not converge, 64 usage error.

use std::ffi::OsString;
use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Error;
use crate::harness::{
    emit_report_with_meta, run_checks, run_sweep, Check, CheckConfig, ReportFormat, ReportMeta, SweepSpec,
};
use crate::linalg::{matrix_lower_bound, sampled_lower_bound, LowerBound, Matrix, VectorNormKind};
use crate::nonlinear::{mu_f, SolveOptions};
use crate::problems::{AnchoredProblem, Linearization};
use crate::system::{builtin, check_hypotheses, parse_problem, Anchor, ParameterizedSystem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERDICT: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "minpert",
    version,
    about = "Minimal perturbations of roots of parameterized polynomial systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print μ_F and the three linearized values at one parameter.
    Solve(SolveArgs),
    /// Sweep toward the anchor parameter and check the equivalences.
    Sweep(SweepArgs),
    /// Matrix lower bound of a matrix read from a file.
    Lowerbound(LowerboundArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
struct SourceArgs {
    /// Name of a built-in system (circle, linear2x3, sphere, parabola-underdet).
    #[arg(long)]
    builtin: Option<String>,
    /// Problem file with `dims`, `anchor` and `eq:` lines.
    #[arg(long)]
    problem: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Parameter value, comma separated.
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    /// Skip the nonlinear solve.
    #[arg(long)]
    no_mu_f: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Comma-separated direction, or `random:SEED`. Defaults to all ones.
    #[arg(long, allow_hyphen_values = true)]
    direction: Option<String>,
    #[arg(long, default_value_t = 1e-1)]
    t_start: f64,
    #[arg(long, default_value_t = 1e-6)]
    t_stop: f64,
    #[arg(long, default_value_t = 3)]
    per_decade: usize,
    /// Subset of duality,asymptotic,differential,lipschitz.
    #[arg(long, value_delimiter = ',', value_parser = parse_check)]
    checks: Option<Vec<Check>>,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: ReportFormat,
    /// Report destination; the report goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_mu_f: bool,
}

#[derive(Debug, Args)]
struct LowerboundArgs {
    /// Whitespace-separated rows, one per line.
    matrix: PathBuf,
    /// 1, 2 or inf.
    #[arg(long, default_value = "2", value_parser = parse_norm)]
    norm: VectorNormKind,
    /// Sample count for the 1- and ∞-norm brackets.
    #[arg(long, default_value_t = crate::linalg::DEFAULT_SAMPLES)]
    samples: usize,
}

fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect()
}

fn parse_check(s: &str) -> Result<Check, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_norm(s: &str) -> Result<VectorNormKind, String> {
    s.parse()
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Builtin(String),
    File(PathBuf),
}

impl fmt::Display for ProblemSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Builtin(name) => f.write_str(name),
            Self::File(path) => write!(f, "{}", path.display()),
        }
    }
}

impl From<SourceArgs> for ProblemSource {
    fn from(a: SourceArgs) -> Self {
        match (a.builtin, a.problem) {
            (Some(name), _) => Self::Builtin(name),
            (None, Some(path)) => Self::File(path),
            (None, None) => unreachable!("clap requires one source"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSpec {
    /// All ones, normalized.
    Default,
    Explicit(Vec<f64>),
    /// Standard normal draws from ChaCha8 seeded with the value.
    Random(u64),
}

impl DirectionSpec {
    pub fn parse(s: &str) -> Result<Self, String> {
        if let Some(seed) = s.strip_prefix("random:") {
            return seed
                .trim()
                .parse()
                .map(Self::Random)
                .map_err(|e| format!("bad seed `{seed}`: {e}"));
        }
        parse_list(s).map(Self::Explicit)
    }

    pub fn resolve(&self, n: usize) -> Vec<f64> {
        match self {
            Self::Default => vec![1.0; n],
            Self::Explicit(v) => v.clone(),
            Self::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
            }
        }
    }
}

impl fmt::Display for DirectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Default => f.write_str("default"),
            Self::Explicit(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                f.write_str(&parts.join(","))
            }
            Self::Random(seed) => write!(f, "random:{seed}"),
        }
    }
}

/// Everything that determines a sweep run and its report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: ProblemSource,
    pub direction: DirectionSpec,
    pub t_range: (f64, f64, usize),
    pub checks: Vec<Check>,
    pub include_mu_f: bool,
    pub format: ReportFormat,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(source: ProblemSource) -> Self {
        Self {
            source,
            direction: DirectionSpec::Default,
            t_range: (1e-1, 1e-6, 3),
            checks: Check::ALL.to_vec(),
            include_mu_f: true,
            format: ReportFormat::Csv,
            out: None,
        }
    }
}

/// A failed command with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn usage(message: String) -> Self {
        Self {
            code: EXIT_USAGE,
            message,
        }
    }

    fn input(message: String) -> Self {
        Self {
            code: EXIT_INPUT,
            message,
        }
    }

    pub fn code(&self) -> i32 {
        self.code
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoConvergence { .. } | Error::NotMinimal(_) | Error::RankDeficient { .. } => EXIT_NUMERICAL,
            Error::InvalidSweep(_) => EXIT_USAGE,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        Self::input(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => {
            let include = !a.no_mu_f;
            cmd_solve(&a.source.into(), &a.x, include, out)
        }
        Command::Sweep(a) => sweep_config(a).and_then(|cfg| cmd_sweep(&cfg, out, err)),
        Command::Lowerbound(a) => cmd_lowerbound(&a.matrix, a.norm, a.samples, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.code()
        }
    }
}

fn sweep_config(a: SweepArgs) -> Result<RunConfig, CliError> {
    let direction = match &a.direction {
        Some(s) => DirectionSpec::parse(s).map_err(CliError::usage)?,
        None => DirectionSpec::Default,
    };
    if !(a.t_start > a.t_stop && a.t_stop > 0.0) {
        return Err(CliError::usage(format!(
            "need --t-start > --t-stop > 0, got {} and {}",
            a.t_start, a.t_stop
        )));
    }
    if a.per_decade == 0 {
        return Err(CliError::usage("--per-decade must be at least 1".into()));
    }
    Ok(RunConfig {
        source: a.source.into(),
        direction,
        t_range: (a.t_start, a.t_stop, a.per_decade),
        checks: a.checks.unwrap_or_else(|| Check::ALL.to_vec()),
        include_mu_f: !a.no_mu_f,
        format: a.format,
        out: a.out,
    })
}

fn load(source: &ProblemSource) -> Result<(ParameterizedSystem, Anchor), CliError> {
    match source {
        ProblemSource::Builtin(name) => Ok(builtin(name)?),
        ProblemSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            let pf = parse_problem(&text)?;
            let anchor = pf
                .anchor
                .ok_or_else(|| CliError::input(format!("{} has no `anchor` line", path.display())))?;
            let mut system = pf.system;
            system.name = path.display().to_string();
            Ok((system, anchor))
        }
    }
}

/// Loads the problem and checks the anchor, printing the hypothesis report
/// when it fails.
fn anchored(source: &ProblemSource, out: &mut dyn Write) -> Result<AnchoredProblem, CliError> {
    let (sys, anchor) = load(source)?;
    let report = check_hypotheses(&sys, &anchor)?;
    match AnchoredProblem::new(sys, anchor) {
        Ok(p) => Ok(p),
        Err(e) => {
            writeln!(out, "{report}")?;
            Err(CliError::input(e.to_string()))
        }
    }
}

/// Prints all four values and the duality gaps at `x`.
pub fn cmd_solve(source: &ProblemSource, x: &[f64], include_mu_f: bool, out: &mut dyn Write) -> Result<i32, CliError> {
    let prob = anchored(source, out)?;
    writeln!(out, "problem: {}", prob.system().name)?;
    writeln!(out, "x: {}", join(x))?;
    writeln!(out, "{}", prob.hypotheses())?;
    let mut sols = Vec::new();
    for which in Linearization::ALL {
        sols.push(prob.solve(x, which)?);
    }
    let mu_f_result = if include_mu_f {
        Some(mu_f(&prob, x, &SolveOptions::default()))
    } else {
        None
    };
    match &mu_f_result {
        Some(Ok(sol)) => writeln!(out, "mu_f = {}", display(sol.value))?,
        Some(Err(_)) => writeln!(out, "mu_f = (failed)")?,
        None => {}
    }
    for (i, sol) in sols.iter().enumerate() {
        writeln!(
            out,
            "mu{} = {}  dual = {}  gap = {:e}",
            i + 1,
            display(sol.value),
            display(sol.dual_value),
            sol.duality_gap()
        )?;
    }
    if let Some(Err(e)) = mu_f_result {
        return Err(e.into());
    }
    Ok(EXIT_OK)
}

/// Runs a sweep and writes the report and a verdict summary. The report
/// goes to `cfg.out` when set, else to `out` with the summary on `err`.
/// Returns 1 if any requested check failed.
pub fn cmd_sweep(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let prob = anchored(&cfg.source, out)?;
    let n = prob.system().n();
    let direction = cfg.direction.resolve(n);
    if direction.len() != n {
        return Err(CliError::usage(format!(
            "direction has length {}, expected {n}",
            direction.len()
        )));
    }
    let (start, stop, per_decade) = cfg.t_range;
    let spec = SweepSpec::geometric(&direction, start, stop, per_decade, cfg.include_mu_f)?;
    let rows = run_sweep(&prob, &spec)?;
    let h6 = prob.hypotheses().h6_one_to_one;
    let verdicts = run_checks(&rows, &cfg.checks, h6, &CheckConfig::default());
    let meta = ReportMeta {
        problem: prob.system().name.clone(),
        direction_source: cfg.direction.to_string(),
        direction: spec.direction().to_vec(),
        t_values: spec.t_values().to_vec(),
    };
    let report = emit_report_with_meta(&rows, &verdicts, &meta, cfg.format);

    let mut summary = Vec::new();
    writeln!(summary, "problem: {}", meta.problem)?;
    writeln!(
        summary,
        "direction: {} ({})",
        join(&meta.direction),
        meta.direction_source
    )?;
    writeln!(summary, "rows: {}", rows.len())?;
    let row_errors = rows.iter().filter(|r| r.error.is_some()).count();
    if row_errors > 0 {
        writeln!(summary, "rows with errors: {row_errors}")?;
    }
    for v in &verdicts {
        writeln!(summary, "{v}")?;
    }
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &report)
                .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;
            out.write_all(&summary)?;
        }
        None => {
            out.write_all(&report)?;
            err.write_all(&summary)?;
        }
    }
    Ok(if verdicts.iter().any(|v| v.failed()) {
        EXIT_VERDICT
    } else {
        EXIT_OK
    })
}

/// Prints `σ_min` for the 2-norm and a `[lo, hi]` bracket otherwise.
pub fn cmd_lowerbound(path: &Path, norm: VectorNormKind, samples: usize, out: &mut dyn Write) -> Result<i32, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let a = parse_matrix(&text)?;
    let bound = match norm {
        VectorNormKind::Two => matrix_lower_bound(&a, norm),
        _ => sampled_lower_bound(&a, norm, samples).map(LowerBound::Bracket),
    }
    .map_err(|e| CliError::input(e.to_string()))?;
    match bound {
        LowerBound::Exact { value } => writeln!(out, "{value}")?,
        LowerBound::Bracket(b) => writeln!(
            out,
            "[{}, {}]  ({} samples, covering radius {:e})",
            b.lo, b.hi, b.samples, b.covering_radius
        )?,
    }
    Ok(EXIT_OK)
}

/// Rows of whitespace-separated decimals, one row per line. Blank lines and
/// `#` comments are skipped.
pub fn parse_matrix(text: &str) -> crate::Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        let mut col = 0;
        for tok in body.split_whitespace() {
            let start = body[col..].find(tok).map_or(col, |o| col + o);
            col = start + tok.len();
            row.push(tok.parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                column: start + 1,
                message: format!("`{tok}`: {e}"),
            })?);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::DimensionMismatch(format!(
                    "line {}: row has {} entries, expected {}",
                    idx + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty matrix".into(),
        });
    }
    Matrix::from_rows(&rows)
}

/// Rounds to 15 significant digits so that printed values hide the last
/// bits of rounding noise.
fn display(v: f64) -> f64 {
    format!("{v:.14e}").parse().unwrap_or(v)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
