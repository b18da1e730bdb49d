use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is rank deficient: |R[{index},{index}]| = {pivot:e} <= {threshold:e}")]
    RankDeficient { index: usize, pivot: f64, threshold: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("matrix lower bound is undefined for the zero matrix")]
    ZeroMatrix,
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown builtin system `{0}`")]
    UnknownBuiltin(String),
    #[error("anchor is not a root: ||F(y0, x0)|| = {residual:e} exceeds {tolerance:e}")]
    AnchorNotRoot { residual: f64, tolerance: f64 },
    #[error("partial Jacobian in y at the anchor is not onto (rank {rank} < p = {p})")]
    NotOnto { rank: usize, p: usize },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("iterate left the trust region: ||y - y_ref|| = {distance:e} > {radius:e}")]
    OutsideTrustRegion { distance: f64, radius: f64 },
    #[error("minimizer failed its optimality check: {0}")]
    NotMinimal(String),
    #[error("no feasible grid point found within radius {radius}")]
    NoFeasiblePoint { radius: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid sweep parameters: {0}")]
    InvalidSweep(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
