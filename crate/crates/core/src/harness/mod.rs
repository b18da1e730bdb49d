//! Sweeps along rays `x = x₀ + t·d` with `t → 0`, tabulating `μ_F` and the
//! three linearized values, and the verdicts rendered from those tables.

mod checks;
mod report;

pub use checks::{
    check_asymptotic_equality, check_differential_equivalence, check_duality, check_lipschitz, decade_of,
    estimate_lipschitz, run_checks, Check, CheckConfig, Quantity, Regime, Status, Verdict, ASYMPTOTIC_PAIRS,
    DUALITY_TOL,
};
pub use report::{emit_report, emit_report_with_meta, ReportFormat, ReportMeta, CSV_COLUMNS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::nonlinear::{mu_f, SolveOptions};
use crate::problems::{AnchoredProblem, LinearizedSolution};

/// Below this `t` the difference `μ_F(x) - μᵢ(x)` is dominated by rounding
/// and `μ_F` is not computed.
pub const MU_F_MIN_T: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    direction: Vec<f64>,
    t_values: Vec<f64>,
    include_mu_f: bool,
}

impl SweepSpec {
    /// Normalizes `direction`; `t_values` must be positive and strictly
    /// decreasing.
    pub fn new(direction: &[f64], t_values: Vec<f64>, include_mu_f: bool) -> Result<Self> {
        if direction.is_empty() || direction.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep(
                "direction must be a finite, non-empty vector".into(),
            ));
        }
        let len = norm2(direction);
        if len == 0.0 {
            return Err(Error::InvalidSweep("direction must be nonzero".into()));
        }
        if t_values.is_empty() {
            return Err(Error::InvalidSweep("no t values".into()));
        }
        if t_values.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidSweep("t values must be finite and positive".into()));
        }
        if t_values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidSweep("t values must be strictly decreasing".into()));
        }
        Ok(Self {
            direction: direction.iter().map(|v| v / len).collect(),
            t_values,
            include_mu_f,
        })
    }

    /// `per_decade` points in each decade from `start` down to one decade
    /// below `stop`.
    pub fn geometric(direction: &[f64], start: f64, stop: f64, per_decade: usize, include_mu_f: bool) -> Result<Self> {
        Self::new(direction, geometric_t_values(start, stop, per_decade)?, include_mu_f)
    }

    /// Default sweep: `1e-1` to `1e-6`, three points per decade.
    pub fn default_for(direction: &[f64]) -> Result<Self> {
        Self::geometric(direction, 1e-1, 1e-6, 3, true)
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }

    pub fn include_mu_f(&self) -> bool {
        self.include_mu_f
    }
}

/// `t_k = start·10^(-k/per_decade)`, covering every decade whose upper end
/// lies in `[stop, start]`.
///
/// ```
/// let t = minpert::harness::geometric_t_values(1e-1, 1e-6, 3).unwrap();
/// assert_eq!(t.len(), 18);
/// assert_eq!(t[0], 1e-1);
/// ```
pub fn geometric_t_values(start: f64, stop: f64, per_decade: usize) -> Result<Vec<f64>> {
    if !(start.is_finite() && stop.is_finite() && stop > 0.0 && start > stop) {
        return Err(Error::InvalidSweep(format!(
            "need start > stop > 0, got start {start}, stop {stop}"
        )));
    }
    if per_decade == 0 {
        return Err(Error::InvalidSweep("per_decade must be at least 1".into()));
    }
    let decades = ((start / stop).log10() + 1.0).round() as usize;
    let count = decades * per_decade;
    Ok((0..count)
        .map(|k| start * 10f64.powf(-(k as f64) / per_decade as f64))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub t: f64,
    pub x: Vec<f64>,
    pub mu_f: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub mu3: Option<f64>,
    pub r1: Option<f64>,
    pub r2: Option<f64>,
    pub r3: Option<f64>,
    pub gap1: Option<f64>,
    pub gap2: Option<f64>,
    pub gap3: Option<f64>,
    /// `|μ₃ - μ₂| / t`.
    pub diff_quotient: Option<f64>,
    /// Errors met while filling the row, if any.
    pub error: Option<String>,
}

impl SweepRow {
    fn empty(t: f64, x: Vec<f64>) -> Self {
        Self {
            t,
            x,
            mu_f: None,
            mu1: None,
            mu2: None,
            mu3: None,
            r1: None,
            r2: None,
            r3: None,
            gap1: None,
            gap2: None,
            gap3: None,
            diff_quotient: None,
            error: None,
        }
    }

    pub fn get(&self, q: Quantity) -> Option<f64> {
        match q {
            Quantity::MuF => self.mu_f,
            Quantity::Mu1 => self.mu1,
            Quantity::Mu2 => self.mu2,
            Quantity::Mu3 => self.mu3,
        }
    }

    fn push_error(&mut self, what: &str, err: &Error) {
        let msg = format!("{what}: {err}");
        self.error = Some(match self.error.take() {
            Some(prev) => format!("{prev}; {msg}"),
            None => msg,
        });
    }
}

/// Evaluates one row per `t`. Failures are recorded in the row.
pub fn run_sweep(prob: &AnchoredProblem, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    let n = prob.system().n();
    if spec.direction.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "direction has length {}, expected {n}",
            spec.direction.len()
        )));
    }
    Ok(spec.t_values.par_iter().map(|&t| sweep_row(prob, spec, t)).collect())
}

fn sweep_row(prob: &AnchoredProblem, spec: &SweepSpec, t: f64) -> SweepRow {
    let x: Vec<f64> = prob
        .anchor()
        .x0
        .iter()
        .zip(&spec.direction)
        .map(|(a, d)| a + t * d)
        .collect();
    let mut row = SweepRow::empty(t, x.clone());

    let mut fill = |label: &str, res: Result<LinearizedSolution>| match res {
        Ok(sol) => Some((sol.value, sol.duality_gap())),
        Err(e) => {
            row.push_error(label, &e);
            None
        }
    };
    let first = fill("mu1", prob.mu1(&x));
    let second = fill("mu2", prob.mu2(&x));
    let third = fill("mu3", prob.mu3(&x));
    (row.mu1, row.gap1) = (first.map(|v| v.0), first.map(|v| v.1));
    (row.mu2, row.gap2) = (second.map(|v| v.0), second.map(|v| v.1));
    (row.mu3, row.gap3) = (third.map(|v| v.0), third.map(|v| v.1));
    if let (Some(a), Some(b)) = (row.mu2, row.mu3) {
        row.diff_quotient = Some((b - a).abs() / t);
    }

    if spec.include_mu_f && t >= MU_F_MIN_T {
        match mu_f(prob, &x, &SolveOptions::default()) {
            Ok(sol) => row.mu_f = Some(sol.value),
            Err(e) => row.push_error("mu_f", &e),
        }
    }
    if let Some(m) = row.mu_f.filter(|m| *m != 0.0) {
        row.r1 = row.mu1.map(|v| v / m);
        row.r2 = row.mu2.map(|v| v / m);
        row.r3 = row.mu3.map(|v| v / m);
    }
    row
}
