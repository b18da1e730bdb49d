//! Nonlinear solvers: the frozen-Jacobian level-set iteration, a root
//! projector built on it, the exact minimal perturbation `μ_F`, and a
//! grid-search oracle for small systems.

mod mu;
mod oracle;

pub use mu::{mu_f, MuFSolution, SQP_RESIDUAL_TOL, STEP_TOL};
pub use oracle::{brute_force_mu_f, MAX_GRID_POINTS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add, norm2, sub, LeastNorm};
use crate::system::{Anchor, ParameterizedSystem};

/// Relative residual tolerance of the level-set iteration.
pub const LEVELSET_RESIDUAL_TOL: f64 = 1e-12;

pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub max_iter: usize,
    /// Largest allowed `‖y_init - y₀‖`.
    pub trust_radius: f64,
    /// Rerun `μ_F` from jittered starts and flag diverging values.
    pub uniqueness_probe: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            trust_radius: f64::INFINITY,
            uniqueness_probe: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    /// Corrections with the Jacobian frozen at `(y₀, x)`.
    FrozenJacobian,
    /// Corrections with the Jacobian at the current iterate.
    GaussNewton,
    /// Minimum-distance iteration for `μ_F`.
    Sqp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub method: SolveMethod,
    /// Every iterate, starting with the initial point.
    pub iterates: Vec<Vec<f64>>,
    /// `‖F(y_k, x) - target‖` for each iterate.
    pub residual_norms: Vec<f64>,
    pub step_norms: Vec<f64>,
    pub converged: bool,
    /// Largest ratio of successive step norms above the rounding floor.
    pub rate_estimate: f64,
}

impl SolveTrace {
    fn new(method: SolveMethod, y: &[f64]) -> Self {
        Self {
            method,
            iterates: vec![y.to_vec()],
            residual_norms: Vec::new(),
            step_norms: Vec::new(),
            converged: false,
            rate_estimate: 0.0,
        }
    }

    pub fn iterations(&self) -> usize {
        self.step_norms.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_norms.last().copied().unwrap_or(f64::NAN)
    }

    fn finish(&mut self, converged: bool) {
        self.converged = converged;
        self.rate_estimate = rate_estimate(&self.step_norms, &self.iterates);
    }
}

fn rate_estimate(steps: &[f64], iterates: &[Vec<f64>]) -> f64 {
    let mut rate: f64 = 0.0;
    for k in 1..steps.len() {
        let floor = 1e-14 * (1.0 + norm2(&iterates[k]));
        if steps[k] > floor && steps[k - 1] > floor {
            rate = rate.max(steps[k] / steps[k - 1]);
        }
    }
    rate
}

fn check_trust(anchor: &Anchor, y_init: &[f64], opts: &SolveOptions) -> Result<()> {
    if y_init.len() != anchor.y0.len() {
        return Err(Error::DimensionMismatch(format!(
            "initial point has length {}, expected {}",
            y_init.len(),
            anchor.y0.len()
        )));
    }
    let distance = norm2(&sub(y_init, &anchor.y0));
    if distance > opts.trust_radius {
        return Err(Error::OutsideTrustRegion {
            distance,
            radius: opts.trust_radius,
        });
    }
    Ok(())
}

/// Solves `F(y, x) = target` by `y ← y + w` with `w` the minimum-norm
/// solution of `∂₁F(y₀, x) w = -(F(y, x) - target)`.
///
/// ```
/// use minpert::nonlinear::{frozen_levelset_solve, SolveOptions};
/// use minpert::system::builtin;
///
/// let (sys, anchor) = builtin("circle").unwrap();
/// let (y, trace) =
///     frozen_levelset_solve(&sys, &anchor, &[1.21], &[0.0], &[1.0, 0.0], &SolveOptions::default())
///         .unwrap();
/// assert!((y[0] - 1.1).abs() < 1e-12 && y[1] == 0.0);
/// assert!(trace.converged && trace.rate_estimate < 0.2);
/// ```
pub fn frozen_levelset_solve(
    sys: &ParameterizedSystem,
    anchor: &Anchor,
    x: &[f64],
    target: &[f64],
    y_init: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveTrace)> {
    check_trust(anchor, y_init, opts)?;
    if target.len() != sys.p() {
        return Err(Error::DimensionMismatch(format!(
            "target has length {}, expected {}",
            target.len(),
            sys.p()
        )));
    }
    let solver = LeastNorm::new(&sys.jacobian_y(&anchor.y0, x)?)?;
    let tol = LEVELSET_RESIDUAL_TOL * (1.0 + norm2(target));
    correct(sys, x, target, y_init, opts.max_iter, tol, Some(&solver))
}

/// Newton-type correction loop. With `frozen` absent the Jacobian is
/// refactored at every iterate (Gauss-Newton).
fn correct(
    sys: &ParameterizedSystem,
    x: &[f64],
    target: &[f64],
    y_init: &[f64],
    max_iter: usize,
    tol: f64,
    frozen: Option<&LeastNorm>,
) -> Result<(Vec<f64>, SolveTrace)> {
    let method = match frozen {
        Some(_) => SolveMethod::FrozenJacobian,
        None => SolveMethod::GaussNewton,
    };
    let mut y = y_init.to_vec();
    let mut trace = SolveTrace::new(method, &y);
    loop {
        let res = sub(&sys.eval(&y, x)?, target);
        let rn = norm2(&res);
        trace.residual_norms.push(rn);
        if rn <= tol {
            trace.finish(true);
            return Ok((y, trace));
        }
        if !rn.is_finite() || trace.iterations() >= max_iter {
            trace.finish(false);
            return Err(Error::NoConvergence {
                iterations: trace.iterations(),
                residual: rn,
            });
        }
        let neg: Vec<f64> = res.iter().map(|v| -v).collect();
        let w = match frozen {
            Some(solver) => solver.solve(&neg)?,
            None => LeastNorm::new(&sys.jacobian_y(&y, x)?)?.solve(&neg)?,
        };
        trace.step_norms.push(norm2(&w));
        y = add(&y, &w);
        trace.iterates.push(y.clone());
    }
}

/// Finds a root of `F(·, x)` near `y_init`: the frozen-Jacobian iteration
/// first, then Gauss-Newton with the current Jacobian if that stalls.
pub fn project_to_root(
    sys: &ParameterizedSystem,
    anchor: &Anchor,
    x: &[f64],
    y_init: &[f64],
    opts: &SolveOptions,
) -> Result<(Vec<f64>, SolveTrace)> {
    let zero = vec![0.0; sys.p()];
    match frozen_levelset_solve(sys, anchor, x, &zero, y_init, opts) {
        Err(Error::NoConvergence { .. } | Error::RankDeficient { .. }) => {
            correct(sys, x, &zero, y_init, opts.max_iter, LEVELSET_RESIDUAL_TOL, None)
        }
        other => other,
    }
}
