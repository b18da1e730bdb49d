use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{add, norm2, sub, LeastNorm};
use crate::problems::AnchoredProblem;

use super::{project_to_root, SolveMethod, SolveOptions, SolveTrace};

/// Absolute bound on `‖F(y_k, x)‖` at convergence.
pub const SQP_RESIDUAL_TOL: f64 = 1e-11;
/// Relative bound on the last step.
pub const STEP_TOL: f64 = 1e-12;

const MINIMALITY_SLACK: f64 = 1e-10;
const KKT_TOL: f64 = 1e-8;
const JITTER: f64 = 1e-7;
const UNIQUENESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuFSolution {
    pub value: f64,
    pub y_star: Vec<f64>,
    pub trace: SolveTrace,
    /// Largest value spread across jittered starts, when probed.
    pub start_spread: Option<f64>,
}

impl MuFSolution {
    /// Only meaningful when the uniqueness probe ran.
    pub fn is_non_unique(&self) -> bool {
        self.start_spread.is_some_and(|s| s > UNIQUENESS_TOL)
    }
}

/// `μ_F(x) = min ‖y - y₀‖₂  s.t.  F(y, x) = 0`, the distance from the
/// anchor root to the nearest root of `F(·, x)` in its neighborhood.
///
/// Each step solves the linearized problem
/// `min ‖y - y₀‖ : F(y_k, x) + ∂₁F(y_k, x)(y - y_k) = 0` in closed form,
/// starting from `y₀`. The result is checked against a feasible point from
/// [`project_to_root`] and against first-order optimality.
///
/// ```
/// use minpert::nonlinear::{mu_f, SolveOptions};
/// use minpert::problems::AnchoredProblem;
/// use minpert::system::builtin;
///
/// let (sys, anchor) = builtin("circle").unwrap();
/// let prob = AnchoredProblem::new(sys, anchor).unwrap();
/// let sol = mu_f(&prob, &[1.21], &SolveOptions::default()).unwrap();
/// assert!((sol.value - 0.1).abs() < 1e-14);
/// ```
pub fn mu_f(prob: &AnchoredProblem, x: &[f64], opts: &SolveOptions) -> Result<MuFSolution> {
    let y0 = &prob.anchor().y0;
    let (y_star, trace) = sqp(prob, x, y0, opts.max_iter)?;
    let value = norm2(&sub(&y_star, y0));
    check_kkt(prob, x, &y_star)?;
    check_against_projector(prob, x, value, opts)?;

    let start_spread = if opts.uniqueness_probe {
        let mut spread: f64 = 0.0;
        for sign in [1.0, -1.0] {
            let start: Vec<f64> = y0.iter().map(|v| v + sign * JITTER).collect();
            if let Ok((y, _)) = sqp(prob, x, &start, opts.max_iter) {
                spread = spread.max((norm2(&sub(&y, y0)) - value).abs());
            }
        }
        Some(spread)
    } else {
        None
    };
    Ok(MuFSolution {
        value,
        y_star,
        trace,
        start_spread,
    })
}

fn sqp(prob: &AnchoredProblem, x: &[f64], start: &[f64], max_iter: usize) -> Result<(Vec<f64>, SolveTrace)> {
    let sys = prob.system();
    let y0 = &prob.anchor().y0;
    let mut y = start.to_vec();
    let mut trace = SolveTrace::new(SolveMethod::Sqp, &y);
    loop {
        let f = sys.eval(&y, x)?;
        let f_norm = norm2(&f);
        trace.residual_norms.push(f_norm);
        if !f_norm.is_finite() || trace.iterations() >= max_iter {
            trace.finish(false);
            return Err(Error::NoConvergence {
                iterations: trace.iterations(),
                residual: f_norm,
            });
        }
        let k = sys.jacobian_y(&y, x)?;
        // K (y_next - y₀) = K (y - y₀) - F(y).
        let rhs = sub(&k.matvec(&sub(&y, y0)), &f);
        let y_next = add(y0, &LeastNorm::new(&k)?.solve(&rhs)?);
        let step = norm2(&sub(&y_next, &y));
        trace.step_norms.push(step);
        trace.iterates.push(y_next.clone());
        let done = step <= STEP_TOL * (1.0 + norm2(&y)) && f_norm <= SQP_RESIDUAL_TOL;
        y = y_next;
        if done {
            trace.residual_norms.push(norm2(&sys.eval(&y, x)?));
            trace.finish(true);
            return Ok((y, trace));
        }
    }
}

/// `y* - y₀` must lie in the row space of `∂₁F(y*, x)`.
fn check_kkt(prob: &AnchoredProblem, x: &[f64], y_star: &[f64]) -> Result<()> {
    let z = sub(y_star, &prob.anchor().y0);
    let k = prob.system().jacobian_y(y_star, x)?;
    let null = norm2(&LeastNorm::new(&k)?.null_component(&z)?);
    let bound = KKT_TOL * norm2(&z) + 1e-15;
    if null > bound {
        return Err(Error::NotMinimal(format!(
            "null-space component {null:e} of y* - y0 exceeds {bound:e}"
        )));
    }
    Ok(())
}

fn check_against_projector(prob: &AnchoredProblem, x: &[f64], value: f64, opts: &SolveOptions) -> Result<()> {
    let anchor = prob.anchor();
    // The projector may fail far from x₀; only a root it does find constrains μ_F.
    if let Ok((y, _)) = project_to_root(prob.system(), anchor, x, &anchor.y0, opts) {
        let feasible = norm2(&sub(&y, &anchor.y0));
        if value > feasible + MINIMALITY_SLACK {
            return Err(Error::NotMinimal(format!(
                "value {value:e} exceeds the distance {feasible:e} of a projected root"
            )));
        }
    }
    Ok(())
}
