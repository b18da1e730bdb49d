//! The linearized minimal-perturbation problems at an anchored root.
//!
//! With `K(x) = ∂₁F(y₀, x)`, `J(x) = ∂₂F(y₀, x)`, `r(x) = F(y₀, x)` and
//! `Δx = x - x₀`, the three problems are
//!
//! | value | minimization                      | dual maximization                     |
//! |-------|-----------------------------------|---------------------------------------|
//! | `μ₁`  | `min ‖Δy‖ : K(x) Δy = -r(x)`      | `max uᵀr(x) : ‖K(x)ᵀu‖ ≤ 1`           |
//! | `μ₂`  | `min ‖Δy‖ : K(x₀) Δy = -r(x)`     | `max uᵀr(x) : ‖K(x₀)ᵀu‖ ≤ 1`          |
//! | `μ₃`  | `min ‖Δy‖ : K(x₀) Δy = -J(x₀)Δx`  | `max uᵀJ(x₀)Δx : ‖K(x₀)ᵀu‖ ≤ 1`       |
//!
//! All norms are Euclidean. Primal values come from least-norm solves and
//! dual values from `‖R⁻ᵀs‖₂` with the QR factors of the transposed
//! Jacobian, so the two sides of each pair are computed independently.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, sub, LeastNorm, Matrix, VectorNormKind};
use crate::nonlinear::{self, MuFSolution, SolveOptions};
use crate::system::{check_hypotheses, Anchor, HypothesisReport, ParameterizedSystem, ANCHOR_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Linearization {
    /// `F⁽¹⁾`: tangent in `y` at `(y₀, x)`.
    First,
    /// `F⁽²⁾`: Jacobian in `y` frozen at `(y₀, x₀)`, exact residual.
    Second,
    /// `F⁽³⁾`: full linearization at `(y₀, x₀)`.
    Third,
}

impl Linearization {
    pub const ALL: [Linearization; 3] = [Self::First, Self::Second, Self::Third];
}

/// Primal minimizer and dual value of one linearized problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizedSolution {
    pub value: f64,
    pub delta_y: Vec<f64>,
    pub dual_value: f64,
    /// Maximizing functional `u` of the dual; `None` when the right-hand
    /// side vanishes.
    pub certificate: Option<Vec<f64>>,
}

impl LinearizedSolution {
    fn zero(m: usize) -> Self {
        Self {
            value: 0.0,
            delta_y: vec![0.0; m],
            dual_value: 0.0,
            certificate: None,
        }
    }

    /// `|primal - dual| / (1 + primal)`.
    pub fn duality_gap(&self) -> f64 {
        (self.value - self.dual_value).abs() / (1.0 + self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuEstimates {
    pub x: Vec<f64>,
    pub mu_f: Option<f64>,
    pub y_star: Option<Vec<f64>>,
    pub first: LinearizedSolution,
    pub second: LinearizedSolution,
    pub third: LinearizedSolution,
}

impl MuEstimates {
    pub fn get(&self, which: Linearization) -> &LinearizedSolution {
        match which {
            Linearization::First => &self.first,
            Linearization::Second => &self.second,
            Linearization::Third => &self.third,
        }
    }
}

/// A system together with a regular root `(y₀, x₀)` and the cached
/// Jacobians and factorization at that root.
#[derive(Debug, Clone)]
pub struct AnchoredProblem {
    system: ParameterizedSystem,
    anchor: Anchor,
    k0: Matrix,
    j0: Matrix,
    k0_solver: LeastNorm,
    report: HypothesisReport,
}

impl AnchoredProblem {
    /// Fails unless `F(y₀, x₀) = 0` within [`ANCHOR_TOL`] and `∂₁F(y₀, x₀)`
    /// has full row rank.
    pub fn new(system: ParameterizedSystem, anchor: Anchor) -> Result<Self> {
        let report = check_hypotheses(&system, &anchor)?;
        if !report.anchor_is_root() {
            return Err(Error::AnchorNotRoot {
                residual: report.residual_norm,
                tolerance: ANCHOR_TOL,
            });
        }
        if !report.h5_onto {
            return Err(Error::NotOnto {
                rank: report.rank_k0,
                p: system.p(),
            });
        }
        let k0 = system.jacobian_y(&anchor.y0, &anchor.x0)?;
        let j0 = system.jacobian_x(&anchor.y0, &anchor.x0)?;
        let k0_solver = LeastNorm::new(&k0)?;
        Ok(Self {
            system,
            anchor,
            k0,
            j0,
            k0_solver,
            report,
        })
    }

    pub fn system(&self) -> &ParameterizedSystem {
        &self.system
    }

    pub fn anchor(&self) -> &Anchor {
        &self.anchor
    }

    pub fn k0(&self) -> &Matrix {
        &self.k0
    }

    pub fn j0(&self) -> &Matrix {
        &self.j0
    }

    pub fn hypotheses(&self) -> &HypothesisReport {
        &self.report
    }

    /// Solvers measure perturbations in the 2-norm only.
    pub fn norm(&self) -> VectorNormKind {
        VectorNormKind::Two
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.system.n() {
            return Err(Error::DimensionMismatch(format!(
                "x has length {}, expected {}",
                x.len(),
                self.system.n()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameter x"));
        }
        Ok(())
    }

    fn at_anchor(&self, x: &[f64]) -> bool {
        x == self.anchor.x0.as_slice()
    }

    /// `r(x) = F(y₀, x)`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_x(x)?;
        self.system.eval(&self.anchor.y0, x)
    }

    pub fn mu1(&self, x: &[f64]) -> Result<LinearizedSolution> {
        self.check_x(x)?;
        if self.at_anchor(x) {
            return Ok(LinearizedSolution::zero(self.system.m()));
        }
        // K(x) is refactored on every call.
        let kx = self.system.jacobian_y(&self.anchor.y0, x)?;
        let solver = LeastNorm::new(&kx)?;
        solve_pair(&solver, &self.residual(x)?)
    }

    pub fn mu2(&self, x: &[f64]) -> Result<LinearizedSolution> {
        self.check_x(x)?;
        if self.at_anchor(x) {
            return Ok(LinearizedSolution::zero(self.system.m()));
        }
        solve_pair(&self.k0_solver, &self.residual(x)?)
    }

    pub fn mu3(&self, x: &[f64]) -> Result<LinearizedSolution> {
        self.check_x(x)?;
        if self.at_anchor(x) {
            return Ok(LinearizedSolution::zero(self.system.m()));
        }
        let dx = sub(x, &self.anchor.x0);
        solve_pair(&self.k0_solver, &self.j0.matvec(&dx))
    }

    pub fn solve(&self, x: &[f64], which: Linearization) -> Result<LinearizedSolution> {
        match which {
            Linearization::First => self.mu1(x),
            Linearization::Second => self.mu2(x),
            Linearization::Third => self.mu3(x),
        }
    }

    pub fn duality_gap(&self, x: &[f64], which: Linearization) -> Result<f64> {
        Ok(self.solve(x, which)?.duality_gap())
    }

    /// All linearized values at `x`, plus `μ_F` when requested.
    pub fn estimates(&self, x: &[f64], include_mu_f: bool) -> Result<MuEstimates> {
        let first = self.mu1(x)?;
        let second = self.mu2(x)?;
        let third = self.mu3(x)?;
        let (mu_f, y_star) = if include_mu_f {
            let MuFSolution { value, y_star, .. } = nonlinear::mu_f(self, x, &SolveOptions::default())?;
            (Some(value), Some(y_star))
        } else {
            (None, None)
        };
        Ok(MuEstimates {
            x: x.to_vec(),
            mu_f,
            y_star,
            first,
            second,
            third,
        })
    }
}

/// Primal `min ‖Δy‖ : K Δy = -s` and dual `max uᵀs : ‖Kᵀu‖ ≤ 1`.
fn solve_pair(solver: &LeastNorm, s: &[f64]) -> Result<LinearizedSolution> {
    let neg: Vec<f64> = s.iter().map(|v| -v).collect();
    let delta_y = solver.solve(&neg)?;
    Ok(LinearizedSolution {
        value: norm2(&delta_y),
        dual_value: solver.dual_value(s)?,
        certificate: solver.dual_functional(s)?,
        delta_y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{builtin, parse_problem};

    fn problem(name: &str) -> AnchoredProblem {
        let (sys, anchor) = builtin(name).unwrap();
        AnchoredProblem::new(sys, anchor).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn circle_residuals() {
        let prob = problem("circle");
        assert_eq!(prob.residual(&[1.0]).unwrap(), vec![0.0]);
        assert!(close(prob.residual(&[1.21]).unwrap()[0], -0.21, 1e-15));
        assert!(close(prob.residual(&[0.81]).unwrap()[0], 0.19, 1e-15));
    }

    #[test]
    fn circle_linearized_values() {
        let prob = problem("circle");
        for which in Linearization::ALL {
            let sol = prob.solve(&[1.21], which).unwrap();
            assert!(close(sol.value, 0.105, 1e-15), "{which:?}: {}", sol.value);
            assert!(close(sol.delta_y[0], 0.105, 1e-15) && sol.delta_y[1] == 0.0);
            assert!(sol.duality_gap() <= 1e-12);
        }
    }

    #[test]
    fn values_vanish_at_the_anchor() {
        for name in ["circle", "linear2x3", "parabola-underdet"] {
            let prob = problem(name);
            let x0 = prob.anchor().x0.clone();
            for which in Linearization::ALL {
                let sol = prob.solve(&x0, which).unwrap();
                assert_eq!(sol.value, 0.0);
                assert!(sol.certificate.is_none());
                assert_eq!(prob.duality_gap(&x0, which).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn certificate_is_feasible_for_its_own_constraint() {
        let prob = problem("parabola-underdet");
        let x = [0.3];
        let s = prob.residual(&x).unwrap();
        let u = prob.mu2(&x).unwrap().certificate.unwrap();
        let ktu = prob.k0().tr_matvec(&u);
        assert!(close(norm2(&ktu), 1.0, 1e-14));
        assert!(close(crate::linalg::dot(&u, &s), prob.mu2(&x).unwrap().value, 1e-14));
    }

    #[test]
    fn parabola_separates_the_linearizations() {
        let prob = problem("parabola-underdet");
        let x = 0.1f64;
        let r = x + x * x;
        assert!(close(prob.mu1(&[x]).unwrap().value, r / (1.0 + x * x).sqrt(), 1e-15));
        assert!(close(prob.mu2(&[x]).unwrap().value, r, 1e-15));
        assert!(close(prob.mu3(&[x]).unwrap().value, x, 1e-15));
    }

    #[test]
    fn rejects_bad_anchors() {
        let off = parse_problem("anchor y0=(1,0) x0=(2)\neq: y1^2 + y2^2 - x1").unwrap();
        assert!(matches!(
            AnchoredProblem::new(off.system, off.anchor.unwrap()),
            Err(Error::AnchorNotRoot { .. })
        ));
        let flat = parse_problem("anchor y0=(0,0) x0=(0)\neq: y1^2 + y2^2 - x1").unwrap();
        assert!(matches!(
            AnchoredProblem::new(flat.system, flat.anchor.unwrap()),
            Err(Error::NotOnto { rank: 0, p: 1 })
        ));
    }

    #[test]
    fn mu1_reports_rank_loss_away_from_the_anchor() {
        // K(x) = [1 - x] is singular at x = 1.
        let pf = parse_problem("anchor y0=(0) x0=(0)\neq: y1 - x1 y1 + x1").unwrap();
        let prob = AnchoredProblem::new(pf.system, pf.anchor.unwrap()).unwrap();
        assert!(matches!(prob.mu1(&[1.0]), Err(Error::RankDeficient { .. })));
        assert!(prob.mu2(&[1.0]).is_ok());
    }

    #[test]
    fn dimension_and_finiteness_checks() {
        let prob = problem("circle");
        assert!(matches!(prob.mu2(&[1.0, 2.0]), Err(Error::DimensionMismatch(_))));
        assert!(matches!(prob.mu3(&[f64::NAN]), Err(Error::NonFinite(_))));
    }
}
