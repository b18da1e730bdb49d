//! Parameterized polynomial systems `F(y, x) = 0` with `y ∈ ℝᵐ`, `x ∈ ℝⁿ`
//! and `p` equations, evaluated exactly together with their partial
//! Jacobians.

mod builtins;
mod parse;

pub use builtins::{builtin, BUILTIN_NAMES};
pub use parse::{parse_problem, parse_system, parse_system_with, serialize_problem, ProblemFile};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, numerical_rank, Matrix};

pub const DEFAULT_MAX_DEGREE: u32 = 6;
/// Largest admissible `‖F(y₀, x₀)‖₂` for an anchor.
pub const ANCHOR_TOL: f64 = 1e-12;
/// Relative singular value threshold for the rank tests at the anchor.
pub const RANK_TOL: f64 = 1e-10;

/// One monomial `c · ∏ yᵢ^aᵢ · ∏ xⱼ^bⱼ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub coefficient: f64,
    pub y_exponents: Vec<u32>,
    pub x_exponents: Vec<u32>,
}

impl PolyTerm {
    pub fn constant(c: f64, m: usize, n: usize) -> Self {
        Self {
            coefficient: c,
            y_exponents: vec![0; m],
            x_exponents: vec![0; n],
        }
    }

    pub fn degree(&self) -> u32 {
        self.y_exponents.iter().chain(&self.x_exponents).sum()
    }

    fn monomial(&self, y: &[f64], x: &[f64]) -> f64 {
        let mut v = self.coefficient;
        for (&e, &yi) in self.y_exponents.iter().zip(y) {
            if e > 0 {
                v *= yi.powi(e as i32);
            }
        }
        for (&e, &xj) in self.x_exponents.iter().zip(x) {
            if e > 0 {
                v *= xj.powi(e as i32);
            }
        }
        v
    }

    /// Partial derivative of the monomial in the `var`-th variable of the
    /// chosen block.
    fn derivative(&self, y: &[f64], x: &[f64], block: Block, var: usize) -> f64 {
        let exps = match block {
            Block::Y => &self.y_exponents,
            Block::X => &self.x_exponents,
        };
        let e = exps[var];
        if e == 0 {
            return 0.0;
        }
        let mut v = self.coefficient * e as f64;
        for (i, (&ey, &yi)) in self.y_exponents.iter().zip(y).enumerate() {
            let k = if block == Block::Y && i == var { ey - 1 } else { ey };
            if k > 0 {
                v *= yi.powi(k as i32);
            }
        }
        for (j, (&ex, &xj)) in self.x_exponents.iter().zip(x).enumerate() {
            let k = if block == Block::X && j == var { ex - 1 } else { ex };
            if k > 0 {
                v *= xj.powi(k as i32);
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    Y,
    X,
}

/// `F : ℝᵐ × ℝⁿ → ℝᵖ` given as `p` sums of polynomial terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterizedSystem {
    pub name: String,
    m: usize,
    n: usize,
    equations: Vec<Vec<PolyTerm>>,
}

impl ParameterizedSystem {
    pub fn new(name: impl Into<String>, m: usize, n: usize, equations: Vec<Vec<PolyTerm>>) -> Result<Self> {
        Self::with_max_degree(name, m, n, equations, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(
        name: impl Into<String>,
        m: usize,
        n: usize,
        equations: Vec<Vec<PolyTerm>>,
        max_degree: u32,
    ) -> Result<Self> {
        if m == 0 || n == 0 || equations.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "need m, n, p >= 1, got m = {m}, n = {n}, p = {}",
                equations.len()
            )));
        }
        for (k, eq) in equations.iter().enumerate() {
            for term in eq {
                if term.y_exponents.len() != m || term.x_exponents.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "equation {}: term has {}+{} exponents, expected {m}+{n}",
                        k + 1,
                        term.y_exponents.len(),
                        term.x_exponents.len()
                    )));
                }
                if !term.coefficient.is_finite() {
                    return Err(Error::NonFinite("term coefficient"));
                }
                if term.degree() > max_degree {
                    return Err(Error::DimensionMismatch(format!(
                        "equation {}: term of degree {} exceeds the cap {max_degree}",
                        k + 1,
                        term.degree()
                    )));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            m,
            n,
            equations,
        })
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.equations.len()
    }

    pub fn equations(&self) -> &[Vec<PolyTerm>] {
        &self.equations
    }

    /// The same system with every equation multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for term in out.equations.iter_mut().flatten() {
            term.coefficient *= c;
        }
        out
    }

    fn check_point(&self, y: &[f64], x: &[f64]) -> Result<()> {
        if y.len() != self.m || x.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "point has dims ({}, {}), system expects ({}, {})",
                y.len(),
                x.len(),
                self.m,
                self.n
            )));
        }
        Ok(())
    }

    pub fn eval(&self, y: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(y, x)?;
        Ok(self
            .equations
            .iter()
            .map(|eq| eq.iter().map(|t| t.monomial(y, x)).sum())
            .collect())
    }

    /// `∂₁F(y, x)`, the `p × m` Jacobian in `y`.
    pub fn jacobian_y(&self, y: &[f64], x: &[f64]) -> Result<Matrix> {
        self.check_point(y, x)?;
        Ok(self.jacobian(y, x, Block::Y, self.m))
    }

    /// `∂₂F(y, x)`, the `p × n` Jacobian in `x`.
    pub fn jacobian_x(&self, y: &[f64], x: &[f64]) -> Result<Matrix> {
        self.check_point(y, x)?;
        Ok(self.jacobian(y, x, Block::X, self.n))
    }

    fn jacobian(&self, y: &[f64], x: &[f64], block: Block, width: usize) -> Matrix {
        let mut jac = Matrix::zeros(self.p(), width);
        for (i, eq) in self.equations.iter().enumerate() {
            for term in eq {
                for j in 0..width {
                    jac[(i, j)] += term.derivative(y, x, block, j);
                }
            }
        }
        jac
    }
}

impl fmt::Display for ParameterizedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&parse::serialize_system(self))
    }
}

/// The reference root `(y₀, x₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub y0: Vec<f64>,
    pub x0: Vec<f64>,
}

impl Anchor {
    pub fn new(y0: Vec<f64>, x0: Vec<f64>) -> Self {
        Self { y0, x0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub residual_norm: f64,
    pub rank_k0: usize,
    pub rank_j0: usize,
    /// `∂₁F(y₀, x₀)` is onto.
    pub h5_onto: bool,
    /// `∂₂F(y₀, x₀)` is one-to-one.
    pub h6_one_to_one: bool,
}

impl HypothesisReport {
    pub fn anchor_is_root(&self) -> bool {
        self.residual_norm <= ANCHOR_TOL
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "residual ||F(y0,x0)|| = {:e}", self.residual_norm)?;
        writeln!(f, "rank K0 = {} (onto: {})", self.rank_k0, self.h5_onto)?;
        write!(f, "rank J0 = {} (one-to-one: {})", self.rank_j0, self.h6_one_to_one)
    }
}

pub fn check_hypotheses(sys: &ParameterizedSystem, anchor: &Anchor) -> Result<HypothesisReport> {
    let residual_norm = norm2(&sys.eval(&anchor.y0, &anchor.x0)?);
    let k0 = sys.jacobian_y(&anchor.y0, &anchor.x0)?;
    let rank_k0 = numerical_rank(&k0, RANK_TOL);
    let rank_j0 = numerical_rank(&sys.jacobian_x(&anchor.y0, &anchor.x0)?, RANK_TOL);
    Ok(HypothesisReport {
        residual_norm,
        rank_k0,
        rank_j0,
        h5_onto: rank_k0 == sys.p(),
        h6_one_to_one: rank_j0 == sys.n(),
    })
}
