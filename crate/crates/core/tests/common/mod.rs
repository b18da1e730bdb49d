//! Test-only oracles and generators, independent of the library numerics.
#![allow(dead_code, clippy::needless_range_loop)]

use minpert::linalg::Matrix;
use minpert::problems::AnchoredProblem;
use minpert::system::{Anchor, ParameterizedSystem, PolyTerm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| gaussian(rng)).collect()
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::from_row_major(rows, cols, gaussian_vec(rng, rows * cols)).unwrap()
}

pub fn gram(a: &Matrix) -> Vec<Vec<f64>> {
    let p = a.rows();
    let mut g = vec![vec![0.0; p]; p];
    for i in 0..p {
        for j in 0..p {
            g[i][j] = a.row(i).iter().zip(a.row(j)).map(|(u, v)| u * v).sum();
        }
    }
    g
}

/// Number of eigenvalues of the symmetric `g` below `shift`, from the signs
/// of the pivots of an unpivoted LDLᵀ factorization of `g - shift·I`
/// (Sylvester's law of inertia).
pub fn count_below(g: &[Vec<f64>], shift: f64) -> usize {
    let n = g.len();
    let mut a: Vec<Vec<f64>> = g.to_vec();
    for (i, row) in a.iter_mut().enumerate() {
        row[i] -= shift;
    }
    let mut negatives = 0;
    for k in 0..n {
        let mut pivot = a[k][k];
        if pivot == 0.0 {
            pivot = -f64::MIN_POSITIVE;
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        for i in k + 1..n {
            let l = a[i][k] / pivot;
            for j in k + 1..n {
                a[i][j] -= l * a[k][j];
            }
        }
    }
    negatives
}

/// Smallest eigenvalue of a symmetric positive semidefinite matrix by
/// bisection on the inertia count.
pub fn min_eigenvalue(g: &[Vec<f64>]) -> f64 {
    let trace: f64 = (0..g.len()).map(|i| g[i][i]).sum();
    let (mut lo, mut hi) = (0.0, trace);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(g, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn max_eigenvalue(g: &[Vec<f64>]) -> f64 {
    let n = g.len();
    let trace: f64 = (0..n).map(|i| g[i][i]).sum();
    let (mut lo, mut hi) = (0.0, trace);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(g, mid) >= n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `σ_min` of a full-row-rank matrix via `λ_min(A Aᵀ)`.
pub fn sigma_min_oracle(a: &Matrix) -> f64 {
    min_eigenvalue(&gram(a)).sqrt()
}

/// Gaussian `p × m` matrix with condition number at most `max_cond`,
/// judged by the inertia oracle.
pub fn well_conditioned(rng: &mut ChaCha8Rng, p: usize, m: usize, max_cond: f64) -> Matrix {
    loop {
        let a = gaussian_matrix(rng, p, m);
        let g = gram(&a);
        if max_eigenvalue(&g) <= max_cond * max_cond * min_eigenvalue(&g) {
            return a;
        }
    }
}

/// Random quadratic system with `F(y₀, x₀) = 0` by construction: affine
/// parts plus a few quadratic and mixed terms, shifted by a constant.
pub fn random_system(rng: &mut ChaCha8Rng, m: usize, n: usize, p: usize) -> (ParameterizedSystem, Anchor) {
    let y0 = gaussian_vec(rng, m);
    let x0 = gaussian_vec(rng, n);
    let unit = |len: usize, i: usize| -> Vec<u32> { (0..len).map(|k| u32::from(k == i)).collect() };
    let mut equations = Vec::new();
    for _ in 0..p {
        let mut eq = Vec::new();
        for i in 0..m {
            eq.push(PolyTerm {
                coefficient: gaussian(rng),
                y_exponents: unit(m, i),
                x_exponents: vec![0; n],
            });
        }
        for j in 0..n {
            eq.push(PolyTerm {
                coefficient: gaussian(rng),
                y_exponents: vec![0; m],
                x_exponents: unit(n, j),
            });
        }
        for _ in 0..3 {
            let (a, b) = (rng.random_range(0..m), rng.random_range(0..m));
            let mut ye = unit(m, a);
            ye[b] += 1;
            eq.push(PolyTerm {
                coefficient: 0.5 * gaussian(rng),
                y_exponents: ye,
                x_exponents: vec![0; n],
            });
            eq.push(PolyTerm {
                coefficient: 0.5 * gaussian(rng),
                y_exponents: unit(m, rng.random_range(0..m)),
                x_exponents: unit(n, rng.random_range(0..n)),
            });
        }
        let xj = rng.random_range(0..n);
        let mut xe = unit(n, xj);
        xe[xj] += 1;
        eq.push(PolyTerm {
            coefficient: 0.5 * gaussian(rng),
            y_exponents: vec![0; m],
            x_exponents: xe,
        });
        equations.push(eq);
    }
    let draft = ParameterizedSystem::new("random", m, n, equations.clone()).unwrap();
    let f0 = draft.eval(&y0, &x0).unwrap();
    for (eq, c) in equations.iter_mut().zip(f0) {
        eq.push(PolyTerm::constant(-c, m, n));
    }
    let sys = ParameterizedSystem::new("random", m, n, equations).unwrap();
    (sys, Anchor::new(y0, x0))
}

/// A random anchored problem with `p ≤ m ≤ max_m` whose `K₀` is
/// comfortably onto (`σ_min ≥ 0.2`), so the anchor is not close to a fold.
pub fn random_problem(rng: &mut ChaCha8Rng, max_m: usize) -> AnchoredProblem {
    loop {
        let m = rng.random_range(1..=max_m);
        let p = rng.random_range(1..=m);
        let n = rng.random_range(1..=3);
        let (sys, anchor) = random_system(rng, m, n, p);
        if let Ok(prob) = AnchoredProblem::new(sys, anchor) {
            if sigma_min_oracle(prob.k0()) >= 0.2 {
                return prob;
            }
        }
    }
}

/// `x₀ + r·u` with `u` uniform on the unit sphere.
pub fn nearby_x(rng: &mut ChaCha8Rng, x0: &[f64], r: f64) -> Vec<f64> {
    let d = gaussian_vec(rng, x0.len());
    let len = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    x0.iter().zip(&d).map(|(a, b)| a + r * b / len).collect()
}
