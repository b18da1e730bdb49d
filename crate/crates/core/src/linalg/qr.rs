use crate::error::{Error, Result};

use super::{norm2, Matrix};

/// Relative threshold on the diagonal of `R` below which a factorization is
/// declared rank deficient.
pub const QR_RANK_TOL: f64 = 1e-12;

/// Thin QR factors: `q` has orthonormal columns, `r` is square upper
/// triangular with a nonnegative diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct QrFactors {
    pub q: Matrix,
    pub r: Matrix,
}

impl QrFactors {
    pub fn reconstruct(&self) -> Matrix {
        self.q.matmul(&self.r)
    }

    /// Solves `Rᵀ w = b` by forward substitution.
    pub fn solve_rt(&self, b: &[f64]) -> Vec<f64> {
        let n = self.r.rows();
        assert_eq!(b.len(), n);
        let mut w = vec![0.0; n];
        for i in 0..n {
            let mut acc = b[i];
            for k in 0..i {
                acc -= self.r[(k, i)] * w[k];
            }
            w[i] = acc / self.r[(i, i)];
        }
        w
    }

    /// Solves `R u = w` by back substitution.
    pub fn solve_r(&self, w: &[f64]) -> Vec<f64> {
        let n = self.r.rows();
        assert_eq!(w.len(), n);
        let mut u = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = w[i];
            for k in i + 1..n {
                acc -= self.r[(i, k)] * u[k];
            }
            u[i] = acc / self.r[(i, i)];
        }
        u
    }
}

/// Householder QR of a tall matrix with full column rank.
///
/// The diagonal of `R` is made nonnegative by flipping the matching column
/// of `Q`, so the factors are unique for full-rank input.
pub fn householder_qr(a: &Matrix) -> Result<QrFactors> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::DimensionMismatch(format!("QR needs rows >= cols, got {m}x{n}")));
    }
    let mut w = a.clone();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(n);

    for k in 0..n {
        let x: Vec<f64> = (k..m).map(|i| w[(i, k)]).collect();
        let xnorm = norm2(&x);
        if xnorm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if x[0] >= 0.0 { -xnorm } else { xnorm };
        let mut v = x;
        v[0] -= alpha;
        let vnorm = norm2(&v);
        if vnorm == 0.0 {
            reflectors.push(Vec::new());
            continue;
        }
        v.iter_mut().for_each(|e| *e /= vnorm);
        for j in k..n {
            let s: f64 = (k..m).map(|i| v[i - k] * w[(i, j)]).sum();
            for i in k..m {
                w[(i, j)] -= 2.0 * s * v[i - k];
            }
        }
        reflectors.push(v);
    }

    let mut r = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            r[(i, j)] = w[(i, j)];
        }
    }

    // Q = H_0 H_1 ... H_{n-1} applied to the first n columns of the identity.
    let mut q = Matrix::zeros(m, n);
    for j in 0..n {
        q[(j, j)] = 1.0;
    }
    for k in (0..n).rev() {
        let v = &reflectors[k];
        if v.is_empty() {
            continue;
        }
        for j in 0..n {
            let s: f64 = (k..m).map(|i| v[i - k] * q[(i, j)]).sum();
            for i in k..m {
                q[(i, j)] -= 2.0 * s * v[i - k];
            }
        }
    }

    for k in 0..n {
        if r[(k, k)] < 0.0 {
            for j in k..n {
                r[(k, j)] = -r[(k, j)];
            }
            for i in 0..m {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }

    let largest = (0..n).map(|k| r[(k, k)].abs()).fold(0.0, f64::max);
    let threshold = QR_RANK_TOL * largest;
    for k in 0..n {
        let pivot = r[(k, k)].abs();
        if pivot <= threshold || largest == 0.0 {
            return Err(Error::RankDeficient {
                index: k,
                pivot,
                threshold,
            });
        }
    }
    Ok(QrFactors { q, r })
}

/// Minimum 2-norm solutions of `a z = b` for a fixed full-row-rank `a`,
/// backed by the QR factorization `aᵀ = QR`.
///
/// With that factorization `z = Q R⁻ᵀ b`, and the dual problem
/// `max uᵀs  s.t. ‖aᵀu‖₂ ≤ 1` has value `‖R⁻ᵀ s‖₂`, attained at
/// `u = R⁻¹R⁻ᵀs / ‖R⁻ᵀs‖₂`.
#[derive(Debug, Clone)]
pub struct LeastNorm {
    a: Matrix,
    qr: QrFactors,
}

impl LeastNorm {
    pub fn new(a: &Matrix) -> Result<Self> {
        if a.rows() > a.cols() {
            return Err(Error::DimensionMismatch(format!(
                "least-norm solve needs p <= m, got a {}x{} matrix",
                a.rows(),
                a.cols()
            )));
        }
        let qr = householder_qr(&a.transpose())?;
        Ok(Self { a: a.clone(), qr })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    /// Factors of `aᵀ`.
    pub fn factors(&self) -> &QrFactors {
        &self.qr
    }

    fn check_rhs(&self, b: &[f64]) -> Result<()> {
        if b.len() != self.a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.a.rows()
            )));
        }
        Ok(())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_rhs(b)?;
        let w = self.qr.solve_rt(b);
        Ok(self.qr.q.matvec(&w))
    }

    /// `‖R⁻ᵀ s‖₂`, the optimal dual value.
    pub fn dual_value(&self, s: &[f64]) -> Result<f64> {
        self.check_rhs(s)?;
        Ok(norm2(&self.qr.solve_rt(s)))
    }

    /// The maximizing functional of the dual problem, or `None` when
    /// `s = 0` and every feasible functional is optimal.
    pub fn dual_functional(&self, s: &[f64]) -> Result<Option<Vec<f64>>> {
        self.check_rhs(s)?;
        let w = self.qr.solve_rt(s);
        let wn = norm2(&w);
        if wn == 0.0 {
            return Ok(None);
        }
        let mut u = self.qr.solve_r(&w);
        u.iter_mut().for_each(|e| *e /= wn);
        Ok(Some(u))
    }

    /// Projects `v` onto the null space of `a`.
    pub fn null_component(&self, v: &[f64]) -> Result<Vec<f64>> {
        let row_part = self.solve(&self.a.matvec(v))?;
        Ok(v.iter().zip(&row_part).map(|(x, y)| x - y).collect())
    }
}

/// Minimum 2-norm solution of `a z = b` for full-row-rank `a`.
pub fn least_norm_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    LeastNorm::new(a)?.solve(b)
}

/// `max uᵀs  s.t. ‖kᵀu‖₂ ≤ 1`, evaluated as `‖R⁻ᵀs‖₂` with `kᵀ = QR`.
pub fn dual_max_2norm(k: &Matrix, s: &[f64]) -> Result<f64> {
    LeastNorm::new(k)?.dual_value(s)
}

/// Residual of the dual certificate: `uᵀs` together with `‖kᵀu‖₂`.
#[cfg(test)]
fn certificate_check(k: &Matrix, u: &[f64], s: &[f64]) -> (f64, f64) {
    (super::dot(u, s), norm2(&k.tr_matvec(u)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn identity_factors_trivially() {
        let qr = householder_qr(&Matrix::identity(2)).unwrap();
        assert_eq!(qr.r, Matrix::identity(2));
        assert_eq!(qr.q, Matrix::identity(2));
    }

    #[test]
    fn single_column_norm() {
        let a = Matrix::from_rows(&[[3.0], [4.0]]).unwrap();
        let qr = householder_qr(&a).unwrap();
        assert_close(qr.r[(0, 0)], 5.0, 1e-15);
        assert_close(qr.q[(0, 0)], 0.6, 1e-15);
        assert_close(qr.q[(1, 0)], 0.8, 1e-15);
    }

    #[test]
    fn negative_leading_entry_still_gives_positive_diagonal() {
        let a = Matrix::from_rows(&[[-2.0, 1.0], [0.0, -3.0], [0.0, 0.0]]).unwrap();
        let qr = householder_qr(&a).unwrap();
        assert!(qr.r[(0, 0)] > 0.0 && qr.r[(1, 1)] > 0.0);
        let back = qr.reconstruct();
        for i in 0..3 {
            for j in 0..2 {
                assert_close(back[(i, j)], a[(i, j)], 1e-14);
            }
        }
    }

    #[test]
    fn rank_deficiency_is_reported() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]).unwrap();
        assert!(matches!(householder_qr(&a), Err(Error::RankDeficient { index: 1, .. })));
        let z = Matrix::zeros(2, 1);
        assert!(matches!(householder_qr(&z), Err(Error::RankDeficient { index: 0, .. })));
    }

    #[test]
    fn wide_input_is_rejected() {
        let a = Matrix::zeros(1, 2);
        assert!(matches!(householder_qr(&a), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn symmetric_least_norm() {
        let a = Matrix::from_rows(&[[1.0, 1.0]]).unwrap();
        let z = least_norm_solve(&a, &[2.0]).unwrap();
        assert_close(z[0], 1.0, 1e-15);
        assert_close(z[1], 1.0, 1e-15);
        assert_close(norm2(&z), 2f64.sqrt(), 1e-15);
    }

    #[test]
    fn square_system_has_unique_solution() {
        let b = [0.3, -1.7, 2.5];
        let z = least_norm_solve(&Matrix::identity(3), &b).unwrap();
        for (zi, bi) in z.iter().zip(&b) {
            assert_close(*zi, *bi, 1e-15);
        }
    }

    #[test]
    fn circle_gradient_least_norm() {
        let a = Matrix::from_rows(&[[2.0, 0.0]]).unwrap();
        let z = least_norm_solve(&a, &[0.21]).unwrap();
        assert_close(z[0], 0.105, 1e-15);
        assert_eq!(z[1], 0.0);
        assert_close(dual_max_2norm(&a, &[0.21]).unwrap(), 0.105, 1e-15);
    }

    #[test]
    fn dual_of_identity_is_euclidean_norm() {
        let s = [1.0, -2.0, 2.0];
        assert_close(dual_max_2norm(&Matrix::identity(3), &s).unwrap(), 3.0, 1e-15);
    }

    #[test]
    fn dual_functional_is_feasible_and_optimal() {
        let k = Matrix::from_rows(&[[1.0, 2.0, 0.5], [0.0, -1.0, 3.0]]).unwrap();
        let s = [0.7, -0.2];
        let ln = LeastNorm::new(&k).unwrap();
        let u = ln.dual_functional(&s).unwrap().unwrap();
        let (obj, constraint) = certificate_check(&k, &u, &s);
        assert_close(constraint, 1.0, 1e-14);
        assert_close(obj, ln.dual_value(&s).unwrap(), 1e-14);
        assert!(ln.dual_functional(&[0.0, 0.0]).unwrap().is_none());
    }

    #[test]
    fn overdetermined_least_norm_rejected() {
        let a = Matrix::zeros(3, 2);
        assert!(matches!(
            least_norm_solve(&a, &[0.0; 3]),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
