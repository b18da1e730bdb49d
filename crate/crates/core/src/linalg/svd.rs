use super::{dot, norm2, Matrix};

const MAX_SWEEPS: usize = 80;

/// Singular values in decreasing order (`min(rows, cols)` of them).
///
/// One-sided Jacobi on the tall orientation of `a`: plane rotations are
/// applied until all column pairs are orthogonal to working precision, at
/// which point the column norms are the singular values. This keeps small
/// singular values accurate relative to their own size.
pub fn singular_values(a: &Matrix) -> Vec<f64> {
    let b = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    let n = b.cols();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| b.column(j)).collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (bp, bq) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (xp, xq) = (*bp, *bq);
                    *bp = c * xp - s * xq;
                    *bq = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sv: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn smallest_singular_value(a: &Matrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(a: &Matrix, rel_tol: f64) -> usize {
    let sv = singular_values(a);
    match sv.first() {
        Some(&top) if top > 0.0 => sv.iter().filter(|&&s| s > rel_tol * top).count(),
        _ => 0,
    }
}
