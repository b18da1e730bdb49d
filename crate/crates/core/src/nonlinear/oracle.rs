use crate::error::{Error, Result};
use crate::linalg::{norm2, sub};
use crate::system::{Anchor, ParameterizedSystem, ANCHOR_TOL};

pub const MAX_GRID_POINTS: usize = 201;
const MAX_DIM: usize = 3;
const BISECTION_STEPS: usize = 80;

/// Grid-search estimate of `μ_F(x)` over the box `y₀ + [-radius, radius]ᵐ`,
/// independent of any Newton-type iteration.
///
/// A grid point counts as near-feasible when `‖F(y, x)‖` is within the
/// first-order change of `F` over half a cell diagonal. For a single
/// equation each near-feasible point then seeds a bisection for the sign
/// change of `F` along the ray from `y₀` through it, and the closest root
/// found is returned. With several equations the closest near-feasible grid
/// point is returned as is, which is only accurate to about the condition
/// number of `∂₁F` times half a cell diagonal.
///
/// ```
/// use minpert::nonlinear::brute_force_mu_f;
/// use minpert::system::builtin;
///
/// let (sys, anchor) = builtin("circle").unwrap();
/// let v = brute_force_mu_f(&sys, &anchor, &[1.21], 0.5, 201).unwrap();
/// assert!((v - 0.1).abs() <= 5e-3);
/// ```
pub fn brute_force_mu_f(
    sys: &ParameterizedSystem,
    anchor: &Anchor,
    x: &[f64],
    radius: f64,
    grid_points: usize,
) -> Result<f64> {
    let m = sys.m();
    if m > MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "grid search supports m <= {MAX_DIM}, got m = {m}"
        )));
    }
    if !(2..=MAX_GRID_POINTS).contains(&grid_points) {
        return Err(Error::InvalidArgument(format!(
            "grid_points must lie in 2..={MAX_GRID_POINTS}, got {grid_points}"
        )));
    }
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let y0 = &anchor.y0;
    let f0 = sys.eval(y0, x)?;
    if norm2(&f0) <= ANCHOR_TOL {
        return Ok(0.0);
    }

    let h = 2.0 * radius / (grid_points - 1) as f64;
    let half_diag = 0.5 * h * (m as f64).sqrt();
    let total = grid_points.pow(m as u32);
    let mut best_grid = f64::INFINITY;
    let mut best_ray = f64::INFINITY;
    let mut y = vec![0.0; m];
    for mut idx in 0..total {
        for (k, yk) in y.iter_mut().enumerate() {
            *yk = y0[k] - radius + h * (idx % grid_points) as f64;
            idx /= grid_points;
        }
        let f = sys.eval(&y, x)?;
        let slope = sys.jacobian_y(&y, x)?.frobenius_norm();
        if norm2(&f) > slope * half_diag {
            continue;
        }
        let d = norm2(&sub(&y, y0));
        best_grid = best_grid.min(d);
        if sys.p() == 1 && d > 0.0 && d - half_diag < best_ray {
            let dir: Vec<f64> = sub(&y, y0).iter().map(|v| v / d).collect();
            if let Some(s) = ray_root(sys, y0, &dir, x, (d - 2.0 * half_diag).max(0.0), d + 2.0 * half_diag)? {
                best_ray = best_ray.min(s);
            }
        }
    }
    if best_ray.is_finite() {
        Ok(best_ray)
    } else if best_grid.is_finite() {
        Ok(best_grid)
    } else {
        Err(Error::NoFeasiblePoint { radius })
    }
}

/// Bisection for a sign change of the scalar `F(y₀ + s·dir, x)` on `[lo, hi]`.
fn ray_root(
    sys: &ParameterizedSystem,
    y0: &[f64],
    dir: &[f64],
    x: &[f64],
    mut lo: f64,
    mut hi: f64,
) -> Result<Option<f64>> {
    let phi = |s: f64| -> Result<f64> {
        let y: Vec<f64> = y0.iter().zip(dir).map(|(a, d)| a + s * d).collect();
        Ok(sys.eval(&y, x)?[0])
    };
    let mut f_lo = phi(lo)?;
    let f_hi = phi(hi)?;
    if f_lo == 0.0 {
        return Ok(Some(lo));
    }
    if f_lo.signum() == f_hi.signum() {
        return Ok(None);
    }
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let f_mid = phi(mid)?;
        if f_mid == 0.0 {
            return Ok(Some(mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::builtin;

    #[test]
    fn circle_examples() {
        let (sys, anchor) = builtin("circle").unwrap();
        let near = brute_force_mu_f(&sys, &anchor, &[1.21], 0.5, 201).unwrap();
        assert!((near - 0.1).abs() <= 5e-3, "{near}");
        assert_eq!(brute_force_mu_f(&sys, &anchor, &[1.0], 0.5, 201).unwrap(), 0.0);
        let far = brute_force_mu_f(&sys, &anchor, &[4.0], 1.5, 201).unwrap();
        assert!((far - 1.0).abs() <= 1.5e-2, "{far}");
    }

    #[test]
    fn ray_refinement_never_undershoots() {
        // Every returned value is the distance to an actual root, so it
        // bounds the true minimum from above.
        let (sys, anchor) = builtin("circle").unwrap();
        for x in [1.21, 0.81, 1.04] {
            let v = brute_force_mu_f(&sys, &anchor, &[x], 0.5, 101).unwrap();
            let exact = (x.sqrt() - 1.0f64).abs();
            assert!(v >= exact - 1e-12 && v - exact <= 1e-2, "x = {x}: {v}");
        }
    }

    #[test]
    fn preconditions() {
        let (sys, anchor) = builtin("circle").unwrap();
        assert!(matches!(
            brute_force_mu_f(&sys, &anchor, &[1.21], 0.5, 202),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            brute_force_mu_f(&sys, &anchor, &[1.21], 0.01, 11),
            Err(Error::NoFeasiblePoint { .. })
        ));
    }

    #[test]
    fn several_equations_use_grid_distance() {
        let (sys, anchor) = builtin("linear2x3").unwrap();
        let x = [1.1, 0.0];
        let v = brute_force_mu_f(&sys, &anchor, &x, 0.5, 61).unwrap();
        let k = sys.jacobian_y(&anchor.y0, &x).unwrap();
        let exact = crate::problems::AnchoredProblem::new(sys, anchor)
            .unwrap()
            .mu3(&x)
            .unwrap()
            .value;
        let half_diag = 0.5 * (1.0 / 60.0) * 3f64.sqrt();
        let cond = k.frobenius_norm() / crate::linalg::smallest_singular_value(&k);
        assert!(v <= exact + half_diag, "{v} vs {exact}");
        assert!(exact - v <= cond * half_diag, "{v} vs {exact}");
    }
}
