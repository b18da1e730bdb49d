//! The matrix lower bound `‖A‖_ℓ`: the largest `m` such that every `y` in
//! the column space of `A` has a preimage `x` with `m‖x‖ ≤ ‖y‖`.
//!
//! In the 2-norm this is the smallest nonzero singular value. For the 1- and
//! ∞-norms we only report a rigorous bracket obtained by sampling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{dual_of, numerical_rank, singular_values, vector_norm, LeastNorm, Matrix, VectorNormKind};

/// Relative singular value threshold used to decide the rank of the input.
const RANK_TOL: f64 = 1e-10;

pub const DEFAULT_SAMPLES: usize = 10_000;

/// Relative outward widening of sampled brackets, covering rounding in the
/// preimage solves.
pub const BRACKET_ROUNDING: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    /// Number of sphere points actually evaluated.
    pub samples: usize,
    /// Covering radius of the sample set on the unit sphere.
    pub covering_radius: f64,
}

impl Bracket {
    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn widened(lo: f64, hi: f64, samples: usize, covering_radius: f64) -> Self {
        Self {
            lo: lo * (1.0 - BRACKET_ROUNDING),
            hi: hi * (1.0 + BRACKET_ROUNDING),
            samples,
            covering_radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LowerBound {
    Exact { value: f64 },
    Bracket(Bracket),
}

pub fn matrix_lower_bound(a: &Matrix, norm: VectorNormKind) -> Result<LowerBound> {
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    match norm {
        VectorNormKind::Two => {
            let sv = singular_values(a);
            let top = sv[0];
            let value = sv.iter().copied().rfind(|&s| s > RANK_TOL * top).unwrap_or(top);
            Ok(LowerBound::Exact { value })
        }
        _ => sampled_lower_bound(a, norm, DEFAULT_SAMPLES).map(LowerBound::Bracket),
    }
}

/// A certified bracket `[lo, hi]` for `‖a‖_ℓ` of a full-row-rank matrix.
///
/// The sample set is a regular grid on the faces of the unit cube in `ℝᵖ`,
/// radially projected onto the unit sphere of the relevant norm; its
/// covering radius `h` is known in closed form.
///
/// * 2-norm: each sample `y` gets its minimum-norm preimage, and
///   `hi = min ‖y‖/‖x(y)‖`. Subadditivity of `y ↦ ‖x(y)‖` gives
///   `lo = (1 - h)·hi`.
/// * 1- and ∞-norms: for onto `a`, `‖a‖_ℓ = min ‖aᵀg‖* / ‖g‖*` over
///   functionals `g` in the dual norm. Sampling `g` gives `hi`, and the
///   Lipschitz constant `‖aᵀ‖*` gives `lo = hi - ‖aᵀ‖*·h`.
pub fn sampled_lower_bound(a: &Matrix, norm: VectorNormKind, samples: usize) -> Result<Bracket> {
    if a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let p = a.rows();
    let rank = numerical_rank(a, RANK_TOL);
    if rank < p {
        return Err(Error::RankDeficient {
            index: rank,
            pivot: 0.0,
            threshold: RANK_TOL,
        });
    }
    let grid = CubeSurfaceGrid::new(p, samples.max(2));
    match norm {
        VectorNormKind::Two => {
            let solver = LeastNorm::new(a)?;
            let mut hi = f64::INFINITY;
            let mut count = 0;
            for z in grid.points() {
                let zn = vector_norm(&z, VectorNormKind::Two);
                let y: Vec<f64> = z.iter().map(|v| v / zn).collect();
                let x = solver.solve(&y)?;
                hi = hi.min(1.0 / vector_norm(&x, VectorNormKind::Two));
                count += 1;
            }
            let h = grid.covering_radius(VectorNormKind::Two);
            let lo = if h < 1.0 { hi * (1.0 - h) } else { 0.0 };
            Ok(Bracket::widened(lo, hi, count, h))
        }
        _ => {
            let dual = dual_of(norm);
            let at = a.transpose();
            let lipschitz = at.operator_norm(dual);
            let mut hi = f64::INFINITY;
            let mut count = 0;
            for z in grid.points() {
                let zn = vector_norm(&z, dual);
                let g: Vec<f64> = z.iter().map(|v| v / zn).collect();
                hi = hi.min(vector_norm(&a.tr_matvec(&g), dual));
                count += 1;
            }
            let h = grid.covering_radius(dual);
            Ok(Bracket::widened((hi - lipschitz * h).max(0.0), hi, count, h))
        }
    }
}

/// Regular grid on the surface of `[-1, 1]ᵖ`.
struct CubeSurfaceGrid {
    dim: usize,
    per_axis: usize,
}

impl CubeSurfaceGrid {
    fn new(dim: usize, target: usize) -> Self {
        let per_axis = if dim == 1 {
            1
        } else {
            let per_face = (target as f64 / (2 * dim) as f64).max(1.0);
            (per_face.powf(1.0 / (dim - 1) as f64).floor() as usize).max(2)
        };
        Self { dim, per_axis }
    }

    fn spacing(&self) -> f64 {
        if self.dim == 1 {
            0.0
        } else {
            2.0 / (self.per_axis - 1) as f64
        }
    }

    /// Covering radius after projection onto the unit sphere of `norm`.
    ///
    /// Within a face the nearest grid point is at most `s/2` away in each of
    /// the `dim - 1` free coordinates, and radial projection at most doubles
    /// distances because every surface point has `‖z‖ ≥ ‖z‖∞ = 1`.
    fn covering_radius(&self, norm: VectorNormKind) -> f64 {
        let free = (self.dim - 1) as f64;
        let c = match norm {
            VectorNormKind::One => free,
            VectorNormKind::Two => free.sqrt(),
            VectorNormKind::Infinity => 1.0,
        };
        c * self.spacing()
    }

    fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let free = self.dim - 1;
        let per_face = self.per_axis.pow(free as u32);
        let s = self.spacing();
        (0..self.dim).flat_map(move |axis| {
            [1.0, -1.0].into_iter().flat_map(move |sign| {
                (0..per_face).map(move |mut idx| {
                    let mut z = vec![0.0; self.dim];
                    for (k, zk) in z.iter_mut().enumerate() {
                        if k == axis {
                            *zk = sign;
                        } else {
                            *zk = -1.0 + s * (idx % self.per_axis) as f64;
                            idx /= self.per_axis;
                        }
                    }
                    z
                })
            })
        })
    }
}
