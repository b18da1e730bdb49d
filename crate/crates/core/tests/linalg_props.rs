mod common;

use minpert::linalg::{
    dot, dual_max_2norm, householder_qr, least_norm_solve, matrix_lower_bound, norm2, sampled_lower_bound,
    smallest_singular_value, vector_norm, LeastNorm, LowerBound, Matrix, VectorNormKind,
};
use proptest::prelude::*;

use common::{sigma_min_oracle, well_conditioned};

/// Seed plus shape `p ≤ m`.
fn shape() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 1usize..=6).prop_flat_map(|(seed, m)| (Just(seed), Just(m), 1usize..=m))
}

fn setup(seed: u64, m: usize, p: usize) -> (Matrix, Vec<f64>) {
    let mut rng = common::rng(seed);
    let a = well_conditioned(&mut rng, p, m, 1e3);
    let b = common::gaussian_vec(&mut rng, p);
    (a, b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qr_reconstructs_input((seed, m, p) in shape()) {
        let (a, _) = setup(seed, m, p);
        let at = a.transpose();
        let f = householder_qr(&at).unwrap();
        let back = f.reconstruct();
        let scale = at.max_abs();
        for (u, v) in back.as_slice().iter().zip(at.as_slice()) {
            prop_assert!((u - v).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn least_norm_is_feasible_and_in_row_space((seed, m, p) in shape()) {
        let (a, b) = setup(seed, m, p);
        let x = least_norm_solve(&a, &b).unwrap();
        let res: Vec<f64> = a.matvec(&x).iter().zip(&b).map(|(u, v)| u - v).collect();
        prop_assert!(norm2(&res) <= 1e-11 * (1.0 + norm2(&b)));
        // Any null-space perturbation only lengthens the solution.
        let solver = LeastNorm::new(&a).unwrap();
        let mut rng = common::rng(seed ^ 0x5eed);
        let z = common::gaussian_vec(&mut rng, m);
        let n = solver.null_component(&z).unwrap();
        prop_assert!(dot(&n, &x).abs() <= 1e-10 * norm2(&x) * (1.0 + norm2(&n)));
        let longer: Vec<f64> = x.iter().zip(&n).map(|(u, v)| u + v).collect();
        prop_assert!(norm2(&longer) >= norm2(&x) * (1.0 - 1e-14));
    }

    #[test]
    fn dual_value_matches_primal((seed, m, p) in shape()) {
        let (a, s) = setup(seed, m, p);
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        let primal = norm2(&least_norm_solve(&a, &neg).unwrap());
        let dual = dual_max_2norm(&a, &s).unwrap();
        prop_assert!((primal - dual).abs() <= 1e-10 * primal);
        // The certificate is feasible and attains the dual value.
        let u = LeastNorm::new(&a).unwrap().dual_functional(&s).unwrap().unwrap();
        prop_assert!(norm2(&a.tr_matvec(&u)) <= 1.0 + 1e-12);
        prop_assert!((dot(&u, &s) - dual).abs() <= 1e-10 * dual);
    }

    #[test]
    fn sigma_min_agrees_with_inertia_oracle((seed, m, p) in shape()) {
        let (a, _) = setup(seed, m, p);
        let oracle = sigma_min_oracle(&a);
        prop_assert!((smallest_singular_value(&a) - oracle).abs() <= 1e-10 * oracle);
        match matrix_lower_bound(&a, VectorNormKind::Two).unwrap() {
            LowerBound::Exact { value } => prop_assert!((value - oracle).abs() <= 1e-10 * oracle),
            other => prop_assert!(false, "unexpected {:?}", other),
        }
    }

    #[test]
    fn brackets_contain_the_bound((seed, m, p) in (any::<u64>(), 1usize..=4).prop_flat_map(|(s, m)| (Just(s), Just(m), 1usize..=m.min(3)))) {
        let (a, _) = setup(seed, m, p);
        let two = sampled_lower_bound(&a, VectorNormKind::Two, 2_000).unwrap();
        prop_assert!(two.contains(sigma_min_oracle(&a)), "{:?}", two);
        // 1- and ∞-brackets: the bound is min ‖aᵀg‖* / ‖g‖* over functionals,
        // so every functional's ratio sits above `lo`. One row: it is ‖a‖*.
        let mut rng = common::rng(seed ^ 0xb0b);
        for norm in [VectorNormKind::One, VectorNormKind::Infinity] {
            let dual = norm.dual();
            let b = sampled_lower_bound(&a, norm, 2_000).unwrap();
            prop_assert!(b.lo <= b.hi);
            for _ in 0..20 {
                let g = common::gaussian_vec(&mut rng, p);
                let ratio = vector_norm(&a.tr_matvec(&g), dual) / vector_norm(&g, dual);
                prop_assert!(b.lo <= ratio, "{:?} vs {}", b, ratio);
            }
            if p == 1 {
                prop_assert!(b.contains(vector_norm(a.row(0), dual)), "{:?}", b);
            }
        }
    }
}
