mod common;

use minpert::system::{builtin, check_hypotheses, parse_problem, serialize_problem, BUILTIN_NAMES};
use proptest::prelude::*;

/// Central differences with step `h`, column `j` of the Jacobian in `y`
/// (or in `x` when `wrt_x`).
fn fd_column(
    sys: &minpert::system::ParameterizedSystem,
    y: &[f64],
    x: &[f64],
    j: usize,
    wrt_x: bool,
    h: f64,
) -> Vec<f64> {
    let shift = |s: f64| {
        let (mut yy, mut xx) = (y.to_vec(), x.to_vec());
        if wrt_x {
            xx[j] += s;
        } else {
            yy[j] += s;
        }
        sys.eval(&yy, &xx).unwrap()
    };
    let (plus, minus) = (shift(h), shift(-h));
    plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn jacobians_match_finite_differences(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let prob = common::random_problem(&mut rng, 5);
        let sys = prob.system();
        let y = common::gaussian_vec(&mut rng, sys.m());
        let x = common::gaussian_vec(&mut rng, sys.n());
        let (ky, kx) = (sys.jacobian_y(&y, &x).unwrap(), sys.jacobian_x(&y, &x).unwrap());
        for (jac, cols, wrt_x) in [(&ky, sys.m(), false), (&kx, sys.n(), true)] {
            for j in 0..cols {
                let fd = fd_column(sys, &y, &x, j, wrt_x, 1e-5);
                let exact = jac.column(j);
                for (a, b) in fd.iter().zip(&exact) {
                    // Quadratic terms: the central difference is exact up to rounding.
                    prop_assert!((a - b).abs() <= 1e-7 * (1.0 + b.abs()), "{} vs {}", a, b);
                }
            }
        }
    }

    #[test]
    fn problem_text_round_trips(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let prob = common::random_problem(&mut rng, 4);
        let text = serialize_problem(prob.system(), prob.anchor());
        let back = parse_problem(&text).unwrap();
        let anchor = back.anchor.unwrap();
        prop_assert_eq!(&anchor, prob.anchor());
        let y = common::gaussian_vec(&mut rng, prob.system().m());
        let x = common::gaussian_vec(&mut rng, prob.system().n());
        let (a, b) = (prob.system().eval(&y, &x).unwrap(), back.system.eval(&y, &x).unwrap());
        prop_assert_eq!(a, b);
        prop_assert_eq!(serialize_problem(&back.system, &anchor), text);
    }
}

#[test]
fn builtins_satisfy_their_hypotheses() {
    for name in BUILTIN_NAMES {
        let (sys, anchor) = builtin(name).unwrap();
        let report = check_hypotheses(&sys, &anchor).unwrap();
        assert!(report.anchor_is_root() && report.h5_onto, "{name}: {report:?}");
        assert!(report.h6_one_to_one, "{name}: {report:?}");
    }
}

#[test]
fn builtins_round_trip_through_text() {
    for name in BUILTIN_NAMES {
        let (sys, anchor) = builtin(name).unwrap();
        let back = parse_problem(&serialize_problem(&sys, &anchor)).unwrap();
        assert_eq!(back.anchor.as_ref(), Some(&anchor));
        assert_eq!(back.system.equations(), sys.equations(), "{name}");
    }
}
