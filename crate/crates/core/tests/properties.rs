//! Property tests: parser round-trips, scale topology invariants, kernel
//! branch selection, telescoping, and monomial nonnegativity.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tsquad::expr::{Expr, Func};
use tsquad::ostrowski::{kernel, quadrature};
use tsquad::verify::{random_partition, random_timescale};
use tsquad::{monomial_h, QuadratureSettings, TimeScale};

fn expr_strategy() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..400).prop_map(|n| Expr::Num(f64::from(n) / 4.0)),
        Just(Expr::Var),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Sub(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Mul(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Div(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|x| Expr::Neg(Box::new(x))),
            (inner.clone(), -3i32..5).prop_map(|(b, n)| Expr::Pow(Box::new(b), n)),
            (
                prop_oneof![
                    Just(Func::Sin),
                    Just(Func::Cos),
                    Just(Func::Exp),
                    Just(Func::Log),
                    Just(Func::Sqrt)
                ],
                inner
            )
                .prop_map(|(f, x)| Expr::Call(f, Box::new(x))),
        ]
    })
}

proptest! {
    #[test]
    fn printed_trees_reparse_identically(tree in expr_strategy()) {
        let printed = tree.to_string();
        let reparsed = Expr::parse(&printed).unwrap();
        prop_assert_eq!(&reparsed, &tree);
        // print -> parse -> print is a fixed point
        prop_assert_eq!(reparsed.to_string(), printed);
    }

    #[test]
    fn random_scales_obey_topology_invariants(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = random_timescale(&mut rng, 6);
        // normalization is idempotent
        let rebuilt = TimeScale::from_segments(
            ts.segments().iter().map(|s| (s.left, s.right)),
        ).unwrap();
        prop_assert_eq!(rebuilt.segments(), ts.segments());

        let mut candidates = Vec::new();
        for s in ts.segments() {
            candidates.push(s.left);
            candidates.push(s.right);
            if !s.is_point() {
                candidates.push(0.5 * (s.left + s.right));
            }
        }
        for &t in &candidates {
            let ops = ts.jump_operators(t).unwrap();
            prop_assert!(ts.contains(ops.sigma));
            prop_assert!(ts.contains(ops.rho));
            prop_assert!(ops.rho <= t && t <= ops.sigma);
            prop_assert!(ops.mu >= 0.0 && ops.nu >= 0.0);
            let class = ts.classify(t).unwrap();
            prop_assert_eq!(class.right_scattered, ops.sigma > t);
            prop_assert_eq!(class.right_dense, ops.sigma == t);
            prop_assert_eq!(class.left_scattered, ops.rho < t);
            prop_assert_eq!(class.left_dense, ops.rho == t);
            let kappa = ts.in_kappa(t).unwrap();
            prop_assert_eq!(kappa, !(t == ts.max() && class.left_scattered));
        }
        prop_assert_eq!(ts.sigma(ts.max()).unwrap(), ts.max());
        prop_assert_eq!(ts.rho(ts.min()).unwrap(), ts.min());
    }

    #[test]
    fn kernel_matches_branch_scan(seed in any::<u64>(), pick in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = random_timescale(&mut rng, 6);
        let p = random_partition(&mut rng, &ts, 5);
        let t = p.a() + pick * (p.b() - p.a());
        // largest i with x_i <= t, capped at k-1
        let xs = p.xs();
        let mut i = 0;
        while i + 1 < xs.len() - 1 && xs[i + 1] <= t {
            i += 1;
        }
        let expect = t - p.alphas()[i + 1];
        prop_assert_eq!(kernel(&p, t).unwrap(), expect);
    }

    #[test]
    fn quadrature_of_one_telescopes_exactly(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = random_timescale(&mut rng, 6);
        let p = random_partition(&mut rng, &ts, 5);
        let q = quadrature(&p, &Expr::Num(1.0)).unwrap();
        prop_assert_eq!(q, p.b() - p.a());
    }

    #[test]
    fn h2_is_nonnegative_in_both_argument_orders(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ts = random_timescale(&mut rng, 4);
        let settings = QuadratureSettings::default();
        let mut pts = Vec::new();
        for s in ts.segments() {
            pts.push(s.left);
            if !s.is_point() {
                pts.push(0.5 * (s.left + s.right));
                pts.push(s.right);
            }
        }
        for &t in &pts {
            for &s in &pts {
                let v = monomial_h(&ts, 2, t, s, &settings).unwrap();
                prop_assert!(v >= 0.0, "h2({}, {}) = {} on {}", t, s, v, ts.description());
            }
        }
    }
}
