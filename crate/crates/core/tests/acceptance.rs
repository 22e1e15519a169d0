//! Acceptance suite. Each test covers one criterion at its stated tolerance
//! and prints a PASS line; run with `cargo test --test acceptance`.

use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tsquad::expr::Expr;
use tsquad::ostrowski::{
    closed_form_bound, error_bound, make_rule, Partition, RuleSpec,
};
use tsquad::verify::{random_partition, random_timescale, run_verification, VerifyConfig};
use tsquad::{
    delta_integral, delta_integral_with, monomial_h_generic, Error, QuadratureSettings, TimeScale,
    VerifyReport,
};

fn settings() -> QuadratureSettings {
    QuadratureSettings::default()
}

/// The seeded 1000-trial run shared by criteria 1-3.
fn main_run() -> &'static (VerifyReport, f64) {
    static RUN: OnceLock<(VerifyReport, f64)> = OnceLock::new();
    RUN.get_or_init(|| {
        let started = Instant::now();
        let report = run_verification(&VerifyConfig::new(42));
        (report, started.elapsed().as_secs_f64())
    })
}

#[test]
fn acceptance_01_montgomery_identity() {
    let (report, elapsed) = main_run();
    assert_eq!(report.trials_run, 1000);
    assert_eq!(
        report.identity_failures, 0,
        "identity residual exceeded 1e-9 in {} trials",
        report.identity_failures
    );
    assert!(
        report.max_identity_residual <= 1e-9,
        "max residual {}",
        report.max_identity_residual
    );
    assert!(
        report.max_identity_residual_discrete <= 1e-12,
        "max discrete residual {}",
        report.max_identity_residual_discrete
    );
    println!(
        "acceptance 1 (Montgomery identity, 1000 trials, max residual {:.3e}, discrete {:.3e}, {:.2}s): PASS",
        report.max_identity_residual, report.max_identity_residual_discrete, elapsed
    );
}

#[test]
fn acceptance_02_ostrowski_inequality() {
    let (report, _) = main_run();
    assert_eq!(
        report.inequality_failures, 0,
        "error exceeded bound + 1e-9 in {} trials",
        report.inequality_failures
    );
    assert!(report.max_excess <= 1e-9, "max excess {}", report.max_excess);
    println!(
        "acceptance 2 (sharp inequality, 1000 trials, max excess {:.3e}): PASS",
        report.max_excess
    );
}

#[test]
fn acceptance_03_sharpness_instances() {
    let (report, _) = main_run();
    assert_eq!(report.sharpness_results.len(), 6);
    for row in &report.sharpness_results {
        assert!(
            row.gap <= 1e-9 * row.bound,
            "{}: error {} vs bound {}",
            row.scale,
            row.abs_error,
            row.bound
        );
    }
    let continuous = &report.sharpness_results[0];
    assert!((continuous.abs_error - 0.5).abs() <= 1e-9);
    assert!((continuous.bound - 0.5).abs() <= 1e-9);
    let z2 = &report.sharpness_results[1];
    assert_eq!(z2.abs_error, 3.0);
    assert_eq!(z2.bound, 3.0);
    println!("acceptance 3 (sharpness attained on all 6 suite scales): PASS");
}

#[test]
fn acceptance_04_monomial_closed_forms() {
    let s = settings();

    // real line: h_2 = (t - s)^2 / 2
    let r = TimeScale::continuous(-5.0, 5.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut max_gap: f64 = 0.0;
    for _ in 0..100 {
        let t = rng.gen_range(-5.0..5.0);
        let x = rng.gen_range(-5.0..5.0);
        let got = monomial_h_generic(&r, 2, t, x, &s).unwrap();
        let want = (t - x) * (t - x) / 2.0;
        max_gap = max_gap.max((got - want).abs());
    }
    assert!(max_gap <= 1e-10, "continuous gap {max_gap}");

    // integers: h_2 = binomial(t - s, 2), exactly
    let z = TimeScale::integers(0.0, 10.0).unwrap();
    for ti in 0..=10i64 {
        for si in 0..=10i64 {
            let (t, x) = (ti as f64, si as f64);
            let m = t - x;
            let want = m * (m - 1.0) / 2.0;
            let got = monomial_h_generic(&z, 2, t, x, &s).unwrap();
            assert_eq!(got, want, "h2({t}, {x}) on integers");
        }
    }

    // q-lattices: h_2 = (t - s)(t - qs) / (1 + q)
    for q in [2.0, 3.0] {
        let lattice = TimeScale::q_lattice(q, 0, 6).unwrap();
        let points: Vec<f64> = lattice.segments().iter().map(|seg| seg.left).collect();
        for &t in &points {
            for &x in &points {
                let got = monomial_h_generic(&lattice, 2, t, x, &s).unwrap();
                let want = (t - x) * (t - q * x) / (1.0 + q);
                assert!(
                    (got - want).abs() <= 1e-12,
                    "h2({t}, {x}) on q={q}: {got} vs {want}"
                );
            }
        }
    }
    println!("acceptance 4 (h_2 closed forms on R, Z, q-lattices): PASS");
}

#[test]
fn acceptance_05_continuous_closed_form_bound() {
    let s = settings();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for trial in 0..200 {
        let a = rng.gen_range(-3.0..0.0);
        let b = a + rng.gen_range(0.5..3.0);
        let scale = TimeScale::continuous(a, b).unwrap();
        let p = random_partition(&mut rng, &scale, 5);
        let m = rng.gen_range(0.0..3.0);
        let generic = error_bound(&p, m, &s).unwrap();
        let closed = closed_form_bound(&p, m).unwrap();
        assert!(
            (generic - closed).abs() <= 1e-12,
            "trial {trial}: generic {generic} vs closed {closed}"
        );
    }

    // the classic quarter constant on [0, 1], endpoints included
    let unit = TimeScale::continuous(0.0, 1.0).unwrap();
    for m in [1.0, 2.5] {
        for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let p = make_rule(&unit, 0.0, 1.0, &RuleSpec::OstrowskiPoint { x }).unwrap();
            let got = error_bound(&p, m, &s).unwrap();
            let want = m * (0.25 + (x - 0.5) * (x - 0.5));
            assert!(
                (got - want).abs() <= 1e-12,
                "x = {x}, M = {m}: {got} vs {want}"
            );
        }
    }
    println!("acceptance 5 (continuous closed-form bound, quarter constant): PASS");
}

#[test]
fn acceptance_06_discrete_closed_form_exhaustive() {
    let s = settings();
    let scale = TimeScale::integers(0.0, 6.0).unwrap();
    let started = Instant::now();
    let mut checked = 0u32;

    // all divisions 0 = x_0 < ... < x_k = 6 with k <= 3
    let mut divisions: Vec<Vec<f64>> = vec![vec![0.0, 6.0]];
    for i in 1..6 {
        divisions.push(vec![0.0, f64::from(i), 6.0]);
        for j in (i + 1)..6 {
            divisions.push(vec![0.0, f64::from(i), f64::from(j), 6.0]);
        }
    }
    for xs in divisions {
        // all integer weight-point choices alpha_i in [x_{i-1}, x_i]
        let mut alpha_choices: Vec<Vec<f64>> = vec![vec![0.0]];
        for w in xs.windows(2) {
            let mut next = Vec::new();
            let (lo, hi) = (w[0] as i64, w[1] as i64);
            for prefix in &alpha_choices {
                for alpha in lo..=hi {
                    let mut row = prefix.clone();
                    row.push(alpha as f64);
                    next.push(row);
                }
            }
            alpha_choices = next;
        }
        for mut alphas in alpha_choices {
            alphas.push(6.0);
            let p = Partition::new(scale.clone(), xs.clone(), alphas).unwrap();
            for m in [1.0, 2.0] {
                let generic = error_bound(&p, m, &s).unwrap();
                let closed = closed_form_bound(&p, m).unwrap();
                assert_eq!(generic, closed, "xs {:?} alphas {:?}", p.xs(), p.alphas());
            }
            checked += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    // 7 (k=1) + 70 (k=2) + 231 (k=3) choices of division and weight points
    assert_eq!(checked, 308);
    assert!(elapsed < 5.0, "exhaustive check took {elapsed}s");
    println!(
        "acceptance 6 (discrete closed form, {checked} partitions of Z[0,6], exact equality, {elapsed:.2}s): PASS"
    );
}

#[test]
fn acceptance_07_named_rule_reductions() {
    let unit = TimeScale::continuous(0.0, 1.0).unwrap();

    let simpson = make_rule(&unit, 0.0, 1.0, &RuleSpec::Simpson { x: None }).unwrap();
    let w = simpson.weights();
    assert!((w[0] - 1.0 / 6.0).abs() <= 1e-15);
    assert!((w[1] - 2.0 / 3.0).abs() <= 1e-15);
    assert!((w[2] - 1.0 / 6.0).abs() <= 1e-15);

    let trapezoid = make_rule(&unit, 0.0, 1.0, &RuleSpec::Trapezoid).unwrap();
    let w = trapezoid.weights();
    assert!((w[0] - 0.5).abs() <= 1e-15);
    assert!((w[1] - 0.5).abs() <= 1e-15);

    let amt = make_rule(&unit, 0.0, 1.0, &RuleSpec::AvgMidTrap).unwrap();
    let w = amt.weights();
    assert!((w[0] - 0.25).abs() <= 1e-15);
    assert!((w[1] - 0.5).abs() <= 1e-15);
    assert!((w[2] - 0.25).abs() <= 1e-15);

    let z3 = TimeScale::integers(0.0, 3.0).unwrap();
    assert!(matches!(
        make_rule(&z3, 0.0, 3.0, &RuleSpec::Midpoint),
        Err(Error::MembershipViolation { .. })
    ));
    println!("acceptance 7 (Simpson/trapezoid/averaged weights, midpoint infeasibility): PASS");
}

#[test]
fn acceptance_08_calculus_laws() {
    let s = settings();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for trial in 0..200 {
        // keep the window small so an absolute 1e-9 check sits well above
        // ulp level for the degree-8 products in the by-parts identity
        let scale = loop {
            let ts = random_timescale(&mut rng, 6);
            if ts.min() >= -2.5 && ts.max() <= 2.5 {
                break ts;
            }
        };
        let (a, b) = (scale.min(), scale.max());
        let degree = rng.gen_range(0..=4u32);
        let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let f = Expr::polynomial(&coeffs);
        let degree_g = rng.gen_range(0..=4u32);
        let coeffs_g: Vec<f64> = (0..=degree_g).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let g = Expr::polynomial(&coeffs_g);
        let alpha: f64 = rng.gen_range(-3.0..3.0);
        let beta: f64 = rng.gen_range(-3.0..3.0);

        // linearity
        let combo = Expr::Add(
            Box::new(Expr::Mul(Box::new(Expr::Num(alpha)), Box::new(f.clone()))),
            Box::new(Expr::Mul(Box::new(Expr::Num(beta)), Box::new(g.clone()))),
        );
        let lhs = delta_integral(&scale, &combo, a, b, &s).unwrap();
        let rhs = alpha * delta_integral(&scale, &f, a, b, &s).unwrap()
            + beta * delta_integral(&scale, &g, a, b, &s).unwrap();
        assert!((lhs - rhs).abs() <= 1e-9, "linearity, trial {trial}");

        // additivity through a scale point
        let c = random_partition(&mut rng, &scale, 3).alphas()[1];
        let whole = delta_integral(&scale, &f, a, b, &s).unwrap();
        let split = delta_integral(&scale, &f, a, c, &s).unwrap()
            + delta_integral(&scale, &f, c, b, &s).unwrap();
        assert!((whole - split).abs() <= 1e-9, "additivity, trial {trial}");

        // orientation and the empty range
        let back = delta_integral(&scale, &f, b, a, &s).unwrap();
        assert!((whole + back).abs() <= 1e-12, "orientation, trial {trial}");
        assert_eq!(delta_integral(&scale, &f, a, a, &s).unwrap(), 0.0);

        // integration by parts:
        // int f g^D = (fg)(b) - (fg)(a) - int f^D g(sigma)
        let df = f.diff();
        let dg = g.diff();
        let lhs = delta_integral_with(
            &scale,
            a,
            b,
            |t| Ok(f.eval(t)? * dg.eval(t)?),
            |t, sigma| Ok(f.eval(t)? * (g.eval(sigma)? - g.eval(t)?) / (sigma - t)),
            &s,
        )
        .unwrap();
        let rhs_int = delta_integral_with(
            &scale,
            a,
            b,
            |t| Ok(df.eval(t)? * g.eval(t)?),
            |t, sigma| Ok((f.eval(sigma)? - f.eval(t)?) / (sigma - t) * g.eval(sigma)?),
            &s,
        )
        .unwrap();
        let boundary = f.eval(b).unwrap() * g.eval(b).unwrap() - f.eval(a).unwrap() * g.eval(a).unwrap();
        assert!(
            (lhs - (boundary - rhs_int)).abs() <= 1e-9,
            "by parts, trial {trial}"
        );
    }
    println!("acceptance 8 (linearity, additivity, orientation, empty range, by parts; 200 trials): PASS");
}

#[test]
fn acceptance_09_cli_determinism_and_goldens() {
    let exe = env!("CARGO_BIN_EXE_tsquad");
    let run = |args: &[&str]| {
        let out = std::process::Command::new(exe)
            .args(args)
            .output()
            .expect("binary runs");
        assert!(
            out.status.success(),
            "command {:?} failed: {}",
            args,
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };

    let verify_args = ["verify", "--seed", "42", "--trials", "100"];
    let first = run(&verify_args);
    let second = run(&verify_args);
    assert_eq!(first, second, "verify output is not byte-identical");

    let golden_cases: [(&str, &[&str]); 3] = [
        (
            "quad_continuous_trapezoid.json",
            &[
                "quad",
                "--scale",
                r#"{"kind":"continuous","a":0,"b":1}"#,
                "--rule",
                r#"{"rule":"trapezoid"}"#,
                "--f",
                "t^2",
            ],
        ),
        (
            "quad_integers_sharpness.json",
            &[
                "quad",
                "--scale",
                r#"{"kind":"integers","a":0,"b":2}"#,
                "--rule",
                r#"{"rule":"custom","xs":[0,2],"alphas":[0,2,2]}"#,
                "--f",
                "t",
            ],
        ),
        (
            "quad_qlattice_point.json",
            &[
                "quad",
                "--scale",
                r#"{"kind":"qlattice","q":2,"m":0,"n":3}"#,
                "--rule",
                r#"{"rule":"ostrowski_point","x":2}"#,
                "--f",
                "t^2",
            ],
        ),
    ];
    for (golden, args) in golden_cases {
        let got = run(args);
        let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(golden);
        let want = std::fs::read(&path)
            .unwrap_or_else(|e| panic!("golden file {}: {e}", path.display()));
        assert_eq!(
            got,
            want,
            "golden mismatch for {golden}: got {}",
            String::from_utf8_lossy(&got)
        );
    }
    println!("acceptance 9 (CLI determinism, three golden quad invocations): PASS");
}
