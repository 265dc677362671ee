//! Acceptance suite. Each test covers one numbered criterion and prints a
//! single pass/fail line (run with `cargo test --test acceptance -- --nocapture`
//! to see them).

use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rayon::ThreadPoolBuilder;

use moclab::bounds::{derive_bounds, empirical_lipschitz, verify_bound, ZetaCandidate};
use moclab::grid::{sample_function, Grid, GridSpec, ScalarField};
use moclab::moc::{compute_modulus, ModulusBin, ModulusCurve};
use moclab::oned::{
    check_supersolution, check_viscosity_subsolution, compare, eval_f, exponential_roots,
    make_exponential_supersolution, make_parabola_supersolution, s_epsilon, shrink_mu_iteration,
    CompareReport, ModulusCase, OneDimOperator, OneDimProfile, Supersolution,
};
use moclab::seed::{rng_for, stream};
use moclab::solver::{discretize, solve_steady};
use moclab::structure::{
    check_structure_condition, lemma_suite_sample, run_lemma_suite, verify_lemma_31,
    verify_lemma_32, LemmaSuiteConfig, Pairing, StructureConfig,
};
use moclab::{expr, operators::EllipticOperator};

const SEED: u64 = 2024;

fn example1_operator() -> EllipticOperator {
    EllipticOperator::linear_drift(
        1.0,
        vec![expr::parse("0.5", &["x1"]).unwrap()],
        0.5,
        1.0,
    )
    .unwrap()
}

fn catalog_oned() -> Vec<OneDimOperator> {
    vec![
        OneDimOperator::linear(1.0, 0.5, 1.0).unwrap(),
        OneDimOperator::quasi(OneDimProfile::Laplace, 1.0).unwrap(),
        OneDimOperator::quasi(OneDimProfile::PLaplace { exponent: 3.0 }, 1.0).unwrap(),
        OneDimOperator::quasi(OneDimProfile::MinimalSurfacePaper, 1.0).unwrap(),
        OneDimOperator::quasi(OneDimProfile::MinimalSurfaceStd, 1.0).unwrap(),
    ]
}

#[test]
fn criterion_01_order_and_trace_lemma_at_zero_epsilon() {
    let start = Instant::now();
    let cfg = LemmaSuiteConfig {
        samples: 10_000,
        epsilons: vec![0.0],
        seed: SEED,
    };
    let report = run_lemma_suite(&cfg).unwrap();
    let sharp_gap = (report.sharpness.trace_diff - report.sharpness.bound).abs();
    let elapsed = start.elapsed();
    let pass = report.passed() && sharp_gap <= 1e-8 && elapsed.as_secs_f64() <= 30.0;
    println!(
        "acceptance criterion 1: {} — {} pairs (eps = 0, dims 1..4), {} violations, 1-d extremal sharpness gap {:.2e}, {:.2}s",
        if pass { "PASS" } else { "FAIL" },
        report.samples,
        report.violations.len(),
        sharp_gap,
        elapsed.as_secs_f64()
    );
    assert!(report.passed(), "violations: {:?}", &report.violations[..report.violations.len().min(3)]);
    assert!(sharp_gap <= 1e-8, "sharpness witness missed the bound");
    assert!(elapsed.as_secs_f64() <= 30.0, "criterion 1 overran its budget");
}

#[test]
fn criterion_02_trace_lemma_with_quadratic_correction() {
    let zero = LemmaSuiteConfig {
        samples: 10_000,
        epsilons: vec![0.0],
        seed: SEED,
    };
    let wide = LemmaSuiteConfig {
        samples: 10_000,
        epsilons: vec![0.0, 0.1, 0.5, 1.0],
        seed: SEED,
    };
    let report = run_lemma_suite(&wide).unwrap();

    // shared eps = 0 indices reproduce criterion 1's samples bit for bit,
    // and both lemma checkers agree there
    let mut shared = 0usize;
    for index in (0..2000).step_by(4) {
        let (h1, p1) = lemma_suite_sample(&zero, index).unwrap();
        let (h2, p2) = lemma_suite_sample(&wide, index).unwrap();
        assert_eq!(p1.a, p2.a);
        assert_eq!(p1.b, p2.b);
        let v1 = verify_lemma_31(&std::slice::from_ref(&p1), &h1).unwrap();
        let v2 = verify_lemma_32(&std::slice::from_ref(&p2), &h2).unwrap();
        assert_eq!(v1.passed(), v2.passed());
        assert_eq!(v1.violations.len(), v2.violations.len());
        shared += 1;
    }
    let pass = report.passed() && shared == 500;
    println!(
        "acceptance criterion 2: {} — {} pairs over eps in {{0, 0.1, 0.5, 1}}, {} violations, {} shared eps=0 samples verdict-identical to criterion 1",
        if pass { "PASS" } else { "FAIL" },
        report.samples,
        report.violations.len(),
        shared
    );
    assert!(report.passed());
    assert_eq!(shared, 500);
}

#[test]
fn criterion_03_structure_condition_suite() {
    let cfg = StructureConfig {
        samples: 10_000,
        seed: SEED,
        ..Default::default()
    };
    let pairings = vec![
        Pairing::example1(1.0, 0.5, 1.0).unwrap(),
        Pairing::laplace(1.0).unwrap(),
        Pairing::p_laplace(3.0, 1.0).unwrap(),
        Pairing::minimal_surface_paper(1.0).unwrap(),
    ];
    let mut summaries = Vec::new();
    let mut all_pass = true;
    for pairing in &pairings {
        let report = check_structure_condition(pairing, &cfg).unwrap();
        all_pass &= report.passed();
        summaries.push(format!(
            "{}: {} violations (worst margin {:.2e})",
            report.pairing,
            report.violations.len(),
            report.worst_margin
        ));
        assert!(
            report.passed(),
            "{} violated: {:?}",
            report.pairing,
            &report.violations[..report.violations.len().min(3)]
        );
    }

    // deliberately mismatched zeroth-order term must be falsified
    let mismatched = Pairing::example1(1.0, 0.5, 1.0)
        .unwrap()
        .with_oned(OneDimOperator::linear(1.0, 0.5, 10.0).unwrap(), "c=10");
    let report = check_structure_condition(&mismatched, &cfg).unwrap();
    let falsified = !report.passed() && report.worst_margin > 0.0;
    all_pass &= falsified;
    println!(
        "acceptance criterion 3: {} — {}; mismatched c=1 vs c=10 falsified with margin {:.3}",
        if all_pass { "PASS" } else { "FAIL" },
        summaries.join("; "),
        report.worst_margin
    );
    assert!(falsified, "mismatched pairing was not falsified");
}

#[test]
fn criterion_04_exact_exponential_supersolution_identity() {
    let mut checked = 0usize;
    let mut worst_rel = 0.0f64;
    for trial in 0..20u64 {
        let mut rng = rng_for(SEED, stream::LEMMA_JETS, 1 << 40 | trial);
        let lambda = rng.random_range(0.3..3.0);
        let drift_bound = rng.random_range(0.0..3.0);
        let zeroth = rng.random_range(0.3..4.0);
        let (alpha1, alpha2) = exponential_roots(lambda, drift_bound, zeroth);
        assert!(alpha1 > 0.0, "alpha1 = {alpha1} must be positive");
        assert!(alpha2 < 0.0, "alpha2 = {alpha2} must be negative");
        let zeta = make_exponential_supersolution(
            lambda,
            drift_bound,
            zeroth,
            1.0,
            ModulusCase::Periodic { diameter: 2.0 },
        )
        .unwrap();
        let f = OneDimOperator::linear(lambda, drift_bound, zeroth).unwrap();
        for _ in 0..100 {
            let s = rng.random_range(1e-3..3.0);
            let (v, d1, d2) = (zeta.value(s), zeta.d1(s), zeta.d2(s));
            let residual = eval_f(&f, s, v, d1, d2).unwrap();
            let scale = (lambda * d2).abs() + drift_bound * d1.abs() + (zeroth * v).abs();
            let rel = residual.abs() / scale.max(1e-300);
            worst_rel = worst_rel.max(rel);
            assert!(rel <= 1e-12, "relative residual {rel} at s = {s}");
            checked += 1;
        }
    }
    println!(
        "acceptance criterion 4: PASS — f(zeta) = 0 at {} random points over 20 parameter triples (worst relative residual {:.2e}); alpha1 > 0 > alpha2 throughout",
        checked, worst_rel
    );
}

#[test]
fn criterion_05_parabola_supersolution() {
    let mut lines = Vec::new();
    for (f, name) in [
        (
            OneDimOperator::quasi(OneDimProfile::Laplace, 1.0).unwrap(),
            "laplace",
        ),
        (
            OneDimOperator::quasi(OneDimProfile::PLaplace { exponent: 3.0 }, 1.0).unwrap(),
            "p_laplace(3)",
        ),
    ] {
        for (a, d) in [(1.0f64, 2.0f64), (3.0, 6.0)] {
            let zeta = make_parabola_supersolution(a, d).unwrap();
            let grid: Vec<f64> = (1..=1000).map(|k| d * k as f64 / 1000.0).collect();
            let report = check_supersolution(&f, &zeta, &grid, 1e-10).unwrap();
            assert!(
                report.holds,
                "{name}: min residual {} at s = {}",
                report.min_residual, report.argmin_s
            );
            assert_eq!(zeta.slope_at_zero(), 4.0 * a / d, "slope at zero must be 4a/D");
            lines.push(format!("{name} a={a} D={d}: min f(zeta) = {:.3}", report.min_residual));
        }
    }
    println!(
        "acceptance criterion 5: PASS — f(zeta) >= 0 on (0, D] at 10^3 points, zeta'(0) = 4a/D exactly; {}",
        lines.join("; ")
    );
}

#[test]
fn criterion_06_modulus_oracle() {
    let start = Instant::now();
    let grid = Grid::new(GridSpec::periodic(1, 2.0 * std::f64::consts::PI, 256)).unwrap();
    let field = sample_function(&grid, |x| x[0].sin());
    let h = grid.spacing();
    let curve = compute_modulus(&field, h).unwrap();
    for b in &curve.bins {
        assert!(
            (b.omega - b.s.sin().abs()).abs() <= 2.0 * h,
            "bin {}: omega {} vs |sin| {}",
            b.s,
            b.omega,
            b.s.sin().abs()
        );
    }

    // independent naive double loop, bin-exact
    let u = field.values();
    let nbins = ((grid.max_pair_distance() * 0.5 / h).ceil() as usize).max(1);
    let mut maxes = vec![f64::NEG_INFINITY; nbins];
    let mut counts = vec![0usize; nbins];
    for i in 0..grid.len() {
        for j in (i + 1)..grid.len() {
            let s = grid.distance(i, j) * 0.5;
            let k = ((s / h) as usize).min(nbins - 1);
            let c = (u[i] - u[j]).abs() * 0.5;
            if c > maxes[k] {
                maxes[k] = c;
            }
            counts[k] += 1;
        }
    }
    let naive: Vec<ModulusBin> = (0..nbins)
        .filter(|k| counts[*k] > 0)
        .map(|k| ModulusBin {
            s: (k as f64 + 0.5) * h,
            omega: maxes[k],
            pairs: counts[k],
        })
        .collect();
    let exact = curve.bins == naive;
    let elapsed = start.elapsed();
    println!(
        "acceptance criterion 6: {} — sine modulus within 2h of |sin s| in {} bins; optimized path bin-exact vs naive oracle: {}; {:.2}s",
        if exact && elapsed.as_secs_f64() <= 5.0 { "PASS" } else { "FAIL" },
        curve.bins.len(),
        exact,
        elapsed.as_secs_f64()
    );
    assert!(exact);
    assert!(elapsed.as_secs_f64() <= 5.0);
}

#[test]
fn criterion_07_example1_periodic_end_to_end() {
    let grid = Grid::new(GridSpec::periodic(1, 2.0 * std::f64::consts::PI, 64)).unwrap();
    let op = example1_operator();
    let dop = discretize(op, grid.clone()).unwrap();
    let tau = dop.tau_max() * 0.9;
    let mut worst_sup = 0.0f64;
    let mut last_curve = None;
    for init_idx in 0..10u64 {
        let mut rng = rng_for(SEED, stream::INIT_FIELD, init_idx);
        let init = ScalarField::new(
            grid.clone(),
            (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        )
        .unwrap();
        let report = solve_steady(&dop, &init, tau, 1e-9, 200_000).unwrap();
        assert!(report.converged, "init {init_idx} failed to converge");
        let sup = report.field.sup_norm();
        assert!(sup <= 1e-8, "init {init_idx}: |u|_0 = {sup}");
        worst_sup = worst_sup.max(sup);
        let curve = compute_modulus(&report.field, grid.spacing()).unwrap();
        for b in &curve.bins {
            assert!(b.omega <= 1e-8, "omega({}) = {}", b.s, b.omega);
        }
        last_curve = Some(curve);
    }
    let curve = last_curve.unwrap();

    // mu^2 shrink using the solved field's sup norm
    let diameter = grid.spec().default_repeat_diameter().unwrap();
    let shrink = shrink_mu_iteration(
        1.0,
        0.5,
        1.0,
        curve.sup_u,
        ModulusCase::Periodic { diameter },
        10,
    )
    .unwrap();
    assert!(shrink.strictly_decreasing);
    assert!(shrink.steps.last().unwrap().sup_zeta_base <= 1e-3);
    // and at unit normalization, where the decay is not trivially small
    let shrink_unit = shrink_mu_iteration(
        1.0,
        0.5,
        1.0,
        1.0,
        ModulusCase::Periodic { diameter },
        10,
    )
    .unwrap();
    assert!(shrink_unit.strictly_decreasing);
    assert!(shrink_unit.steps.last().unwrap().sup_zeta_base <= 1e-3);
    println!(
        "acceptance criterion 7: PASS — 10 random initializations converge with |u|_0 <= {:.2e}, omega <= 1e-8 in all {} bins, mu^2 strictly decreasing with sup zeta_10 = {:.2e} (solved) / {:.2e} (unit |u|_0)",
        worst_sup,
        curve.bins.len(),
        shrink.steps.last().unwrap().sup_zeta_base,
        shrink_unit.steps.last().unwrap().sup_zeta_base
    );
}

#[test]
fn criterion_08_example1_vanishing_end_to_end() {
    let grid = Grid::new(GridSpec::truncated(1, 6.0, 1e-3, 128)).unwrap();
    let op = example1_operator();
    let dop = discretize(op, grid.clone()).unwrap();
    let mut rng = rng_for(SEED, stream::INIT_FIELD, 101);
    let init = ScalarField::new(
        grid.clone(),
        (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
    .unwrap();
    let report = solve_steady(&dop, &init, dop.tau_max() * 0.9, 1e-9, 200_000).unwrap();
    assert!(report.converged);
    let sup = report.field.sup_norm();
    assert!(sup <= 1e-8, "|u|_0 = {sup}");
    let curve = compute_modulus(&report.field, grid.spacing()).unwrap();
    for b in &curve.bins {
        assert!(b.omega <= 1e-8);
    }
    let eps = 1e-3;
    let s_eps = s_epsilon(&curve, eps).expect("s(eps) must exist");
    assert!(s_eps.is_finite() && s_eps > 0.0);
    // the vanishing-case supersolution and shrink table assemble from it
    let zeta = make_exponential_supersolution(
        1.0,
        0.5,
        1.0,
        curve.sup_u,
        ModulusCase::Vanishing { s_eps, eps },
    )
    .unwrap();
    let cmp = compare(&curve, &zeta, (0.0, s_eps), 1e-12);
    assert!(cmp.holds);
    let shrink = shrink_mu_iteration(
        1.0,
        0.5,
        1.0,
        curve.sup_u,
        ModulusCase::Vanishing { s_eps, eps },
        10,
    )
    .unwrap();
    assert!(shrink.strictly_decreasing);
    println!(
        "acceptance criterion 8: PASS — truncated R=6 solve: |u|_0 = {:.2e}, omega <= 1e-8 in {} bins, s(1e-3) = {:.3} finite, comparison holds on [0, s(eps)], mu^2 shrink strictly decreasing",
        sup,
        curve.bins.len(),
        s_eps
    );
}

#[test]
fn criterion_09_subsolution_checker_controls() {
    // control 1: the zero modulus passes every catalog operator
    let s: Vec<f64> = (1..=120).map(|k| k as f64 * 0.05).collect();
    let zero_curve = ModulusCurve::from_samples(&s, &vec![0.0; s.len()], 0.0).unwrap();
    for f in catalog_oned() {
        let report =
            check_viscosity_subsolution(&f, &zero_curve, 5, -1.0 / 0.05, 1e-8).unwrap();
        assert!(report.passed(), "zero modulus rejected by {f:?}");
        assert!(report.bins_tested > 0);
    }

    // control 2 (negative): |sin| is not a subsolution of -phi'' + phi;
    // violations must appear on the smooth arc
    let w = 0.01;
    let s: Vec<f64> = (1..315).map(|k| k as f64 * w).collect();
    let vals: Vec<f64> = s.iter().map(|s| s.sin().abs()).collect();
    let sin_curve = ModulusCurve::from_samples(&s, &vals, 1.0).unwrap();
    let f_drift = OneDimOperator::linear(1.0, 0.0, 1.0).unwrap();
    let report = check_viscosity_subsolution(&f_drift, &sin_curve, 5, -1.0 / w, 1e-8).unwrap();
    assert!(!report.passed(), "|sin| control must be rejected");
    let arc = report
        .violations
        .iter()
        .filter(|v| v.s > 0.3 && v.s < std::f64::consts::PI - 0.3)
        .count();
    assert!(arc > 0, "no violations on the smooth arc");

    // control 3: s e^{-s} against f = -phi'' (zeroth order in its c -> 0
    // limit). The closed-form oracle gives f = (2 - s) e^{-s} on the curve's
    // jets: strictly positive on (0, 2), nonpositive past 2. The checker
    // must therefore flag (0, 2) and stay quiet on (2, 6). (The criterion's
    // prose asserts the opposite sign for (0, 2); the oracle value above is
    // what a correct checker must report — see the decisions ledger.)
    let s: Vec<f64> = (1..600).map(|k| k as f64 * w).collect();
    let vals: Vec<f64> = s.iter().map(|s| s * (-s).exp()).collect();
    let curve = ModulusCurve::from_samples(&s, &vals, 1.0).unwrap();
    let f_pure = OneDimOperator::linear(1.0, 0.0, 1e-12).unwrap();
    let report = check_viscosity_subsolution(&f_pure, &curve, 5, -1.0 / w, 1e-4).unwrap();
    assert!(!report.passed());
    for v in &report.violations {
        assert!(v.s < 2.0, "violation leaked past the crossing: s = {}", v.s);
        let oracle = (2.0 - v.s) * (-v.s).exp();
        assert!((v.f_value - oracle).abs() <= 1e-3);
    }
    let flagged: Vec<f64> = report.violations.iter().map(|v| v.s).collect();
    for b in curve.bins.iter().filter(|b| b.s > 0.05 && b.s < 1.9) {
        assert!(flagged.iter().any(|x| (x - b.s).abs() < 1e-9));
    }
    assert!(
        !report.violations.iter().any(|v| v.s > 2.1),
        "no violations allowed on (2.1, 6)"
    );
    println!(
        "acceptance criterion 9: PASS — zero modulus accepted by all 5 catalog operators; |sin| rejected on the arc ({arc} violations); s e^(-s) vs -phi'': flagged exactly on (0, 2) per the closed-form oracle (criterion prose has the sign inverted; see ledger), quiet on (2, 6)"
    );
}

#[test]
fn criterion_10_bounds_loop() {
    // manufactured field: -u'' + u = 2 sin x solved to its sine solution
    let grid = Grid::new(GridSpec::periodic(1, 2.0 * std::f64::consts::PI, 128)).unwrap();
    let op = EllipticOperator::quasilinear(
        moclab::operators::DiffusionProfile::Laplace,
        None,
        1.0,
    )
    .unwrap();
    let forcing = sample_function(&grid, |x| 2.0 * x[0].sin());
    let dop = discretize(op, grid.clone())
        .unwrap()
        .with_forcing(&forcing)
        .unwrap();
    let init = ScalarField::zeros(grid.clone());
    let solved = solve_steady(&dop, &init, dop.tau_max() * 0.9, 1e-10, 400_000)
        .unwrap()
        .field;
    let lip = empirical_lipschitz(&solved);
    assert!((lip - 1.0).abs() <= 1e-2, "empirical Lipschitz {lip}");

    // trivial oscillation report always passes
    let sup = solved.sup_norm();
    let trivial_zeta = make_parabola_supersolution(sup, 2.0 * std::f64::consts::PI).unwrap();
    let synthetic_holding = CompareReport {
        holds: true,
        max_violation: 0.0,
        argmax_s: 0.0,
        bins_compared: 1,
        interval: (0.0, std::f64::consts::PI),
    };
    let mut trivial = derive_bounds(
        &ZetaCandidate::Closed(trivial_zeta),
        (0.0, std::f64::consts::PI),
        &synthetic_holding,
    )
    .unwrap();
    trivial.lipschitz_bound = None; // oscillation-only control
    let verdict = verify_bound(&solved, &trivial, 1e-9);
    assert!(verdict.passed, "trivial oscillation report must pass");
    let osc = verdict.oscillation.as_ref().unwrap();
    assert!(osc.bound >= 2.0 * sup - 1e-12);

    // adversarial Lipschitz bound fails with a concrete witness pair
    let mut adversarial = trivial.clone();
    adversarial.oscillation_bound = None;
    adversarial.lipschitz_bound = Some(0.5);
    let verdict = verify_bound(&solved, &adversarial, 1e-9);
    assert!(!verdict.passed);
    let check = verdict.lipschitz.unwrap();
    let (i, j) = check.witness.expect("witness pair required");
    let q = (solved.values()[j] - solved.values()[i]).abs() / grid.spacing();
    assert!(q > 0.5);
    println!(
        "acceptance criterion 10: PASS — manufactured sine field: empirical Lipschitz {:.4} (= 1 within 1e-2); trivial oscillation report passes; lipschitz_bound = 0.5 fails with witness pair ({i}, {j}) of quotient {:.3}",
        lip, q
    );
}

#[test]
fn criterion_11_determinism_across_thread_counts() {
    let run_all = |threads: usize| -> String {
        let pool = ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let l31 = run_lemma_suite(&LemmaSuiteConfig {
                samples: 10_000,
                epsilons: vec![0.0],
                seed: SEED,
            })
            .unwrap();
            let l32 = run_lemma_suite(&LemmaSuiteConfig {
                samples: 10_000,
                epsilons: vec![0.0, 0.1, 0.5, 1.0],
                seed: SEED,
            })
            .unwrap();
            let cfg = StructureConfig {
                samples: 10_000,
                seed: SEED,
                ..Default::default()
            };
            let mut out = String::new();
            out.push_str(&serde_json::to_string(&l31.violations).unwrap());
            out.push_str(&serde_json::to_string(&l32.violations).unwrap());
            for pairing in [
                Pairing::example1(1.0, 0.5, 1.0).unwrap(),
                Pairing::laplace(1.0).unwrap(),
                Pairing::p_laplace(3.0, 1.0).unwrap(),
                Pairing::minimal_surface_paper(1.0).unwrap(),
                Pairing::example1(1.0, 0.5, 1.0)
                    .unwrap()
                    .with_oned(OneDimOperator::linear(1.0, 0.5, 10.0).unwrap(), "c=10"),
            ] {
                let report = check_structure_condition(&pairing, &cfg).unwrap();
                out.push_str(&serde_json::to_string(&report.violations).unwrap());
                out.push_str(&format!("{:.17e}", report.worst_margin));
            }
            out
        })
    };
    let single = run_all(1);
    let eight = run_all(8);
    let identical = single == eight;
    println!(
        "acceptance criterion 11: {} — criteria 1–3 violation lists byte-identical under 1 and 8 threads ({} bytes)",
        if identical { "PASS" } else { "FAIL" },
        single.len()
    );
    assert!(identical);
}

// cross-checks that tie the acceptance pieces together

#[test]
fn exponential_comparison_chain_on_solved_field() {
    // the full chain solve -> modulus -> supersolution -> compare -> bounds
    // -> verify on the drift equation, whose only solution is zero; note a
    // nonzero field could not pass the comparison here (omega grows at
    // least like 2|u|_0 s / L near zero while zeta'(0) is far smaller),
    // which is exactly the shape of the vanishing argument.
    let grid = Grid::new(GridSpec::periodic(1, 2.0 * std::f64::consts::PI, 48)).unwrap();
    let dop = discretize(example1_operator(), grid.clone()).unwrap();
    let mut rng = rng_for(SEED, stream::INIT_FIELD, 777);
    let init = ScalarField::new(
        grid.clone(),
        (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
    )
    .unwrap();
    let field = solve_steady(&dop, &init, dop.tau_max() * 0.9, 1e-10, 200_000)
        .unwrap()
        .field;
    let curve = compute_modulus(&field, grid.spacing()).unwrap();
    let diameter = grid.spec().default_repeat_diameter().unwrap();
    let zeta = make_exponential_supersolution(
        1.0,
        0.5,
        1.0,
        curve.sup_u.max(1e-12),
        ModulusCase::Periodic { diameter },
    )
    .unwrap();
    let cmp = compare(&curve, &zeta, (0.0, diameter / 2.0), 1e-12);
    assert!(cmp.holds, "max violation {}", cmp.max_violation);
    let report = derive_bounds(&ZetaCandidate::Closed(zeta), (0.0, diameter / 2.0), &cmp).unwrap();
    let verdict = verify_bound(&field, &report, 1e-9);
    assert!(verdict.passed);
    if let Supersolution::ExponentialGap { mu_sq, alpha1, alpha2 } = zeta {
        assert!((report.lipschitz_bound.unwrap() - mu_sq * (alpha1 - alpha2)).abs() < 1e-12);
    }
}

#[test]
fn catalog_monotonicity_probe_for_acceptance_operators() {
    for (op, n) in [
        (example1_operator(), 64usize),
        (
            EllipticOperator::quasilinear(
                moclab::operators::DiffusionProfile::Laplace,
                None,
                1.0,
            )
            .unwrap(),
            64,
        ),
    ] {
        let grid = Grid::new(GridSpec::periodic(1, 2.0 * std::f64::consts::PI, n)).unwrap();
        let dop = discretize(op, grid).unwrap();
        let probe = moclab::solver::monotonicity_probe(&dop, dop.tau_max(), 1000, SEED);
        assert!(probe.passed(), "{} violations", probe.violations.len());
    }
}
