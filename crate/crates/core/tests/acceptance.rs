//! Acceptance gate: one test per shipped guarantee. Each test prints its
//! measured numbers and a PASS line (visible with --nocapture) and asserts
//! every tolerance, band, and runtime cap, so the harness summary gives one
//! pass/fail line per guarantee.

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Instant;

use common::{big, brute_haar_coeff, random_index, random_matrix_set, TestRng};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use hoqmc_core::experiment::{convergence_sweep, fit_log2, Method, SweepSpec, Target, TestFunction};
use hoqmc_core::f2::{
    check_equidistribution, generate_digital_net, verify_order_sigma_t, GeneratingMatrixSet,
    PointSet,
};
use hoqmc_core::faber::{
    faber_error_coeff, faber_partial_sum, faber_error_series, haar_coeff_discrepancy,
    haar_decay_profile, HaarIndex, HatCombination, TorusFn,
};
use hoqmc_core::generators::{
    equispaced, fibonacci_lattice, halton_rule, standard_bases, Coord, CubatureRule,
};
use hoqmc_core::kernel::{
    bernoulli_poly_exact, kernel_1d, worst_case_error, ArithmeticMode, KernelSpec,
};
use hoqmc_core::util::unit_f64;

fn data_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sobol_6d_32.txt")
}

fn shipped_matrices() -> GeneratingMatrixSet {
    GeneratingMatrixSet::load(&data_path()).unwrap()
}

fn coord(num: u128, den: u128) -> Coord {
    Coord::new(num, den)
}

fn rational_of(c: &Coord) -> BigRational {
    BigRational::new(BigInt::from(*c.numer()), BigInt::from(*c.denom()))
}

/// Closed form vs truncated cosine series at 1000 well-separated random
/// pairs per smoothness, plus the exact rational diagonal values; < 1 s.
#[test]
fn acceptance_1_kernel_closed_matches_series() {
    let t0 = Instant::now();
    let mut rng = TestRng::new(101);
    let sep = 1.0 / 64.0; // wrapped separation keeps the series tail ≤ 1e-10
    for (r, eps) in [(1.0f64, 5e-7), (2.0, 2e-10)] {
        let closed = KernelSpec::closed(1, r as u32).unwrap();
        let series = KernelSpec::series(1, r, eps).unwrap();
        let mut worst: f64 = 0.0;
        for _ in 0..1000 {
            let x = unit_f64(rng.next_u64());
            let delta = sep + unit_f64(rng.next_u64()) * (1.0 - 2.0 * sep);
            let y = (x + delta).fract();
            let a = kernel_1d(&closed, x, y).unwrap();
            let b = kernel_1d(&series, x, y).unwrap();
            worst = worst.max((a - b).abs());
        }
        println!("acceptance 1: r={r} max closed-vs-series deviation {worst:.3e}");
        assert!(worst <= 1e-10, "r={r}: deviation {worst:e} exceeds 1e-10");
    }

    // Diagonal values through the public exact path: a single-point rule has
    // squared error K(x,x) − 1 exactly.
    for (r, expect) in [(1u32, big(1, 12)), (2, big(1, 720))] {
        let spec = KernelSpec::closed(1, r).unwrap();
        for num in [0u128, 13, 47] {
            let rule = CubatureRule::equal_weight(vec![coord(num, 64)], 1).unwrap();
            let out = worst_case_error(&rule, &spec, ArithmeticMode::Exact).unwrap();
            assert_eq!(out.exact_squared.unwrap(), expect, "diagonal at {num}/64, r={r}");
        }
    }
    // ... which pins K_{1,1}(x,x) = 13/12 and K_{1,2}(x,x) = 721/720:
    let zero = BigRational::zero();
    assert_eq!(BigRational::one() + bernoulli_poly_exact(2, &zero).unwrap() / big(2, 1), big(13, 12));
    assert_eq!(BigRational::one() - bernoulli_poly_exact(4, &zero).unwrap() / big(24, 1), big(721, 720));

    let dt = t0.elapsed().as_secs_f64();
    println!("acceptance 1 kernel closed vs series: PASS ({dt:.2}s)");
    assert!(dt < 1.0, "runtime {dt:.2}s exceeds 1 s");
}

/// Float worst-case error vs the exact rational oracle on every rational
/// rule family with N ≤ 256, r ∈ {1,2}; equispaced d=1, r=1 equals
/// 1/(12N²) exactly; < 30 s.
#[test]
fn acceptance_2_float_wce_matches_exact_oracle() {
    let t0 = Instant::now();
    let set = shipped_matrices();
    let mut rules: Vec<(String, CubatureRule)> = Vec::new();
    for d in 1..=3usize {
        for n in 1..=8u32 {
            let net = generate_digital_net(&set.truncate(d, n, n).unwrap()).unwrap();
            rules.push((format!("net d={d} n={n}"), CubatureRule::from_point_set(&net).unwrap()));
        }
    }
    for d in 1..=2usize {
        for n in 1..=8u32 {
            let source = set.truncate(2 * d, n, n).unwrap().interlace(2).unwrap();
            let net = generate_digital_net(&source).unwrap();
            rules.push((
                format!("order2 net d={d} n={n}"),
                CubatureRule::from_point_set(&net).unwrap(),
            ));
        }
    }
    for m in 2..=13u32 {
        rules.push((format!("fibonacci m={m}"), fibonacci_lattice(m).unwrap()));
    }
    for n in 1..=256usize {
        rules.push((format!("equispaced N={n}"), equispaced(n).unwrap()));
    }

    let mut worst_rel: f64 = 0.0;
    for (label, rule) in &rules {
        for r in 1..=2u32 {
            let spec = KernelSpec::closed(rule.dimension(), r).unwrap();
            let float = worst_case_error(rule, &spec, ArithmeticMode::Float).unwrap();
            let exact = worst_case_error(rule, &spec, ArithmeticMode::Exact).unwrap();
            let reference = exact.exact_squared.as_ref().unwrap();
            assert!(reference > &BigRational::zero(), "{label}: exact e² must be positive");
            let reference = reference.to_f64().unwrap();
            let rel = (float.squared - reference).abs() / reference;
            worst_rel = worst_rel.max(rel);
            assert!(rel <= 1e-10, "{label} r={r}: relative gap {rel:e}");
        }
    }

    // the equispaced family is exactly 1/(12N²) at r=1
    let spec = KernelSpec::closed(1, 1).unwrap();
    for n in 1..=256usize {
        let rule = equispaced(n).unwrap();
        let out = worst_case_error(&rule, &spec, ArithmeticMode::Exact).unwrap();
        let expect = BigRational::new(BigInt::one(), BigInt::from(12 * n as u64 * n as u64));
        assert_eq!(out.exact_squared.unwrap(), expect, "equispaced N={n}");
    }

    let dt = t0.elapsed().as_secs_f64();
    println!(
        "acceptance 2 float vs exact worst-case error: PASS ({} rules, worst rel {worst_rel:.3e}, {dt:.2}s)",
        rules.len()
    );
    assert!(dt < 30.0, "runtime {dt:.2}s exceeds 30 s");
}

/// Shipped matrix data carries its declared quality: equidistribution at the
/// declared t, order-1 verification ≤ declared, and interlaced order-2
/// within the composition bound 2t′ + d; < 5 min.
#[test]
fn acceptance_3_shipped_matrix_quality() {
    let t0 = Instant::now();
    let set = shipped_matrices();
    let table = std::fs::read_to_string(
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/sobol_6d_32.tvalues.csv"),
    )
    .unwrap();
    let mut rows = 0usize;
    for line in table.lines().skip(1) {
        let fields: Vec<u32> = line.split(',').map(|v| v.parse().unwrap()).collect();
        let (d, n, t1, t1_wide, t2) =
            (fields[0] as usize, fields[1], fields[2], fields[3], fields[4]);
        rows += 1;

        let order1 = set.truncate(d, n, n).unwrap();
        let verified = verify_order_sigma_t(&order1, 1).unwrap();
        assert!(verified <= t1, "d={d} n={n}: verified t={verified} above declared {t1}");
        let net = generate_digital_net(&order1).unwrap();
        assert!(check_equidistribution(&net, t1).unwrap(), "d={d} n={n}: fails declared t={t1}");

        let source = set.truncate(2 * d, n, n).unwrap();
        assert_eq!(verify_order_sigma_t(&source, 1).unwrap(), t1_wide, "d={d} n={n}: source t′");
        let interlaced = verify_order_sigma_t(&source.interlace(2).unwrap(), 2).unwrap();
        assert_eq!(interlaced, t2, "d={d} n={n}: interlaced t");
        assert!(
            interlaced <= 2 * t1_wide + d as u32,
            "d={d} n={n}: t={interlaced} breaks bound 2·{t1_wide}+{d}"
        );
    }
    assert_eq!(rows, 21, "expected d ∈ 1..3 × n ∈ 4..10");

    let dt = t0.elapsed().as_secs_f64();
    println!("acceptance 3 shipped matrix quality: PASS ({rows} rows, {dt:.2}s)");
    assert!(dt < 300.0, "runtime {dt:.2}s exceeds 5 min");
}

/// μ_{j,m}(D_P) = κ_d·2^{−|j|₁}·c_{j,m}(P) with one constant per dimension,
/// across ≥ 100 random nets/indices per d ∈ {1,2,3}; μ is computed two
/// independent ways (closed form vs literal piecewise integration); the
/// N=1, d=1, j=0 anchor equals 1/4; < 1 min.
#[test]
fn acceptance_4_haar_hat_proportionality() {
    let t0 = Instant::now();
    let anchor = PointSet::from_numerators(vec![0], 1, 1).unwrap();
    let idx0 = HaarIndex::new(vec![0], vec![0]).unwrap();
    assert_eq!(haar_coeff_discrepancy(&anchor, &idx0).unwrap(), big(1, 4));
    assert_eq!(brute_haar_coeff(&anchor, &idx0), big(1, 4));

    for d in 1..=3usize {
        let max_n = [4u32, 3, 2][d - 1];
        let mut rng = TestRng::new(4000 + d as u64);
        let mut ratios: BTreeSet<BigRational> = BTreeSet::new();
        let mut with_signal = 0usize;
        for i in 0..100 {
            let n = 1 + (i as u32) % max_n;
            let net = generate_digital_net(&random_matrix_set(&mut rng, d, n)).unwrap();
            let idx = random_index(&mut rng, d, 2);
            let mu = haar_coeff_discrepancy(&net, &idx).unwrap();
            assert_eq!(mu, brute_haar_coeff(&net, &idx), "independent μ paths disagree");
            let c = faber_error_coeff(&CubatureRule::from_point_set(&net).unwrap(), &idx).unwrap();
            if c.is_zero() {
                assert!(mu.is_zero(), "c=0 must force μ=0");
            } else {
                let weight = BigRational::new(BigInt::one(), BigInt::one() << idx.level_sum());
                ratios.insert(mu / (weight * c));
                with_signal += 1;
            }
        }
        assert!(with_signal >= 50, "d={d}: too few instances with c ≠ 0");
        assert_eq!(ratios.len(), 1, "d={d}: ratio must be a single constant, got {ratios:?}");
        let kappa = ratios.into_iter().next().unwrap();
        println!("acceptance 4: d={d} κ = {kappa} over {with_signal} instances");
    }

    let dt = t0.elapsed().as_secs_f64();
    println!("acceptance 4 Haar–hat proportionality: PASS ({dt:.2}s)");
    assert!(dt < 60.0, "runtime {dt:.2}s exceeds 1 min");
}

/// Worst-case-error convergence: order-2 nets in d=2 fit slope −r ± 0.3 for
/// r ∈ {1,2} over n = 4..12; Halton at r=2 stays first-order; the Fibonacci
/// lattice at r=2 reaches second order; < 10 min.
#[test]
fn acceptance_5_wce_convergence_rates() {
    let t0 = Instant::now();
    let set = shipped_matrices();
    let checks: [(Method, u32, Vec<u32>, f64, f64); 4] = [
        (Method::Order2Net, 1, (4..=12).collect(), -1.3, -0.7),
        (Method::Order2Net, 2, (4..=12).collect(), -2.3, -1.7),
        (Method::Halton, 2, (4..=12).collect(), -1.3, -0.8),
        (Method::Fibonacci, 2, (7..=18).collect(), -2.3, -1.7),
    ];
    for (method, r, ns, lo, hi) in checks {
        let spec = SweepSpec {
            method,
            d: 2,
            target: Target::WorstCase { r },
            ns,
            seed: 0,
            matrices: Some(&set),
        };
        let record = convergence_sweep(&spec).unwrap();
        let slope = record.slope.unwrap();
        println!("acceptance 5: {} r={r} slope {slope:.3}", method.name());
        assert!(
            (lo..=hi).contains(&slope),
            "{} r={r}: slope {slope:.3} outside [{lo}, {hi}]",
            method.name()
        );
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("acceptance 5 worst-case-error rates: PASS ({dt:.2}s)");
    assert!(dt < 600.0, "runtime {dt:.2}s exceeds 10 min");
}

/// The ℓ=0 shell maxima of |μ| decay at order-2 speed (slope ≤ −1.7 in n)
/// for interlaced nets but only first-order (slope ≥ −1.3) for the
/// un-interlaced net from the same matrices; d=2, n ∈ {4,6,8}; < 2 min.
#[test]
fn acceptance_6_decay_separates_orders() {
    let t0 = Instant::now();
    let set = shipped_matrices();
    let mut slopes = [0.0f64; 2];
    for (which, interlaced) in [(0usize, true), (1, false)] {
        let mut xy = Vec::new();
        for n in [4u32, 6, 8] {
            let net = if interlaced {
                generate_digital_net(&set.truncate(4, n, n).unwrap().interlace(2).unwrap()).unwrap()
            } else {
                generate_digital_net(&set.truncate(2, n, n).unwrap()).unwrap()
            };
            let shell0 = &haar_decay_profile(&net, n, 0).unwrap()[0];
            xy.push((n as f64, shell0.max_mu_f64().log2()));
        }
        slopes[which] = fit_log2(&xy, false).unwrap().slope;
    }
    println!("acceptance 6: order-2 slope {:.3}, order-1 slope {:.3}", slopes[0], slopes[1]);
    assert!(slopes[0] <= -1.7, "order-2 slope {:.3} above -1.7", slopes[0]);
    assert!(slopes[1] >= -1.3, "order-1 slope {:.3} below -1.3", slopes[1]);

    let dt = t0.elapsed().as_secs_f64();
    println!("acceptance 6 coefficient decay separates orders: PASS ({dt:.2}s)");
    assert!(dt < 120.0, "runtime {dt:.2}s exceeds 2 min");
}

/// Randomly shifted integration errors on order-2 nets: the kink integrand
/// fits slope in [−2.4, −1.6] in d ∈ {1,2}; the √-hat integrand fits slope
/// in [−1.8, −1.2]; 100 shifts, n = 8..16; < 5 min.
#[test]
fn acceptance_7_shifted_integrand_rates() {
    let t0 = Instant::now();
    let set = shipped_matrices();
    let cases: [(TestFunction, usize, f64, f64); 4] = [
        (TestFunction::kink(1).unwrap(), 1, -2.4, -1.6),
        (TestFunction::kink(2).unwrap(), 2, -2.4, -1.6),
        (TestFunction::sqrt_hat(1).unwrap(), 1, -1.8, -1.2),
        (TestFunction::sqrt_hat(2).unwrap(), 2, -1.8, -1.2),
    ];
    for (f, d, lo, hi) in cases {
        let name = f.name();
        let spec = SweepSpec {
            method: Method::Order2Net,
            d,
            target: Target::MaxShift { f, shifts: 100 },
            ns: (8..=16).collect(),
            seed: 20260814,
            matrices: Some(&set),
        };
        let record = convergence_sweep(&spec).unwrap();
        let slope = record.slope.unwrap();
        println!("acceptance 7: {name} d={d} slope {slope:.3}");
        assert!(
            (lo..=hi).contains(&slope),
            "{name} d={d}: slope {slope:.3} outside [{lo}, {hi}]"
        );
    }
    let dt = t0.elapsed().as_secs_f64();
    println!("acceptance 7 shifted integrand rates: PASS ({dt:.2}s)");
    assert!(dt < 300.0, "runtime {dt:.2}s exceeds 5 min");
}

/// Finite hat combinations: the expansion reconstructs the function exactly
/// and the finite error series equals the true integration error exactly, in
/// rational arithmetic, for 50 random combinations against 5 rules each;
/// < 1 min.
#[test]
fn acceptance_8_reconstruction_and_error_identity() {
    let t0 = Instant::now();
    let set = shipped_matrices();
    let net = |d: usize, n: u32| {
        CubatureRule::from_point_set(&generate_digital_net(&set.truncate(d, n, n).unwrap()).unwrap())
            .unwrap()
    };
    let rules_d1 = [
        net(1, 3),
        net(1, 4),
        halton_rule(16, &standard_bases(1)).unwrap(),
        equispaced(7).unwrap(),
        equispaced(16).unwrap(),
    ];
    let rules_d2 = [
        net(2, 3),
        net(2, 4),
        halton_rule(16, &standard_bases(2)).unwrap(),
        fibonacci_lattice(6).unwrap(),
        fibonacci_lattice(7).unwrap(),
    ];

    let mut rng = TestRng::new(808);
    for case in 0..50 {
        let d = 1 + (case % 2);
        let terms = 1 + rng.below(3) as usize;
        let combo = HatCombination::new(
            (0..terms)
                .map(|_| {
                    let num = rng.below(8) as i64 + 1;
                    let num = if rng.below(2) == 0 { num } else { -num };
                    (big(num, 1 + rng.below(4) as i64), random_index(&mut rng, d, 2))
                })
                .collect(),
        )
        .unwrap();

        // exact reconstruction at 5 random rational points
        for _ in 0..5 {
            let x: Vec<BigRational> =
                (0..d).map(|_| big(rng.below(97) as i64, 97)).collect();
            let direct = combo.eval_rational(&x).unwrap();
            let series = faber_partial_sum(&combo, combo.max_level(), &x).unwrap();
            assert_eq!(direct, series, "reconstruction failed at case {case}");
        }

        // exact error identity against each rule
        let rules = if d == 1 { &rules_d1 } else { &rules_d2 };
        for rule in rules {
            let mut avg = BigRational::zero();
            for i in 0..rule.len() {
                let x: Vec<BigRational> = rule.point(i).iter().map(rational_of).collect();
                avg += combo.eval_rational(&x).unwrap();
            }
            avg /= BigRational::from_integer(BigInt::from(rule.len() as u64));
            let direct_error = avg - combo.integral();
            let series_error = faber_error_series(&combo, rule, combo.max_level()).unwrap();
            assert_eq!(direct_error, series_error, "error identity failed at case {case}");
        }
    }

    let dt = t0.elapsed().as_secs_f64();
    println!("acceptance 8 reconstruction and error identity: PASS (50 cases × 5 rules, {dt:.2}s)");
    assert!(dt < 60.0, "runtime {dt:.2}s exceeds 1 min");
}
