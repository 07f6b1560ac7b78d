//! End-to-end acceptance criteria. Each criterion prints one `[PASS]`/`[FAIL]` line;
//! the run exits nonzero if any of them fails.

use hardy_bounds::cantor::{cantor_cdf, CantorQuadrature};
use hardy_bounds::constants::{
    compute_b, divergence_ratio, k_literature, k_sharp, triadic_profile, BConfig, Exponents,
};
use hardy_bounds::measure::{IntervalQuery, Measure, Weight};
use hardy_bounds::variational::{
    bliss_trial, certify_lower_bound, optimize_quotient, oracle_p2q2, random_atomic, rayleigh,
    TestFunction,
};
use std::cell::Cell;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

thread_local! {
    static OUTCOME: Cell<Option<bool>> = const { Cell::new(None) };
}

fn report(name: &str, ok: bool, detail: String) {
    println!("[{}] {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    OUTCOME.with(|o| o.set(Some(ok)));
}

fn ex(p: f64, q: f64) -> Exponents {
    Exponents::new(p, q).unwrap()
}

fn c01_sharp_factor_values() {
    let k22 = k_sharp(&ex(2.0, 2.0));
    let k24 = k_sharp(&ex(2.0, 4.0));
    let mut worst: f64 = 0.0;
    for p in [1.5, 2.0, 3.0, 5.0] {
        worst = worst.max((k_sharp(&ex(p, p + 1e-6)) - k_sharp(&ex(p, p))).abs());
    }
    let ok = (k22 - 2.0).abs() <= 1e-12 && (k24 - 3f64.powf(0.25)).abs() <= 1e-10 && worst <= 1e-4;
    report(
        "sharp factor",
        ok,
        format!("k(2,2)={k22:.15} k(2,4)={k24:.12} branch gap={worst:.2e}"),
    );
}

fn c02_literature_comparison() {
    let mut worst = f64::NEG_INFINITY;
    for p in [1.2, 1.5, 2.0, 3.0, 5.0] {
        for q in [p, p + 0.5, 2.0 * p, 5.0 * p] {
            let e = ex(p, q);
            let k = k_sharp(&e);
            for v in k_literature(&e).values() {
                worst = worst.max(k - v);
            }
        }
    }
    report(
        "literature comparison",
        worst <= 1e-12,
        format!("max(k_sharp - factor) = {worst:.3e}"),
    );
}

fn c03_mixed_form_counting_vs_power_density() {
    let mut worst: f64 = 0.0;
    for q in [2.0, 3.0, 5.0] {
        let nu = Measure::counting(1, 10_000).unwrap();
        let mu = Measure::power_density(1.0, -q, 0.0, 1.0, f64::INFINITY).unwrap();
        let b = compute_b(
            &nu,
            &mu,
            &ex(q, q),
            &BConfig {
                max_levels: 2,
                ..BConfig::default()
            },
        )
        .unwrap();
        worst = worst.max((b.value - (q - 1.0).powf(-1.0 / q)).abs());
    }
    report(
        "mixed form (counting, power density)",
        worst <= 1e-9,
        format!("max |B - (q-1)^(-1/q)| = {worst:.3e}"),
    );
}

fn c04_mixed_form_lebesgue_vs_power_atoms() {
    let nu = Measure::lebesgue(1.0, f64::INFINITY).unwrap();
    let mu = Measure::integer_power_atoms(1, 1.0, -2.0, 10_000).unwrap();
    let cfg = BConfig {
        truncation: 10_000,
        max_truncation: 10_000,
        ..BConfig::default()
    };
    let b = compute_b(&nu, &mu, &ex(2.0, 2.0), &cfg).unwrap();
    report(
        "mixed form (lebesgue, power atoms)",
        (0.999..=1.0).contains(&b.value),
        format!("B = {:.9} at truncation 1e4 (argmax {})", b.value, b.argmax),
    );
}

fn c05_cantor_diagonal() {
    let e = ex(2.0, 2.0);
    let nu = Measure::cantor();
    let mu = Measure::weighted(Measure::cantor(), Weight::CdfPower { exponent: -2.0 }).unwrap();
    let mut errs = Vec::new();
    for m in [4u32, 6, 8, 10, 12] {
        let cfg = BConfig {
            depth: m,
            max_levels: 1,
            ..BConfig::default()
        };
        errs.push((compute_b(&nu, &mu, &e, &cfg).unwrap().value - 1.0).abs());
    }
    let monotone = errs.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let level = mu.with_cantor_quadrature(CantorQuadrature::Level(14));
    let mut qerr: f64 = 0.0;
    for x in [1.0 / 3.0, 1.0 / 9.0, 1.5] {
        let got = level
            .integrate(&|_| 1.0, &IntervalQuery::from(x), 1e-8)
            .unwrap();
        qerr = qerr.max((got - 1.0 / cantor_cdf(x)).abs());
    }
    let ok = *errs.last().unwrap() <= 1e-2 && monotone && qerr <= 1e-3;
    report(
        "cantor p=q=2",
        ok,
        format!("|B-1| by depth {errs:?}; level-14 tail error {qerr:.2e}"),
    );
}

fn c06_cantor_divergence() {
    let e = ex(2.0, 3.0);
    let nu = Measure::lebesgue(0.0, f64::INFINITY).unwrap();
    let mu = Measure::weighted(Measure::cantor(), Weight::XPower { exponent: -3.0 }).unwrap();
    let est = compute_b(
        &nu,
        &mu,
        &e,
        &BConfig {
            mass_tol: 1e-8,
            ..BConfig::default()
        },
    )
    .unwrap();
    let profile = triadic_profile(&nu, &mu, &e, 5..=15, 1e-9).unwrap();
    let ratio = divergence_ratio(&profile).unwrap();
    let expect = 3f64.sqrt() / 2f64.powf(1.0 / 3.0);
    let ok = est.divergent && (ratio / expect - 1.0).abs() <= 0.05;
    report(
        "cantor divergence p=2 q=3",
        ok,
        format!(
            "divergent={} after {} levels; ratio {ratio:.5} vs {expect:.5}",
            est.divergent,
            est.trace.len()
        ),
    );
}

fn c07_sandwich_with_oracle() {
    let e = ex(2.0, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = std::time::Instant::now();
    let mut failures = 0;
    let mut worst_gap = f64::INFINITY;
    for _ in 0..100 {
        let nu = random_atomic(&mut rng, 20);
        let mu = random_atomic(&mut rng, 20);
        let b = compute_b(&nu, &mu, &e, &BConfig::default()).unwrap().value;
        let a = oracle_p2q2(&nu, &mu).unwrap();
        if !(b <= a && a <= 2.0 * b * (1.0 + 1e-9)) {
            failures += 1;
        }
        worst_gap = worst_gap.min(2.0 * b - a);
    }
    let secs = start.elapsed().as_secs_f64();
    report(
        "sandwich with exact oracle",
        failures == 0 && secs < 10.0,
        format!(
            "{failures} violations in 100 instances, min(2B - A) = {worst_gap:.3e}, {secs:.2}s"
        ),
    );
}

fn c08_bliss_near_extremal() {
    let e = ex(2.0, 4.0);
    let nu = Measure::lebesgue(0.0, f64::INFINITY).unwrap();
    let s = e.q / e.p_star;
    let mu = Measure::power_density(s, -s - 1.0, 0.0, 0.0, f64::INFINITY).unwrap();
    let k = k_sharp(&e);
    let mut best = (0.0, 0.0, 0.0, 0.0);
    for i in 0..21 {
        for j in 0..21 {
            let gamma = 10f64.powf(-2.0 + 0.2 * i as f64);
            let delta = 10f64.powf(-2.0 + 0.2 * j as f64);
            let r = rayleigh(&bliss_trial(&e, gamma, delta).unwrap(), &nu, &mu, &e, 1e-10).unwrap();
            if r.value > best.0 {
                best = (r.value, gamma, delta, r.quadrature_residual);
            }
        }
    }
    let ratio = best.0 / k;
    let ok = (0.999..=1.001).contains(&ratio) && best.3 < 1e-6;
    report(
        "bliss near-extremality",
        ok,
        format!(
            "sup/k = {ratio:.8} at gamma={:.3} delta={:.3}, residual {:.2e}",
            best.1, best.2, best.3
        ),
    );
}

fn c09_classical_continuous() {
    let e = ex(2.0, 2.0);
    let nu = Measure::lebesgue(0.0, f64::INFINITY).unwrap();
    let mu = Measure::power_density(1.0, -2.0, 0.0, 0.0, f64::INFINITY).unwrap();
    let b = compute_b(&nu, &mu, &e, &BConfig::default()).unwrap().value;
    let nu1 = Measure::lebesgue(1.0, f64::INFINITY).unwrap();
    let mu1 = Measure::power_density(1.0, -2.0, 0.0, 1.0, f64::INFINITY).unwrap();
    let r = rayleigh(
        &TestFunction::power_tail(&e, 0.01).unwrap(),
        &nu1,
        &mu1,
        &e,
        1e-10,
    )
    .unwrap();
    let upper = k_sharp(&e) * b;
    let ok = (b - 1.0).abs() <= 1e-9 && r.value > 1.9 && (upper - 2.0).abs() <= 1e-9;
    report(
        "classical continuous",
        ok,
        format!(
            "B = {b:.12}, power-tail quotient {:.6}, k*B = {upper:.12}",
            r.value
        ),
    );
}

fn c10_classical_discrete_truncated() {
    let e = ex(2.0, 2.0);
    let n = 200;
    let nu = Measure::atoms((1..=n).map(|k| k as f64).collect(), vec![1.0; n]).unwrap();
    // mu_n = n^-2 placed just right of n so that the running sum includes a_n
    let mu = Measure::atoms(
        (1..=n).map(|k| k as f64 + 0.5).collect(),
        (1..=n).map(|k| (k * k) as f64).map(|v| 1.0 / v).collect(),
    )
    .unwrap();
    let b = compute_b(&nu, &mu, &e, &BConfig::default()).unwrap().value;
    let mut part: Vec<f64> = (1..=n).map(|k| k as f64).collect();
    part.push(f64::INFINITY);
    let (_, r) = optimize_quotient(&nu, &mu, &e, &part, 200, 1).unwrap();
    let oracle = oracle_p2q2(&nu, &mu).unwrap();
    let steps = certify_lower_bound(&nu, &mu, &e, &part[..n], 1e-12).unwrap();
    let ok = (1.8..=2.0).contains(&r.value) && r.value <= 2.0 * b * (1.0 + 1e-6);
    report(
        "classical discrete n<=200",
        ok,
        format!(
            "optimized {:.6} (oracle {oracle:.6}, steps {steps:.6}), B = {b:.6}",
            r.value
        ),
    );
}

fn c11_property_suites() {
    let start = std::time::Instant::now();
    let outcomes = hardy_bounds::checks::run_checks(11).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let summary: Vec<String> = outcomes
        .iter()
        .map(|c| {
            format!(
                "{} {}/{} worst {:.1e}",
                c.name,
                c.cases - c.failures,
                c.cases,
                c.worst
            )
        })
        .collect();
    let ok = outcomes.iter().all(|c| c.pass) && secs < 30.0;
    report(
        "property suites",
        ok,
        format!("{}; {secs:.2}s", summary.join("; ")),
    );
}

fn main() {
    let criteria: [(&str, fn()); 11] = [
        ("c01_sharp_factor_values", c01_sharp_factor_values),
        ("c02_literature_comparison", c02_literature_comparison),
        (
            "c03_mixed_form_counting_vs_power_density",
            c03_mixed_form_counting_vs_power_density,
        ),
        (
            "c04_mixed_form_lebesgue_vs_power_atoms",
            c04_mixed_form_lebesgue_vs_power_atoms,
        ),
        ("c05_cantor_diagonal", c05_cantor_diagonal),
        ("c06_cantor_divergence", c06_cantor_divergence),
        ("c07_sandwich_with_oracle", c07_sandwich_with_oracle),
        ("c08_bliss_near_extremal", c08_bliss_near_extremal),
        ("c09_classical_continuous", c09_classical_continuous),
        (
            "c10_classical_discrete_truncated",
            c10_classical_discrete_truncated,
        ),
        ("c11_property_suites", c11_property_suites),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        OUTCOME.with(|o| o.set(None));
        let ok = match catch_unwind(AssertUnwindSafe(f)) {
            Ok(()) => OUTCOME.with(|o| o.get()).unwrap_or_else(|| {
                println!("[FAIL] {name}: no verdict");
                false
            }),
            Err(_) => {
                println!("[FAIL] {name}: panicked");
                false
            }
        };
        failed += !ok as usize;
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
