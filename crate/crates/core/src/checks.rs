//! Randomized self-checks of the measure and quotient invariants, run by `hardy check`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cantor::cantor_cdf;
use crate::constants::Exponents;
use crate::error::Result;
use crate::measure::{dominates, IntervalQuery, Measure, Transform};
use crate::variational::{random_atomic, rayleigh, TestFunction};

/// Outcome of one randomized suite.
#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed violation (or discrepancy) over all cases.
    #[serde(with = "crate::extended")]
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckOutcome {
    fn new(name: &str, cases: usize, failures: usize, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            cases,
            failures,
            worst,
            tolerance,
            pass: failures == 0,
        }
    }
}

/// Case counts for [`run_checks`].
#[derive(Debug, Clone, Copy)]
pub struct CheckSizes {
    pub inverse: usize,
    pub pushforward: usize,
    pub domination: usize,
    pub homogeneity: usize,
    pub self_similarity: usize,
    pub transforms: usize,
}

impl Default for CheckSizes {
    fn default() -> Self {
        Self {
            inverse: 500,
            pushforward: 200,
            domination: 200,
            homogeneity: 200,
            self_similarity: 10_000,
            transforms: 200,
        }
    }
}

pub const INVERSE_TOL: f64 = 1e-12;
pub const PUSHFORWARD_TOL: f64 = 1e-12;
pub const DOMINATION_TOL: f64 = 1e-12;
pub const HOMOGENEITY_TOL: f64 = 1e-12;
/// One rounding of `x / 3` moves `Lambda` by up to `ulp^(log 2 / log 3)`, about 5e-11 near 1/3.
pub const SELF_SIMILARITY_TOL: f64 = 2e-10;
pub const TRANSFORM_TOL: f64 = 1e-12;

pub fn run_checks(seed: u64) -> Result<Vec<CheckOutcome>> {
    run_checks_sized(seed, &CheckSizes::default())
}

pub fn run_checks_sized(seed: u64, sizes: &CheckSizes) -> Result<Vec<CheckOutcome>> {
    Ok(vec![
        inverse_cdf(&mut ChaCha8Rng::seed_from_u64(seed), sizes.inverse)?,
        pushforward(&mut ChaCha8Rng::seed_from_u64(seed ^ 1), sizes.pushforward)?,
        domination(&mut ChaCha8Rng::seed_from_u64(seed ^ 2), sizes.domination)?,
        homogeneity(&mut ChaCha8Rng::seed_from_u64(seed ^ 3), sizes.homogeneity)?,
        self_similarity(
            &mut ChaCha8Rng::seed_from_u64(seed ^ 4),
            sizes.self_similarity,
        ),
        transforms(&mut ChaCha8Rng::seed_from_u64(seed ^ 5), sizes.transforms)?,
    ])
}

fn atomic_parts(m: &Measure) -> (Vec<f64>, Vec<f64>) {
    match &m.kind {
        crate::measure::MeasureKind::Atomic(a) => (a.points().to_vec(), a.weights().to_vec()),
        _ => unreachable!("random measures are atomic"),
    }
}

/// Probes either an atom or a uniform point, so that ties are exercised.
fn probe(rng: &mut ChaCha8Rng, points: &[f64]) -> f64 {
    if rng.gen_bool(0.5) {
        points[rng.gen_range(0..points.len())]
    } else {
        rng.gen_range(-0.1..1.1)
    }
}

fn inverse_cdf(rng: &mut ChaCha8Rng, cases: usize) -> Result<CheckOutcome> {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let n = rng.gen_range(1..=30);
        let m = random_atomic(rng, n);
        let (points, _) = atomic_parts(&m);
        let total = m.total_mass()?;
        let scale = INVERSE_TOL * total.max(1.0);
        let mut bad = false;
        for _ in 0..20 {
            let y = total * (1.0 - rng.gen::<f64>());
            let x = m.inv_cdf(y)?;
            // S(S^-1(y)) >= y and S(S^-1(y)-) <= y
            let over = (y - m.cdf(x)?).max(m.cdf_left(x)? - y).max(0.0);
            // S^-1(y) <= t exactly when y <= S(t)
            let t = probe(rng, &points);
            let s = m.cdf(t)?;
            let agree = (x <= t) == (y <= s) || (y - s).abs() <= scale;
            worst = worst.max(over);
            bad |= over > scale || !agree;
        }
        failures += bad as usize;
    }
    Ok(CheckOutcome::new(
        "cdf and generalized inverse",
        cases,
        failures,
        worst,
        INVERSE_TOL,
    ))
}

fn pushforward(rng: &mut ChaCha8Rng, cases: usize) -> Result<CheckOutcome> {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for i in 0..cases {
        let m = match i % 4 {
            3 => Measure::power_density(
                rng.gen_range(0.1..3.0),
                -rng.gen_range(1.5..4.0),
                0.0,
                1.0,
                f64::INFINITY,
            )?,
            _ => {
                let n = rng.gen_range(1..=30);
                random_atomic(rng, n)
            }
        };
        let (lo, span) = if i % 4 == 3 { (1.0, 10.0) } else { (-0.1, 1.2) };
        let mut ends = [lo + span * rng.gen::<f64>(), lo + span * rng.gen::<f64>()];
        ends.sort_by(f64::total_cmp);
        let d = m.pushforward_check(&[IntervalQuery::left_open(ends[0], ends[1])?])?[0];
        worst = worst.max(d);
        failures += (d > PUSHFORWARD_TOL) as usize;
    }
    Ok(CheckOutcome::new(
        "pushforward of the cdf",
        cases,
        failures,
        worst,
        PUSHFORWARD_TOL,
    ))
}

fn domination(rng: &mut ChaCha8Rng, cases: usize) -> Result<CheckOutcome> {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let big = {
            let n = rng.gen_range(1..=25);
            random_atomic(rng, n)
        };
        let (points, weights) = atomic_parts(&big);
        // moving atoms left and shrinking them keeps every tail (x, inf) smaller
        let mut pairs: Vec<(f64, f64)> = points
            .iter()
            .zip(&weights)
            .map(|(&x, &w)| (x - rng.gen_range(0.0..0.2), w * rng.gen::<f64>()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.dedup_by(|a, b| {
            if a.0 == b.0 {
                b.1 += a.1;
                true
            } else {
                false
            }
        });
        let small = Measure::atoms(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )?;
        let mut grid: Vec<f64> = points
            .iter()
            .chain(pairs.iter().map(|p| &p.0))
            .copied()
            .collect();
        grid.push(-1.0);
        grid.sort_by(f64::total_cmp);
        let dom = dominates(&small, &big, &grid)?;

        let k = rng.gen_range(1..=6);
        let mut cuts: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.2..1.0)).collect();
        cuts.sort_by(f64::total_cmp);
        let mut level = 0.0;
        let steps: Vec<(f64, f64)> = cuts
            .into_iter()
            .map(|c| {
                level += rng.gen::<f64>();
                (c, level)
            })
            .collect();
        let f = move |x: f64| steps.iter().rev().find(|s| x > s.0).map_or(0.0, |s| s.1);
        let everything = IntervalQuery::everything();
        let lhs = small.integrate(&f, &everything, 1e-12)?;
        let rhs = big.integrate(&f, &everything, 1e-12)?;
        let excess = (lhs - rhs).max(0.0);
        worst = worst.max(excess);
        failures += (!dom.holds || excess > DOMINATION_TOL * rhs.max(1.0)) as usize;
    }
    Ok(CheckOutcome::new(
        "domination orders monotone integrals",
        cases,
        failures,
        worst,
        DOMINATION_TOL,
    ))
}

fn homogeneity(rng: &mut ChaCha8Rng, cases: usize) -> Result<CheckOutcome> {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < cases {
        let p = rng.gen_range(1.2..4.0);
        let e = Exponents::new(p, p + rng.gen_range(0.0..3.0))?;
        let nu = {
            let n = rng.gen_range(1..=12);
            random_atomic(rng, n)
        };
        let mu = {
            let n = rng.gen_range(1..=12);
            random_atomic(rng, n)
        };
        let k = rng.gen_range(1..=5);
        let mut breakpoints: Vec<f64> = (0..=k).map(|_| rng.gen::<f64>()).collect();
        breakpoints.sort_by(f64::total_cmp);
        breakpoints.dedup();
        let values = (1..breakpoints.len()).map(|_| rng.gen::<f64>()).collect();
        let f = TestFunction::PiecewiseConstant {
            breakpoints,
            values,
        };
        let base = match rayleigh(&f, &nu, &mu, &e, 1e-12) {
            Ok(r) => r.value,
            Err(_) => continue,
        };
        let c = 10f64.powf(rng.gen_range(-3.0..3.0));
        let scaled = rayleigh(&f.scaled(c), &nu, &mu, &e, 1e-12)?.value;
        let rel = if base == 0.0 {
            scaled.abs()
        } else {
            (scaled - base).abs() / base
        };
        worst = worst.max(rel);
        failures += (rel > HOMOGENEITY_TOL) as usize;
        done += 1;
    }
    Ok(CheckOutcome::new(
        "quotient is scale invariant",
        cases,
        failures,
        worst,
        HOMOGENEITY_TOL,
    ))
}

fn self_similarity(rng: &mut ChaCha8Rng, cases: usize) -> CheckOutcome {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let x: f64 = rng.gen();
        let l = cantor_cdf(x);
        let left = (cantor_cdf(x / 3.0) - l / 2.0).abs();
        let right = (cantor_cdf((x + 2.0) / 3.0) - 0.5 - l / 2.0).abs();
        let d = left.max(right);
        worst = worst.max(d);
        failures += (d > SELF_SIMILARITY_TOL) as usize;
    }
    CheckOutcome::new(
        "cantor self-similarity",
        cases,
        failures,
        worst,
        SELF_SIMILARITY_TOL,
    )
}

fn transforms(rng: &mut ChaCha8Rng, cases: usize) -> Result<CheckOutcome> {
    let mut failures = 0;
    let mut worst: f64 = 0.0;
    let g = |x: f64| (3.0 * x).sin() + x * x;
    for _ in 0..cases {
        let m = {
            let n = rng.gen_range(1..=20);
            random_atomic(rng, n)
        };
        let map = match rng.gen_range(0..3) {
            0 => Transform::Shift(rng.gen_range(-5.0..5.0)),
            1 => Transform::Scale(rng.gen_range(0.1..10.0)),
            _ => Transform::Reflect,
        };
        let image = Measure::transformed(m.clone(), map)?;
        let everything = IntervalQuery::everything();
        let direct = image.integrate(&g, &everything, 1e-12)?;
        let pulled = m.integrate(&|x| g(map.apply(x)), &everything, 1e-12)?;
        let d = (direct - pulled).abs() / pulled.abs().max(1.0);
        worst = worst.max(d);
        failures += (d > TRANSFORM_TOL) as usize;
    }
    Ok(CheckOutcome::new(
        "integrals under pushforward maps",
        cases,
        failures,
        worst,
        TRANSFORM_TOL,
    ))
}
