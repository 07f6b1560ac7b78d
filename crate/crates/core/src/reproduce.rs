//! Named scenarios with known answers, run by `hardy reproduce NAME`.

use crate::cantor::{cantor_cdf, CantorQuadrature};
use crate::constants::{
    bound_report, divergence_ratio, k_sharp, triadic_profile, BConfig, Exponents, LowerBound,
};
use crate::error::{Error, Result};
use crate::measure::{IntervalQuery, Transform};
use crate::report::{Inputs, Report, Row, Trial};
use crate::spec::{DensityPreset, MeasureSpec, PieceSpec, TailSpec, WeightSpec};
use crate::variational::{bliss_trial, oracle_p2q2, rayleigh, TestFunction};

pub const SCENARIOS: [&str; 6] = [
    "classical-discrete",
    "classical-continuous",
    "cantor",
    "mixed1",
    "mixed2",
    "bliss",
];

#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub seed: u64,
    /// Quadrature tolerance for masses and quotients.
    pub tol: f64,
    pub depth: Option<u32>,
    pub iters: usize,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            p: None,
            q: None,
            seed: 0,
            tol: 1e-10,
            depth: None,
            iters: 200,
        }
    }
}

pub fn reproduce(name: &str, opts: &ReproduceOptions) -> Result<Report> {
    match name {
        "classical-discrete" => classical_discrete(opts),
        "classical-continuous" => classical_continuous(opts),
        "cantor" => cantor(opts),
        "mixed1" => mixed1(opts),
        "mixed2" => mixed2(opts),
        "bliss" => bliss(opts),
        other => Err(Error::InvalidArgument(format!(
            "unknown scenario \"{other}\" (expected one of {})",
            SCENARIOS.join(", ")
        ))),
    }
}

fn diagonal(opts: &ReproduceOptions, name: &str) -> Result<Exponents> {
    let p = opts.p.or(opts.q).unwrap_or(2.0);
    let q = opts.q.unwrap_or(p);
    if q != p {
        return Err(Error::InvalidExponents(format!(
            "scenario {name} needs p = q, got p = {p}, q = {q}"
        )));
    }
    Exponents::new(p, q)
}

fn lebesgue(lo: f64) -> MeasureSpec {
    MeasureSpec::Density {
        pieces: vec![PieceSpec {
            lo,
            hi: f64::INFINITY,
            density: DensityPreset::Lebesgue,
        }],
    }
}

fn power(coefficient: f64, exponent: f64, lo: f64) -> MeasureSpec {
    let density = DensityPreset::Power {
        coefficient,
        exponent,
        origin: 0.0,
    };
    MeasureSpec::Density {
        pieces: vec![PieceSpec {
            lo,
            hi: f64::INFINITY,
            density,
        }],
    }
}

fn integer_atoms(exponent: f64, truncation: i64) -> MeasureSpec {
    let tail = TailSpec {
        start: 1,
        coefficient: 1.0,
        exponent,
        truncation,
    };
    MeasureSpec::Atoms {
        points: vec![],
        weights: vec![],
        tail: Some(tail),
    }
}

fn cantor_spec(quadrature: CantorQuadrature) -> MeasureSpec {
    MeasureSpec::Cantor {
        translates: None,
        quadrature,
    }
}

fn config(opts: &ReproduceOptions) -> BConfig {
    BConfig {
        mass_tol: opts.tol,
        depth: opts.depth.unwrap_or(14),
        ..BConfig::default()
    }
}

fn start(
    name: &str,
    opts: &ReproduceOptions,
    e: &Exponents,
    nu: &MeasureSpec,
    mu: &MeasureSpec,
    cfg: &BConfig,
) -> Report {
    let inputs = Inputs {
        scenario: Some(name.into()),
        p: Some(e.p),
        q: Some(e.q),
        nu: Some(nu.clone()),
        mu: Some(mu.clone()),
        dual: false,
        certify: true,
        seed: opts.seed,
        tol: opts.tol,
        depth: cfg.depth,
    };
    Report::new("reproduce", inputs, cfg)
}

fn sandwich_row(name: &str, r: &Report) -> Row {
    let b = r.bound.as_ref().expect("bound computed");
    let a = b.a_lower.unwrap_or(0.0);
    Row::new(
        name,
        "A_lower <= k_sharp * B",
        format!("<= {}", b.upper),
        a,
        "rel 1e-6",
        b.sandwich_ok,
    )
}

/// Counting measure on `1..=200` against `n^-p` placed just right of each `n`.
fn classical_discrete(opts: &ReproduceOptions) -> Result<Report> {
    const NAME: &str = "classical-discrete";
    let e = diagonal(opts, NAME)?;
    let n = 200;
    let nu = MeasureSpec::Atoms {
        points: (1..=n).map(|k| k as f64).collect(),
        weights: vec![1.0; n],
        tail: None,
    };
    let mu = MeasureSpec::Atoms {
        points: (1..=n).map(|k| k as f64 + 0.5).collect(),
        weights: (1..=n).map(|k| (k as f64).powf(-e.p)).collect(),
        tail: None,
    };
    let cfg = BConfig {
        tol: 1e-6,
        ..config(opts)
    };
    let (nu_m, mu_m) = (nu.build()?, mu.build()?);
    let lower = LowerBound::Optimize {
        iters: opts.iters,
        seed: opts.seed,
        cells: n,
    };
    let mut r = start(NAME, opts, &e, &nu, &mu, &cfg)
        .with_bound(bound_report(&nu_m, &mu_m, &e, &cfg, &lower)?);
    let a = r.bound.as_ref().unwrap().a_lower.unwrap_or(0.0);
    r.table.push(Row::within(
        NAME,
        "optimized quotient",
        0.9 * e.p_star,
        e.p_star,
        a,
    ));
    r.table.push(sandwich_row(NAME, &r));
    if e.p == 2.0 {
        let b = r.bound.as_ref().unwrap().b;
        r.table.push(Row::within(
            NAME,
            "exact operator norm in [B, 2B]",
            b,
            2.0 * b * (1.0 + 1e-9),
            oracle_p2q2(&nu_m, &mu_m)?,
        ));
    }
    Ok(r)
}

fn classical_continuous(opts: &ReproduceOptions) -> Result<Report> {
    const NAME: &str = "classical-continuous";
    let e = diagonal(opts, NAME)?;
    let nu = lebesgue(0.0);
    let mu = power(1.0, -e.p, 0.0);
    let cfg = config(opts);
    let (nu_m, mu_m) = (nu.build()?, mu.build()?);
    let mut r = start(NAME, opts, &e, &nu, &mu, &cfg).with_bound(bound_report(
        &nu_m,
        &mu_m,
        &e,
        &cfg,
        &LowerBound::None,
    )?);
    let b = r.bound.as_ref().unwrap();
    let (bv, upper) = (b.b, b.upper);
    r.table
        .push(Row::near(NAME, "B", (e.p - 1.0).powf(-1.0 / e.p), bv, 1e-9));
    r.table
        .push(Row::near(NAME, "k_sharp * B", e.p_star, upper, 1e-9));
    // the power trial lives on [1, inf), where the same pair has the same constant
    let f = TestFunction::power_tail(&e, 0.01)?;
    let res = rayleigh(
        &f,
        &lebesgue(1.0).build()?,
        &power(1.0, -e.p, 1.0).build()?,
        &e,
        opts.tol,
    )?;
    r.table.push(Row::new(
        NAME,
        "power-tail quotient, eps = 0.01",
        format!("> {}", 0.95 * e.p_star),
        res.value,
        "one-sided",
        res.value > 0.95 * e.p_star,
    ));
    r.trials.push(Trial {
        family: f.family().into(),
        function: f,
        result: res,
    });
    Ok(r)
}

fn cantor(opts: &ReproduceOptions) -> Result<Report> {
    const NAME: &str = "cantor";
    let p = opts.p.unwrap_or(2.0);
    let e = Exponents::new(p, opts.q.unwrap_or(p))?;
    if e.is_diagonal() {
        cantor_diagonal(opts, e)
    } else {
        cantor_divergent(opts, e, NAME)
    }
}

/// `nu` the Cantor measure, `mu = Lambda^-q` times it: `h` is constant when `p = q`.
fn cantor_diagonal(opts: &ReproduceOptions, e: Exponents) -> Result<Report> {
    const NAME: &str = "cantor";
    let nu = cantor_spec(CantorQuadrature::Adaptive);
    let mu = MeasureSpec::Weighted {
        base: Box::new(nu.clone()),
        weight: WeightSpec::CdfPower { exponent: -e.q },
    };
    let cfg = BConfig {
        depth: opts.depth.unwrap_or(12),
        max_levels: 1,
        ..config(opts)
    };
    let (nu_m, mu_m) = (nu.build()?, mu.build()?);
    let expect = (e.q - 1.0).powf(-1.0 / e.q);
    let mut r = start(NAME, opts, &e, &nu, &mu, &cfg).with_bound(bound_report(
        &nu_m,
        &mu_m,
        &e,
        &cfg,
        &LowerBound::Steps,
    )?);
    let b = r.bound.as_ref().unwrap().b;
    r.table.push(Row::near(
        NAME,
        &format!("B at depth {}", cfg.depth),
        expect,
        b,
        1e-2,
    ));
    r.table.push(sandwich_row(NAME, &r));
    let level = MeasureSpec::Weighted {
        base: Box::new(cantor_spec(CantorQuadrature::Level(14))),
        weight: WeightSpec::CdfPower { exponent: -e.q },
    }
    .build()?;
    for (label, x) in [("1/3", 1.0 / 3.0), ("1/9", 1.0 / 9.0), ("1.5", 1.5)] {
        let got = level.integrate(&|_| 1.0, &IntervalQuery::from(x), 1e-8)?;
        let exact = cantor_cdf(x).powf(1.0 - e.q) / (e.q - 1.0);
        let tol = if e.q == 2.0 {
            1e-3
        } else {
            1e-3 * exact.max(1.0)
        };
        r.table.push(Row::near(
            NAME,
            &format!("level-14 tail mass from {label}"),
            exact,
            got,
            tol,
        ));
    }
    Ok(r)
}

/// `nu` Lebesgue, `mu = x^-q` times the Cantor measure: `h(3^-m)` grows geometrically.
fn cantor_divergent(opts: &ReproduceOptions, e: Exponents, name: &str) -> Result<Report> {
    let nu = lebesgue(0.0);
    let mu = MeasureSpec::Weighted {
        base: Box::new(cantor_spec(CantorQuadrature::Adaptive)),
        weight: WeightSpec::XPower { exponent: -e.q },
    };
    let cfg = BConfig {
        mass_tol: opts.tol.max(1e-8),
        ..config(opts)
    };
    let (nu_m, mu_m) = (nu.build()?, mu.build()?);
    let mut r = start(name, opts, &e, &nu, &mu, &cfg).with_bound(bound_report(
        &nu_m,
        &mu_m,
        &e,
        &cfg,
        &LowerBound::None,
    )?);
    let divergent = r.bound.as_ref().unwrap().b_divergent;
    r.table
        .push(Row::flag(name, "B divergent", true, divergent));
    let profile = triadic_profile(&nu_m, &mu_m, &e, 5..=15, 1e-9)?;
    let ratio = divergence_ratio(&profile)?;
    let expect = 3f64.powf(1.0 / e.p) / 2f64.powf(1.0 / e.q);
    r.table.push(Row::new(
        name,
        "growth ratio of h(3^-m), m = 5..15",
        format!("{expect}"),
        ratio,
        "rel 5e-2",
        (ratio / expect - 1.0).abs() <= 0.05,
    ));
    Ok(r)
}

fn mixed1(opts: &ReproduceOptions) -> Result<Report> {
    const NAME: &str = "mixed1";
    let e = diagonal(opts, NAME)?;
    let nu = lebesgue(1.0);
    let mu = integer_atoms(-e.p, 10_000);
    let cfg = BConfig {
        truncation: 10_000,
        max_truncation: 10_000,
        ..config(opts)
    };
    let (nu_m, mu_m) = (nu.build()?, mu.build()?);
    let mut r = start(NAME, opts, &e, &nu, &mu, &cfg).with_bound(bound_report(
        &nu_m,
        &mu_m,
        &e,
        &cfg,
        &LowerBound::Steps,
    )?);
    let b = r.bound.as_ref().unwrap().b;
    let exact = (e.p - 1.0).powf(-1.0 / e.p);
    r.table.push(Row::within(
        NAME,
        "B at truncation 1e4",
        0.999 * exact,
        exact,
        b,
    ));
    r.table.push(sandwich_row(NAME, &r));
    Ok(r)
}

fn mixed2(opts: &ReproduceOptions) -> Result<Report> {
    const NAME: &str = "mixed2";
    let e = diagonal(opts, NAME)?;
    let nu = integer_atoms(0.0, 10_000);
    let mu = power(1.0, -e.q, 1.0);
    let cfg = BConfig {
        max_levels: 2,
        ..config(opts)
    };
    let (nu_m, mu_m) = (nu.build()?, mu.build()?);
    let mut r = start(NAME, opts, &e, &nu, &mu, &cfg).with_bound(bound_report(
        &nu_m,
        &mu_m,
        &e,
        &cfg,
        &LowerBound::Steps,
    )?);
    let b = r.bound.as_ref().unwrap();
    let (bv, k) = (b.b, b.k_sharp);
    r.table
        .push(Row::near(NAME, "B", (e.q - 1.0).powf(-1.0 / e.q), bv, 1e-9));
    r.table.push(Row::near(
        NAME,
        "k_sharp",
        e.p.powf(1.0 / e.p) * e.p_star.powf(1.0 / e.p_star),
        k,
        1e-12,
    ));
    r.table.push(sandwich_row(NAME, &r));
    Ok(r)
}

/// Lebesgue against `d(-x^{-q/p*})`, where the Bliss profiles approach `k_{q,p}`.
fn bliss(opts: &ReproduceOptions) -> Result<Report> {
    const NAME: &str = "bliss";
    let p = opts.p.unwrap_or(2.0);
    let e = Exponents::new(p, opts.q.unwrap_or(2.0 * p))?;
    if e.is_diagonal() {
        return Err(Error::InvalidExponents("scenario bliss needs p < q".into()));
    }
    let s = e.q / e.p_star;
    let nu = lebesgue(0.0);
    let mu = power(s, -s - 1.0, 0.0);
    let cfg = config(opts);
    let (nu_m, mu_m) = (nu.build()?, mu.build()?);
    let mut r = start(NAME, opts, &e, &nu, &mu, &cfg).with_bound(bound_report(
        &nu_m,
        &mu_m,
        &e,
        &cfg,
        &LowerBound::None,
    )?);
    let k = k_sharp(&e);
    let mut best: Option<(TestFunction, crate::variational::RayleighResult)> = None;
    for i in 0..21 {
        for j in 0..21 {
            let f = bliss_trial(
                &e,
                10f64.powf(-2.0 + 0.2 * i as f64),
                10f64.powf(-2.0 + 0.2 * j as f64),
            )?;
            let res = rayleigh(&f, &nu_m, &mu_m, &e, opts.tol)?;
            if best.as_ref().is_none_or(|b| res.value > b.1.value) {
                best = Some((f, res));
            }
        }
    }
    let (f, res) = best.expect("grid is nonempty");
    let bv = r.bound.as_ref().unwrap().b;
    r.table.push(Row::near(NAME, "B", 1.0, bv, 1e-9));
    r.table.push(Row::within(
        NAME,
        "best Bliss quotient / k_sharp",
        0.999,
        1.001,
        res.value / k,
    ));
    r.table.push(Row::new(
        NAME,
        "quadrature residual",
        "< 1e-6",
        res.quadrature_residual,
        "one-sided",
        res.quadrature_residual < 1e-6,
    ));
    r.trials.push(Trial {
        family: f.family().into(),
        function: f,
        result: res,
    });
    Ok(r)
}

/// Applies `x -> -x` to a spec, as `--dual` does.
pub fn reflect_spec(spec: MeasureSpec) -> MeasureSpec {
    MeasureSpec::Transform {
        base: Box::new(spec),
        map: Transform::Reflect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed2_passes() {
        let r = reproduce("mixed2", &ReproduceOptions::default()).unwrap();
        assert!(r.all_pass(), "{}", r.table_text());
    }

    #[test]
    fn unknown_and_mismatched() {
        assert!(matches!(
            reproduce("nope", &ReproduceOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
        let opts = ReproduceOptions {
            p: Some(2.0),
            q: Some(3.0),
            ..ReproduceOptions::default()
        };
        assert!(matches!(
            reproduce("mixed1", &opts),
            Err(Error::InvalidExponents(_))
        ));
    }
}
