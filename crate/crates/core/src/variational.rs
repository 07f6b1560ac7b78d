//! Lower bounds for the optimal constant `A` from trial functions.
//!
//! The quotient of a trial `f >= 0` is
//! `[int G^q dmu]^{1/q} / [int f^p dnu]^{1/p}` with `G(x) = int_{(-inf, x)} f dnu`;
//! the running integral never includes a `nu` atom sitting at `x` itself.

use std::cell::RefCell;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constants::Exponents;
use crate::error::{Error, Result};
use crate::measure::{product, DensityKind, IntervalQuery, Measure, MeasureKind};
use crate::quadrature::Estimate;

/// Tail budget, relative to the accumulated integral, when cutting off infinite supports.
const TAIL_BUDGET: f64 = 1e-7;

/// A nonnegative trial function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum TestFunction {
    /// `gamma (delta x^r + 1)^{-(r+1)/r}` for `x >= 0`, zero for `x < 0`.
    Bliss { gamma: f64, delta: f64, r: f64 },
    /// The Bliss profile composed with the cumulative function of `nu`.
    BlissComposed { gamma: f64, delta: f64, r: f64 },
    /// `height` on `(-inf, x0]`.
    Step { x0: f64, height: f64 },
    /// `values[i]` on `[breakpoints[i], breakpoints[i+1])`, zero elsewhere.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// `coefficient * x^-exponent` on `[1, cutoff]`.
    PowerTail {
        exponent: f64,
        cutoff: f64,
        coefficient: f64,
    },
}

impl TestFunction {
    pub fn step(x0: f64) -> Self {
        TestFunction::Step { x0, height: 1.0 }
    }

    /// `x^{-1/p - eps}` on `[1, X]` with `X = 10^{min(300, 2/(p eps))}`.
    pub fn power_tail(e: &Exponents, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "power tail needs eps > 0, got {eps}"
            )));
        }
        let cutoff = 10f64.powf((2.0 / (e.p * eps)).min(300.0));
        Ok(TestFunction::PowerTail {
            exponent: 1.0 / e.p + eps,
            cutoff,
            coefficient: 1.0,
        })
    }

    /// The same trial multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        match self.clone() {
            TestFunction::Bliss { gamma, delta, r } => TestFunction::Bliss {
                gamma: c * gamma,
                delta,
                r,
            },
            TestFunction::BlissComposed { gamma, delta, r } => TestFunction::BlissComposed {
                gamma: c * gamma,
                delta,
                r,
            },
            TestFunction::Step { x0, height } => TestFunction::Step {
                x0,
                height: c * height,
            },
            TestFunction::PiecewiseConstant {
                breakpoints,
                values,
            } => TestFunction::PiecewiseConstant {
                breakpoints,
                values: values.iter().map(|v| c * v).collect(),
            },
            TestFunction::PowerTail {
                exponent,
                cutoff,
                coefficient,
            } => TestFunction::PowerTail {
                exponent,
                cutoff,
                coefficient: c * coefficient,
            },
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            TestFunction::Bliss { .. } => "bliss",
            TestFunction::BlissComposed { .. } => "bliss_composed",
            TestFunction::Step { .. } => "step",
            TestFunction::PiecewiseConstant { .. } => "piecewise_constant",
            TestFunction::PowerTail { .. } => "power_tail",
        }
    }

    /// Rejects negative values, malformed partitions and out-of-range parameters.
    pub fn validate(&self, e: &Exponents) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        match self {
            TestFunction::Bliss { gamma, delta, r }
            | TestFunction::BlissComposed { gamma, delta, r } => {
                if !(*gamma >= 0.0 && gamma.is_finite()) || !(*delta > 0.0 && delta.is_finite()) {
                    return bad(format!(
                        "Bliss parameters need gamma >= 0, delta > 0 (got {gamma}, {delta})"
                    ));
                }
                if !(*r > 0.0) || (r - e.r).abs() > 1e-12 * e.r.max(1.0) {
                    return bad(format!(
                        "Bliss exponent r = {r} does not match q/p - 1 = {}",
                        e.r
                    ));
                }
            }
            TestFunction::Step { x0, height } => {
                if x0.is_nan() || !(*height >= 0.0 && height.is_finite()) {
                    return bad("step needs a threshold and a finite height >= 0".into());
                }
            }
            TestFunction::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if breakpoints.len() != values.len() + 1 {
                    return bad(format!(
                        "{} breakpoints for {} values; expected one more breakpoint than values",
                        breakpoints.len(),
                        values.len()
                    ));
                }
                if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
                    return bad("breakpoints must be strictly increasing".into());
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return bad("piecewise-constant values must be finite and nonnegative".into());
                }
            }
            TestFunction::PowerTail {
                exponent,
                cutoff,
                coefficient,
            } => {
                if !(*exponent > 0.0)
                    || !(*cutoff > 1.0)
                    || !(*coefficient >= 0.0 && coefficient.is_finite())
                {
                    return bad(
                        "power tail needs exponent > 0, cutoff > 1, coefficient >= 0".into(),
                    );
                }
            }
        }
        Ok(())
    }

    /// Pointwise value; `cdf` is the cumulative function of `nu` (used by the composed family).
    pub fn eval(&self, x: f64, cdf: &dyn Fn(f64) -> f64) -> f64 {
        match self {
            TestFunction::Bliss { gamma, delta, r } => bliss_profile(*gamma, *delta, *r, x),
            TestFunction::BlissComposed { gamma, delta, r } => {
                bliss_profile(*gamma, *delta, *r, cdf(x))
            }
            TestFunction::Step { x0, height } => {
                if x <= *x0 {
                    *height
                } else {
                    0.0
                }
            }
            TestFunction::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                let i = breakpoints.partition_point(|&b| b <= x);
                if i == 0 || i > values.len() {
                    0.0
                } else {
                    values[i - 1]
                }
            }
            TestFunction::PowerTail {
                exponent,
                cutoff,
                coefficient,
            } => {
                if x >= 1.0 && x <= *cutoff {
                    coefficient * x.powf(-exponent)
                } else {
                    0.0
                }
            }
        }
    }
}

fn bliss_profile(gamma: f64, delta: f64, r: f64, x: f64) -> f64 {
    if x < 0.0 || gamma == 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    gamma * (delta * x.powf(r) + 1.0).powf(-(r + 1.0) / r)
}

/// `int_0^x` of the Bliss profile against Lebesgue measure.
fn bliss_primitive(gamma: f64, delta: f64, r: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        gamma * delta.powf(-1.0 / r)
    } else {
        gamma * x * (delta * x.powf(r) + 1.0).powf(-1.0 / r)
    }
}

/// The Bliss extremal for the active exponents.
pub fn bliss_trial(e: &Exponents, gamma: f64, delta: f64) -> Result<TestFunction> {
    if e.is_diagonal() {
        return Err(Error::InvalidExponents(
            "the Bliss family needs p < q".into(),
        ));
    }
    let f = TestFunction::Bliss {
        gamma,
        delta,
        r: e.r,
    };
    f.validate(e)?;
    Ok(f)
}

/// The Bliss extremal composed with the cumulative function of `nu`.
pub fn bliss_composed_trial(e: &Exponents, gamma: f64, delta: f64) -> Result<TestFunction> {
    let TestFunction::Bliss { gamma, delta, r } = bliss_trial(e, gamma, delta)? else {
        unreachable!()
    };
    Ok(TestFunction::BlissComposed { gamma, delta, r })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayleighResult {
    #[serde(with = "crate::extended")]
    pub value: f64,
    #[serde(with = "crate::extended")]
    pub numerator: f64,
    #[serde(with = "crate::extended")]
    pub denominator: f64,
    /// Largest relative error among the quadratures and the cut-off tails.
    pub quadrature_residual: f64,
    /// Upper end of the integration range when an infinite support was cut off.
    #[serde(
        with = "crate::extended::option",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub cutoff: Option<f64>,
}

/// `(lo, hi, c)` when `nu` is a piecewise-constant density.
fn constant_density(nu: &Measure) -> Option<Vec<(f64, f64, f64)>> {
    let MeasureKind::Density(d) = &nu.kind else {
        return None;
    };
    d.pieces()
        .iter()
        .map(|p| match p.kind {
            DensityKind::PowerLaw {
                coefficient,
                exponent,
                ..
            } if exponent == 0.0 => Some((p.lo, p.hi, coefficient)),
            _ => None,
        })
        .collect()
}

/// Lebesgue primitive `F(x) = int_{-inf}^x f` for the families that have one.
fn lebesgue_primitive(f: &TestFunction) -> Option<Box<dyn Fn(f64) -> f64 + '_>> {
    match f {
        TestFunction::Bliss { gamma, delta, r } => {
            Some(Box::new(move |x| bliss_primitive(*gamma, *delta, *r, x)))
        }
        TestFunction::PowerTail {
            exponent,
            cutoff,
            coefficient,
        } => Some(Box::new(move |x: f64| {
            if x <= 1.0 {
                return 0.0;
            }
            let x = x.min(*cutoff);
            let e1 = 1.0 - exponent;
            if e1.abs() < 1e-15 {
                coefficient * x.ln()
            } else {
                coefficient * (x.powf(e1) - 1.0) / e1
            }
        })),
        _ => None,
    }
}

fn closed_g(pieces: &[(f64, f64, f64)], prim: &dyn Fn(f64) -> f64, x: f64) -> f64 {
    pieces
        .iter()
        .filter(|(lo, _, _)| *lo < x)
        .map(|&(lo, hi, c)| product(c, prim(x.min(hi)) - prim(lo)))
        .sum()
}

/// Integration plan for one trial against `(nu, mu)`.
struct Plan<'a> {
    g: Box<dyn Fn(f64) -> f64 + 'a>,
    denominator: Estimate,
    /// Numerator integrated over these pieces ...
    segments: Vec<IntervalQuery>,
    /// ... plus `g_flat^q * mu(flat_from)` where `G` is constant.
    flat: Option<(IntervalQuery, f64)>,
    cutoff: Option<f64>,
    /// Relative size of the dropped numerator tail.
    dropped: f64,
}

struct Failure(RefCell<Option<Error>>);

impl Failure {
    fn new() -> Self {
        Failure(RefCell::new(None))
    }
    fn record(&self, e: Error) -> f64 {
        self.0.borrow_mut().get_or_insert(e);
        f64::NAN
    }
    fn take(&self) -> Option<Error> {
        self.0.borrow_mut().take()
    }
}

fn nested_g<'a>(
    f: &'a TestFunction,
    nu: &'a Measure,
    tol: f64,
    failure: &'a Failure,
) -> Box<dyn Fn(f64) -> f64 + 'a> {
    let cdf = move |t: f64| nu.cdf(t).unwrap_or(f64::NAN);
    Box::new(move |x: f64| {
        let integrand = |t: f64| f.eval(t, &cdf);
        match nu.integrate(&integrand, &IntervalQuery::below(x), tol) {
            Ok(v) => v,
            Err(e) => failure.record(e),
        }
    })
}

fn plan<'a>(
    f: &'a TestFunction,
    nu: &'a Measure,
    mu: &'a Measure,
    e: &Exponents,
    tol: f64,
    failure: &'a Failure,
) -> Result<Plan<'a>> {
    let inner = (tol * 0.1).max(1e-15);
    let everything = vec![IntervalQuery::everything()];
    let cdf = move |t: f64| nu.cdf(t).unwrap_or(f64::NAN);
    match f {
        TestFunction::Step { x0, height } => {
            let s = nu.cdf(*x0)?;
            let h = *height;
            let g = Box::new(move |x: f64| {
                let m = if x <= *x0 { nu.cdf_left(x) } else { Ok(s) };
                match m {
                    Ok(v) => product(h, v),
                    Err(e) => failure.record(e),
                }
            });
            Ok(Plan {
                g,
                denominator: Estimate::exact(product(h.powf(e.p), s)),
                segments: vec![IntervalQuery::up_to(*x0)],
                flat: Some((IntervalQuery::above(*x0), product(h, s))),
                cutoff: None,
                dropped: 0.0,
            })
        }
        TestFunction::PiecewiseConstant {
            breakpoints,
            values,
        } => {
            let n = values.len();
            let mut cells = Vec::with_capacity(n);
            let mut prefix = vec![0.0];
            let mut den = Estimate::ZERO;
            for i in 0..n {
                let cell = IntervalQuery::right_open(breakpoints[i], breakpoints[i + 1])?;
                let w = nu.interval_mass(&cell)?;
                den += Estimate::exact(product(values[i].powf(e.p), w));
                prefix.push(prefix[i] + product(values[i], w));
                cells.push(cell);
            }
            let bps = breakpoints.clone();
            let vals = values.clone();
            let pre = prefix.clone();
            let g = Box::new(move |x: f64| {
                let i = bps.partition_point(|&b| b <= x);
                if i == 0 {
                    return 0.0;
                }
                if i > n {
                    return pre[n];
                }
                let k = i - 1;
                match nu.interval_mass(&IntervalQuery {
                    a: bps[k],
                    b: x,
                    include_a: true,
                    include_b: false,
                }) {
                    Ok(m) => pre[k] + product(vals[k], m),
                    Err(e) => failure.record(e),
                }
            });
            let last = breakpoints[n];
            let flat = last
                .is_finite()
                .then(|| (IntervalQuery::from(last), prefix[n]));
            Ok(Plan {
                g,
                denominator: den,
                segments: cells,
                flat,
                cutoff: None,
                dropped: 0.0,
            })
        }
        TestFunction::PowerTail { cutoff, .. } => {
            let prim = lebesgue_primitive(f).unwrap();
            let den = nu.integrate_estimate(
                &|t| f.eval(t, &cdf).powf(e.p),
                &IntervalQuery::closed(1.0, *cutoff)?,
                tol,
            )?;
            let g: Box<dyn Fn(f64) -> f64 + 'a> = match constant_density(nu) {
                Some(pieces) => Box::new(move |x| closed_g(&pieces, &prim, x)),
                None => nested_g(f, nu, inner, failure),
            };
            let g_flat = g(f64::INFINITY.min(cutoff.next_up()));
            Ok(Plan {
                g,
                denominator: den,
                segments: vec![IntervalQuery::up_to(*cutoff)],
                flat: Some((IntervalQuery::above(*cutoff), g_flat)),
                cutoff: Some(*cutoff),
                dropped: 0.0,
            })
        }
        TestFunction::Bliss { gamma, delta, r } => match constant_density(nu) {
            Some(pieces) => {
                let prim = lebesgue_primitive(f).unwrap();
                let pieces2 = pieces.clone();
                let g = Box::new(move |x| closed_g(&pieces2, &prim, x));
                bliss_cutoff_plan(g, f, nu, mu, e, *gamma, *delta, *r, &pieces, tol)
            }
            None => Ok(Plan {
                g: nested_g(f, nu, inner, failure),
                denominator: nu.integrate_estimate(
                    &|t| f.eval(t, &cdf).powf(e.p),
                    &IntervalQuery::everything(),
                    tol,
                )?,
                segments: everything,
                flat: None,
                cutoff: None,
                dropped: 0.0,
            }),
        },
        TestFunction::BlissComposed { gamma, delta, r } => {
            if nu.has_atoms() {
                return Ok(Plan {
                    g: nested_g(f, nu, inner, failure),
                    denominator: nu.integrate_estimate(
                        &|t| f.eval(t, &cdf).powf(e.p),
                        &IntervalQuery::everything(),
                        tol,
                    )?,
                    segments: everything,
                    flat: None,
                    cutoff: None,
                    dropped: 0.0,
                });
            }
            // atomless nu: G = F(S(x)) and int f^p dnu = int_0^{S(inf)} g^p dy
            let (gm, dl, rr) = (*gamma, *delta, *r);
            let total = nu.total_mass()?;
            let g = Box::new(move |x: f64| match nu.cdf_left(x) {
                Ok(s) => bliss_primitive(gm, dl, rr, s),
                Err(e) => failure.record(e),
            });
            let profile = TestFunction::Bliss {
                gamma: gm,
                delta: dl,
                r: rr,
            };
            let y_cut =
                bliss_denominator_cutoff(e, gm, dl, rr, 1.0, 1.0f64.max(dl.powf(-1.0 / rr)));
            let (top, tail) = if total > y_cut {
                (y_cut, bliss_tail(e, gm, dl, rr, 1.0, y_cut))
            } else {
                (total, 0.0)
            };
            let den = crate::quadrature::integrate(
                &|y| profile.eval(y, &|t| t).powf(e.p),
                0.0,
                top,
                tol,
            )?;
            let den = Estimate {
                value: den.value + tail,
                error: den.error + tail,
            };
            Ok(Plan {
                g,
                denominator: den,
                segments: everything,
                flat: None,
                cutoff: None,
                dropped: 0.0,
            })
        }
    }
}

/// Analytic bound on `c * int_X^inf f^p dx` for the Bliss profile.
fn bliss_tail(e: &Exponents, gamma: f64, delta: f64, r: f64, c: f64, x: f64) -> f64 {
    let k = e.p * (r + 1.0);
    c * gamma.powf(e.p) * delta.powf(-k / r) * x.powf(1.0 - k) / (k - 1.0)
}

/// Smallest `X = x0 * 2^j` whose tail bound is within budget of the closed-form total.
fn bliss_denominator_cutoff(e: &Exponents, gamma: f64, delta: f64, r: f64, c: f64, x0: f64) -> f64 {
    let k = e.p * (r + 1.0);
    let total = c
        * gamma.powf(e.p)
        * delta.powf(-1.0 / r)
        * crate::special::euler_beta(1.0 / r, (k - 1.0) / r).unwrap_or(f64::INFINITY)
        / r;
    let mut x = x0;
    while bliss_tail(e, gamma, delta, r, c, x) > TAIL_BUDGET * total && x < 1e300 {
        x *= 2.0;
    }
    x
}

#[allow(clippy::too_many_arguments)]
fn bliss_cutoff_plan<'a>(
    g: Box<dyn Fn(f64) -> f64 + 'a>,
    f: &'a TestFunction,
    nu: &'a Measure,
    mu: &'a Measure,
    e: &Exponents,
    gamma: f64,
    delta: f64,
    r: f64,
    pieces: &[(f64, f64, f64)],
    tol: f64,
) -> Result<Plan<'a>> {
    let c_max = pieces.iter().map(|p| p.2).fold(0.0, f64::max);
    let x0 = 1.0f64.max(delta.powf(-1.0 / r));
    let mut x = bliss_denominator_cutoff(e, gamma, delta, r, c_max, x0);
    // numerator tail: G <= G(inf) beyond the cutoff
    let g_inf = g(f64::INFINITY);
    let probe = mu.integrate(&|t| g(t).powf(e.q), &IntervalQuery::below(x0), tol)?;
    let num_tail =
        |x: f64| -> Result<f64> { Ok(product(g_inf.powf(e.q), mu.upper_tail_closed(x)?)) };
    if probe > 0.0 {
        while num_tail(x)? > TAIL_BUDGET * probe && x < 1e300 {
            x *= 2.0;
        }
    }
    let cdf = |t: f64| nu.cdf(t).unwrap_or(f64::NAN);
    let head = nu.integrate_estimate(
        &|t| f.eval(t, &cdf).powf(e.p),
        &IntervalQuery::right_open(0.0, x)?,
        tol,
    )?;
    let tail = bliss_tail(e, gamma, delta, r, c_max, x);
    let dropped = num_tail(x)?;
    Ok(Plan {
        g,
        denominator: Estimate {
            value: head.value + tail,
            error: head.error + tail,
        },
        segments: vec![IntervalQuery::below(x)],
        flat: None,
        cutoff: Some(x),
        dropped,
    })
}

/// Right end of the support of a step or piecewise-constant trial.
fn support_end(f: &TestFunction) -> Option<f64> {
    match f {
        TestFunction::Step { x0, .. } => Some(*x0),
        TestFunction::PiecewiseConstant {
            breakpoints,
            values,
        } => values
            .iter()
            .rposition(|v| *v > 0.0)
            .map(|i| breakpoints[i + 1]),
        _ => None,
    }
}

/// Exact quotient when `nu` is discrete on the support of `f`: `G` is then a step
/// function and the numerator a finite sum of `mu` masses.
fn discrete_rayleigh(
    f: &TestFunction,
    nu: &Measure,
    mu: &Measure,
    e: &Exponents,
    tol: f64,
) -> Result<Option<RayleighResult>> {
    let end = match support_end(f) {
        Some(x) if x.is_finite() && x.abs() < 1e7 => x,
        _ => return Ok(None),
    };
    // truncating a reflected or shifted tail at `end` would cut the wrong atoms
    if nu.has_tail() && !matches!(nu.kind, MeasureKind::Atomic(_)) {
        return Ok(None);
    }
    let restricted = nu.with_truncation(end.ceil().max(0.0) as i64);
    let atoms = match restricted.discrete_atoms(1 << 22)? {
        Some(a) => a,
        None => return Ok(None),
    };
    let no_cdf = |_: f64| f64::NAN;
    let mut den = 0.0;
    let mut jumps: Vec<(f64, f64)> = Vec::new();
    for (x, w) in atoms {
        let v = f.eval(x, &no_cdf);
        if v > 0.0 {
            den += product(v.powf(e.p), w);
            jumps.push((x, product(v, w)));
        }
    }
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    if den.is_infinite() {
        return Err(Error::InfiniteDenominator);
    }
    let mut num = Estimate::ZERO;
    let mut g = 0.0;
    for (j, &(x, c)) in jumps.iter().enumerate() {
        g += c;
        let iq = match jumps.get(j + 1) {
            Some(&(next, _)) => IntervalQuery::left_open(x, next)?,
            None => IntervalQuery::above(x),
        };
        let m = mu.mass_bracket_with(&iq, tol)?;
        let gq = g.powf(e.q);
        num += Estimate {
            value: product(gq, m.midpoint()),
            error: product(gq, 0.5 * m.width()),
        };
    }
    let residual = if num.value > 0.0 {
        num.error / num.value
    } else {
        0.0
    };
    Ok(Some(RayleighResult {
        value: num.value.powf(1.0 / e.q) / den.powf(1.0 / e.p),
        numerator: num.value,
        denominator: den,
        quadrature_residual: residual,
        cutoff: None,
    }))
}

/// The quotient of `f` against `(nu, mu)`, each integral to relative tolerance `tol`.
pub fn rayleigh(
    f: &TestFunction,
    nu: &Measure,
    mu: &Measure,
    e: &Exponents,
    tol: f64,
) -> Result<RayleighResult> {
    f.validate(e)?;
    if let Some(r) = discrete_rayleigh(f, nu, mu, e, tol)? {
        return Ok(r);
    }
    let failure = Failure::new();
    let plan = plan(f, nu, mu, e, tol, &failure)?;
    let den = plan.denominator;
    if den.value == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    if den.value.is_infinite() {
        return Err(Error::InfiniteDenominator);
    }
    let mut num = Estimate::ZERO;
    for seg in &plan.segments {
        num += mu.integrate_estimate(&|x| (plan.g)(x).powf(e.q), seg, tol)?;
        if let Some(err) = failure.take() {
            return Err(err);
        }
    }
    if let Some((iq, g_flat)) = &plan.flat {
        num += Estimate::exact(product(g_flat.powf(e.q), mu.interval_mass(iq)?));
    }
    if num.value.is_nan() {
        return Err(Error::Quadrature {
            residual: f64::NAN,
            tol,
        });
    }
    let rel = |est: &Estimate| {
        if est.value > 0.0 {
            est.error / est.value
        } else {
            0.0
        }
    };
    let dropped = if num.value > 0.0 {
        plan.dropped / num.value
    } else {
        0.0
    };
    Ok(RayleighResult {
        value: num.value.powf(1.0 / e.q) / den.value.powf(1.0 / e.p),
        numerator: num.value,
        denominator: den.value,
        quadrature_residual: rel(&num).max(rel(&den)).max(dropped),
        cutoff: plan.cutoff,
    })
}

/// Best step-trial quotient over the candidate thresholds.
pub fn certify_lower_bound(
    nu: &Measure,
    mu: &Measure,
    e: &Exponents,
    xs: &[f64],
    tol: f64,
) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::InvalidArgument("no candidate thresholds".into()));
    }
    let mut best: Option<f64> = None;
    for &x in xs {
        match rayleigh(&TestFunction::step(x), nu, mu, e, tol) {
            Ok(r) => best = Some(best.map_or(r.value, |b: f64| b.max(r.value))),
            Err(Error::ZeroDenominator) | Err(Error::InfiniteDenominator) => {}
            Err(err) => return Err(err),
        }
    }
    best.ok_or(Error::ZeroDenominator)
}

/// Breakpoints for [`optimize_quotient`]: the atoms of a discrete `nu` (tails up to
/// `truncation`, at most `cells` of them unless `cells` is 0), otherwise `cells` points
/// spread over the supremum candidates.
pub fn default_partition(
    nu: &Measure,
    mu: &Measure,
    cells: usize,
    truncation: i64,
) -> Result<Vec<f64>> {
    let nu_t = nu.with_truncation(truncation);
    if let Some(atoms) = nu_t.discrete_atoms(1 << 22)? {
        if atoms.is_empty() {
            return Err(Error::ZeroDenominator);
        }
        let mut b: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        if cells > 0 && b.len() > cells.max(2) {
            let cells = cells.max(2);
            // geometric index spacing keeps every early atom in its own cell
            let n = b.len() as f64;
            let mut idx: Vec<usize> = (0..cells)
                .map(|i| (n.powf(i as f64 / cells as f64) - 1.0).round() as usize)
                .collect();
            idx.dedup();
            b = idx.into_iter().map(|i| b[i]).collect();
        }
        b.push(f64::INFINITY);
        return Ok(b);
    }
    let res = crate::measure::Resolution {
        depth: 10,
        grid: 8,
        truncation,
    };
    let mut xs = Vec::new();
    nu_t.candidates(&res, &mut xs);
    mu.with_truncation(truncation).candidates(&res, &mut xs);
    xs.retain(|x| x.is_finite());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let cells = cells.max(2);
    if xs.len() > cells {
        let step = xs.len() as f64 / cells as f64;
        let mut picked: Vec<f64> = (0..cells).map(|i| xs[(i as f64 * step) as usize]).collect();
        picked.push(*xs.last().unwrap());
        picked.dedup();
        xs = picked;
    }
    Ok(xs)
}

/// Discretized quotient `(sum_k m_k (K v)_k^q)^{1/q} / (sum_j w_j v_j^p)^{1/p}`.
struct Discrete {
    kernel: Vec<Vec<f64>>,
    mu_w: Vec<f64>,
    nu_w: Vec<f64>,
    p: f64,
    q: f64,
}

impl Discrete {
    fn objective(&self, v: &[f64]) -> f64 {
        let kv = self.apply(v);
        self.objective_from(&kv, v)
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.kernel
            .iter()
            .map(|row| row.iter().zip(v).map(|(k, x)| k * x).sum())
            .collect()
    }

    fn objective_from(&self, kv: &[f64], v: &[f64]) -> f64 {
        let num: f64 = kv
            .iter()
            .zip(&self.mu_w)
            .map(|(g, m)| product(*m, g.powf(self.q)))
            .sum();
        let den: f64 = v
            .iter()
            .zip(&self.nu_w)
            .map(|(x, w)| product(*w, x.powf(self.p)))
            .sum();
        if den == 0.0 {
            return 0.0;
        }
        num.powf(1.0 / self.q) / den.powf(1.0 / self.p)
    }

    fn normalize(&self, v: &mut [f64]) {
        let den: f64 = v
            .iter()
            .zip(&self.nu_w)
            .map(|(x, w)| product(*w, x.powf(self.p)))
            .sum();
        if den > 0.0 {
            let s = den.powf(-1.0 / self.p);
            v.iter_mut().for_each(|x| *x *= s);
        }
    }
}

/// Seeded coordinate ascent over piecewise-constant trials on the partition cells
/// `[b_j, b_{j+1})`. The objective is nondecreasing from sweep to sweep.
pub fn optimize_quotient(
    nu: &Measure,
    mu: &Measure,
    e: &Exponents,
    partition: &[f64],
    iters: usize,
    seed: u64,
) -> Result<(TestFunction, RayleighResult)> {
    if iters == 0 {
        return Err(Error::InvalidArgument("iters must be at least 1".into()));
    }
    if partition.len() < 2 || partition.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(
            "partition needs at least two strictly increasing breakpoints".into(),
        ));
    }
    let n = partition.len() - 1;
    let mut nu_w = Vec::with_capacity(n);
    for j in 0..n {
        nu_w.push(nu.interval_mass(&IntervalQuery::right_open(partition[j], partition[j + 1])?)?);
    }
    let active: Vec<bool> = nu_w.iter().map(|w| *w > 0.0 && w.is_finite()).collect();
    if !active.iter().any(|&a| a) {
        return Err(Error::ZeroDenominator);
    }
    let mu_atoms = mu.left_point_masses(partition, 1 << 22)?;
    let mut kernel = Vec::with_capacity(mu_atoms.len());
    for &(y, _) in &mu_atoms {
        let mut row = vec![0.0; n];
        for j in 0..n {
            if active[j] && partition[j] < y {
                let hi = partition[j + 1].min(y);
                row[j] = nu.interval_mass(&IntervalQuery {
                    a: partition[j],
                    b: hi,
                    include_a: true,
                    include_b: false,
                })?;
            }
        }
        kernel.push(row);
    }
    let d = Discrete {
        kernel,
        mu_w: mu_atoms.iter().map(|a| a.1).collect(),
        nu_w,
        p: e.p,
        q: e.q,
    };

    // start from the best prefix step
    let mut v = vec![0.0; n];
    let (mut best_v, mut best) = (v.clone(), f64::NEG_INFINITY);
    for j in 0..n {
        if active[j] {
            v[j] = 1.0;
        }
        let val = d.objective(&v);
        if val > best {
            best = val;
            best_v = v.clone();
        }
    }
    let mut v = best_v;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jittered = v.clone();
    for (j, x) in jittered.iter_mut().enumerate() {
        if active[j] {
            *x += 1e-3 * rng.gen::<f64>();
        }
    }
    if d.objective(&jittered) > best {
        v = jittered;
    }
    d.normalize(&mut v);
    let mut value = d.objective(&v);
    let mut order: Vec<usize> = (0..n).filter(|&j| active[j]).collect();
    for _ in 0..iters {
        order.shuffle(&mut rng);
        let before = value;
        let mut kv = d.apply(&v);
        for &j in &order {
            let t = if e.p == 2.0 && e.q == 2.0 {
                quadratic_update(&d, &v, &kv, j)
            } else {
                golden_update(&d, &v, &kv, j)
            };
            if t != v[j] {
                let old = v[j];
                let mut trial = v.clone();
                trial[j] = t;
                let mut kv_trial = kv.clone();
                for (k, row) in d.kernel.iter().enumerate() {
                    kv_trial[k] += row[j] * (t - old);
                }
                if d.objective_from(&kv_trial, &trial) >= d.objective_from(&kv, &v) {
                    v = trial;
                    kv = kv_trial;
                }
            }
        }
        d.normalize(&mut v);
        value = d.objective(&v);
        assert!(
            value >= before * (1.0 - 1e-12),
            "ascent decreased the objective: {before} -> {value}"
        );
        if value - before <= 1e-15 * value {
            break;
        }
    }
    let f = TestFunction::PiecewiseConstant {
        breakpoints: partition.to_vec(),
        values: v,
    };
    let exact = rayleigh(&f, nu, mu, e, 1e-10)?;
    Ok((f, exact))
}

/// Maximizer in `t >= 0` of `(a t^2 + 2 b t + c) / (w t^2 + d)` for coordinate `j`.
fn quadratic_update(dsc: &Discrete, v: &[f64], kv: &[f64], j: usize) -> f64 {
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for (k, row) in dsc.kernel.iter().enumerate() {
        let kj = row[j];
        let rest = kv[k] - kj * v[j];
        let m = dsc.mu_w[k];
        a += m * kj * kj;
        b += m * kj * rest;
        c += m * rest * rest;
    }
    let w = dsc.nu_w[j];
    let dd: f64 = v
        .iter()
        .zip(&dsc.nu_w)
        .enumerate()
        .filter(|(i, _)| *i != j)
        .map(|(_, (x, w))| product(*w, x * x))
        .sum();
    let ratio = |t: f64| (a * t * t + 2.0 * b * t + c) / (w * t * t + dd);
    let mut cands = vec![v[j], 0.0];
    if dd == 0.0 {
        return if a > 0.0 { v[j].max(1.0) } else { v[j] };
    }
    if b > 0.0 {
        let lin = a * dd - c * w;
        let disc = (lin * lin + 4.0 * b * b * w * dd).sqrt();
        let root = if lin >= 0.0 {
            (lin + disc) / (2.0 * b * w)
        } else {
            2.0 * b * dd / (disc - lin)
        };
        cands.push(root);
    }
    let mut best = v[j];
    let mut best_r = ratio(best);
    for t in cands {
        if t.is_finite() && t >= 0.0 && ratio(t) > best_r {
            best = t;
            best_r = ratio(t);
        }
    }
    best
}

fn golden_update(dsc: &Discrete, v: &[f64], kv: &[f64], j: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let scale = v.iter().copied().fold(0.0, f64::max).max(1e-300);
    let col: Vec<f64> = dsc.kernel.iter().map(|row| row[j]).collect();
    let eval = |t: f64| {
        let shifted: Vec<f64> = kv
            .iter()
            .zip(&col)
            .map(|(g, k)| g + k * (t - v[j]))
            .collect();
        let mut trial = v.to_vec();
        trial[j] = t;
        dsc.objective_from(&shifted, &trial)
    };
    let (mut a, mut b) = (0.0, 4.0 * scale.max(v[j]));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (eval(c), eval(d));
    for _ in 0..48 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    let t = if fc >= fd { c } else { d };
    if eval(t) > eval(v[j]) {
        t
    } else {
        v[j]
    }
}

/// The optimal constant for `p = q = 2` and finite atomic measures: the top singular
/// value of `M_ij = sqrt(mu_i) sqrt(nu_j) [x_j < y_i]`, by power iteration.
pub fn oracle_p2q2(nu: &Measure, mu: &Measure) -> Result<f64> {
    let atoms = |m: &Measure, name: &str| -> Result<Vec<(f64, f64)>> {
        if !m.is_finite_atomic() {
            return Err(Error::InvalidMeasure(format!(
                "{name} must be a finite atomic measure"
            )));
        }
        let a = m.discrete_atoms(usize::MAX)?.unwrap_or_default();
        if a.is_empty() {
            return Err(Error::InvalidMeasure(format!("{name} has no atoms")));
        }
        Ok(a)
    };
    let (xs, ys) = (atoms(nu, "nu")?, atoms(mu, "mu")?);
    let m: Vec<Vec<f64>> = ys
        .iter()
        .map(|&(y, mw)| {
            xs.iter()
                .map(|&(x, nw)| if x < y { (mw * nw).sqrt() } else { 0.0 })
                .collect()
        })
        .collect();
    let n = xs.len();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut lambda = 0.0f64;
    for it in 0..1_000_000 {
        let mv: Vec<f64> = m
            .iter()
            .map(|row| row.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let mut w = vec![0.0; n];
        for (row, s) in m.iter().zip(&mv) {
            for (wj, a) in w.iter_mut().zip(row) {
                *wj += a * s;
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let next = mv.iter().map(|x| x * x).sum::<f64>();
        w.iter_mut().for_each(|x| *x /= norm);
        v = w;
        if it > 10 && (next - lambda).abs() <= 1e-15 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    Ok(lambda.sqrt())
}

/// A random finite atomic measure with `n` atoms in `[0, 1)` and weights in `(0, 1]`.
pub fn random_atomic<R: Rng>(rng: &mut R, n: usize) -> Measure {
    let mut pts: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let weights = pts.iter().map(|_| 1.0 - rng.gen::<f64>()).collect();
    Measure::atoms(pts, weights).expect("sorted distinct points with positive weights")
}
