//! Sigma-finite Borel measures on the real line.
//!
//! A [`Measure`] is an immutable tree: atomic, density, Cantor-type leaves,
//! reweighted by a pointwise weight or pushed forward by a shift, scale or
//! reflection. Every mass query carries explicit endpoint inclusion, since atoms
//! make `(-inf, x]`, `(-inf, x)`, `[x, inf)` and `(x, inf)` differ.

mod atomic;
mod density;
mod interval;
mod support;

use std::fmt;
use std::sync::Arc;

pub(crate) use atomic::product;
pub use atomic::{Atomic, TailRule, TailWeight};
pub use density::{Density, DensityKind, DensityPiece};
pub use interval::IntervalQuery;
pub use support::Resolution;

use crate::cantor::{self, CantorQuadrature};
use crate::error::{Error, Result};
use crate::quadrature::Estimate;

/// Default relative tolerance for numerically evaluated masses and integrals.
pub const DEFAULT_TOL: f64 = 1e-10;

pub type PointFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A named pointwise function. Equality compares names only, so names should
/// identify the function including its parameters.
#[derive(Clone)]
pub struct NamedFn {
    pub name: String,
    f: PointFn,
}

impl NamedFn {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn call(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

impl fmt::Debug for NamedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NamedFn({})", self.name)
    }
}

impl PartialEq for NamedFn {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

/// A rigorous enclosure `[lo, hi]` of a mass; `lo == hi` when the mass is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub const ZERO: Bracket = Bracket { lo: 0.0, hi: 0.0 };

    pub fn exact(v: f64) -> Self {
        Bracket { lo: v, hi: v }
    }

    pub fn midpoint(&self) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else if self.hi.is_infinite() {
            self.hi
        } else {
            0.5 * (self.lo + self.hi)
        }
    }

    pub fn width(&self) -> f64 {
        if self.lo == self.hi {
            0.0
        } else {
            self.hi - self.lo
        }
    }
}

impl std::ops::Add for Bracket {
    type Output = Bracket;
    fn add(self, o: Bracket) -> Bracket {
        Bracket {
            lo: self.lo + o.lo,
            hi: self.hi + o.hi,
        }
    }
}

/// The extended Bernoulli measure on `n + K`, `n = 0, 1, ...` (or only the first
/// `translates` of them).
#[derive(Debug, Clone, PartialEq)]
pub struct CantorMeasure {
    pub translates: Option<u64>,
    pub quadrature: CantorQuadrature,
}

/// Pointwise weight of a [`MeasureKind::Weighted`] measure.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    /// `S_base(x)^exponent`, the base measure's own cumulative function.
    CdfPower {
        exponent: f64,
    },
    /// `x^exponent` for `x > 0`, zero elsewhere.
    XPower {
        exponent: f64,
    },
    Custom(NamedFn),
}

/// Pushforward map of a [`MeasureKind::Transformed`] measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Shift(f64),
    Scale(f64),
    Reflect,
}

impl Transform {
    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Transform::Shift(c) => x + c,
            Transform::Scale(s) => s * x,
            Transform::Reflect => -x,
        }
    }

    fn preimage(&self, iq: &IntervalQuery) -> IntervalQuery {
        match *self {
            Transform::Shift(c) => iq.shifted_back(c),
            Transform::Scale(s) => iq.scaled_back(s),
            Transform::Reflect => iq.reflected(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasureKind {
    Atomic(Atomic),
    Density(Density),
    Cantor(CantorMeasure),
    Weighted { base: Box<Measure>, weight: Weight },
    Transformed { base: Box<Measure>, map: Transform },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    pub label: String,
    pub kind: MeasureKind,
}

/// Result of a [`dominates`] check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domination {
    pub holds: bool,
    /// First grid point where the tail inequality fails.
    pub witness: Option<f64>,
}

impl Measure {
    fn from_kind(label: impl Into<String>, kind: MeasureKind) -> Self {
        Self {
            label: label.into(),
            kind,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn zero() -> Self {
        Self::from_kind(
            "zero",
            MeasureKind::Atomic(Atomic::new(vec![], vec![], None).unwrap()),
        )
    }

    pub fn atoms(points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Ok(Self::from_kind(
            "atoms",
            MeasureKind::Atomic(Atomic::new(points, weights, None)?),
        ))
    }

    pub fn atoms_with_tail(points: Vec<f64>, weights: Vec<f64>, tail: TailRule) -> Result<Self> {
        Ok(Self::from_kind(
            "atoms+tail",
            MeasureKind::Atomic(Atomic::new(points, weights, Some(tail))?),
        ))
    }

    /// Atoms `n >= start` with weight `coefficient * n^exponent`.
    pub fn integer_power_atoms(
        start: i64,
        coefficient: f64,
        exponent: f64,
        truncation: i64,
    ) -> Result<Self> {
        let tail = TailRule::new(
            start,
            TailWeight::Power {
                coefficient,
                exponent,
            },
            truncation,
        )?;
        Ok(Self::atoms_with_tail(vec![], vec![], tail)?
            .with_label(format!("{coefficient}*n^{exponent}, n>={start}")))
    }

    /// Counting measure on the integers `n >= start`.
    pub fn counting(start: i64, truncation: i64) -> Result<Self> {
        Ok(Self::integer_power_atoms(start, 1.0, 0.0, truncation)?
            .with_label(format!("counting n>={start}")))
    }

    pub fn density(pieces: Vec<DensityPiece>) -> Result<Self> {
        Ok(Self::from_kind(
            "density",
            MeasureKind::Density(Density::new(pieces)?),
        ))
    }

    /// Lebesgue measure on `[lo, hi]`.
    pub fn lebesgue(lo: f64, hi: f64) -> Result<Self> {
        Ok(
            Self::density(vec![DensityPiece::new(lo, hi, DensityKind::lebesgue())?])?
                .with_label(format!("lebesgue[{lo},{hi}]")),
        )
    }

    /// `coefficient * (t - origin)^exponent dt` on `[lo, hi]`.
    pub fn power_density(
        coefficient: f64,
        exponent: f64,
        origin: f64,
        lo: f64,
        hi: f64,
    ) -> Result<Self> {
        let kind = DensityKind::PowerLaw {
            coefficient,
            exponent,
            origin,
        };
        Ok(Self::density(vec![DensityPiece::new(lo, hi, kind)?])?
            .with_label(format!("{coefficient}*t^{exponent} on [{lo},{hi}]")))
    }

    pub fn generic_density(f: NamedFn, lo: f64, hi: f64) -> Result<Self> {
        let label = f.name.clone();
        Ok(
            Self::density(vec![DensityPiece::new(lo, hi, DensityKind::Generic(f))?])?
                .with_label(label),
        )
    }

    /// The extended Bernoulli measure on `[0, inf)`.
    pub fn cantor() -> Self {
        Self::cantor_with(None, CantorQuadrature::Adaptive)
    }

    pub fn cantor_with(translates: Option<u64>, quadrature: CantorQuadrature) -> Self {
        Self::from_kind(
            "cantor",
            MeasureKind::Cantor(CantorMeasure {
                translates,
                quadrature,
            }),
        )
    }

    pub fn weighted(base: Measure, weight: Weight) -> Result<Self> {
        if let Weight::CdfPower { .. } = weight {
            if base.has_atoms() {
                return Err(Error::InvalidMeasure(
                    "cdf-power weight needs an atomless base measure".into(),
                ));
            }
        }
        let label = format!("weighted({})", base.label);
        Ok(Self::from_kind(
            label,
            MeasureKind::Weighted {
                base: Box::new(base),
                weight,
            },
        ))
    }

    pub fn transformed(base: Measure, map: Transform) -> Result<Self> {
        match map {
            Transform::Scale(s) if !(s > 0.0 && s.is_finite()) => {
                return Err(Error::InvalidMeasure(format!(
                    "scale factor must be positive, got {s}"
                )));
            }
            Transform::Shift(c) if !c.is_finite() => {
                return Err(Error::InvalidMeasure("shift must be finite".into()));
            }
            _ => {}
        }
        let label = format!("transformed({})", base.label);
        Ok(Self::from_kind(
            label,
            MeasureKind::Transformed {
                base: Box::new(base),
                map,
            },
        ))
    }

    /// The reflected measure `A -> m(-A)`.
    pub fn reflect(self) -> Self {
        Self::transformed(self, Transform::Reflect).expect("reflection is always valid")
    }

    pub fn has_atoms(&self) -> bool {
        match &self.kind {
            MeasureKind::Atomic(a) => !a.points().is_empty() || a.tail().is_some(),
            MeasureKind::Density(_) | MeasureKind::Cantor(_) => false,
            MeasureKind::Weighted { base, .. } | MeasureKind::Transformed { base, .. } => {
                base.has_atoms()
            }
        }
    }

    /// True when the measure is a finite sum of atoms (no tail, no continuous part).
    pub fn is_finite_atomic(&self) -> bool {
        match &self.kind {
            MeasureKind::Atomic(a) => a.is_finite_support(),
            MeasureKind::Density(_) | MeasureKind::Cantor(_) => false,
            MeasureKind::Weighted { base, .. } | MeasureKind::Transformed { base, .. } => {
                base.is_finite_atomic()
            }
        }
    }

    /// Copy with every integer tail re-truncated at `truncation`.
    pub fn with_truncation(&self, truncation: i64) -> Self {
        let kind = match &self.kind {
            MeasureKind::Atomic(a) => MeasureKind::Atomic(a.with_truncation(truncation)),
            MeasureKind::Weighted { base, weight } => MeasureKind::Weighted {
                base: Box::new(base.with_truncation(truncation)),
                weight: weight.clone(),
            },
            MeasureKind::Transformed { base, map } => MeasureKind::Transformed {
                base: Box::new(base.with_truncation(truncation)),
                map: *map,
            },
            k => k.clone(),
        };
        Self {
            label: self.label.clone(),
            kind,
        }
    }

    /// Copy with every Cantor leaf switched to the given quadrature.
    pub fn with_cantor_quadrature(&self, quadrature: CantorQuadrature) -> Self {
        let kind = match &self.kind {
            MeasureKind::Cantor(c) => MeasureKind::Cantor(CantorMeasure {
                translates: c.translates,
                quadrature,
            }),
            MeasureKind::Weighted { base, weight } => MeasureKind::Weighted {
                base: Box::new(base.with_cantor_quadrature(quadrature)),
                weight: weight.clone(),
            },
            MeasureKind::Transformed { base, map } => MeasureKind::Transformed {
                base: Box::new(base.with_cantor_quadrature(quadrature)),
                map: *map,
            },
            k => k.clone(),
        };
        Self {
            label: self.label.clone(),
            kind,
        }
    }

    pub fn has_tail(&self) -> bool {
        match &self.kind {
            MeasureKind::Atomic(a) => a.tail().is_some(),
            MeasureKind::Density(_) | MeasureKind::Cantor(_) => false,
            MeasureKind::Weighted { base, .. } | MeasureKind::Transformed { base, .. } => {
                base.has_tail()
            }
        }
    }

    pub fn has_cantor(&self) -> bool {
        match &self.kind {
            MeasureKind::Cantor(_) => true,
            MeasureKind::Atomic(_) | MeasureKind::Density(_) => false,
            MeasureKind::Weighted { base, .. } | MeasureKind::Transformed { base, .. } => {
                base.has_cantor()
            }
        }
    }

    /// Mass of the interval, with an enclosure when an infinite integer tail is involved.
    pub fn mass_bracket(&self, iq: &IntervalQuery) -> Result<Bracket> {
        self.mass_bracket_with(iq, DEFAULT_TOL)
    }

    pub fn mass_bracket_with(&self, iq: &IntervalQuery, tol: f64) -> Result<Bracket> {
        if iq.a > iq.b {
            return Err(Error::InvalidInterval { a: iq.a, b: iq.b });
        }
        if iq.is_empty() {
            return Ok(Bracket::ZERO);
        }
        match &self.kind {
            MeasureKind::Atomic(a) => Ok(a.mass_bracket(iq)),
            MeasureKind::Density(d) => Ok(Bracket::exact(checked(d.mass(iq, tol)?, tol)?)),
            MeasureKind::Cantor(c) => Ok(Bracket::exact(cantor_mass(c, iq))),
            MeasureKind::Weighted {
                base,
                weight: Weight::CdfPower { exponent },
            } => {
                // pushforward through the (continuous) cumulative function of the base
                let lo = if iq.a == f64::NEG_INFINITY {
                    0.0
                } else {
                    base.cdf(iq.a)?
                };
                let hi = if iq.b == f64::INFINITY {
                    base.total_mass()?
                } else {
                    base.cdf(iq.b)?
                };
                Ok(Bracket::exact(power_law_mass_on_values(*exponent, lo, hi)))
            }
            MeasureKind::Weighted { .. } => {
                Ok(Bracket::exact(self.integrate(&|_| 1.0, iq, tol)?))
            }
            MeasureKind::Transformed { base, map } => {
                base.mass_bracket_with(&map.preimage(iq), tol)
            }
        }
    }

    /// `m(iq)`; `+inf` is a valid result.
    pub fn interval_mass(&self, iq: &IntervalQuery) -> Result<f64> {
        Ok(self.mass_bracket(iq)?.midpoint())
    }

    pub fn interval_mass_with(&self, iq: &IntervalQuery, tol: f64) -> Result<f64> {
        Ok(self.mass_bracket_with(iq, tol)?.midpoint())
    }

    /// `S(x) = m((-inf, x])`
    pub fn cdf(&self, x: f64) -> Result<f64> {
        self.interval_mass(&IntervalQuery::up_to(x))
    }

    /// `S(x-) = m((-inf, x))`
    pub fn cdf_left(&self, x: f64) -> Result<f64> {
        self.interval_mass(&IntervalQuery::below(x))
    }

    pub fn total_mass(&self) -> Result<f64> {
        self.interval_mass(&IntervalQuery::everything())
    }

    /// `m((x, inf))`
    pub fn upper_tail(&self, x: f64) -> Result<f64> {
        self.interval_mass(&IntervalQuery::above(x))
    }

    /// `m([x, inf))`
    pub fn upper_tail_closed(&self, x: f64) -> Result<f64> {
        self.interval_mass(&IntervalQuery::from(x))
    }

    /// Generalized inverse `inf { x : S(x) >= y }`, `+inf` beyond the total mass.
    pub fn inv_cdf(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "inv_cdf needs y > 0, got {y}"
            )));
        }
        match &self.kind {
            MeasureKind::Atomic(a) => Ok(a.inv_cdf(y)),
            MeasureKind::Cantor(c) => {
                if let Some(n) = c.translates {
                    if y > n as f64 {
                        return Ok(f64::INFINITY);
                    }
                }
                Ok(cantor::cantor_inv_cdf(y))
            }
            _ => self.inv_cdf_bisect(y),
        }
    }

    fn inv_cdf_bisect(&self, y: f64) -> Result<f64> {
        let mut hi = 1.0f64;
        if self.cdf(hi)? >= y {
            let mut lo = -1.0f64;
            while self.cdf(lo)? >= y {
                if lo <= -f64::MAX {
                    return Ok(f64::NEG_INFINITY);
                }
                hi = lo;
                lo = (lo * 2.0).max(-f64::MAX);
            }
            return self.bisect(lo, hi, y);
        }
        loop {
            if hi >= f64::MAX {
                return Ok(f64::INFINITY);
            }
            let lo = hi;
            hi = (hi * 2.0).min(f64::MAX);
            if self.cdf(hi)? >= y {
                return self.bisect(lo, hi, y);
            }
        }
    }

    /// Shrinks `S(lo) < y <= S(hi)` to adjacent floats; returns `hi`.
    fn bisect(&self, lo: f64, hi: f64, y: f64) -> Result<f64> {
        let (mut lo_k, mut hi_k) = (order_key(lo), order_key(hi));
        while hi_k - lo_k > 1 {
            let mid_k = lo_k + (hi_k - lo_k) / 2;
            let mid = from_order_key(mid_k);
            if self.cdf(mid)? >= y {
                hi_k = mid_k;
            } else {
                lo_k = mid_k;
            }
        }
        Ok(from_order_key(hi_k))
    }

    /// `int_iq f dm` to relative tolerance `tol`.
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64, iq: &IntervalQuery, tol: f64) -> Result<f64> {
        let est = self.integrate_estimate(f, iq, tol)?;
        checked(est, tol)
    }

    pub(crate) fn integrate_estimate(
        &self,
        f: &dyn Fn(f64) -> f64,
        iq: &IntervalQuery,
        tol: f64,
    ) -> Result<Estimate> {
        if iq.a > iq.b {
            return Err(Error::InvalidInterval { a: iq.a, b: iq.b });
        }
        if iq.is_empty() {
            return Ok(Estimate::ZERO);
        }
        match &self.kind {
            MeasureKind::Atomic(a) => a.integrate(f, iq, tol),
            MeasureKind::Density(d) => d.integrate(f, iq, tol),
            MeasureKind::Cantor(c) => {
                cantor::integrate_cantor(&|t, _| f(t), iq, c.translates, c.quadrature, tol)
            }
            MeasureKind::Weighted { base, weight } => match (&base.kind, weight) {
                (MeasureKind::Cantor(c), Weight::CdfPower { exponent }) => {
                    let g = |t: f64, lam: f64| product(lam.powf(*exponent), f(t));
                    cantor::integrate_cantor(&g, iq, c.translates, c.quadrature, tol)
                }
                _ => {
                    let g = |t: f64| product(self.weight_at(base, weight, t), f(t));
                    base.integrate_estimate(&g, iq, tol)
                }
            },
            MeasureKind::Transformed { base, map } => {
                let g = |x: f64| f(map.apply(x));
                base.integrate_estimate(&g, &map.preimage(iq), tol)
            }
        }
    }

    fn weight_at(&self, base: &Measure, weight: &Weight, t: f64) -> f64 {
        match weight {
            Weight::CdfPower { exponent } => match base.cdf(t) {
                Ok(s) => s.powf(*exponent),
                Err(_) => f64::NAN,
            },
            Weight::XPower { exponent } => {
                if t > 0.0 {
                    t.powf(*exponent)
                } else {
                    0.0
                }
            }
            Weight::Custom(w) => w.call(t),
        }
    }

    /// `|(S(b) - S(a)) - m((a, b])|` for each half-open query `(a, b]`.
    pub fn pushforward_check(&self, samples: &[IntervalQuery]) -> Result<Vec<f64>> {
        samples
            .iter()
            .map(|iq| {
                if iq.includes_a() || !iq.includes_b() {
                    return Err(Error::InvalidArgument(
                        "pushforward_check expects half-open (a, b] queries".into(),
                    ));
                }
                let via_cdf = self.cdf(iq.b)? - self.cdf(iq.a)?;
                let direct = self.interval_mass(iq)?;
                if via_cdf.is_nan() && direct.is_infinite() {
                    return Ok(0.0);
                }
                Ok((via_cdf - direct).abs())
            })
            .collect()
    }

    /// Checks `self((x, inf)) <= other((x, inf))` at every grid point.
    pub fn dominated_by(&self, other: &Measure, grid: &[f64]) -> Result<Domination> {
        dominates(self, other, grid)
    }
}

/// Checks `m1((x, inf)) <= m2((x, inf))` at every grid point, reporting the first violation.
pub fn dominates(m1: &Measure, m2: &Measure, grid: &[f64]) -> Result<Domination> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("domination grid is empty".into()));
    }
    for &x in grid {
        if m1.upper_tail(x)? > m2.upper_tail(x)? {
            return Ok(Domination {
                holds: false,
                witness: Some(x),
            });
        }
    }
    Ok(Domination {
        holds: true,
        witness: None,
    })
}

fn checked(est: Estimate, tol: f64) -> Result<f64> {
    if est.value.is_nan() {
        return Err(Error::Quadrature {
            residual: f64::NAN,
            tol,
        });
    }
    if est.value.is_infinite() {
        return Ok(est.value);
    }
    let residual = est.relative_error();
    // allow a small safety margin over the requested tolerance
    if residual > 10.0 * tol && est.error > f64::MIN_POSITIVE {
        return Err(Error::Quadrature { residual, tol });
    }
    Ok(est.value)
}

/// `int_lo^hi y^e dy` for `0 <= lo <= hi`.
fn power_law_mass_on_values(e: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    density::power_law_mass(1.0, e, 0.0, lo, hi)
}

fn cantor_mass(c: &CantorMeasure, iq: &IntervalQuery) -> f64 {
    let cap = |v: f64| match c.translates {
        Some(n) => v.min(n as f64),
        None => v,
    };
    let upper = if iq.b == f64::INFINITY {
        cap(f64::INFINITY)
    } else {
        cap(cantor::cantor_cdf(iq.b))
    };
    let lower = if iq.a == f64::NEG_INFINITY {
        0.0
    } else {
        cap(cantor::cantor_cdf(iq.a))
    };
    if upper.is_infinite() {
        return upper;
    }
    (upper - lower).max(0.0)
}

fn order_key(x: f64) -> u64 {
    let bits = x.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

fn from_order_key(k: u64) -> f64 {
    if k >> 63 == 1 {
        f64::from_bits(k & !(1 << 63))
    } else {
        f64::from_bits(!k)
    }
}

#[cfg(test)]
mod tests;
