use std::sync::{Arc, OnceLock};

use super::{Bracket, IntervalQuery, NamedFn};
use crate::error::{Error, Result};
use crate::quadrature::{self, Estimate};

/// Above this many terms a finite tail range is no longer summed term by term.
const DIRECT_SUM_LIMIT: i64 = 100_000;

/// Weight law `n -> w(n)` of an infinite run of integer atoms.
#[derive(Clone, Debug, PartialEq)]
pub enum TailWeight {
    /// `w(n) = coefficient * n^exponent`, `exponent <= 0`.
    Power { coefficient: f64, exponent: f64 },
    /// A user weight with an antiderivative `W` (`W' = w`); `W(inf)` may be infinite.
    Custom {
        weight: NamedFn,
        antiderivative: NamedFn,
    },
}

impl TailWeight {
    pub fn at(&self, n: f64) -> f64 {
        match self {
            TailWeight::Power {
                coefficient,
                exponent,
            } => coefficient * n.powf(*exponent),
            TailWeight::Custom { weight, .. } => weight.call(n),
        }
    }

    /// `int_a^b w(t) dt`, `b` possibly infinite.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            TailWeight::Power {
                coefficient,
                exponent,
            } => {
                let e1 = exponent + 1.0;
                if e1.abs() < 1e-14 {
                    coefficient * (b.ln() - a.ln())
                } else if b.is_infinite() {
                    if e1 > 0.0 {
                        f64::INFINITY
                    } else {
                        -coefficient * a.powf(e1) / e1
                    }
                } else {
                    coefficient * (b.powf(e1) - a.powf(e1)) / e1
                }
            }
            TailWeight::Custom { antiderivative, .. } => {
                antiderivative.call(b) - antiderivative.call(a)
            }
        }
    }
}

/// Integer atoms `n >= start` with weights `w(n)`, summed exactly up to `truncation`
/// and bracketed by the integral test beyond it.
#[derive(Clone, Debug)]
pub struct TailRule {
    pub start: i64,
    pub weight: TailWeight,
    pub truncation: i64,
    suffix: OnceLock<Arc<Vec<f64>>>,
}

impl PartialEq for TailRule {
    fn eq(&self, other: &Self) -> bool {
        self.start == other.start
            && self.weight == other.weight
            && self.truncation == other.truncation
    }
}

impl TailRule {
    pub fn new(start: i64, weight: TailWeight, truncation: i64) -> Result<Self> {
        if start < 1 {
            return Err(Error::InvalidMeasure(format!(
                "tail start index must be >= 1, got {start}"
            )));
        }
        if truncation < start - 1 {
            return Err(Error::InvalidMeasure(format!(
                "tail truncation {truncation} precedes start index {start}"
            )));
        }
        if let TailWeight::Power {
            coefficient,
            exponent,
        } = weight
        {
            if !(coefficient > 0.0 && coefficient.is_finite()) {
                return Err(Error::InvalidMeasure(format!(
                    "tail coefficient must be positive, got {coefficient}"
                )));
            }
            if !(exponent <= 0.0) {
                return Err(Error::InvalidMeasure(format!(
                    "tail weights must be nonincreasing; exponent {exponent} > 0"
                )));
            }
        }
        Ok(Self {
            start,
            weight,
            truncation,
            suffix: OnceLock::new(),
        })
    }

    pub fn with_truncation(&self, truncation: i64) -> Self {
        Self {
            start: self.start,
            weight: self.weight.clone(),
            truncation: truncation.max(self.start - 1),
            suffix: OnceLock::new(),
        }
    }

    /// `suffix[i] = sum_{n = start + i}^{truncation} w(n)`, with a trailing zero.
    fn suffix(&self) -> &[f64] {
        self.suffix.get_or_init(|| {
            let len = (self.truncation - self.start + 1).max(0) as usize;
            let mut table = vec![0.0; len + 1];
            for i in (0..len).rev() {
                table[i] = table[i + 1] + self.weight.at((self.start + i as i64) as f64);
            }
            Arc::new(table)
        })
    }

    /// Integral-test bracket of `sum_{n >= from} w(n)`: `[int_from^inf w, w(from) + int_from^inf w]`.
    pub fn tail_bracket(&self, from: i64) -> Bracket {
        let from = from.max(self.start) as f64;
        let integral = self.weight.integral(from, f64::INFINITY);
        Bracket {
            lo: integral,
            hi: self.weight.at(from) + integral,
        }
    }

    /// `sum_{n = lo}^{hi} w(n)` (`hi = None` for infinity) as a bracket.
    pub fn range_sum(&self, lo: i64, hi: Option<i64>) -> Bracket {
        let lo = lo.max(self.start);
        if let Some(h) = hi {
            if h < lo {
                return Bracket::ZERO;
            }
        }
        let mut out = Bracket::ZERO;
        let exact_hi = hi.map_or(self.truncation, |h| h.min(self.truncation));
        if exact_hi >= lo {
            let table = self.suffix();
            let i0 = (lo - self.start) as usize;
            let i1 = (exact_hi - self.start + 1) as usize;
            let s = table[i0] - table[i1];
            out = out + Bracket::exact(s);
        }
        let beyond = lo.max(self.truncation + 1);
        match hi {
            Some(h) if h < beyond => {}
            Some(h) if h - beyond < DIRECT_SUM_LIMIT => {
                let s: f64 = (beyond..=h).rev().map(|n| self.weight.at(n as f64)).sum();
                out = out + Bracket::exact(s);
            }
            _ => {
                let a = beyond as f64;
                let (upper_end, lower_end) = match hi {
                    Some(h) => (h as f64, h as f64 + 1.0),
                    None => (f64::INFINITY, f64::INFINITY),
                };
                let lo_b = self.weight.integral(a, lower_end);
                let hi_b = self.weight.at(a) + self.weight.integral(a, upper_end);
                out = out + Bracket { lo: lo_b, hi: hi_b };
            }
        }
        out
    }
}

/// Integer index range `[lo, hi]` (`hi = None` for unbounded) of integers in the query.
fn integer_range(iq: &IntervalQuery) -> Option<(i64, Option<i64>)> {
    if iq.is_empty() {
        return None;
    }
    let lo = if iq.a == f64::NEG_INFINITY {
        i64::MIN / 2
    } else if iq.includes_a() {
        iq.a.ceil() as i64
    } else {
        iq.a.floor() as i64 + 1
    };
    let hi = if iq.b == f64::INFINITY {
        None
    } else if iq.includes_b() {
        Some(iq.b.floor() as i64)
    } else {
        Some(iq.b.ceil() as i64 - 1)
    };
    if let Some(h) = hi {
        if h < lo {
            return None;
        }
    }
    Some((lo, hi))
}

/// Finitely many explicit atoms plus an optional integer tail beyond them.
#[derive(Clone, Debug, PartialEq)]
pub struct Atomic {
    points: Vec<f64>,
    weights: Vec<f64>,
    prefix: Vec<f64>,
    tail: Option<TailRule>,
}

impl Atomic {
    pub fn new(points: Vec<f64>, weights: Vec<f64>, tail: Option<TailRule>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} points but {} weights",
                points.len(),
                weights.len()
            )));
        }
        for (i, &p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::InvalidMeasure(format!("points[{i}] is not finite")));
            }
            if i > 0 && p <= points[i - 1] {
                return Err(Error::InvalidMeasure(format!(
                    "points[{i}] = {p}: points not strictly increasing"
                )));
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidMeasure(format!(
                    "weights[{i}] = {w}: weights must be positive and finite"
                )));
            }
        }
        if let (Some(t), Some(&last)) = (&tail, points.last()) {
            if (t.start as f64) <= last {
                return Err(Error::InvalidMeasure(format!(
                    "tail start {} does not lie beyond the last explicit point {last}",
                    t.start
                )));
            }
        }
        let mut prefix = Vec::with_capacity(weights.len() + 1);
        prefix.push(0.0);
        for &w in &weights {
            prefix.push(prefix.last().unwrap() + w);
        }
        Ok(Self {
            points,
            weights,
            prefix,
            tail,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn tail(&self) -> Option<&TailRule> {
        self.tail.as_ref()
    }

    pub fn is_finite_support(&self) -> bool {
        self.tail.is_none()
    }

    pub(crate) fn with_truncation(&self, truncation: i64) -> Self {
        Self {
            tail: self.tail.as_ref().map(|t| t.with_truncation(truncation)),
            ..self.clone()
        }
    }

    /// Index range of explicit atoms inside the query.
    fn explicit_range(&self, iq: &IntervalQuery) -> (usize, usize) {
        if iq.is_empty() {
            return (0, 0);
        }
        let i0 = if iq.includes_a() {
            self.points.partition_point(|&p| p < iq.a)
        } else {
            self.points.partition_point(|&p| p <= iq.a)
        };
        let i1 = if iq.includes_b() {
            self.points.partition_point(|&p| p <= iq.b)
        } else {
            self.points.partition_point(|&p| p < iq.b)
        };
        (i0, i1.max(i0))
    }

    pub fn mass_bracket(&self, iq: &IntervalQuery) -> Bracket {
        let (i0, i1) = self.explicit_range(iq);
        let mut out = Bracket::exact(self.prefix[i1] - self.prefix[i0]);
        if let Some(tail) = &self.tail {
            if let Some((lo, hi)) = integer_range(iq) {
                out = out + tail.range_sum(lo, hi);
            }
        }
        out
    }

    pub fn integrate(
        &self,
        f: &dyn Fn(f64) -> f64,
        iq: &IntervalQuery,
        tol: f64,
    ) -> Result<Estimate> {
        let (i0, i1) = self.explicit_range(iq);
        let mut value = 0.0;
        for i in i0..i1 {
            value += product(self.weights[i], f(self.points[i]));
        }
        let mut est = Estimate::exact(value);
        if let (Some(tail), Some((lo, hi))) = (&self.tail, integer_range(iq)) {
            est += tail_integral(tail, f, lo.max(tail.start), hi, tol)?;
        }
        if est.value.is_nan() {
            return Err(Error::Quadrature {
                residual: f64::NAN,
                tol,
            });
        }
        Ok(est)
    }

    /// `inf { x : S(x) >= y }` for `y > 0`.
    pub fn inv_cdf(&self, y: f64) -> f64 {
        let explicit_total = *self.prefix.last().unwrap();
        if y <= explicit_total {
            let i = self.prefix[1..].partition_point(|&c| c < y);
            return self.points[i.min(self.points.len() - 1)];
        }
        let Some(tail) = &self.tail else {
            return f64::INFINITY;
        };
        let cdf_at = |n: i64| explicit_total + tail.range_sum(tail.start, Some(n)).midpoint();
        let total = explicit_total + tail.range_sum(tail.start, None).midpoint();
        if y > total {
            return f64::INFINITY;
        }
        // exponential search then bisection over integers
        let mut lo = tail.start - 1;
        let mut hi = tail.start;
        while cdf_at(hi) < y {
            lo = hi;
            hi = hi.saturating_mul(2);
            if hi >= i64::MAX / 4 {
                return f64::INFINITY;
            }
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if cdf_at(mid) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi as f64
    }

    /// Explicit atoms in the query, followed by tail atoms up to the truncation index.
    pub(crate) fn atoms_in(&self, iq: &IntervalQuery, limit: usize) -> Result<Vec<(f64, f64)>> {
        let (i0, i1) = self.explicit_range(iq);
        let mut out: Vec<(f64, f64)> = (i0..i1)
            .map(|i| (self.points[i], self.weights[i]))
            .collect();
        if let (Some(tail), Some((lo, hi))) = (&self.tail, integer_range(iq)) {
            let lo = lo.max(tail.start);
            let hi = hi.unwrap_or(tail.truncation);
            if hi >= lo {
                if (hi - lo) as usize > limit {
                    return Err(Error::ResourceCap(format!(
                        "{} tail atoms requested (cap {limit})",
                        hi - lo + 1
                    )));
                }
                out.extend((lo..=hi).map(|n| (n as f64, tail.weight.at(n as f64))));
            }
        }
        Ok(out)
    }
}

/// Product with the measure-theoretic convention `0 * inf = 0`.
pub(crate) fn product(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

fn tail_integral(
    tail: &TailRule,
    f: &dyn Fn(f64) -> f64,
    lo: i64,
    hi: Option<i64>,
    tol: f64,
) -> Result<Estimate> {
    let g = |t: f64| product(tail.weight.at(t), f(t));
    let exact_hi = hi.map_or(tail.truncation, |h| h.min(tail.truncation));
    let mut value = 0.0;
    if exact_hi >= lo {
        for n in (lo..=exact_hi).rev() {
            value += g(n as f64);
        }
    }
    let mut est = Estimate::exact(value);
    let beyond = lo.max(tail.truncation + 1);
    match hi {
        Some(h) if h < beyond => {}
        Some(h) if h - beyond < DIRECT_SUM_LIMIT => {
            let s: f64 = (beyond..=h).rev().map(|n| g(n as f64)).sum();
            est += Estimate::exact(s);
        }
        _ => {
            // midpoint rule: sum_{n >= a} g(n) ~ int_{a - 1/2}^{b + 1/2} g
            let a = beyond as f64;
            let b = hi.map_or(f64::INFINITY, |h| h as f64 + 0.5);
            let q = quadrature::integrate(&g, a - 0.5, b, tol * 0.1)?;
            let curvature = (g(a + 1.0) - g(a)).abs() / 24.0;
            est += Estimate {
                value: q.value,
                error: q.error + curvature,
            };
        }
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squares_tail(truncation: i64) -> TailRule {
        TailRule::new(
            1,
            TailWeight::Power {
                coefficient: 1.0,
                exponent: -2.0,
            },
            truncation,
        )
        .unwrap()
    }

    #[test]
    fn integral_test_bracket_of_inverse_squares() {
        let t = squares_tail(0);
        let b = t.tail_bracket(10);
        assert!((b.lo - 0.1).abs() < 1e-15);
        assert!(b.hi <= 1.0 / 9.0);
        // true value sum_{k>=10} k^-2
        let exact: f64 =
            (10..2_000_000).map(|k| (k as f64).powi(-2)).sum::<f64>() + 1.0 / 2_000_000.0;
        assert!(b.lo <= exact && exact <= b.hi);
    }

    #[test]
    fn suffix_sums_match_direct_sums() {
        let t = squares_tail(1000);
        let direct: f64 = (5..=700).map(|k| (k as f64).powi(-2)).sum();
        let b = t.range_sum(5, Some(700));
        assert_eq!(b.lo, b.hi);
        assert!((b.lo - direct).abs() < 1e-14);
    }

    #[test]
    fn tail_start_must_follow_points() {
        let t = squares_tail(10);
        assert!(Atomic::new(vec![0.5, 3.0], vec![1.0, 1.0], Some(t)).is_err());
    }

    #[test]
    fn rejects_unsorted_and_negative() {
        assert!(Atomic::new(vec![2.0, 1.0], vec![1.0, 1.0], None).is_err());
        assert!(Atomic::new(vec![1.0, 2.0], vec![1.0, -1.0], None).is_err());
        assert!(Atomic::new(vec![1.0], vec![1.0, 2.0], None).is_err());
    }

    #[test]
    fn integer_ranges_respect_inclusion() {
        let iq = IntervalQuery::left_open(1.0, 3.0).unwrap();
        assert_eq!(integer_range(&iq), Some((2, Some(3))));
        let iq = IntervalQuery::open(1.0, 3.0).unwrap();
        assert_eq!(integer_range(&iq), Some((2, Some(2))));
        assert_eq!(integer_range(&IntervalQuery::open(1.0, 2.0).unwrap()), None);
    }
}
