use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An interval of the extended real line with explicit endpoint inclusion.
///
/// Infinite endpoints are always treated as excluded, whatever the flag says.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalQuery {
    pub a: f64,
    pub b: f64,
    pub include_a: bool,
    pub include_b: bool,
}

impl IntervalQuery {
    pub fn new(a: f64, b: f64, include_a: bool, include_b: bool) -> Result<Self> {
        if a.is_nan() || b.is_nan() {
            return Err(Error::InvalidArgument("NaN interval endpoint".into()));
        }
        if a > b {
            return Err(Error::InvalidInterval { a, b });
        }
        Ok(Self {
            a,
            b,
            include_a,
            include_b,
        })
    }

    fn raw(a: f64, b: f64, include_a: bool, include_b: bool) -> Self {
        Self {
            a,
            b,
            include_a,
            include_b,
        }
    }

    /// `[a, b]`
    pub fn closed(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, true, true)
    }

    /// `(a, b)`
    pub fn open(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, false, false)
    }

    /// `(a, b]`
    pub fn left_open(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, false, true)
    }

    /// `[a, b)`
    pub fn right_open(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, true, false)
    }

    /// `(-inf, x]`
    pub fn up_to(x: f64) -> Self {
        Self::raw(f64::NEG_INFINITY, x, false, true)
    }

    /// `(-inf, x)`
    pub fn below(x: f64) -> Self {
        Self::raw(f64::NEG_INFINITY, x, false, false)
    }

    /// `[x, inf)`
    pub fn from(x: f64) -> Self {
        Self::raw(x, f64::INFINITY, true, false)
    }

    /// `(x, inf)`
    pub fn above(x: f64) -> Self {
        Self::raw(x, f64::INFINITY, false, false)
    }

    /// The whole real line.
    pub fn everything() -> Self {
        Self::raw(f64::NEG_INFINITY, f64::INFINITY, false, false)
    }

    pub fn includes_a(&self) -> bool {
        self.include_a && self.a.is_finite()
    }

    pub fn includes_b(&self) -> bool {
        self.include_b && self.b.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        let lower = x > self.a || (x == self.a && self.includes_a());
        let upper = x < self.b || (x == self.b && self.includes_b());
        lower && upper
    }

    /// True when no real number lies in the interval.
    pub fn is_empty(&self) -> bool {
        self.a > self.b || (self.a == self.b && !(self.includes_a() && self.includes_b()))
    }

    /// Intersection with another interval; may be empty.
    pub fn intersect(&self, other: &IntervalQuery) -> IntervalQuery {
        let (a, include_a) = match self.a.total_cmp(&other.a) {
            std::cmp::Ordering::Greater => (self.a, self.include_a),
            std::cmp::Ordering::Less => (other.a, other.include_a),
            std::cmp::Ordering::Equal => (self.a, self.include_a && other.include_a),
        };
        let (b, include_b) = match self.b.total_cmp(&other.b) {
            std::cmp::Ordering::Less => (self.b, self.include_b),
            std::cmp::Ordering::Greater => (other.b, other.include_b),
            std::cmp::Ordering::Equal => (self.b, self.include_b && other.include_b),
        };
        IntervalQuery::raw(a, b, include_a, include_b)
    }

    /// Preimage under `x -> x + c`.
    pub fn shifted_back(&self, c: f64) -> IntervalQuery {
        IntervalQuery::raw(self.a - c, self.b - c, self.include_a, self.include_b)
    }

    /// Preimage under `x -> s x` with `s > 0`.
    pub fn scaled_back(&self, s: f64) -> IntervalQuery {
        IntervalQuery::raw(self.a / s, self.b / s, self.include_a, self.include_b)
    }

    /// Preimage under `x -> -x`.
    pub fn reflected(&self) -> IntervalQuery {
        IntervalQuery::raw(-self.b, -self.a, self.include_b, self.include_a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_closed_interval_contains_its_point() {
        let iq = IntervalQuery::closed(2.0, 2.0).unwrap();
        assert!(!iq.is_empty());
        assert!(iq.contains(2.0));
        assert!(IntervalQuery::right_open(2.0, 2.0).unwrap().is_empty());
    }

    #[test]
    fn malformed_query_is_rejected() {
        assert_eq!(
            IntervalQuery::closed(3.0, 1.0),
            Err(Error::InvalidInterval { a: 3.0, b: 1.0 })
        );
    }

    #[test]
    fn reflection_swaps_inclusion() {
        let iq = IntervalQuery::left_open(1.0, 3.0).unwrap().reflected();
        assert_eq!(iq, IntervalQuery::right_open(-3.0, -1.0).unwrap());
    }

    #[test]
    fn intersection_keeps_tighter_endpoint() {
        let x = IntervalQuery::from(1.0).intersect(&IntervalQuery::left_open(1.0, 4.0).unwrap());
        assert!(!x.contains(1.0));
        assert!(x.contains(4.0));
    }
}
