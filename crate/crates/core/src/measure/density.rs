use super::{IntervalQuery, NamedFn};
use crate::error::{Error, Result};
use crate::quadrature::{self, Estimate};

/// Density of one absolutely continuous piece.
#[derive(Clone, Debug, PartialEq)]
pub enum DensityKind {
    /// `coefficient * (t - origin)^exponent` for `t > origin`; integrated in closed form.
    PowerLaw {
        coefficient: f64,
        exponent: f64,
        origin: f64,
    },
    /// Pointwise-evaluable nonnegative density; integrated numerically.
    Generic(NamedFn),
}

impl DensityKind {
    pub fn lebesgue() -> Self {
        DensityKind::PowerLaw {
            coefficient: 1.0,
            exponent: 0.0,
            origin: 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            DensityKind::PowerLaw {
                coefficient,
                exponent,
                origin,
            } => {
                if *exponent == 0.0 {
                    *coefficient
                } else {
                    coefficient * (t - origin).powf(*exponent)
                }
            }
            DensityKind::Generic(f) => f.call(t),
        }
    }
}

/// A density supported on `[lo, hi]` (endpoints may be infinite; they carry no mass).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityPiece {
    pub lo: f64,
    pub hi: f64,
    pub kind: DensityKind,
}

impl DensityPiece {
    pub fn new(lo: f64, hi: f64, kind: DensityKind) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidMeasure(format!(
                "density support [{lo}, {hi}] is empty or malformed"
            )));
        }
        if let DensityKind::PowerLaw {
            coefficient,
            exponent,
            origin,
        } = &kind
        {
            if !(*coefficient >= 0.0 && coefficient.is_finite()) {
                return Err(Error::InvalidMeasure(format!(
                    "density coefficient {coefficient} must be nonnegative"
                )));
            }
            if !exponent.is_finite() || !origin.is_finite() {
                return Err(Error::InvalidMeasure(
                    "power-law exponent and origin must be finite".into(),
                ));
            }
            if *exponent != 0.0 && lo < *origin {
                return Err(Error::InvalidMeasure(format!(
                    "power-law piece starts at {lo}, left of its origin {origin}"
                )));
            }
        }
        Ok(Self { lo, hi, kind })
    }

    fn clip(&self, iq: &IntervalQuery) -> Option<(f64, f64)> {
        let a = iq.a.max(self.lo);
        let b = iq.b.min(self.hi);
        (a < b).then_some((a, b))
    }

    fn mass(&self, iq: &IntervalQuery, tol: f64) -> Result<Estimate> {
        let Some((a, b)) = self.clip(iq) else {
            return Ok(Estimate::ZERO);
        };
        match &self.kind {
            DensityKind::PowerLaw {
                coefficient,
                exponent,
                origin,
            } => Ok(Estimate::exact(power_law_mass(
                *coefficient,
                *exponent,
                *origin,
                a,
                b,
            ))),
            DensityKind::Generic(f) => quadrature::integrate(&|t| f.call(t), a, b, tol),
        }
    }

    fn integrate(&self, f: &dyn Fn(f64) -> f64, iq: &IntervalQuery, tol: f64) -> Result<Estimate> {
        let Some((a, b)) = self.clip(iq) else {
            return Ok(Estimate::ZERO);
        };
        let g = |t: f64| super::atomic::product(self.kind.eval(t), f(t));
        quadrature::integrate(&g, a, b, tol)
    }
}

/// `int_a^b c (t - o)^e dt` with `o <= a < b`, infinite values allowed.
pub(super) fn power_law_mass(c: f64, e: f64, o: f64, a: f64, b: f64) -> f64 {
    if c == 0.0 {
        return 0.0;
    }
    if e == 0.0 {
        return c * (b - a);
    }
    let (u, v) = (a - o, b - o);
    let e1 = e + 1.0;
    if e1 == 0.0 {
        return c * (v.ln() - u.ln());
    }
    if e1 > 0.0 {
        // antiderivative vanishes at the origin, grows to infinity
        c * (v.powf(e1) - u.powf(e1)) / e1
    } else {
        // antiderivative -u^{e1}/|e1| -> -inf at the origin, 0 at infinity
        let fu = if u == 0.0 { f64::INFINITY } else { u.powf(e1) };
        let fv = if v.is_infinite() { 0.0 } else { v.powf(e1) };
        c * (fu - fv) / (-e1)
    }
}

/// A finite union of density pieces with disjoint interiors.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    pieces: Vec<DensityPiece>,
}

impl Density {
    pub fn new(mut pieces: Vec<DensityPiece>) -> Result<Self> {
        pieces.sort_by(|x, y| x.lo.total_cmp(&y.lo));
        for w in pieces.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::InvalidMeasure(format!(
                    "density pieces [{}, {}] and [{}, {}] overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[DensityPiece] {
        &self.pieces
    }

    pub fn mass(&self, iq: &IntervalQuery, tol: f64) -> Result<Estimate> {
        let mut total = Estimate::ZERO;
        if iq.is_empty() {
            return Ok(total);
        }
        for p in &self.pieces {
            total += p.mass(iq, tol)?;
        }
        Ok(total)
    }

    pub fn integrate(
        &self,
        f: &dyn Fn(f64) -> f64,
        iq: &IntervalQuery,
        tol: f64,
    ) -> Result<Estimate> {
        let mut total = Estimate::ZERO;
        if iq.is_empty() {
            return Ok(total);
        }
        for p in &self.pieces {
            total += p.integrate(f, iq, tol)?;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        assert_eq!(power_law_mass(1.0, -2.0, 0.0, 2.0, f64::INFINITY), 0.5);
        assert_eq!(power_law_mass(1.0, 0.0, 0.0, 1.0, 4.0), 3.0);
        assert_eq!(power_law_mass(2.0, -3.0, 0.0, 0.0, 1.0), f64::INFINITY);
        assert_eq!(
            power_law_mass(1.0, 0.5, 0.0, 0.0, f64::INFINITY),
            f64::INFINITY
        );
        assert!((power_law_mass(1.0, -1.0, 0.0, 1.0, std::f64::consts::E) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn generic_matches_closed_form() {
        let lebesgue = DensityPiece::new(
            1.0,
            f64::INFINITY,
            DensityKind::PowerLaw {
                coefficient: 3.0,
                exponent: -2.5,
                origin: 0.0,
            },
        )
        .unwrap();
        let generic = DensityPiece::new(
            1.0,
            f64::INFINITY,
            DensityKind::Generic(NamedFn::new("3t^-2.5", |t| 3.0 * t.powf(-2.5))),
        )
        .unwrap();
        let iq = IntervalQuery::from(2.0);
        let a = lebesgue.mass(&iq, 1e-12).unwrap().value;
        let b = generic.mass(&iq, 1e-12).unwrap().value;
        assert!((a - b).abs() < 1e-10 * a);
    }

    #[test]
    fn overlapping_pieces_rejected() {
        let p = |lo, hi| DensityPiece::new(lo, hi, DensityKind::lebesgue()).unwrap();
        assert!(Density::new(vec![p(0.0, 2.0), p(1.0, 3.0)]).is_err());
        assert!(Density::new(vec![p(2.0, 3.0), p(0.0, 2.0)]).is_ok());
    }
}
