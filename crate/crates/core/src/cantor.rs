//! The standard Bernoulli measure on the middle-thirds Cantor set and its
//! extension `lambda` to `[0, inf)`, where every translate `n + K` carries mass one.
//!
//! `Lambda(x) = lambda([0, x])` is evaluated exactly from the ternary digits of
//! the (dyadic) floating-point input. Integration against `lambda` walks the
//! self-similar cell tree: a cell of depth `d` has length `3^-d`, mass `2^-d`,
//! and the two-endpoint rule on every depth-`m` cell is precisely the level-`m`
//! atomic approximation `lambda_m`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::IntervalQuery;
use crate::quadrature::{self, Estimate};

const MAX_TERNARY_DIGITS: u32 = 64;
const MAX_LEVEL_ATOMS: u64 = 1 << 24;
const MAX_TREE_DEPTH: u32 = 120;
const MAX_TREE_CELLS: usize = 4_000_000;
/// Translates integrated cell by cell before the Euler-Maclaurin tail takes over.
const TRANSLATE_WINDOW: u64 = 32;
/// Beyond this many translates a bounded query also goes through the tail expansion.
const DIRECT_TRANSLATES: u64 = 4096;

/// How integrals against a Cantor-type measure are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CantorQuadrature {
    /// Locally refined cell tree, depth chosen from the tolerance.
    #[default]
    Adaptive,
    /// The uniform level-`m` approximation `lambda_m`.
    Level(u32),
}

/// `Lambda(x) = lambda([0, x])` as a function object.
#[derive(Debug, Clone, Copy, Default)]
pub struct CantorCdf;

impl CantorCdf {
    pub fn eval(&self, x: f64) -> f64 {
        cantor_cdf(x)
    }
}

/// `Lambda(x)` for the extended Bernoulli measure; zero for `x <= 0`.
pub fn cantor_cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return f64::INFINITY;
    }
    let whole = x.floor();
    let frac = x - whole;
    whole + unit_cantor_cdf(frac)
}

/// Splits a finite `t` in `[0, 1)` into `(mantissa, shift)` with `t = mantissa * 2^-shift`.
fn dyadic_parts(t: f64) -> (u64, u32) {
    if t == 0.0 {
        return (0, 0);
    }
    let bits = t.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac_bits = bits & ((1u64 << 52) - 1);
    let (mut mantissa, mut exponent) = if exp_bits == 0 {
        (frac_bits, -1074)
    } else {
        (frac_bits | (1u64 << 52), exp_bits - 1075)
    };
    while mantissa & 1 == 0 {
        mantissa >>= 1;
        exponent += 1;
    }
    debug_assert!(exponent < 0);
    (mantissa, (-exponent) as u32)
}

fn unit_cantor_cdf(t: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&t));
    if t == 0.0 {
        return 0.0;
    }
    let (mantissa, shift) = dyadic_parts(t);
    if shift <= 125 {
        ternary_scan_u128(mantissa as u128, shift)
    } else {
        ternary_scan_big(BigUint::from(mantissa), shift)
    }
}

fn ternary_scan_u128(mut num: u128, shift: u32) -> f64 {
    let mask = (1u128 << shift) - 1;
    let mut value = 0.0;
    let mut half = 0.5;
    let mut significant = 0;
    while significant < MAX_TERNARY_DIGITS {
        num *= 3;
        let digit = num >> shift;
        num &= mask;
        match digit {
            0 => {}
            1 => return value + half,
            _ => value += half,
        }
        if value > 0.0 {
            significant += 1;
        }
        if num == 0 {
            break;
        }
        half *= 0.5;
    }
    value
}

fn ternary_scan_big(mut num: BigUint, shift: u32) -> f64 {
    let modulus = BigUint::one() << shift;
    let mut value = 0.0;
    let mut half = 0.5;
    let mut significant = 0;
    while significant < MAX_TERNARY_DIGITS {
        num *= 3u32;
        let digit = (&num >> shift).to_u32().unwrap_or(0);
        num %= &modulus;
        match digit {
            0 => {}
            1 => return value + half,
            _ => value += half,
        }
        if value > 0.0 {
            significant += 1;
        }
        if num.is_zero() {
            break;
        }
        half *= 0.5;
    }
    value
}

/// Generalized inverse `inf { x : Lambda(x) >= y }`; on a flat segment this is the
/// left edge of the segment.
pub fn cantor_inv_cdf(y: f64) -> f64 {
    if y.is_nan() {
        return f64::NAN;
    }
    if y <= 0.0 {
        return 0.0;
    }
    if y.is_infinite() {
        return f64::INFINITY;
    }
    let whole = y.ceil() - 1.0;
    let frac = y - whole;
    if frac >= 1.0 {
        return whole + 1.0;
    }
    let (mantissa, shift) = dyadic_parts(frac);
    // Binary digits b_1 .. b_shift of frac, b_shift = 1 (mantissa is odd).
    // Replace the trailing 1 by 0111..., i.e. ternary digit 1 at that position.
    let mut x = 0.0;
    let mut third = 1.0;
    for i in 1..=shift {
        third /= 3.0;
        if third == 0.0 {
            break;
        }
        let bit_pos = shift - i;
        let bit = if bit_pos >= 64 {
            0
        } else {
            (mantissa >> bit_pos) & 1
        };
        if i == shift {
            x += third;
        } else if bit == 1 {
            x += 2.0 * third;
        }
    }
    let mut x = whole + x;
    // Guard against the sum landing one ulp short of the segment edge.
    for _ in 0..16 {
        if cantor_cdf(x) >= y {
            break;
        }
        x = x.next_up();
    }
    x
}

/// The level-`m` approximation restricted to a range of unit translates.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMApprox {
    pub m: u32,
    /// `(position, weight)`, sorted by position.
    pub atoms: Vec<(f64, f64)>,
}

impl LevelMApprox {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|&(_, w)| w).sum()
    }

    /// `lambda_m([0, x])`
    pub fn cdf(&self, x: f64) -> f64 {
        self.atoms
            .iter()
            .take_while(|&&(p, _)| p <= x)
            .map(|&(_, w)| w)
            .sum()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.atoms.iter().map(|&(p, w)| w * f(p)).sum()
    }
}

/// Enumerates `J(Omega^m)` with weight `2^-(m+1)` per atom for every translate in range.
///
/// `J(x) = sum_k a_k x_k` with `a_0 = 3^-m` and `a_k = 2 * 3^(k-1-m)`.
pub fn level_m_atoms(m: u32, translates: std::ops::Range<u64>) -> Result<LevelMApprox> {
    if translates.is_empty() {
        return Err(Error::InvalidArgument("empty translate range".into()));
    }
    if m > 38 {
        return Err(Error::ResourceCap(format!(
            "level {m} exceeds depth limit 38"
        )));
    }
    let per_translate = 1u64 << (m + 1);
    let count = per_translate.saturating_mul(translates.end - translates.start);
    if count > MAX_LEVEL_ATOMS {
        return Err(Error::ResourceCap(format!(
            "level {m} over {} translates needs {count} atoms (cap {MAX_LEVEL_ATOMS})",
            translates.end - translates.start
        )));
    }
    let scale = 3f64.powi(m as i32);
    let weight = 0.5f64.powi(m as i32 + 1);
    let mut coefficients = Vec::with_capacity(m as usize + 1);
    coefficients.push(1u64);
    for k in 1..=m {
        coefficients.push(2 * 3u64.pow(k - 1));
    }
    let mut unit: Vec<u64> = (0..per_translate)
        .map(|bits| {
            coefficients
                .iter()
                .enumerate()
                .filter(|(k, _)| bits >> k & 1 == 1)
                .map(|(_, c)| c)
                .sum()
        })
        .collect();
    unit.sort_unstable();
    let mut atoms = Vec::with_capacity(count as usize);
    for n in translates {
        atoms.extend(unit.iter().map(|&j| (n as f64 + j as f64 / scale, weight)));
    }
    Ok(LevelMApprox { m, atoms })
}

/// `int f d lambda_m` over the unit Cantor set for `m = 0..=m_max`.
pub fn weak_convergence_check(f: impl Fn(f64) -> f64, m_max: u32) -> Result<Vec<f64>> {
    (0..=m_max)
        .map(|m| Ok(level_m_atoms(m, 0..1)?.integrate(&f)))
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    left: f64,
    len: f64,
    /// `Lambda(left)`
    lam: f64,
    depth: u32,
}

impl Cell {
    fn right(&self) -> f64 {
        self.left + self.len
    }
    fn mass(&self) -> f64 {
        0.5f64.powi(self.depth as i32)
    }
    fn children(&self) -> (Cell, Cell) {
        let len = self.len / 3.0;
        let half = 0.5 * self.mass();
        (
            Cell {
                left: self.left,
                len,
                lam: self.lam,
                depth: self.depth + 1,
            },
            Cell {
                left: self.left + 2.0 * len,
                len,
                lam: self.lam + half,
                depth: self.depth + 1,
            },
        )
    }
    fn splittable(&self) -> bool {
        let len = self.len / 3.0;
        self.depth < MAX_TREE_DEPTH
            && self.left + len > self.left
            && self.left + 2.0 * len < self.right()
    }
}

enum Overlap {
    Outside,
    Inside,
    Partial,
}

fn overlap(cell: &Cell, iq: &IntervalQuery) -> Overlap {
    let (l, r) = (cell.left, cell.right());
    if r < iq.a || (r == iq.a && !iq.includes_a()) || l > iq.b || (l == iq.b && !iq.includes_b()) {
        return Overlap::Outside;
    }
    if iq.contains(l) && iq.contains(r) {
        Overlap::Inside
    } else {
        Overlap::Partial
    }
}

/// The two-endpoint rule restricted to the endpoints inside the query.
fn endpoint_rule(f: &dyn Fn(f64, f64) -> f64, cell: &Cell, iq: &IntervalQuery) -> f64 {
    let half = 0.5 * cell.mass();
    let mut sum = 0.0;
    if iq.contains(cell.left) {
        sum += term(f(cell.left, cell.lam), half);
    }
    let r = cell.right();
    if iq.contains(r) {
        sum += term(f(r, cell.lam + cell.mass()), half);
    }
    sum
}

fn term(value: f64, weight: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        value * weight
    }
}

fn level_walk(f: &dyn Fn(f64, f64) -> f64, cell: Cell, iq: &IntervalQuery, m: u32) -> f64 {
    match overlap(&cell, iq) {
        Overlap::Outside => 0.0,
        _ if cell.depth >= m => endpoint_rule(f, &cell, iq),
        _ => {
            let (c1, c2) = cell.children();
            level_walk(f, c1, iq, m) + level_walk(f, c2, iq, m)
        }
    }
}

struct Pending {
    cell: Cell,
    value: f64,
    error: f64,
}

impl PartialEq for Pending {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Pending {}
impl PartialOrd for Pending {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Pending {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

fn assess(f: &dyn Fn(f64, f64) -> f64, cell: Cell, iq: &IntervalQuery) -> Option<Pending> {
    match overlap(&cell, iq) {
        Overlap::Outside => None,
        Overlap::Inside => {
            let coarse = endpoint_rule(f, &cell, iq);
            let (c1, c2) = cell.children();
            let fine = endpoint_rule(f, &c1, iq) + endpoint_rule(f, &c2, iq);
            Some(Pending {
                cell,
                value: fine,
                error: (fine - coarse).abs(),
            })
        }
        Overlap::Partial => {
            let (c1, c2) = cell.children();
            let fine = endpoint_rule(f, &c1, iq) + endpoint_rule(f, &c2, iq);
            // Scale of the integrand on the part of the cell inside the query.
            let probe = [cell.left, c1.right(), c2.left, cell.right(), iq.a, iq.b]
                .into_iter()
                .filter(|&x| iq.contains(x) && x >= cell.left && x <= cell.right())
                .map(|x| f(x, crate::cantor::cantor_cdf(x)).abs())
                .fold(0.0, f64::max);
            Some(Pending {
                cell,
                value: fine,
                error: probe * cell.mass(),
            })
        }
    }
}

/// A cell below float resolution: the integrand is flat across it, so a partial
/// overlap is weighted by the exact mass of the overlap.
fn settle(f: &dyn Fn(f64, f64) -> f64, top: &Pending, iq: &IntervalQuery) -> Estimate {
    let cell = &top.cell;
    match overlap(cell, iq) {
        Overlap::Partial => {
            let a = iq.a.max(cell.left);
            let b = iq.b.min(cell.right());
            let mass = (cantor_cdf(b) - cantor_cdf(a)).max(0.0);
            let x = if iq.contains(a) { a } else { b };
            let value = term(f(x, cantor_cdf(x)), mass);
            Estimate {
                value,
                error: value.abs() * 1e-12,
            }
        }
        _ => Estimate {
            value: top.value,
            error: top.error,
        },
    }
}

fn adaptive_walk(
    f: &dyn Fn(f64, f64) -> f64,
    roots: &[Cell],
    iq: &IntervalQuery,
    tol: f64,
) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut settled = Estimate::ZERO;
    for &root in roots {
        if let Some(p) = assess(f, root, iq) {
            total += p.value;
            total_err += p.error;
            heap.push(p);
        }
    }
    let mut cells = heap.len();
    loop {
        if total.is_nan() || total_err.is_nan() {
            return Err(Error::Quadrature {
                residual: f64::NAN,
                tol,
            });
        }
        if total.is_infinite() {
            return Ok(Estimate {
                value: total,
                error: 0.0,
            });
        }
        if total_err <= tol * total.abs() || total_err <= f64::MIN_POSITIVE {
            return Ok(Estimate {
                value: total,
                error: total_err,
            });
        }
        let Some(top) = heap.pop() else {
            let residual = settled.error / total.abs().max(f64::MIN_POSITIVE);
            if residual <= tol {
                return Ok(Estimate {
                    value: total,
                    error: settled.error,
                });
            }
            return Err(Error::Quadrature { residual, tol });
        };
        if !top.cell.splittable() {
            total -= top.value;
            total_err -= top.error;
            let last = settle(f, &top, iq);
            total += last.value;
            total_err += last.error;
            settled += last;
            continue;
        }
        if cells > MAX_TREE_CELLS {
            let residual = total_err / total.abs().max(f64::MIN_POSITIVE);
            return Err(Error::Quadrature { residual, tol });
        }
        total -= top.value;
        total_err -= top.error;
        let (c1, c2) = top.cell.children();
        for child in [c1, c2] {
            if let Some(p) = assess(f, child, iq) {
                total += p.value;
                total_err += p.error;
                heap.push(p);
                cells += 1;
            }
        }
        if total_err < 0.0 {
            total_err = heap.iter().map(|p| p.error).sum::<f64>() + settled.error;
        }
    }
}

/// `int_iq f(t, Lambda(t)) lambda(dt)` for the extended measure restricted to
/// `translates` unit translates (`None` means all of `[0, inf)`).
pub(crate) fn integrate_cantor(
    f: &dyn Fn(f64, f64) -> f64,
    iq: &IntervalQuery,
    translates: Option<u64>,
    mode: CantorQuadrature,
    tol: f64,
) -> Result<Estimate> {
    let support_end = translates.map_or(f64::INFINITY, |n| n as f64);
    let iq = iq.intersect(&IntervalQuery {
        a: 0.0,
        b: support_end,
        include_a: true,
        include_b: true,
    });
    if iq.is_empty() {
        return Ok(Estimate::ZERO);
    }
    let first = iq.a.max(0.0).floor() as u64;
    let last_exclusive = if iq.b.is_finite() {
        (iq.b.ceil() as u64).max(first + 1)
    } else {
        u64::MAX
    };
    let last_exclusive = match translates {
        Some(n) => last_exclusive.min(n),
        None => last_exclusive,
    };
    let window_end = last_exclusive.min(first + TRANSLATE_WINDOW);
    let roots: Vec<Cell> = (first..window_end)
        .map(|k| Cell {
            left: k as f64,
            len: 1.0,
            lam: k as f64,
            depth: 0,
        })
        .collect();
    let mut estimate = match mode {
        CantorQuadrature::Level(m) => {
            let value = roots.iter().map(|&c| level_walk(f, c, &iq, m)).sum();
            Estimate::exact(value)
        }
        CantorQuadrature::Adaptive => adaptive_walk(f, &roots, &iq, tol)?,
    };
    if window_end < last_exclusive {
        let k0 = window_end as f64;
        if iq.b.is_finite() && last_exclusive - window_end > DIRECT_TRANSLATES {
            // whole translates [k0, kb) as a difference of tails, then the partial last one
            let kb = iq.b.floor();
            let (from, beyond) = (translate_tail(f, k0, tol)?, translate_tail(f, kb, tol)?);
            estimate += Estimate {
                value: from.value - beyond.value,
                error: from.error + beyond.error,
            };
            let last = [Cell {
                left: kb,
                len: 1.0,
                lam: kb,
                depth: 0,
            }];
            let part = IntervalQuery {
                a: kb,
                include_a: true,
                ..iq
            };
            estimate += match mode {
                CantorQuadrature::Level(m) => Estimate::exact(level_walk(f, last[0], &part, m)),
                CantorQuadrature::Adaptive => adaptive_walk(f, &last, &part, tol)?,
            };
        } else if iq.b.is_finite() {
            // Bounded but wide query: remaining translates one by one.
            let rest: Vec<Cell> = (window_end..last_exclusive)
                .map(|k| Cell {
                    left: k as f64,
                    len: 1.0,
                    lam: k as f64,
                    depth: 0,
                })
                .collect();
            estimate += match mode {
                CantorQuadrature::Level(m) => {
                    Estimate::exact(rest.iter().map(|&c| level_walk(f, c, &iq, m)).sum())
                }
                CantorQuadrature::Adaptive => adaptive_walk(f, &rest, &iq, tol)?,
            };
        } else {
            estimate += translate_tail(f, k0, tol)?;
        }
    }
    Ok(estimate)
}

/// `sum_{k >= k0} int_{[k, k+1]} f d lambda` by Euler-Maclaurin in the translate
/// index, the continuous extension being `F_c(t) = f(t + c, t + Lambda(c))`.
fn translate_tail(f: &dyn Fn(f64, f64) -> f64, k0: f64, tol: f64) -> Result<Estimate> {
    let inner_tol = (tol * 0.1).max(1e-14);
    let failure: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let err_acc = std::cell::Cell::new(0.0f64);
    let phi = |c: f64, lam_c: f64| -> f64 {
        let shifted = |t: f64| f(t + c, t + lam_c);
        let integral = match quadrature::integrate(&shifted, k0, f64::INFINITY, inner_tol) {
            Ok(e) => e,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                return f64::NAN;
            }
        };
        let f0 = shifted(k0);
        let d1 = |h: f64| (shifted(k0 + h) - shifted(k0 - h)) / (2.0 * h);
        let d3 = |h: f64| {
            (shifted(k0 + 2.0 * h) - 2.0 * shifted(k0 + h) + 2.0 * shifted(k0 - h)
                - shifted(k0 - 2.0 * h))
                / (2.0 * h.powi(3))
        };
        let h = 1e-3 * k0.max(1.0);
        let (a, b) = (d1(h), d1(h / 2.0));
        let first = (4.0 * b - a) / 3.0;
        let (a3, b3) = (d3(40.0 * h), d3(20.0 * h));
        let third = (4.0 * b3 - a3) / 3.0;
        // next term of the expansion, F^(5) / 30240, sized from the ratio F''' / F'
        let ratio = if first != 0.0 {
            (third / first).abs().min(1.0)
        } else {
            1.0
        };
        let correction_err =
            (first - b).abs() / 12.0 + (third - b3).abs() / 720.0 + (third / 720.0).abs() * ratio;
        err_acc.set(err_acc.get().max(correction_err + integral.error));
        integral.value + 0.5 * f0 - first / 12.0 + third / 720.0
    };
    let root = [Cell {
        left: 0.0,
        len: 1.0,
        lam: 0.0,
        depth: 0,
    }];
    let everything = IntervalQuery::closed(0.0, 1.0)?;
    let outer = adaptive_walk(&phi, &root, &everything, tol.max(1e-12));
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let outer = outer?;
    Ok(Estimate {
        value: outer.value,
        error: outer.error + err_acc.get(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Level-m oracle for Lambda, independent of the digit scan.
    fn level_cdf(m: u32, x: f64) -> f64 {
        level_m_atoms(m, 0..1).unwrap().cdf(x)
    }

    #[test]
    fn cdf_at_thirds_and_ninths() {
        // 1/3 and 1/9 are not floats; the Holder modulus turns one ulp into ~1e-11
        assert!((cantor_cdf(1.0 / 3.0) - 0.5).abs() < 1e-10);
        assert!((cantor_cdf(1.0 / 9.0) - 0.25).abs() < 1e-10);
        // 3/4 = 0.2020... in base 3
        assert!((cantor_cdf(0.75) - 2.0 / 3.0).abs() < 1e-15);
        assert!((cantor_cdf(2.5) - 2.5).abs() < 1e-15);
        assert_eq!(cantor_cdf(0.0), 0.0);
        assert_eq!(cantor_cdf(1.0), 1.0);
    }

    #[test]
    fn level_oracle_agrees_with_digit_scan() {
        // lambda_m([0,x]) is within 2^-m of Lambda(x)
        for &x in &[1.0 / 9.0, 0.5, 0.2, 0.77, 0.999, 1.0 / 3.0] {
            for m in [6, 10, 14] {
                let oracle = level_cdf(m, x);
                assert!(
                    (oracle - cantor_cdf(x)).abs() <= 0.5f64.powi(m as i32) + 1e-15,
                    "x={x} m={m}"
                );
            }
        }
        // the ninth converges to 1/4
        assert!((level_cdf(14, 1.0 / 9.0) - 0.25).abs() < 1e-4);
        // 0.5 sits in the removed middle third
        assert!((level_cdf(14, 0.5) - 0.5).abs() < 1e-4);
    }

    #[test]
    fn tiny_arguments_use_the_wide_path() {
        for m in [40, 60, 120] {
            let x = 3f64.powi(-m);
            let expect = 0.5f64.powi(m);
            let got = cantor_cdf(x);
            assert!(
                (got / expect - 1.0).abs() < 1e-9,
                "m={m}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn inverse_returns_left_edge_of_flat_segment() {
        assert!((cantor_inv_cdf(0.5) - 1.0 / 3.0).abs() < 1e-15);
        assert!((cantor_inv_cdf(0.25) - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(cantor_inv_cdf(1.0), 1.0);
        assert!((cantor_inv_cdf(2.5) - (2.0 + 1.0 / 3.0)).abs() < 1e-15);
        for &y in &[0.5, 0.25, 0.3, 0.9, 1.7] {
            let x = cantor_inv_cdf(y);
            assert!(cantor_cdf(x) >= y);
            assert!(cantor_cdf(x.next_down().next_down()) <= y);
        }
    }

    #[test]
    fn level_zero_and_one_atoms() {
        let l0 = level_m_atoms(0, 0..1).unwrap();
        assert_eq!(l0.atoms, vec![(0.0, 0.5), (1.0, 0.5)]);
        let l1 = level_m_atoms(1, 0..1).unwrap();
        let positions: Vec<f64> = l1.atoms.iter().map(|a| a.0).collect();
        assert_eq!(positions, vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0]);
        assert!(l1.atoms.iter().all(|a| a.1 == 0.25));
        for m in 0..12 {
            assert!((level_m_atoms(m, 0..1).unwrap().total_mass() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            level_m_atoms(30, 0..1),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn moments_converge() {
        let ones = weak_convergence_check(|_| 1.0, 8).unwrap();
        assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-12));
        let mean = weak_convergence_check(|x| x, 10).unwrap();
        assert!((mean.last().unwrap() - 0.5).abs() < 1e-12);
        let second = weak_convergence_check(|x| x * x, 14).unwrap();
        assert!((second.last().unwrap() - 0.375).abs() < 1e-6);
        // Cauchy: successive differences shrink
        let diffs: Vec<f64> = second.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(diffs.windows(2).skip(2).all(|d| d[1] <= d[0] + 1e-15));
    }

    #[test]
    fn level_walk_matches_atom_enumeration() {
        let iq = IntervalQuery::closed(0.1, 1.7).unwrap();
        let f = |x: f64| (x + 1.0).recip();
        let atoms = level_m_atoms(7, 0..2).unwrap();
        let expect: f64 = atoms
            .atoms
            .iter()
            .filter(|a| iq.contains(a.0))
            .map(|a| a.1 * f(a.0))
            .sum();
        let got =
            integrate_cantor(&|x, _| f(x), &iq, None, CantorQuadrature::Level(7), 1e-10).unwrap();
        assert!(
            (got.value - expect).abs() < 1e-13,
            "{} vs {expect}",
            got.value
        );
    }

    #[test]
    fn adaptive_integral_of_cdf_power_matches_transform() {
        // int_{[x,inf)} Lambda^-2 d lambda = 1 / Lambda(x)
        for &x in &[1.0 / 3.0, 1.0 / 9.0, 1.5] {
            let iq = IntervalQuery::from(x);
            let got = integrate_cantor(
                &|_, lam: f64| lam.powi(-2),
                &iq,
                None,
                CantorQuadrature::Adaptive,
                1e-9,
            )
            .unwrap();
            let expect = 1.0 / cantor_cdf(x);
            assert!(
                (got.value / expect - 1.0).abs() < 1e-7,
                "x={x}: {} vs {expect}",
                got.value
            );
        }
    }

    #[test]
    fn adaptive_x_power_near_origin() {
        // int_{[3^-m, inf)} t^-3 d lambda grows like (27/2)^m
        let a = integrate_cantor(
            &|t: f64, _| t.powi(-3),
            &IntervalQuery::from(3f64.powi(-8)),
            None,
            CantorQuadrature::Adaptive,
            1e-7,
        )
        .unwrap();
        let b = integrate_cantor(
            &|t: f64, _| t.powi(-3),
            &IntervalQuery::from(3f64.powi(-9)),
            None,
            CantorQuadrature::Adaptive,
            1e-7,
        )
        .unwrap();
        let ratio = b.value / a.value;
        assert!((ratio - 13.5).abs() < 0.2, "ratio {ratio}");
    }
}
