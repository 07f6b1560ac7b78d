//! Candidate points for supremum searches and discrete stand-ins for the optimizer.

use super::{Atomic, DensityPiece, IntervalQuery, Measure, MeasureKind, Weight};
use crate::error::Result;

/// How finely a measure's support is sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    /// Triadic depth for Cantor components.
    pub depth: u32,
    /// Grid points per decade (and per unit length on bounded pieces).
    pub grid: usize,
    /// Largest integer atom enumerated from an infinite tail.
    pub truncation: i64,
}

/// Integers below this are enumerated one by one; beyond, tail atoms are sampled geometrically.
const DENSE_INTEGERS: i64 = 4096;

fn atomic_candidates(a: &Atomic, res: &Resolution, out: &mut Vec<f64>) {
    out.extend_from_slice(a.points());
    let Some(tail) = a.tail() else { return };
    let end = tail.truncation.min(res.truncation).max(tail.start);
    let dense_end = end.min(tail.start.saturating_add(DENSE_INTEGERS));
    out.extend((tail.start..=dense_end).map(|n| n as f64));
    if dense_end < end {
        let per_decade = (res.grid * 8).max(64) as f64;
        let ratio = 10f64.powf(1.0 / per_decade);
        let mut x = dense_end as f64;
        while x < end as f64 {
            x *= ratio;
            let n = (x.round() as i64).min(end);
            out.push(n as f64);
            out.push((n - 1).max(tail.start) as f64);
        }
        out.push(end as f64);
    }
}

fn ladder(grid: usize) -> impl Iterator<Item = f64> {
    let per_decade = grid.max(1);
    let steps = 16 * per_decade;
    (0..=steps).map(move |i| 10f64.powf(-8.0 + i as f64 / per_decade as f64))
}

fn piece_candidates(p: &DensityPiece, res: &Resolution, out: &mut Vec<f64>) {
    let (lo, hi) = (p.lo, p.hi);
    for e in [lo, hi] {
        if e.is_finite() {
            out.push(e);
        }
    }
    let inside = |x: f64| x > lo && x < hi;
    if lo.is_finite() {
        out.extend(ladder(res.grid).map(|d| lo + d).filter(|&x| inside(x)));
    }
    if hi.is_finite() {
        out.extend(ladder(res.grid).map(|d| hi - d).filter(|&x| inside(x)));
    }
    if !lo.is_finite() && !hi.is_finite() {
        out.push(0.0);
        out.extend(ladder(res.grid).flat_map(|d| [d, -d]));
    }
    if lo.is_finite() && hi.is_finite() {
        let n = res.grid * 16;
        out.extend((1..n).map(|i| lo + (hi - lo) * i as f64 / n as f64));
    }
}

fn cantor_candidates(translates: Option<u64>, res: &Resolution, out: &mut Vec<f64>) {
    let last = translates.unwrap_or(64).min(64);
    for n in 0..=last {
        out.push(n as f64);
    }
    let near = last.min(8);
    for m in 1..=res.depth {
        let t = 3f64.powi(-(m as i32));
        for n in 0..near {
            let n = n as f64;
            out.extend([n + t, n + 2.0 * t, n + 1.0 - t, n + 1.0 - 2.0 * t]);
        }
    }
}

impl Measure {
    /// Points where the cumulative function of this measure changes character.
    pub(crate) fn candidates(&self, res: &Resolution, out: &mut Vec<f64>) {
        match &self.kind {
            MeasureKind::Atomic(a) => atomic_candidates(a, res, out),
            MeasureKind::Density(d) => {
                for p in d.pieces() {
                    piece_candidates(p, res, out);
                }
            }
            MeasureKind::Cantor(c) => cantor_candidates(c.translates, res, out),
            MeasureKind::Weighted { base, .. } => base.candidates(res, out),
            MeasureKind::Transformed { base, map } => {
                let start = out.len();
                base.candidates(res, out);
                for x in &mut out[start..] {
                    *x = map.apply(*x);
                }
            }
        }
    }

    /// Atoms of a purely discrete measure, tails enumerated up to `truncation`.
    /// `None` when the measure has a continuous part.
    pub(crate) fn discrete_atoms(&self, limit: usize) -> Result<Option<Vec<(f64, f64)>>> {
        Ok(match &self.kind {
            MeasureKind::Atomic(a) => Some(a.atoms_in(&IntervalQuery::everything(), limit)?),
            MeasureKind::Density(_) | MeasureKind::Cantor(_) => None,
            MeasureKind::Weighted { base, weight } => match base.discrete_atoms(limit)? {
                None => None,
                Some(atoms) => {
                    let mut out = Vec::with_capacity(atoms.len());
                    for (x, w) in atoms {
                        let factor = match weight {
                            Weight::XPower { exponent } if x > 0.0 => x.powf(*exponent),
                            Weight::XPower { .. } => 0.0,
                            Weight::Custom(f) => f.call(x),
                            Weight::CdfPower { .. } => {
                                unreachable!("cdf-power weights need an atomless base")
                            }
                        };
                        let w = super::product(factor, w);
                        if w > 0.0 {
                            out.push((x, w));
                        }
                    }
                    Some(out)
                }
            },
            MeasureKind::Transformed { base, map } => base.discrete_atoms(limit)?.map(|atoms| {
                let mut atoms: Vec<(f64, f64)> =
                    atoms.into_iter().map(|(x, w)| (map.apply(x), w)).collect();
                atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
                atoms
            }),
        })
    }

    /// A discrete measure `sum_k m_k delta_{x_k}` below this one in the sense that
    /// every nondecreasing `G >= 0` has `int G d(result) <= int G d(self)`.
    ///
    /// Discrete measures are returned exactly. Otherwise the mass of each cell
    /// `[b_k, b_{k+1})` (the last cell unbounded) moves to its left endpoint, and mass
    /// below `b_0` is dropped.
    pub(crate) fn left_point_masses(
        &self,
        breakpoints: &[f64],
        limit: usize,
    ) -> Result<Vec<(f64, f64)>> {
        if let Some(atoms) = self.discrete_atoms(limit)? {
            return Ok(atoms);
        }
        let mut out = Vec::with_capacity(breakpoints.len());
        for (k, &b) in breakpoints.iter().enumerate() {
            let iq = match breakpoints.get(k + 1) {
                Some(&next) => IntervalQuery::right_open(b, next)?,
                None => IntervalQuery::from(b),
            };
            let m = self.interval_mass(&iq)?;
            if m > 0.0 {
                out.push((b, m));
            }
        }
        Ok(out)
    }
}
