//! Exponent bookkeeping, the sharp factor `k_{q,p}`, and the supremum `B`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{product, IntervalQuery, Measure, Resolution};
use crate::special::ln_beta;

/// The exponent tuple `(p, q, p*, q*, r)` with `1 < p <= q < inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub p_star: f64,
    pub q_star: f64,
    pub r: f64,
}

impl Exponents {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::InvalidExponents(format!(
                "p must be a finite number > 1, got {p}"
            )));
        }
        if !(q >= p && q.is_finite()) {
            return Err(Error::InvalidExponents(format!(
                "q must be finite and at least p = {p}, got {q}"
            )));
        }
        Ok(Self {
            p,
            q,
            p_star: p / (p - 1.0),
            q_star: q / (q - 1.0),
            r: q / p - 1.0,
        })
    }

    pub fn is_diagonal(&self) -> bool {
        self.p == self.q
    }
}

/// The sharp factor `k_{q,p}`.
pub fn k_sharp(e: &Exponents) -> f64 {
    if e.is_diagonal() {
        return e.p.powf(1.0 / e.p) * e.p_star.powf(1.0 / e.p_star);
    }
    let r = e.r;
    let ln_b = ln_beta(1.0 / r, (e.q - 1.0) / r).expect("positive Beta arguments for p < q");
    ((r.ln() - ln_b) * (1.0 / e.p - 1.0 / e.q)).exp()
}

/// Earlier factors: `prokhorov`, `opic_kufner`, and `mazja` (only for `p < q`).
pub fn k_literature(e: &Exponents) -> BTreeMap<String, f64> {
    let (p, q, ps, qs) = (e.p, e.q, e.p_star, e.q_star);
    let mut out = BTreeMap::new();
    out.insert("prokhorov".to_string(), p.powf(1.0 / q) * ps.powf(1.0 / ps));
    out.insert(
        "opic_kufner".to_string(),
        (1.0 + q / ps).powf(1.0 / q) * (1.0 + ps / q).powf(1.0 / ps),
    );
    if p < q {
        out.insert("mazja".to_string(), qs.powf(1.0 / ps) * q.powf(1.0 / q));
    }
    out
}

/// Refinement schedule for [`compute_b`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BConfig {
    /// Stop once the estimate changes by less than this (relative) across a level.
    pub tol: f64,
    /// Relative tolerance of each numerically evaluated mass.
    pub mass_tol: f64,
    /// Triadic depth of Cantor candidates at level 0, and its increment per level.
    pub depth: u32,
    pub depth_step: u32,
    /// Grid points per decade on density supports at level 0 (doubled per level, capped).
    pub grid: usize,
    pub max_grid: usize,
    /// Integer-tail truncation at level 0, its growth factor and cap.
    pub truncation: i64,
    pub truncation_growth: i64,
    pub max_truncation: i64,
    pub min_levels: usize,
    pub max_levels: usize,
    /// Divergence: growth of at least `growth_factor` for `growth_streak` levels in a
    /// row, with the estimate above `divergence_floor`.
    pub growth_factor: f64,
    pub growth_streak: usize,
    pub divergence_floor: f64,
    /// Golden-section refinement around the best candidates on continuous parts.
    pub local_refine: bool,
}

impl Default for BConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            mass_tol: 1e-10,
            depth: 14,
            depth_step: 4,
            grid: 4,
            max_grid: 64,
            truncation: 10_000,
            truncation_growth: 10,
            max_truncation: 10_000_000,
            min_levels: 2,
            max_levels: 40,
            growth_factor: 1.05,
            growth_streak: 5,
            divergence_floor: 1e6,
            local_refine: true,
        }
    }
}

impl BConfig {
    fn resolution(&self, level: usize) -> Resolution {
        let mut truncation = self.truncation.max(1);
        for _ in 0..level {
            if truncation >= self.max_truncation {
                break;
            }
            truncation = truncation.saturating_mul(self.truncation_growth.max(1));
        }
        let grid = self
            .grid
            .max(1)
            .saturating_mul(1 << level.min(20))
            .min(self.max_grid.max(self.grid));
        Resolution {
            depth: self.depth + self.depth_step * level as u32,
            grid,
            truncation: truncation.min(self.max_truncation.max(self.truncation)),
        }
    }
}

/// One refinement level of the supremum search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub level: usize,
    pub depth: u32,
    pub truncation: i64,
    pub candidates: usize,
    #[serde(with = "crate::extended")]
    pub value: f64,
    #[serde(with = "crate::extended")]
    pub argmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BEstimate {
    /// The supremum; `+inf` once divergence is declared.
    #[serde(with = "crate::extended")]
    pub value: f64,
    pub divergent: bool,
    pub converged: bool,
    #[serde(with = "crate::extended")]
    pub argmax: f64,
    pub trace: Vec<TracePoint>,
    /// Best candidates of the final level, by decreasing `h`.
    pub top_candidates: Vec<(f64, f64)>,
}

/// `h(x) = nu((-inf, x])^{1/p*} mu([x, inf))^{1/q}` with `0 * inf = 0`.
pub fn h_at(nu: &Measure, mu: &Measure, e: &Exponents, x: f64, tol: f64) -> Result<f64> {
    let s = nu.interval_mass_with(&IntervalQuery::up_to(x), tol)?;
    if s == 0.0 {
        return Ok(0.0);
    }
    let t = mu.interval_mass_with(&IntervalQuery::from(x), tol)?;
    Ok(product(s.powf(1.0 / e.p_star), t.powf(1.0 / e.q)))
}

fn candidate_set(nu: &Measure, mu: &Measure, res: &Resolution) -> Vec<f64> {
    let mut xs = Vec::new();
    nu.candidates(res, &mut xs);
    mu.candidates(res, &mut xs);
    xs.retain(|x| x.is_finite());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

struct Evaluator<'a> {
    nu: Measure,
    mu: Measure,
    e: &'a Exponents,
    tol: f64,
    cache: HashMap<u64, f64>,
}

impl Evaluator<'_> {
    fn eval_all(&mut self, xs: &[f64]) -> Result<Vec<f64>> {
        let missing: Vec<f64> = xs
            .iter()
            .copied()
            .filter(|x| !self.cache.contains_key(&x.to_bits()))
            .collect();
        let fresh: Vec<Result<f64>> = missing
            .par_iter()
            .map(|&x| h_at(&self.nu, &self.mu, self.e, x, self.tol))
            .collect();
        for (x, v) in missing.iter().zip(fresh) {
            self.cache.insert(x.to_bits(), v?);
        }
        Ok(xs.iter().map(|x| self.cache[&x.to_bits()]).collect())
    }

    fn eval(&mut self, x: f64) -> Result<f64> {
        if let Some(&v) = self.cache.get(&x.to_bits()) {
            return Ok(v);
        }
        let v = h_at(&self.nu, &self.mu, self.e, x, self.tol)?;
        self.cache.insert(x.to_bits(), v);
        Ok(v)
    }

    /// Golden-section search for a larger `h` strictly between two candidates.
    fn refine(&mut self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let (mut fc, mut fd) = (self.eval(c)?, self.eval(d)?);
        let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
        for _ in 0..40 {
            if !(b - a > 1e-14 * (a.abs() + b.abs()).max(1e-300)) {
                break;
            }
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = self.eval(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = self.eval(d)?;
            }
            for (x, v) in [(c, fc), (d, fd)] {
                if v > best.1 {
                    best = (x, v);
                }
            }
        }
        Ok(best)
    }
}

/// Supremum of `h` over a refining candidate set, with divergence detection.
pub fn compute_b(nu: &Measure, mu: &Measure, e: &Exponents, cfg: &BConfig) -> Result<BEstimate> {
    let vanishes = |m: &Measure| m.is_finite_atomic() && m.total_mass().is_ok_and(|t| t == 0.0);
    if (vanishes(nu) || vanishes(mu)) && !(nu.is_finite_atomic() && mu.is_finite_atomic()) {
        // h = 0 everywhere; avoid evaluating the other side at all
        return compute_b(&Measure::zero(), &Measure::zero(), e, cfg);
    }
    let exact = nu.is_finite_atomic() && mu.is_finite_atomic();
    let has_tails = nu.has_tail() || mu.has_tail();
    // golden-section search only makes sense on smooth pieces
    let continuous = (!(nu.is_finite_atomic() || nu.has_tail())
        || !(mu.is_finite_atomic() || mu.has_tail()))
        && !nu.has_cantor()
        && !mu.has_cantor();
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut evaluator: Option<Evaluator> = None;
    let mut streak = 0usize;
    let mut converged = false;
    let mut divergent = false;
    let mut top = Vec::new();
    let max_levels = if exact { 1 } else { cfg.max_levels.max(1) };

    for level in 0..max_levels {
        let res = cfg.resolution(level);
        let stale = match &evaluator {
            None => true,
            Some(_) => has_tails && trace.last().map(|t| t.truncation) != Some(res.truncation),
        };
        if stale {
            evaluator = Some(Evaluator {
                nu: nu.with_truncation(res.truncation),
                mu: mu.with_truncation(res.truncation),
                e,
                tol: cfg.mass_tol,
                cache: HashMap::new(),
            });
        }
        let ev = evaluator.as_mut().unwrap();
        let xs = candidate_set(&ev.nu, &ev.mu, &res);
        let hs = ev.eval_all(&xs)?;
        let mut ranked: Vec<(f64, f64)> = xs.iter().copied().zip(hs.iter().copied()).collect();
        let (mut argmax, mut value) = (f64::NAN, 0.0);
        for &(x, h) in &ranked {
            if h.is_nan() {
                return Err(Error::Quadrature {
                    residual: f64::NAN,
                    tol: cfg.mass_tol,
                });
            }
            if h > value || argmax.is_nan() {
                argmax = x;
                value = h;
            }
        }
        if continuous && cfg.local_refine && value.is_finite() && !xs.is_empty() {
            let mut order: Vec<usize> = (0..xs.len()).collect();
            order.sort_by(|&i, &j| hs[j].total_cmp(&hs[i]).then(i.cmp(&j)));
            for &i in order.iter().take(3) {
                for (lo, hi) in [(i.checked_sub(1), Some(i)), (Some(i), Some(i + 1))] {
                    let (Some(lo), Some(hi)) = (lo, hi) else {
                        continue;
                    };
                    if hi >= xs.len() {
                        continue;
                    }
                    let (x, h) = ev.refine(xs[lo], xs[hi])?;
                    ranked.push((x, h));
                    if h > value {
                        value = h;
                        argmax = x;
                    }
                }
            }
        }
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
        ranked.truncate(5);
        top = ranked;
        let previous = trace.last().map(|t| t.value);
        trace.push(TracePoint {
            level,
            depth: res.depth,
            truncation: res.truncation,
            candidates: xs.len(),
            value,
            argmax,
        });
        if value.is_infinite() {
            divergent = true;
            break;
        }
        if let Some(prev) = previous {
            if prev > 0.0 && value >= cfg.growth_factor * prev {
                streak += 1;
            } else {
                streak = 0;
            }
            if streak >= cfg.growth_streak && value > cfg.divergence_floor {
                divergent = true;
                break;
            }
            if level + 1 >= cfg.min_levels && (value - prev).abs() <= cfg.tol * value.abs() {
                converged = true;
                break;
            }
        }
    }
    if exact {
        converged = true;
    }
    let last = trace.last().expect("at least one level");
    Ok(BEstimate {
        value: if divergent { f64::INFINITY } else { last.value },
        divergent,
        converged,
        argmax: last.argmax,
        trace,
        top_candidates: top,
    })
}

/// `(m, h(3^-m))` for each `m` in the range.
pub fn triadic_profile(
    nu: &Measure,
    mu: &Measure,
    e: &Exponents,
    ms: std::ops::RangeInclusive<u32>,
    tol: f64,
) -> Result<Vec<(u32, f64)>> {
    let ms: Vec<u32> = ms.collect();
    ms.par_iter()
        .map(|&m| Ok((m, h_at(nu, mu, e, 3f64.powi(-(m as i32)), tol)?)))
        .collect()
}

/// Empirical geometric growth ratio: `exp` of the least-squares slope of `ln h` against `m`.
pub fn divergence_ratio(trace: &[(u32, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = trace
        .iter()
        .filter(|(_, h)| h.is_finite() && *h > 0.0)
        .map(|&(m, h)| (m as f64, h.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::TraceTooShort {
            need: 3,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok((sxy / sxx).exp())
}

/// How `A_lower` is obtained in a [`BoundReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LowerBound {
    None,
    /// Step trials at the best `B` candidates.
    Steps,
    /// Coordinate ascent over piecewise-constant trials on the `B` candidate set.
    Optimize {
        iters: usize,
        seed: u64,
        cells: usize,
    },
    /// The exact operator norm (`p = q = 2`, finite atomic measures only).
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub exponents: Exponents,
    #[serde(rename = "B", with = "crate::extended")]
    pub b: f64,
    #[serde(rename = "B_divergent")]
    pub b_divergent: bool,
    #[serde(rename = "B_converged")]
    pub b_converged: bool,
    #[serde(with = "crate::extended")]
    pub argmax: f64,
    pub k_sharp: f64,
    pub k_literature: BTreeMap<String, f64>,
    #[serde(rename = "upper_bound", with = "crate::extended")]
    pub upper: f64,
    #[serde(rename = "A_lower", with = "crate::extended::option")]
    pub a_lower: Option<f64>,
    pub lower_method: LowerBound,
    pub sandwich_ok: bool,
    pub refinement_trace: Vec<TracePoint>,
}

/// `B`, `k_{q,p}`, the literature factors and (optionally) a lower bound for `A`.
pub fn bound_report(
    nu: &Measure,
    mu: &Measure,
    e: &Exponents,
    cfg: &BConfig,
    lower: &LowerBound,
) -> Result<BoundReport> {
    let est = compute_b(nu, mu, e, cfg)?;
    let k = k_sharp(e);
    let upper = product(k, est.value);
    let a_lower = match lower {
        LowerBound::None => None,
        // A >= B is infinite; there is nothing left to certify
        _ if est.divergent || est.value.is_infinite() => None,
        _ if est.value == 0.0 => Some(0.0),
        LowerBound::Steps => {
            let xs: Vec<f64> = est.top_candidates.iter().map(|c| c.0).collect();
            Some(crate::variational::certify_lower_bound(
                nu,
                mu,
                e,
                &xs,
                cfg.mass_tol.max(1e-10),
            )?)
        }
        LowerBound::Optimize { iters, seed, cells } => {
            let partition = crate::variational::default_partition(nu, mu, *cells, cfg.truncation)?;
            let (_, res) =
                crate::variational::optimize_quotient(nu, mu, e, &partition, *iters, *seed)?;
            Some(res.value)
        }
        LowerBound::Oracle => Some(crate::variational::oracle_p2q2(nu, mu)?),
    };
    let sandwich_ok = match a_lower {
        None => true,
        Some(_) if est.divergent || est.value.is_infinite() => true,
        Some(a) => a <= k * est.value * (1.0 + 10.0 * cfg.tol),
    };
    Ok(BoundReport {
        exponents: *e,
        b: est.value,
        b_divergent: est.divergent,
        b_converged: est.converged,
        argmax: est.argmax,
        k_sharp: k,
        k_literature: k_literature(e),
        upper,
        a_lower,
        lower_method: lower.clone(),
        sandwich_ok,
        refinement_trace: est.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_validation() {
        assert!(Exponents::new(1.0, 2.0).is_err());
        assert!(Exponents::new(2.0, 1.5).is_err());
        assert!(Exponents::new(2.0, f64::INFINITY).is_err());
        let e = Exponents::new(3.0, 6.0).unwrap();
        assert!((1.0 / e.p + 1.0 / e.p_star - 1.0).abs() < 1e-15);
        assert_eq!(e.r, 1.0);
        assert!(e.p_star >= e.q_star);
    }

    #[test]
    fn sharp_factor_values() {
        let k22 = k_sharp(&Exponents::new(2.0, 2.0).unwrap());
        assert!((k22 - 2.0).abs() < 1e-12);
        let k24 = k_sharp(&Exponents::new(2.0, 4.0).unwrap());
        assert!((k24 - 3f64.powf(0.25)).abs() < 1e-10);
        let k33 = k_sharp(&Exponents::new(3.0, 3.0).unwrap());
        assert!((k33 - 1.889_881_574_8).abs() < 1e-9, "{k33}");
    }

    #[test]
    fn literature_values() {
        let lit = k_literature(&Exponents::new(2.0, 2.0).unwrap());
        assert!((lit["prokhorov"] - 2.0).abs() < 1e-14);
        assert!((lit["opic_kufner"] - 2.0).abs() < 1e-14);
        assert!(!lit.contains_key("mazja"));
        let lit = k_literature(&Exponents::new(2.0, 4.0).unwrap());
        let mazja = (4.0f64 / 3.0).sqrt() * 4f64.powf(0.25);
        assert!((lit["mazja"] - mazja).abs() < 1e-14);
    }

    #[test]
    fn single_atoms() {
        let nu = Measure::atoms(vec![0.0], vec![4.0]).unwrap();
        let mu = Measure::atoms(vec![1.0], vec![9.0]).unwrap();
        let e = Exponents::new(2.0, 2.0).unwrap();
        let b = compute_b(&nu, &mu, &e, &BConfig::default()).unwrap();
        assert!((b.value - 6.0).abs() < 1e-14);
        assert!(b.converged && !b.divergent);
        assert_eq!(b.trace.len(), 1);
    }

    #[test]
    fn zero_nu_gives_zero() {
        let e = Exponents::new(2.0, 2.0).unwrap();
        let mu = Measure::power_density(1.0, -2.0, 0.0, 1.0, f64::INFINITY).unwrap();
        let r = bound_report(
            &Measure::zero(),
            &mu,
            &e,
            &BConfig::default(),
            &LowerBound::Steps,
        )
        .unwrap();
        assert_eq!(r.b, 0.0);
        assert!(r.sandwich_ok);
    }

    #[test]
    fn ratio_fit_recovers_geometric_growth() {
        let trace: Vec<(u32, f64)> = (5..=15).map(|m| (m, 0.7 * 1.3f64.powi(m as i32))).collect();
        assert!((divergence_ratio(&trace).unwrap() - 1.3).abs() < 1e-12);
        assert!(matches!(
            divergence_ratio(&trace[..2]),
            Err(Error::TraceTooShort { .. })
        ));
    }
}
