//! Globally adaptive Gauss-Kronrod (7, 15) quadrature on finite, decade-spanning
//! and infinite intervals.
//!
//! Ranges that span many decades are integrated in the logarithmic variable and
//! semi-infinite ranges through `x = c * exp(s / (1 - s))`, which keeps slowly
//! decaying algebraic tails (down to `x^{-1-delta}` for small `delta`) tractable.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SUBINTERVALS: usize = 6000;

/// A quadrature value together with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate {
        value: 0.0,
        error: 0.0,
    };

    pub fn exact(value: f64) -> Self {
        Estimate { value, error: 0.0 }
    }

    pub fn relative_error(&self) -> f64 {
        if self.error == 0.0 {
            0.0
        } else if self.value == 0.0 {
            f64::INFINITY
        } else {
            self.error / self.value.abs()
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            error: self.error + rhs.error,
        }
    }
}

impl std::ops::AddAssign for Estimate {
    fn add_assign(&mut self, rhs: Estimate) {
        *self = *self + rhs;
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// Adaptive integration of `f` over the finite interval `[a, b]` without any
/// change of variables.
fn adaptive_finite(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate::ZERO);
    }
    let (value, error) = gk15(f, a, b);
    if value.is_nan() {
        return Err(Error::Quadrature {
            residual: f64::NAN,
            tol,
        });
    }
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    let mut resolved = Estimate::ZERO;
    loop {
        if !total.is_finite() || !total_err.is_finite() {
            if total.is_nan() || total_err.is_nan() {
                return Err(Error::Quadrature {
                    residual: f64::NAN,
                    tol,
                });
            }
            return Ok(Estimate {
                value: total,
                error: total_err,
            });
        }
        if total_err <= tol * total.abs() || total_err <= f64::MIN_POSITIVE {
            return Ok(Estimate {
                value: total,
                error: total_err,
            });
        }
        if heap.len() + 1 > MAX_SUBINTERVALS {
            let residual = total_err / total.abs().max(f64::MIN_POSITIVE);
            return Err(Error::Quadrature { residual, tol });
        }
        let seg = match heap.pop() {
            Some(seg) => seg,
            None => {
                return Ok(Estimate {
                    value: total,
                    error: total_err,
                })
            }
        };
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // Interval can no longer be split in floating point.
            resolved += Estimate {
                value: seg.value,
                error: seg.error,
            };
            if heap.is_empty() {
                let residual = total_err / total.abs().max(f64::MIN_POSITIVE);
                if residual <= tol {
                    return Ok(Estimate {
                        value: total,
                        error: total_err,
                    });
                }
                return Err(Error::Quadrature { residual, tol });
            }
            continue;
        }
        let (v1, e1) = gk15(f, seg.a, mid);
        let (v2, e2) = gk15(f, mid, seg.b);
        total += v1 + v2 - seg.value;
        total_err += e1 + e2 - seg.error;
        if total_err < 0.0 {
            total_err = heap.iter().map(|s| s.error).sum::<f64>() + e1 + e2 + resolved.error;
        }
        heap.push(Segment {
            a: seg.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: seg.b,
            value: v2,
            error: e2,
        });
    }
}

fn log_mapped(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    debug_assert!(a > 0.0 && b > a);
    let g = |u: f64| {
        let x = u.exp();
        let v = f(x);
        if v == 0.0 {
            0.0
        } else {
            v * x
        }
    };
    adaptive_finite(&g, a.ln(), b.ln(), tol)
}

fn semi_infinite_mapped(f: &dyn Fn(f64) -> f64, c: f64, tol: f64) -> Result<Estimate> {
    debug_assert!(c > 0.0);
    let g = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let u = s / (1.0 - s);
        let x = c * u.exp();
        if !x.is_finite() {
            return 0.0;
        }
        let v = f(x);
        if v == 0.0 {
            return 0.0;
        }
        let jac = x / ((1.0 - s) * (1.0 - s));
        let out = v * jac;
        if out.is_finite() {
            out
        } else if v.abs() < 1e-300 {
            0.0
        } else {
            out
        }
    };
    adaptive_finite(&g, 0.0, 1.0, tol)
}

const DECADE_SPLIT: f64 = 1e3;

fn nonnegative_range(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    debug_assert!(a >= 0.0 && b > a);
    if b.is_infinite() {
        if a >= 1.0 {
            return semi_infinite_mapped(f, a, tol);
        }
        let head = nonnegative_range(f, a, 1.0, tol)?;
        let tail = semi_infinite_mapped(f, 1.0, tol)?;
        return Ok(head + tail);
    }
    if a > 0.0 && b / a > DECADE_SPLIT {
        return log_mapped(f, a, b, tol);
    }
    if a == 0.0 && b > DECADE_SPLIT {
        let head = adaptive_finite(f, 0.0, 1.0, tol)?;
        let tail = log_mapped(f, 1.0, b, tol)?;
        return Ok(head + tail);
    }
    adaptive_finite(f, a, b, tol)
}

/// Integrate `f` over `[a, b]` (endpoints may be infinite) to relative tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Estimate> {
    if a.is_nan() || b.is_nan() {
        return Err(Error::InvalidArgument("NaN integration bound".into()));
    }
    if a > b {
        return Err(Error::InvalidInterval { a, b });
    }
    if a == b {
        return Ok(Estimate::ZERO);
    }
    if a >= 0.0 {
        return nonnegative_range(f, a, b, tol);
    }
    if b <= 0.0 {
        let mirrored = |y: f64| f(-y);
        return nonnegative_range(&mirrored, -b, -a, tol);
    }
    let mirrored = |y: f64| f(-y);
    let left = nonnegative_range(&mirrored, 0.0, -a, tol)?;
    let right = nonnegative_range(f, 0.0, b, tol)?;
    Ok(left + right)
}
