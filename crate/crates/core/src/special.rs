//! Log-gamma and the Euler Beta function.

use crate::error::{Error, Result};

// Lanczos approximation, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    if x >= 20.0 {
        return stirling_ln_gamma(x);
    }
    let z = x - 1.0;
    let mut series = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        series += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_TWO_PI + (z + 0.5) * t.ln() - t + series.ln()
}

/// Stirling series with five correction terms; accurate to machine precision for x >= 20.
fn stirling_ln_gamma(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let correction = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + correction
}

/// Small positive integer argument, if `x` is one (<= 20).
fn small_integer(x: f64) -> Option<u32> {
    (x.fract() == 0.0 && (1.0..=20.0).contains(&x)).then_some(x as u32)
}

/// `B(a, n) = (n-1)! / (a (a+1) ... (a+n-1))` for a positive integer `n`.
fn beta_integer_path(a: f64, n: u32) -> f64 {
    let mut value = 1.0;
    for k in 0..n {
        if k > 0 {
            value *= k as f64;
        }
        value /= a + k as f64;
    }
    value
}

/// `ln B(a, b)` via log-gamma.
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Beta arguments must be positive, got ({a}, {b})"
        )));
    }
    if let Some(n) = small_integer(b) {
        return Ok(beta_integer_path(a, n).ln());
    }
    if let Some(n) = small_integer(a) {
        return Ok(beta_integer_path(b, n).ln());
    }
    Ok(ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b))
}

/// The Euler Beta function `B(a, b) = int_0^1 x^(a-1) (1-x)^(b-1) dx`.
///
/// Integer arguments up to 20 take the exact product path.
pub fn euler_beta(a: f64, b: f64) -> Result<f64> {
    ln_beta(a, b).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lgamma_lanczos_only(x: f64) -> f64 {
        // bypass the dispatch so both paths can be compared
        let z = x - 1.0;
        let mut series = LANCZOS[0];
        for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
            series += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        HALF_LN_TWO_PI + (z + 0.5) * t.ln() - t + series.ln()
    }

    #[test]
    fn factorials() {
        let mut fact = 1.0f64;
        for n in 1..25u32 {
            let lg = ln_gamma(n as f64 + 1.0);
            fact *= n as f64;
            assert!(
                (lg - fact.ln()).abs() <= 1e-13 * fact.ln().max(1.0),
                "n={n}"
            );
        }
    }

    #[test]
    fn half_integer() {
        let sqrt_pi_ln = 0.5 * std::f64::consts::PI.ln();
        assert!((ln_gamma(0.5) - sqrt_pi_ln).abs() < 1e-14);
        // Gamma(3/2) = sqrt(pi)/2
        assert!((ln_gamma(1.5) - (sqrt_pi_ln - 2f64.ln())).abs() < 1e-14);
    }

    #[test]
    fn stirling_and_lanczos_agree_at_the_seam() {
        for &x in &[20.0, 25.5, 37.25] {
            let a = stirling_ln_gamma(x);
            let b = lgamma_lanczos_only(x);
            assert!((a - b).abs() <= 1e-13 * a.abs(), "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn beta_values() {
        assert!((euler_beta(1.0, 3.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((euler_beta(1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        let pi = std::f64::consts::PI;
        assert!((euler_beta(0.5, 0.5).unwrap() - pi).abs() < 1e-13 * pi);
        assert!(euler_beta(0.0, 1.0).is_err());
        assert!(euler_beta(1.0, -2.0).is_err());
    }

    #[test]
    fn integer_path_cross_checks_gamma_path() {
        for n in 1..=20u32 {
            for &a in &[0.3, 1.0, 2.7, 11.0, 150.5] {
                let exact = beta_integer_path(a, n);
                let via_gamma = (ln_gamma(a) + ln_gamma(n as f64) - ln_gamma(a + n as f64)).exp();
                assert!((exact / via_gamma - 1.0).abs() < 1e-12, "a={a} n={n}");
            }
        }
    }

    #[test]
    fn symmetric() {
        let x = euler_beta(2.3, 0.7).unwrap();
        let y = euler_beta(0.7, 2.3).unwrap();
        assert!((x - y).abs() < 1e-14 * x);
    }
}
