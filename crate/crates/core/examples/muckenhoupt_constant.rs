//! `B = sup h` for Lebesgue measure against `x^-2 dx` on `[1, inf)`, and the measured profile.

use hardy_bounds::constants::{compute_b, h_at, k_sharp, BConfig, Exponents};
use hardy_bounds::measure::Measure;

fn main() -> hardy_bounds::Result<()> {
    let e = Exponents::new(2.0, 2.0)?;
    let nu = Measure::lebesgue(0.0, f64::INFINITY)?;
    let mu = Measure::power_density(1.0, -2.0, 0.0, 1.0, f64::INFINITY)?;

    for x in [0.5, 1.0, 2.0, 10.0, 100.0] {
        println!("h({x}) = {:.6}", h_at(&nu, &mu, &e, x, 1e-10)?);
    }
    let b = compute_b(&nu, &mu, &e, &BConfig::default())?;
    println!(
        "B = {:.10} at x = {} after {} levels (converged {})",
        b.value,
        b.argmax,
        b.trace.len(),
        b.converged
    );
    println!("upper bound k B = {:.10}", k_sharp(&e) * b.value);
    Ok(())
}
