//! Discrete against continuous: counting measure with a power density, and Lebesgue with power atoms.

use hardy_bounds::constants::{bound_report, BConfig, Exponents, LowerBound};
use hardy_bounds::measure::Measure;

fn main() -> hardy_bounds::Result<()> {
    let e = Exponents::new(2.0, 2.0)?;
    let cfg = BConfig::default();

    let counting = Measure::counting(1, 10_000)?;
    let density = Measure::power_density(1.0, -2.0, 0.0, 1.0, f64::INFINITY)?;
    let r = bound_report(&counting, &density, &e, &cfg, &LowerBound::Steps)?;
    println!(
        "counting vs x^-2: B = {:.8}, A in [{:.6}, {:.6}]",
        r.b,
        r.a_lower.unwrap_or(f64::NAN),
        r.upper
    );

    let lebesgue = Measure::lebesgue(0.0, f64::INFINITY)?;
    let atoms = Measure::integer_power_atoms(1, 1.0, -2.0, 10_000)?;
    let r = bound_report(&lebesgue, &atoms, &e, &cfg, &LowerBound::Steps)?;
    println!(
        "lebesgue vs n^-2 atoms: B = {:.8}, A in [{:.6}, {:.6}]",
        r.b,
        r.a_lower.unwrap_or(f64::NAN),
        r.upper
    );
    Ok(())
}
