//! Rayleigh quotients of step, piecewise-constant and power-tail trials, and the ascent over cells.

use hardy_bounds::constants::Exponents;
use hardy_bounds::measure::Measure;
use hardy_bounds::variational::{default_partition, optimize_quotient, rayleigh, TestFunction};

fn main() -> hardy_bounds::Result<()> {
    let e = Exponents::new(2.0, 2.0)?;
    let nu = Measure::lebesgue(0.0, f64::INFINITY)?;
    let mu = Measure::power_density(1.0, -2.0, 0.0, 1.0, f64::INFINITY)?;

    for f in [
        TestFunction::step(1.0),
        TestFunction::PiecewiseConstant {
            breakpoints: vec![0.0, 1.0, 3.0, 10.0],
            values: vec![1.0, 0.5, 0.2],
        },
        TestFunction::power_tail(&e, 0.01)?,
    ] {
        let r = rayleigh(&f, &nu, &mu, &e, 1e-10)?;
        println!(
            "{:>18}: {:.6} (residual {:.1e})",
            f.family(),
            r.value,
            r.quadrature_residual
        );
    }

    let atoms = Measure::atoms(vec![0.0, 1.0, 2.0, 3.0], vec![1.0, 1.0, 1.0, 1.0])?;
    let mu = Measure::atoms(vec![0.5, 1.5, 2.5, 3.5], vec![1.0, 0.5, 0.25, 0.125])?;
    let part = default_partition(&atoms, &mu, 0, 0)?;
    let (best, r) = optimize_quotient(&atoms, &mu, &e, &part, 200, 1)?;
    println!(
        "ascent over {} cells: {:.6} with {best:?}",
        part.len() - 1,
        r.value
    );
    Ok(())
}
