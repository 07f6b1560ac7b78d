//! The dual operator is the original one on the reflected measures.

use hardy_bounds::constants::{compute_b, BConfig, Exponents};
use hardy_bounds::measure::Measure;

fn main() -> hardy_bounds::Result<()> {
    let e = Exponents::new(2.0, 3.0)?;
    let cfg = BConfig::default();
    let nu = Measure::atoms(vec![0.0, 1.0, 2.0], vec![1.0, 2.0, 3.0])?;
    let mu = Measure::atoms(vec![0.5, 1.5, 3.0], vec![1.0, 1.0, 1.0])?;

    let direct = compute_b(&nu, &mu, &e, &cfg)?;
    let dual = compute_b(&nu.clone().reflect(), &mu.clone().reflect(), &e, &cfg)?;
    println!("B = {:.8} at {}", direct.value, direct.argmax);
    println!("dual B = {:.8} at {}", dual.value, dual.argmax);
    Ok(())
}
