//! For `p < q` the Bliss functions come arbitrarily close to `k_{q,p}` on a power-weighted pair.

use hardy_bounds::constants::{k_sharp, Exponents};
use hardy_bounds::measure::Measure;
use hardy_bounds::variational::{bliss_trial, rayleigh};

fn main() -> hardy_bounds::Result<()> {
    let e = Exponents::new(2.0, 4.0)?;
    let nu = Measure::lebesgue(0.0, f64::INFINITY)?;
    let s = e.q / e.p_star;
    let mu = Measure::power_density(s, -s - 1.0, 0.0, 0.0, f64::INFINITY)?;
    let k = k_sharp(&e);
    for gamma in [0.01, 0.5, 1.0, 4.0] {
        let r = rayleigh(&bliss_trial(&e, gamma, 1.0)?, &nu, &mu, &e, 1e-10)?;
        println!(
            "gamma {gamma}: quotient {:.8}, ratio to k {:.8}",
            r.value,
            r.value / k
        );
    }
    Ok(())
}
