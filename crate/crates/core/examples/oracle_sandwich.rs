//! Random atomic pairs at `p = q = 2`: the exact norm always lies between `B` and `2B`.

use hardy_bounds::constants::{compute_b, k_sharp, BConfig, Exponents};
use hardy_bounds::measure::Measure;
use hardy_bounds::variational::oracle_p2q2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> hardy_bounds::Result<()> {
    let e = Exponents::new(2.0, 2.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut lowest: f64 = f64::INFINITY;
    let mut highest: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.gen_range(1..20);
        let m = rng.gen_range(1..20);
        let nu = Measure::atoms(
            (0..n).map(|i| i as f64).collect(),
            (0..n).map(|_| rng.gen_range(0.01..1.0)).collect(),
        )?;
        let mu = Measure::atoms(
            (0..m).map(|i| i as f64 + 0.5).collect(),
            (0..m).map(|_| rng.gen_range(0.01..1.0)).collect(),
        )?;
        let b = compute_b(&nu, &mu, &e, &BConfig::default())?.value;
        let a = oracle_p2q2(&nu, &mu)?;
        lowest = lowest.min(a / b);
        highest = highest.max(a / b);
    }
    println!(
        "A / B ranged over [{lowest:.4}, {highest:.4}]; k = {}",
        k_sharp(&e)
    );
    Ok(())
}
