//! The Cantor function, its generalized inverse, and the level-m atomic approximations.

use hardy_bounds::cantor::{cantor_cdf, cantor_inv_cdf, level_m_atoms, weak_convergence_check};
use hardy_bounds::measure::{IntervalQuery, Measure};

fn main() -> hardy_bounds::Result<()> {
    for x in [0.25, 1.0 / 3.0, 0.5, 0.75, 0.9] {
        let y = cantor_cdf(x);
        println!(
            "Lambda({x:.6}) = {y:.12}  inverse {:.12}",
            cantor_inv_cdf(y)
        );
    }

    // Self-similarity under both contractions
    let x = 0.3141592653589793;
    let l = cantor_cdf(x);
    println!(
        "Lambda(x/3) - Lambda(x)/2 = {:e}",
        cantor_cdf(x / 3.0) - l / 2.0
    );
    println!(
        "Lambda((x+2)/3) - 1/2 - Lambda(x)/2 = {:e}",
        cantor_cdf((x + 2.0) / 3.0) - 0.5 - l / 2.0
    );

    let lambda = Measure::cantor();
    let mass = lambda.interval_mass(&IntervalQuery::left_open(0.0, 5.5)?)?;
    println!("translated-Cantor mass of (0, 5.5] = {mass}");

    let approx = level_m_atoms(6, 0..1)?;
    println!(
        "level 6: {} atoms, total mass {}",
        approx.atoms.len(),
        approx.total_mass()
    );
    let moments = weak_convergence_check(|t| t * t, 10)?;
    println!(
        "int t^2 by level: {:?} (limit 3/8)",
        moments
            .iter()
            .map(|v| format!("{v:.8}"))
            .collect::<Vec<_>>()
    );
    Ok(())
}
