//! The randomized invariant suites behind `hardy check`.

use hardy_bounds::checks::run_checks;

fn main() -> hardy_bounds::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    for c in run_checks(seed)? {
        println!(
            "[{}] {}: {} cases, worst {:e} (tolerance {:e})",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.worst,
            c.tolerance
        );
    }
    Ok(())
}
