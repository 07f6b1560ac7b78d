//! Runs one named scenario and prints its table and the report as CSV.

use hardy_bounds::reproduce::{reproduce, ReproduceOptions, SCENARIOS};

fn main() -> hardy_bounds::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "mixed2".into());
    if !SCENARIOS.contains(&name.as_str()) {
        eprintln!("scenarios: {}", SCENARIOS.join(", "));
        std::process::exit(2);
    }
    let opts = ReproduceOptions {
        p: None,
        q: None,
        seed: 0,
        tol: 1e-10,
        depth: None,
        iters: 200,
    };
    let report = reproduce(&name, &opts)?;
    print!("{}", report.table_text());
    print!("{}", report.table_csv()?);
    Ok(())
}
