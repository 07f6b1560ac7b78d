//! The sharp factor `k_{q,p}` next to the older factors, over a few exponent pairs.

use hardy_bounds::constants::{k_literature, k_sharp, Exponents};

fn main() -> hardy_bounds::Result<()> {
    for (p, q) in [
        (1.5, 1.5),
        (2.0, 2.0),
        (2.0, 3.0),
        (2.0, 4.0),
        (3.0, 6.0),
        (4.0, 4.5),
    ] {
        let e = Exponents::new(p, q)?;
        let older: Vec<String> = k_literature(&e)
            .iter()
            .map(|(name, k)| format!("{name} {k:.6}"))
            .collect();
        println!(
            "p={p} q={q}: k = {:.6}  ({})",
            k_sharp(&e),
            older.join(", ")
        );
    }
    Ok(())
}
