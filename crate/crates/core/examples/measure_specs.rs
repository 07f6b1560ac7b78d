//! Measures from JSON documents, and the diagnostics for malformed ones.

use hardy_bounds::measure::IntervalQuery;
use hardy_bounds::spec::MeasureSpec;

const DOCS: &[&str] = &[
    r#"{"type":"atoms","points":[0,1,2],"weights":[1,0.5,0.25]}"#,
    r#"{"type":"atoms","points":[],"weights":[],"tail":{"start":1,"exponent":-2}}"#,
    r#"{"type":"density","kind":"exponential","rate":2,"support":[0,"inf"]}"#,
    r#"{"type":"weighted","base":{"type":"cantor","translates":4},"weight":{"kind":"x_power","exponent":-0.5}}"#,
    r#"{"type":"transform","kind":"reflect","base":{"type":"density","kind":"lebesgue","support":[0,1]}}"#,
];

const BAD: &[&str] = &[
    r#"{"type":"atoms","points":[2,1],"weights":[1,1]}"#,
    r#"{"type":"atoms","points":[1],"weights":[-1]}"#,
    r#"{"type":"density","kind":"power","coefficient":1,"exponent":-2,"support":[1,"inf"],"colour":"red"}"#,
    r#"{"type":"blob"}"#,
];

fn main() -> hardy_bounds::Result<()> {
    for doc in DOCS {
        let spec = MeasureSpec::from_json(doc)?;
        let m = spec.build()?;
        let mass = m.interval_mass_with(&IntervalQuery::left_open(-10.0, 10.0)?, 1e-8)?;
        println!("{doc}\n  mass of (-10, 10] = {mass:.10}");
    }
    for doc in BAD {
        match MeasureSpec::from_json(doc).and_then(|s| s.build()) {
            Ok(_) => println!("{doc}\n  accepted"),
            Err(e) => println!("{doc}\n  rejected: {e}"),
        }
    }
    Ok(())
}
