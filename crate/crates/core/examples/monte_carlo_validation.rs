//! Runs the analytic-versus-simulation checks and prints one line per check.
//!
//! ```text
//! cargo run --release --example monte_carlo_validation -- 200000
//! ```

use swipt_aoi::validation::{run_validation, ValidateOptions};
use swipt_aoi::SystemConfig;

fn main() -> swipt_aoi::Result<()> {
    let n: u64 = std::env::args().nth(1).map_or(1_000_000, |s| s.parse().expect("sample count"));
    let opts = ValidateOptions {
        trials: n,
        cycles: n,
        ..ValidateOptions::default()
    };
    for c in run_validation(&SystemConfig::default(), &opts)? {
        println!(
            "{} {:<22} measured {:>12.6e} reference {:>12.6e} tolerance {:.3e}",
            if c.passed() { "pass" } else { "FAIL" },
            c.name,
            c.measured,
            c.reference,
            c.tolerance
        );
    }
    Ok(())
}
