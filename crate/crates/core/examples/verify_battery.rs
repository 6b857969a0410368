//! Run the property battery with a fixed seed and print the result table.
//!
//! `cargo run --release --example verify_battery`

use crglab::verify::{check_ids, results_csv, run_suite, Suite};

fn main() -> crglab::Result<()> {
    println!("{} checks in the full suite", check_ids(Suite::All).len());
    let results = run_suite(Suite::Lemmas, 7, Some(200))?;
    print!("{}", results_csv(&results));
    let failed: Vec<_> = results.iter().filter(|r| !r.passed()).map(|r| &r.check_id).collect();
    println!("failed: {failed:?}");
    Ok(())
}
