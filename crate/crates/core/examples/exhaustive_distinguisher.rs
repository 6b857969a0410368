//! Best bounded protocol for telling two small sources apart, with the
//! optimal protocol written out as JSON.
//!
//! `cargo run --release --example exhaustive_distinguisher`

use crglab::distinguish::exhaustive_advantage;
use crglab::prob::Rational;
use crglab::protocol::protocol_to_json;
use crglab::sources::{PcsParams, SourceHandle};

fn main() -> crglab::Result<()> {
    let mu = SourceHandle::pcs(PcsParams::new(1, 2, 1)?);
    let j1 = mu.exact::<Rational>(crglab::ATOM_CAP)?;
    let j2 = mu.product_of_marginals().exact::<Rational>(crglab::ATOM_CAP)?;
    for rounds in 1..=3 {
        for cc in 1..=3 {
            let best = exhaustive_advantage(&j1, &j2, rounds, cc, 50_000_000)?;
            println!(
                "rounds {rounds} bits {cc}: advantage {} (allocation {:?}, {} partitions)",
                best.report.exact.expect("exact"),
                best.bits,
                best.explored
            );
        }
    }
    let best = exhaustive_advantage(&j1, &j2, 3, 3, 50_000_000)?;
    println!("{}", protocol_to_json(&best.protocol)?);
    Ok(())
}
