//! Draw seeded samples from the pointer-chasing family and print them with
//! 1-based pointer labels.
//!
//! `cargo run --example source_samples`

use crglab::cli::samples_json;
use crglab::sources::{parse_source_spec, Sample};

fn main() -> crglab::Result<()> {
    let mu = parse_source_spec("pcs:r=3,n=6,ell=4")?;
    for counter in 0..3 {
        if let Sample::Pcs(p) = mu.sample(11, counter) {
            let t = p.trace();
            let one = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
            println!(
                "sample {counter}: chase {:?}, reverse {:?}, shared string {:04b}",
                one(&t.forward),
                one(&t.reverse),
                p.a[p.endpoint()]
            );
        }
    }

    // Planted variants and the pointer-verification source.
    for spec in ["pcs-hat:r=1,n=9,ell=2", "pcs-mid:r=1,n=9,ell=2", "pv:r=3,n=5,ans=yes", "disj:n=16,int=4"] {
        let s = parse_source_spec(spec)?;
        let draws: Vec<Sample> = (0..2).map(|c| s.sample(5, c)).collect();
        println!("--- {spec}");
        print!("{}", samples_json(&s, &draws)?);
    }
    Ok(())
}
