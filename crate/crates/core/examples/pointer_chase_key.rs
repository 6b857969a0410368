//! The pointer-chasing key agreement protocol: exact costs and key quality
//! on the source and on its product of marginals, then seeded runs.
//!
//! `cargo run --example pointer_chase_key`

use crglab::prob::Rational;
use crglab::protocol::{crg_report, info_costs, run_keyed};
use crglab::reference::{pointer_chase_protocol, pointer_chase_reveal};
use crglab::sources::{PcsCodec, PcsParams, Sample, SourceHandle};
use crglab::tape::SeededTape;
use crglab::{ATOM_CAP, STATE_CAP};

fn main() -> crglab::Result<()> {
    let p = PcsParams::new(2, 2, 1)?;
    let kp = pointer_chase_protocol::<Rational>(p)?;
    let mu = SourceHandle::pcs(p);
    let exact = mu.exact::<Rational>(ATOM_CAP)?;
    let ic = info_costs(&kp.protocol, &exact, STATE_CAP)?;
    println!("rounds {} cc {} bits: {ic:?}", kp.protocol.rounds(), kp.protocol.cc_bits());
    println!("on μ:       {:?}", crg_report(&kp, &exact, STATE_CAP)?);
    let prod = mu.product_of_marginals().exact::<Rational>(ATOM_CAP)?;
    println!("on product: {:?}", crg_report(&kp, &prod, STATE_CAP)?);

    // Announcing the key leaves no residual correlation.
    let reveal = info_costs(&pointer_chase_reveal::<Rational>(p)?, &exact, STATE_CAP)?;
    println!("reveal variant: ic_int {:.3}, ic_ext {:.3}, residual {:.3}", reveal.ic_int, reveal.ic_ext, reveal.residual);

    // Larger instances are sampled and run.
    let big = PcsParams::new(3, 5, 4)?;
    let kp = pointer_chase_protocol::<f64>(big)?;
    let codec = PcsCodec::new(big)?;
    let src = SourceHandle::pcs(big);
    for counter in 0..3 {
        let Sample::Pcs(inst) = src.sample(99, counter) else { unreachable!() };
        let (x, y) = codec.encode(&inst);
        let run = run_keyed(&kp, x, y, &mut SeededTape::new(99, counter))?;
        println!("run {counter}: keys {:#06b} / {:#06b}, transcript {:?}", run.key_a, run.key_b, run.transcript.messages);
    }
    Ok(())
}
