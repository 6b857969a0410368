//! Build a protocol by hand, analyze it, and round-trip it through JSON.
//!
//! `cargo run --example custom_protocol`

use crglab::prob::{OutcomeSpace, Rational, Weight};
use crglab::protocol::{info_costs, Flavor, protocol_from_json, protocol_to_json, Kernel, ProtocolTree};
use crglab::sources::SourceHandle;

fn main() -> crglab::Result<()> {
    // On a binary symmetric source, Alice sends a noisy copy of her bit,
    // then Bob says whether it matches his own.
    let bit = OutcomeSpace::range(2);
    let p = ProtocolTree::<Rational>::builder(bit.clone(), bit.clone())
        .flavor(Flavor::PrivateCoin)
        .round(
            bit.clone(),
            Kernel::func(|_, x, _| Some(vec![(x, Rational::ratio(3, 4)), (1 - x, Rational::ratio(1, 4))])),
        )
        .round(OutcomeSpace::indexed("match", 2), Kernel::deterministic(|h: &[usize], y, _| (h[0] == y) as usize))
        .build()?;
    let s = SourceHandle::bss(Rational::ratio(1, 10))?.exact::<Rational>(crglab::ATOM_CAP)?;
    println!("{:?}", info_costs(&p, &s, crglab::STATE_CAP)?);

    let json = protocol_to_json(&p)?;
    let back = protocol_from_json::<Rational>(&json)?;
    assert_eq!(info_costs(&back, &s, crglab::STATE_CAP)?, info_costs(&p, &s, crglab::STATE_CAP)?);
    println!("{json}");
    Ok(())
}
