//! Converting between key notions: compress by min-entropy, couple to a
//! uniform key, append a hash check, and the exhibit showing that Shannon
//! entropy alone does not certify a key.
//!
//! `cargo run --example key_conversion`

use crglab::keyops::{achievable_to_quasi, compress_min_entropy, quasi_to_achievable, shannon_entropy_exhibit};
use crglab::prob::{Dist, OutcomeSpace, Rational, Weight};
use crglab::protocol::{append_hash_check, Flavor};
use crglab::random::{random_keyed, random_source};
use crglab::reference::pointer_chase_protocol;
use crglab::sources::{PcsParams, SourceHandle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> crglab::Result<()> {
    // Greedy bucketing of a skewed 16-atom key into 4 buckets.
    let masses: Vec<Rational> = (1..=16).map(|i| Rational::ratio(if i <= 4 { 3 } else { 1 }, 24)).collect();
    let k = Dist::new(OutcomeSpace::range(16), masses)?;
    let c = compress_min_entropy(&k, 3.0, 0.5)?;
    let buckets: Vec<String> = c.bucket_masses.iter().map(|w| w.to_string()).collect();
    println!("buckets {buckets:?}, max {} ≤ bound {:.4}", c.max_bucket(), c.bound);

    // Make a random protocol's keys uniform, then compress them back.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = random_source::<Rational>(&mut rng, 3);
    let (nx, ny) = (s.factors()[0].len(), s.factors()[1].len());
    let kp = random_keyed::<Rational>(&mut rng, nx, ny, 2, 2, 4, Flavor::PrivateCoin);
    let (uniform, rep) = achievable_to_quasi(&kp, &s, crglab::STATE_CAP)?;
    println!("coupled: {}", serde_json::to_string(&rep)?);
    let q = quasi_to_achievable(&uniform, &s, 1.0, 1.0, crglab::STATE_CAP)?;
    println!(
        "compressed to {} bits: disagreement {:.4}, uniformity {:.4}, certificate holds {}",
        q.key_bits,
        q.disagreement,
        q.uniformity,
        q.certificate_holds()
    );

    // A one-round hash check on the pointer-chase keys.
    let p = PcsParams::new(1, 2, 1)?;
    let checked = append_hash_check(&pointer_chase_protocol::<Rational>(p)?, 0.5, 17)?;
    let mu = SourceHandle::pcs(p).exact::<Rational>(crglab::ATOM_CAP)?;
    println!("hash check accepts with probability {}", checked.accept_probability(&mu, crglab::STATE_CAP)?);

    let ex = shannon_entropy_exhibit(2, Rational::ratio(1, 2))?;
    println!(
        "exhibit: {}-bit keys, agreement {}, H = {:.3} ≥ 2 but H∞ = {:.3}",
        ex.key_bits, ex.agreement, ex.entropy, ex.min_entropy
    );
    Ok(())
}
