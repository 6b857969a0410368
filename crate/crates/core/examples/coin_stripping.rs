//! Mixing two protocols and absorbing public coins into the inputs.
//!
//! `cargo run --example coin_stripping`

use crglab::prob::{Rational, Weight};
use crglab::protocol::{info_costs, mix_protocols, strip_coins_alpha, Flavor};
use crglab::random::{random_joint, random_protocol};
use crglab::sources::with_coin_blocks;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> crglab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mu = random_joint::<Rational>(&mut rng, &[2, 2], false);
    let (nx, ny) = (mu.factors()[0].len(), mu.factors()[1].len());
    let a = random_protocol::<Rational>(&mut rng, nx, ny, 2, 3, Flavor::Deterministic);
    let b = random_protocol::<Rational>(&mut rng, nx, ny, 3, 2, Flavor::PrivateCoin);
    for q in 0..=4 {
        let m = mix_protocols(&a, &b, Rational::ratio(q, 4))?;
        let ic = info_costs(&m, &mu, crglab::STATE_CAP)?;
        println!("δ = {q}/4: ic_int {:.6}, ic_ext {:.6}", ic.ic_int, ic.ic_ext);
    }

    // One coin bit per party; the stripped protocol reads it from the input.
    let nu = with_coin_blocks(&mu, 1)?;
    let p = random_protocol::<Rational>(&mut rng, nu.factors()[0].len(), nu.factors()[1].len(), 3, 2, Flavor::Deterministic);
    let rep = strip_coins_alpha(&p, &mu, &nu, 1e-9, crglab::STATE_CAP)?;
    println!("α = {:.6} (external) and {:.6} (internal)", rep.alpha, rep.alpha_int);
    Ok(())
}
