//! Tree search against the brute-force rectangle oracle on random pairs.

mod common;

use crglab::distinguish::exhaustive_advantage;
use crglab::prob::{JointDist, OutcomeSpace, Rational};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_pair(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> JointDist<Rational> {
    let w: Vec<u64> = (0..nx * ny).map(|_| rng.gen_range(0..6)).collect();
    let total: u64 = w.iter().sum::<u64>().max(1);
    let mass = if w.iter().all(|&v| v == 0) {
        vec![Rational::new(BigInt::from(1), BigInt::from(nx * ny)); nx * ny]
    } else {
        w.iter().map(|&v| Rational::new(BigInt::from(v), BigInt::from(total))).collect()
    };
    JointDist::new(vec![OutcomeSpace::range(nx), OutcomeSpace::range(ny)], mass).unwrap()
}

#[test]
fn exhaustive_search_matches_rectangles() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..40 {
        let (nx, ny) = (rng.gen_range(2..=3), 2);
        let (s1, s2) = (random_pair(&mut rng, nx, ny), random_pair(&mut rng, nx, ny));
        for rounds in 1..=3 {
            for cc in 1..=2 {
                let lib = exhaustive_advantage(&s1, &s2, rounds, cc, 10_000_000).unwrap();
                let oracle = common::rectangle_oracle(&s1, &s2, rounds, cc);
                assert_eq!(lib.report.exact.unwrap(), oracle, "rounds={rounds} cc={cc}");
            }
        }
    }
}

#[test]
fn pointer_chase_pair_with_two_rounds() {
    use crglab::sources::{PcsParams, SourceHandle};
    let mu = SourceHandle::pcs(PcsParams::new(1, 2, 1).unwrap());
    let j1 = mu.exact::<Rational>(crglab::ATOM_CAP).unwrap();
    let j2 = mu.product_of_marginals().exact::<Rational>(crglab::ATOM_CAP).unwrap();
    let lib = exhaustive_advantage(&j1, &j2, 2, 2, 50_000_000).unwrap();
    assert_eq!(lib.report.exact.unwrap(), common::rectangle_oracle(&j1, &j2, 2, 2));
}
