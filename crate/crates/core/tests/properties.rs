//! Property tests over random sources, protocols, and samples.

use crglab::keyops::{compress_min_entropy, couple_to_uniform};
use crglab::perm::Perm;
use crglab::prob::{entropy, min_entropy, tv, Rational, Weight};
use crglab::protocol::{info_costs, protocol_from_json, protocol_to_json, run_protocol, Flavor};
use crglab::random::{random_dist, random_joint, random_protocol, random_source};
use crglab::sources::{parse_source_spec, PcsParams, SourceHandle};
use crglab::tape::SeededTape;
use crglab::STATE_CAP;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn flavor(k: u8) -> Flavor {
    [Flavor::Deterministic, Flavor::PrivateCoin, Flavor::PublicCoin][k as usize % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn mutual_information_is_symmetric_and_bounded(seed: u64, nx in 1usize..5, ny in 1usize..5, sparse: bool) {
        let j = random_joint::<f64>(&mut ChaCha8Rng::seed_from_u64(seed), &[nx, ny], sparse);
        let info = j.info();
        let (ixy, iyx) = (info.mutual_info(&[0], &[1], &[]), info.mutual_info(&[1], &[0], &[]));
        prop_assert!((ixy - iyx).abs() < 1e-12);
        prop_assert!(ixy >= -1e-12);
        prop_assert!(ixy <= info.entropy(&[0]).min(info.entropy(&[1])) + 1e-12);
    }

    #[test]
    fn total_variation_is_a_metric(seed: u64, len in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, q, r) = (
            random_dist::<Rational>(&mut rng, len, false),
            random_dist::<Rational>(&mut rng, len, true),
            random_dist::<Rational>(&mut rng, len, false),
        );
        let (pq, qr, pr) = (tv(&p, &q).unwrap(), tv(&q, &r).unwrap(), tv(&p, &r).unwrap());
        prop_assert_eq!(pq.clone(), tv(&q, &p).unwrap());
        prop_assert!(pr <= pq + qr);
        prop_assert!(tv(&p, &p).unwrap().is_zero());
    }

    #[test]
    fn min_entropy_never_exceeds_entropy(seed: u64, len in 1usize..9, sparse: bool) {
        let d = random_dist::<f64>(&mut ChaCha8Rng::seed_from_u64(seed), len, sparse);
        prop_assert!(min_entropy(&d) <= entropy(&d) + 1e-12);
        prop_assert!(entropy(&d) <= (len as f64).log2() + 1e-12);
    }

    #[test]
    fn permutations_rank_and_invert(n in 1usize..7, k: u64) {
        let total: usize = (1..=n).product();
        let p = Perm::unrank(n, k as usize % total);
        prop_assert_eq!(Perm::unrank(n, p.rank()), p.clone());
        prop_assert_eq!(p.compose(&p.inverse()), Perm::identity(n));
        prop_assert!(p.one_based().iter().all(|&i| (1..=n).contains(&i)));
    }

    #[test]
    fn cost_chain_on_random_protocols(seed: u64, rounds in 1usize..4, fl: u8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_source::<Rational>(&mut rng, 3);
        let (nx, ny) = (s.factors()[0].len(), s.factors()[1].len());
        let p = random_protocol::<Rational>(&mut rng, nx, ny, rounds, 3, flavor(fl));
        let ic = info_costs(&p, &s, STATE_CAP).unwrap();
        prop_assert!(ic.chain_holds(1e-9), "{:?}", ic);
        prop_assert!(ic.residual_gap() <= 1e-9, "{:?}", ic);
    }

    #[test]
    fn protocol_json_round_trip_keeps_costs(seed: u64, rounds in 1usize..4, fl: u8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_source::<Rational>(&mut rng, 3);
        let (nx, ny) = (s.factors()[0].len(), s.factors()[1].len());
        let p = random_protocol::<Rational>(&mut rng, nx, ny, rounds, 3, flavor(fl));
        let text = protocol_to_json(&p).unwrap();
        let back = protocol_from_json::<Rational>(&text).unwrap();
        prop_assert_eq!(protocol_to_json(&back).unwrap(), text);
        prop_assert_eq!(info_costs(&back, &s, STATE_CAP).unwrap(), info_costs(&p, &s, STATE_CAP).unwrap());
    }

    #[test]
    fn seeded_runs_repeat(seed: u64, run_seed: u64, fl: u8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_protocol::<f64>(&mut rng, 3, 3, 3, 3, flavor(fl));
        let a = run_protocol(&p, 1, 2, &mut SeededTape::new(run_seed, 0)).unwrap();
        let b = run_protocol(&p, 1, 2, &mut SeededTape::new(run_seed, 0)).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pointer_chase_samples_are_consistent(seed: u64, counter in 0u64..1000, r in 1usize..5, n in 2usize..9, ell in 1u32..9) {
        let src = SourceHandle::pcs(PcsParams::new(r, n, ell).unwrap());
        let s = src.sample(seed, counter);
        prop_assert_eq!(&s, &src.sample(seed, counter));
        let crglab::sources::Sample::Pcs(p) = s else { panic!("pcs sample") };
        let t = p.trace();
        let e = p.endpoint();
        prop_assert_eq!(p.a[e], p.b[e]);
        prop_assert_eq!(t.forward.last(), t.reverse.first());
        prop_assert_eq!(t.reverse.last(), Some(&p.i0));
    }

    #[test]
    fn compression_respects_the_bucket_bound(seed: u64, len in 2usize..64, delta in 0.05f64..1.0) {
        let d = random_dist::<Rational>(&mut ChaCha8Rng::seed_from_u64(seed), len, false);
        let l = min_entropy(&d).floor();
        prop_assume!(l >= 1.0 && delta * 2f64.powf(l) >= 1.0);
        let c = compress_min_entropy(&d, l, delta).unwrap();
        prop_assert!(c.bound_holds(), "max {} bound {}", c.max_bucket().to_f64(), c.bound);
    }

    #[test]
    fn coupling_is_exactly_uniform(seed: u64, len in 1usize..10, sparse: bool) {
        let d = random_dist::<Rational>(&mut ChaCha8Rng::seed_from_u64(seed), len, sparse);
        let c = couple_to_uniform(&d);
        let out = c.map.push(&d).unwrap();
        let u = Rational::ratio(1, len as u64);
        prop_assert!(out.masses().iter().all(|w| *w == u));
        prop_assert_eq!(c.agreement, Rational::ratio(1, 1) - tv(&d, &crglab::prob::Dist::uniform(d.space().clone())).unwrap());
    }

    #[test]
    fn source_specs_never_panic(text in "[a-z-]{0,12}(:[a-z]{1,4}=[0-9/.]{0,4}(,[a-z]{1,4}=[0-9/.]{0,4}){0,3})?") {
        let _ = parse_source_spec(&text);
    }
}
