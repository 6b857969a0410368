use super::*;
use crate::prob::{entropy, Dist, JointDist, OutcomeSpace, Rational, Weight};
use crate::random::random_dist;
use crate::reference::pv_bidirectional_protocol;
use crate::sources::{Answer, PcsParams, PvParams, SourceHandle};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

#[test]
fn support_set_of_uniform_and_point_mass() {
    let u = Dist::<f64>::uniform(OutcomeSpace::bits(4));
    let s = entropy_support_set(&u, 1.0).unwrap();
    assert_eq!(s.atoms.len(), 16);
    assert_eq!(s.escape, 0.0);
    let p = Dist::<f64>::point(OutcomeSpace::range(8), 5);
    for delta in [0.1, 0.7, 1.0] {
        let s = entropy_support_set(&p, delta).unwrap();
        assert_eq!(s.atoms, vec![5]);
        assert_eq!(s.escape, 0.0);
    }
    assert!(entropy_support_set(&u, 0.0).is_err());
    assert!(entropy_support_set(&u, 1.5).is_err());
}

#[test]
fn support_set_bounds_on_random_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut violations = 0;
    for trial in 0..1000 {
        let d = random_dist::<f64>(&mut rng, 1 << 10, trial % 2 == 0);
        for delta in [0.1, 0.5] {
            let s = entropy_support_set(&d, delta).unwrap();
            violations += !s.bounds_hold() as usize;
            let members_ok = s.atoms.iter().all(|&a| d.mass(a).to_f64() >= s.threshold * (1.0 - 1e-9));
            violations += !members_ok as usize;
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn small_sets_capture_little_of_high_entropy_strings() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ell = 6u32;
    let mut violations = 0;
    for trial in 0..1000 {
        let w = random_dist::<f64>(&mut rng, 1 << ell, trial % 3 == 0);
        let c = rng.gen_range(0.0..(ell as f64 - 0.5));
        let size = rng.gen_range(1..=(c.exp2().floor() as usize).max(1));
        // Half the trials take the heaviest atoms, the worst case for the bound.
        let set: Vec<usize> = if trial % 2 == 0 {
            let mut order: Vec<usize> = (0..1 << ell).collect();
            order.sort_by(|&a, &b| w.mass(b).partial_cmp(w.mass(a)).unwrap());
            order.truncate(size);
            order
        } else {
            sample(&mut rng, 1 << ell, size).into_vec()
        };
        let rep = check_hient_smallset(&w, ell, &set, c);
        assert!(rep.applicable);
        violations += !rep.passes(1e-12) as usize;
    }
    assert_eq!(violations, 0);
}

#[test]
fn pointed_string_keeps_most_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, ell) = (3usize, 2u32);
    let tuples = 1usize << (ell as usize * n);
    let mut violations = 0;
    for _ in 0..300 {
        let rows: Vec<Dist<f64>> = (0..tuples).map(|_| random_dist(&mut rng, n, true)).collect();
        let coupling = JointDist::from_fn(
            vec![OutcomeSpace::range(tuples), OutcomeSpace::range(n)],
            crate::STATE_CAP,
            |t| rows[t[0]].mass(t[1]) / tuples as f64,
        )
        .unwrap();
        let rep = check_zi_lb(n, ell, &coupling).unwrap();
        assert!(rep.applicable);
        violations += !rep.passes(1e-9) as usize;
    }
    assert_eq!(violations, 0);
    // The adversarial choice "point at a zero string if there is one".
    let coupling = JointDist::from_fn(vec![OutcomeSpace::range(tuples), OutcomeSpace::range(n)], crate::STATE_CAP, |t| {
        let z = t[0];
        let first_zero = (0..n).find(|&j| (z >> (ell as usize * j)) & 3 == 0).unwrap_or(0);
        if t[1] == first_zero { 1.0 / tuples as f64 } else { 0.0 }
    })
    .unwrap();
    assert!(check_zi_lb(n, ell, &coupling).unwrap().passes(1e-9));
}

/// `K = Z_I >> shift` with `I` and `Z` uniform.
fn keyed_by_prefix(n: usize, ell: u32, shift: u32) -> KeyedStrings<Rational> {
    KeyedStrings::from_kernel(n, ell, 1 << (ell - shift), crate::ATOM_CAP, |z, i| vec![((z[i] >> shift) as usize, q(1, 1))])
        .unwrap()
}

fn keyed_independently(n: usize, ell: u32, keys: usize) -> KeyedStrings<Rational> {
    KeyedStrings::from_kernel(n, ell, keys, crate::ATOM_CAP, |_, _| {
        (0..keys).map(|k| (k, q(1, keys as i64))).collect()
    })
    .unwrap()
}

#[test]
fn detector_from_a_determining_key() {
    let rich = keyed_by_prefix(2, 3, 0);
    let det = build_test_i(&rich.key_and_pointed().unwrap(), 3, 0.01, None, None).unwrap();
    assert!(det.invariants_hold());
    assert!(det.gamma.iter().all(|g| g.unwrap().abs() < 1e-12));
    assert!(det.sets.iter().enumerate().all(|(k, t)| t == &vec![k as u64]));
    let hit = rich.expectation(&det).to_f64();
    assert!(hit >= det.guarantee, "{hit} < {}", det.guarantee);
}

#[test]
fn detector_without_information_is_silent() {
    let poor = keyed_independently(2, 3, 4);
    let det = build_test_i(&poor.key_and_pointed().unwrap(), 3, 0.999, None, None).unwrap();
    assert!(det.good.is_empty());
    assert_eq!(poor.expectation(&det), q(0, 1));
}

#[test]
fn micro_detector_matches_exact_expectations() {
    let (n, ell) = (2, 4);
    let rich = keyed_by_prefix(n, ell, 1);
    let joint = rich.key_and_pointed().unwrap();
    assert!((rich.pointed_info().unwrap() - 3.0).abs() < 1e-9);
    let xi = xi_from_info(&joint, ell);
    assert!((xi - 0.25).abs() < 1e-9);
    let det = build_test_i(&joint, ell, xi, None, None).unwrap();
    assert!(det.invariants_hold());
    assert_eq!(det.good.len(), 8);
    assert!(det.sets.iter().all(|t| t.len() == 2));
    let rich_hit = rich.expectation(&det);
    assert!(rich_hit.to_f64() >= det.guarantee);

    // Independent key: each of the two strings hits a 2-element set of 16
    // with probability 1/8.
    let poor = keyed_independently(n, ell, 8);
    let miss = q(7, 8) * q(7, 8);
    assert_eq!(poor.expectation(&det), q(1, 1) - miss.clone());
    let rep = detector_advantage(&det, &rich, &poor);
    assert_eq!(rep.exact, Some(rich_hit - (q(1, 1) - miss)));
    assert_eq!(rep.half_width, 0.0);
}

#[test]
fn key_string_information() {
    // A key read off a fixed string carries all of it.
    let fixed = KeyedStrings::<Rational>::from_kernel(2, 3, 8, crate::ATOM_CAP, |z, _| vec![(z[0] as usize, q(1, 1))]).unwrap();
    assert!((fixed.key_string_info().unwrap() - 3.0).abs() < 1e-9);
    // A key read off a random index loses some of it.
    let rich = keyed_by_prefix(2, 3, 0);
    let info = rich.key_string_info().unwrap();
    assert!(info > 0.0 && info < rich.pointed_info().unwrap());
}

#[test]
fn identical_sources_have_no_advantage() {
    let p = pv_bidirectional_protocol::<Rational>(1, 3).unwrap();
    let s = SourceHandle::pv(PvParams::new(1, 3, Answer::Yes).unwrap());
    let rep = measure_advantage(&p, &s, &s, Budget::Exact { cap: crate::ATOM_CAP }).unwrap();
    assert_eq!(rep.exact, Some(q(0, 1)));
    let j = s.exact::<Rational>(crate::ATOM_CAP).unwrap();
    let ex = exhaustive_advantage(&j, &j, 2, 3, 1 << 20).unwrap();
    assert_eq!(ex.report.exact, Some(q(0, 1)));
}

#[test]
fn pv_protocol_advantage_exact_and_sampled() {
    let p = pv_bidirectional_protocol::<Rational>(1, 4).unwrap();
    let yes = SourceHandle::pv(PvParams::new(1, 4, Answer::Yes).unwrap());
    let no = SourceHandle::pv(PvParams::new(1, 4, Answer::No).unwrap());
    let rep = measure_advantage(&p, &yes, &no, Budget::Exact { cap: crate::ATOM_CAP }).unwrap();
    assert_eq!(rep.exact, Some(q(3, 4)));
    assert_eq!(rep.mode, AdvantageMode::Exact);

    let p = pv_bidirectional_protocol::<f64>(3, 5).unwrap();
    let yes = SourceHandle::pv(PvParams::new(3, 5, Answer::Yes).unwrap());
    let no = SourceHandle::pv(PvParams::new(3, 5, Answer::No).unwrap());
    let rep = measure_advantage(&p, &yes, &no, Budget::MonteCarlo { trials: 20_000, seed: 9 }).unwrap();
    assert_eq!(rep.mode, AdvantageMode::MonteCarlo);
    assert!((rep.advantage - 0.8).abs() <= rep.half_width, "{rep:?}");
}

/// Perfectly correlated bit against two independent bits.
fn bit_pair() -> (JointDist<Rational>, JointDist<Rational>) {
    let f = || vec![OutcomeSpace::bits(1), OutcomeSpace::bits(1)];
    let same = JointDist::new(f(), vec![q(1, 2), q(0, 1), q(0, 1), q(1, 2)]).unwrap();
    let indep = JointDist::new(f(), vec![q(1, 4); 4]).unwrap();
    (same, indep)
}

#[test]
fn exhaustive_search_on_correlated_bits() {
    let (same, indep) = bit_pair();
    // One speaker alone reveals a marginal, which is identical.
    assert_eq!(exhaustive_advantage(&same, &indep, 1, 1, 1000).unwrap().report.exact, Some(q(0, 1)));
    assert_eq!(exhaustive_advantage(&same, &indep, 2, 1, 1000).unwrap().report.exact, Some(q(0, 1)));
    let ex = exhaustive_advantage(&same, &indep, 2, 2, 1000).unwrap();
    assert_eq!(ex.report.exact, Some(q(1, 2)));
    assert_eq!(ex.bits, vec![1, 1]);
    assert_eq!(transcript_advantage(&ex.protocol, &same, &indep).unwrap(), q(1, 2));
}

#[test]
fn exhaustive_search_is_monotone_and_attained() {
    let p = PcsParams::new(1, 2, 1).unwrap();
    let mu = SourceHandle::pcs(p).exact::<Rational>(crate::ATOM_CAP).unwrap();
    let prod = SourceHandle::pcs(p).product_of_marginals().exact::<Rational>(crate::ATOM_CAP).unwrap();
    let mut last = q(0, 1);
    for cc in 0..=3 {
        let ex = exhaustive_advantage(&mu, &prod, 2, cc, 1 << 22).unwrap();
        let v = ex.report.exact.clone().unwrap();
        assert!(v >= last, "cc={cc}");
        assert_eq!(transcript_advantage(&ex.protocol, &mu, &prod).unwrap(), v, "cc={cc}");
        assert!(ex.protocol.cc_bits() <= cc);
        last = v;
    }
    assert!(last > q(0, 1));
}

#[test]
fn exhaustive_search_respects_its_budget() {
    let p = PcsParams::new(2, 2, 1).unwrap();
    let mu = SourceHandle::pcs(p).exact::<Rational>(crate::ATOM_CAP).unwrap();
    let prod = SourceHandle::pcs(p).product_of_marginals().exact::<Rational>(crate::ATOM_CAP).unwrap();
    assert!(matches!(exhaustive_advantage(&mu, &prod, 2, 3, 5), Err(crate::Error::BudgetExhausted(_))));
}

#[test]
fn pointed_info_matches_entropy_identity() {
    let rich = keyed_by_prefix(2, 3, 1);
    let j = rich.key_and_pointed().unwrap();
    let z = j.marginal_dist(1).unwrap();
    // K is a function of Z_I, so I(K; Z_I) = H(K) = H(Z_I) − 1.
    assert!((rich.pointed_info().unwrap() - (entropy(&z) - 1.0)).abs() < 1e-9);
}
