use super::*;
use crate::prob::{binary_entropy, JointDist, OutcomeSpace, Rational};
use crate::protocol::{info_costs, mix_protocols, Flavor, Kernel, ProtocolTree};
use crate::random::random_joint;
use crate::reference::pointer_chase_reveal;
use crate::sources::{PcsParams, SourceHandle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bss(p: i64, q: i64) -> SourceHandle {
    SourceHandle::bss(Rational::new(p.into(), q.into())).unwrap()
}

fn reanalyze(curve: &RateCurve, joint: &JointDist<f64>) {
    for p in &curve.grid {
        let w = curve.witness(&p.witness_id).unwrap();
        let r = info_costs(&w, joint, crate::STATE_CAP).unwrap();
        assert!((r.ic_int - p.witness_ic_int).abs() < 1e-9, "{}: {} vs {}", p.witness_id, r.ic_int, p.witness_ic_int);
        assert!((r.ic_ext - p.witness_ic_ext).abs() < 1e-9, "{}: {} vs {}", p.witness_id, r.ic_ext, p.witness_ic_ext);
        assert!(p.witness_ic_int <= p.c_bits + 1e-9);
    }
}

#[test]
fn perfect_bit_curve() {
    let s = SourceHandle::perfect_bit();
    let grid = budget_grid(0.0, 0.25, 1.5);
    let curve = approx_tilfc(&s, 1, &grid, &MeshOptions::default()).unwrap();
    assert_eq!(curve.grid[0].l_bits, 1.0);
    for p in &curve.grid[1..] {
        assert_eq!(p.branch, Branch::Cap);
        assert!((p.l_bits - (p.c_bits + 1.0)).abs() < 1e-12);
    }
    let m = mimk_estimate(&curve, curve.source_mi).unwrap();
    assert_eq!((m.value, m.slack), (0.0, 0.0));
    assert_eq!(gamma_cbib(&curve), Gamma::Infinite);
    assert!(certify_shape(&curve, 1e-9).unwrap().passed());
    reanalyze(&curve, &s.exact(crate::ATOM_CAP).unwrap());
}

#[test]
fn binary_symmetric_curve() {
    let s = bss(1, 4);
    let h = binary_entropy(0.25);
    let mut grid = budget_grid(0.0, 0.05, 1.5);
    grid.push(h);
    let curve = approx_tilfc(&s, 1, &grid, &MeshOptions::default()).unwrap();
    let mi = curve.source_mi;
    assert!((mi - (1.0 - h)).abs() < 1e-12);
    assert!((curve.value_at(h).unwrap() - 1.0).abs() <= 0.05);
    for p in &curve.grid {
        assert!(p.l_bits <= p.c_bits + mi + 1e-9, "C={}", p.c_bits);
    }
    // Past the full reveal the curve follows the cap.
    let past = curve.point_at(1.2).unwrap();
    assert_eq!(past.branch, Branch::Cap);
    assert!((past.l_bits - (1.2 + mi)).abs() < 1e-12);
    let m = mimk_estimate(&curve, mi).unwrap();
    assert!((m.witness_ic_int - h).abs() < 1e-9);
    let shape = certify_shape(&curve, 1e-9).unwrap();
    assert!(shape.passed(), "{:?}", shape.violations);
    reanalyze(&curve, &s.exact(crate::ATOM_CAP).unwrap());
}

#[test]
fn independent_source_has_flat_zero_curve() {
    let f = || vec![OutcomeSpace::range(2), OutcomeSpace::range(2)];
    let j = JointDist::new(f(), vec![0.25; 4]).unwrap();
    let curve = approx_tilfc_joint(&j, 1, &budget_grid(0.0, 0.5, 1.0), &MeshOptions { granularity: 2, ..Default::default() }).unwrap();
    let m = mimk_estimate(&curve, 0.0).unwrap();
    assert_eq!(m.value, 0.0);
    assert_eq!((m.witness_ic_int, m.witness_ic_ext), (0.0, 0.0));
    // Every communicated bit is a common random bit, and none is secret.
    assert_eq!(gamma_cbib(&curve), Gamma::Finite(1.0));
    assert_eq!(gamma_cbib(&curve).key_bits(), Gamma::Finite(0.0));
}

#[test]
fn refining_the_mesh_never_lowers_the_curve() {
    let s = bss(1, 5);
    let grid = budget_grid(0.0, 0.1, 1.0);
    let coarse = approx_tilfc(&s, 1, &grid, &MeshOptions { granularity: 2, ..Default::default() }).unwrap();
    let fine = approx_tilfc(&s, 1, &grid, &MeshOptions { granularity: 4, ..Default::default() }).unwrap();
    for (a, b) in coarse.grid.iter().zip(&fine.grid) {
        assert!(b.l_bits >= a.l_bits - 1e-12, "C={}", a.c_bits);
    }
}

#[test]
fn time_sharing_stays_under_the_curve() {
    let s = bss(1, 4);
    let j = s.exact::<f64>(crate::ATOM_CAP).unwrap();
    let curve = approx_tilfc(&s, 1, &budget_grid(0.0, 0.1, 1.0), &MeshOptions { granularity: 2, ..Default::default() }).unwrap();
    let ids: Vec<String> = curve.envelope.iter().map(|v| v.witness_id.clone()).collect();
    for a in &ids {
        for b in &ids {
            for delta in [0.2, 0.5, 0.9] {
                let m = mix_protocols(&curve.witness(a).unwrap(), &curve.witness(b).unwrap(), delta).unwrap();
                let r = info_costs(&m, &j, crate::STATE_CAP).unwrap();
                assert!(curve.value_at(r.ic_int).unwrap() >= r.ic_ext - 1e-9);
            }
        }
    }
}

#[test]
fn random_sources_have_certified_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let grid = budget_grid(0.0, 0.1, 2.0);
    let opts = MeshOptions { granularity: 2, ..Default::default() };
    let mut failures = Vec::new();
    for k in 0..50 {
        let j = random_joint::<f64>(&mut rng, &[2, 2], false);
        let curve = approx_tilfc_joint(&j, 1, &grid, &opts).unwrap();
        let shape = certify_shape(&curve, 1e-9).unwrap();
        if !shape.passed() {
            failures.push((k, shape.violations));
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn shuffled_curve_fails_monotonicity() {
    let curve = approx_tilfc(&bss(1, 4), 1, &budget_grid(0.0, 0.1, 1.5), &MeshOptions { granularity: 2, ..Default::default() }).unwrap();
    let mut bad = curve.clone();
    let n = bad.grid.len();
    let ls: Vec<f64> = bad.grid.iter().rev().map(|p| p.l_bits).collect();
    for (p, l) in bad.grid.iter_mut().zip(ls) {
        p.l_bits = l;
    }
    assert!(n >= 3);
    assert!(!certify_shape(&bad, 1e-9).unwrap().monotone);
}

#[test]
fn large_searches_report_their_size() {
    let err = approx_tilfc(&bss(1, 4), 2, &[0.0], &MeshOptions::default()).unwrap_err();
    assert!(matches!(err, crate::Error::BudgetExhausted(_)));
    let curve = approx_tilfc(&bss(1, 4), 2, &budget_grid(0.0, 0.25, 1.5), &MeshOptions {
        granularity: 2,
        caps: Some(vec![2, 2]),
        budget: 10_000,
    })
    .unwrap();
    assert!(curve.heuristic);
    assert_eq!(curve.evaluated, 729);
}

#[test]
fn pointer_chase_witness_bounds_mimk_and_gamma() {
    let p = PcsParams::new(1, 2, 1).unwrap();
    let j = SourceHandle::pcs(p).exact::<f64>(crate::ATOM_CAP).unwrap();
    let f = j.factors();
    let silent = ProtocolTree::<f64>::builder(f[0].clone(), f[1].clone())
        .flavor(Flavor::Deterministic)
        .round(OutcomeSpace::unit(), Kernel::deterministic(|_, _, _| 0))
        .build()
        .unwrap();
    let bound = 3.0 * 1.0; // (r+2)⌈log2 n⌉
    let curve = curve_from_witnesses(&j, vec![silent, pointer_chase_reveal(p).unwrap()], &[0.0, 1.0, 2.0, bound]).unwrap();
    let m = mimk_estimate(&curve, 1.0).unwrap();
    assert!(m.value <= bound && m.witness_ic_int <= bound);
    match gamma_cbib(&curve) {
        Gamma::Finite(g) => assert!(g >= 1.0 / bound, "{g}"),
        Gamma::Infinite => {}
    }
    reanalyze(&curve, &j);
    assert!(curve.to_csv().starts_with("# schema: crglab-curve/1\nC_bits,L_bits,witness_id\n"));
}
