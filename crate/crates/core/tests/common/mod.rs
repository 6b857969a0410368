//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use crglab::perm::all_perms;
use crglab::prob::{JointDist, Rational};
use crglab::sources::{PcsCodec, PcsInstance, PcsParams};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;

/// Brute-force table of the pointer-chasing source: every instance
/// (permutations, start, both string vectors with the endpoint strings tied)
/// is equally likely.
pub fn pcs_table(p: PcsParams) -> BTreeMap<(usize, usize), Rational> {
    let codec = PcsCodec::new(p).unwrap();
    let (n, strings) = (p.n, 1u64 << p.ell);
    let perms = all_perms(n);
    let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut total = 0u64;
    let mut choice = vec![0usize; p.r];
    loop {
        let ps: Vec<_> = choice.iter().map(|&c| perms[c].clone()).collect();
        for i0 in 0..n {
            let end = ps.iter().fold(i0, |i, q| q.apply(i));
            for a in 0..strings.pow(n as u32) {
                let a: Vec<u64> = (0..n).map(|k| a / strings.pow(k as u32) % strings).collect();
                for b in 0..strings.pow(n as u32 - 1) {
                    let mut rest = (0..n - 1).map(|k| b / strings.pow(k as u32) % strings);
                    let b: Vec<u64> = (0..n).map(|k| if k == end { a[end] } else { rest.next().unwrap() }).collect();
                    let inst = PcsInstance {
                        n,
                        ell: p.ell,
                        perms: ps.clone(),
                        i0,
                        a: a.clone(),
                        b,
                    };
                    *counts.entry(codec.encode(&inst)).or_default() += 1;
                    total += 1;
                }
            }
        }
        // Odometer over permutation choices.
        let mut k = 0;
        while k < p.r {
            choice[k] += 1;
            if choice[k] < perms.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
        if k == p.r {
            break;
        }
    }
    counts
        .into_iter()
        .map(|(xy, c)| (xy, Rational::new(BigInt::from(c), BigInt::from(total))))
        .collect()
}

/// `I(X;Y)` in bits of a sparse table, from the definition.
pub fn mutual_info_bits(table: &BTreeMap<(usize, usize), f64>) -> f64 {
    let mut px: BTreeMap<usize, f64> = BTreeMap::new();
    let mut py: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(x, y), &w) in table {
        *px.entry(x).or_default() += w;
        *py.entry(y).or_default() += w;
    }
    table
        .iter()
        .filter(|(_, &w)| w > 0.0)
        .map(|(&(x, y), &w)| w * (w / (px[&x] * py[&y])).log2())
        .sum()
}

/// Best transcript-law `Δ` between two joints over all deterministic
/// protocols with `rounds` alternating rounds (Alice first) and at most
/// `cc` bits. Every leaf of such a protocol is a rectangle, so the value is
/// `½ Σ_leaves |μ₁(R) − μ₂(R)|` maximized over every labelling of the
/// speaker's side at every node, with no pruning.
pub fn rectangle_oracle(s1: &JointDist<Rational>, s2: &JointDist<Rational>, rounds: usize, cc: u32) -> Rational {
    let (nx, ny) = (s1.factors()[0].len(), s1.factors()[1].len());
    let d: Vec<Vec<Rational>> = (0..nx)
        .map(|x| (0..ny).map(|y| s1.mass_at(&[x, y]) - s2.mass_at(&[x, y])).collect())
        .collect();
    let xs: Vec<usize> = (0..nx).collect();
    let ys: Vec<usize> = (0..ny).collect();
    let best = best_split(&d, &xs, &ys, 0, rounds, cc);
    best / Rational::from_integer(2.into())
}

fn best_split(d: &[Vec<Rational>], xs: &[usize], ys: &[usize], t: usize, rounds: usize, left: u32) -> Rational {
    let leaf = || {
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| d[x][y].clone()))
            .fold(Rational::zero(), |a, b| a + b)
            .abs()
    };
    if t == rounds {
        return leaf();
    }
    let alice = t % 2 == 0;
    let side = if alice { xs } else { ys };
    let mut best = best_split(d, xs, ys, t + 1, rounds, left);
    for bits in 1..=left {
        let labels = 1usize << bits;
        let total = labels.pow(side.len() as u32);
        for code in 0..total {
            let mut blocks = vec![Vec::new(); labels];
            let mut c = code;
            for &s in side {
                blocks[c % labels].push(s);
                c /= labels;
            }
            let v = blocks
                .iter()
                .filter(|b| !b.is_empty())
                .map(|b| {
                    if alice {
                        best_split(d, b, ys, t + 1, rounds, left - bits)
                    } else {
                        best_split(d, xs, b, t + 1, rounds, left - bits)
                    }
                })
                .fold(Rational::zero(), |a, b| a + b);
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// Two-sided Wilson interval for a binomial proportion at level 99%.
pub fn wilson99(hits: u64, trials: u64) -> (f64, f64) {
    let z = 2.5758293035489;
    let n = trials as f64;
    let p = hits as f64 / n;
    let centre = (p + z * z / (2.0 * n)) / (1.0 + z * z / n);
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / (1.0 + z * z / n);
    (centre - half, centre + half)
}

/// Exact key statistics of a keyed protocol: `P[K_A = K_B]`, whether the
/// agreed key is exactly uniform on `keys` values, and whether the
/// transcript with the public coin is exactly independent of the key pair.
pub struct ExactKeys {
    pub agreement: Rational,
    pub uniform: bool,
    pub independent: bool,
}

pub fn exact_keys(
    kp: &crglab::protocol::KeyedProtocol<Rational>,
    s: &JointDist<Rational>,
    keys: usize,
) -> ExactKeys {
    let states = crglab::protocol::keyed_states(kp, s, crglab::STATE_CAP).unwrap();
    let mut agreement = Rational::zero();
    let mut joint: BTreeMap<((usize, Vec<usize>), (usize, usize)), Rational> = BTreeMap::new();
    let mut tr: BTreeMap<(usize, Vec<usize>), Rational> = BTreeMap::new();
    let mut key: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    for st in states {
        let w = st.path.w.clone();
        if w.is_zero() {
            continue;
        }
        if st.key_a == st.key_b {
            agreement += &w;
        }
        let t = (st.path.coin, st.path.hist.clone());
        let k = (st.key_a, st.key_b);
        *joint.entry((t.clone(), k)).or_insert_with(Rational::zero) += &w;
        *tr.entry(t).or_insert_with(Rational::zero) += &w;
        *key.entry(k).or_insert_with(Rational::zero) += &w;
    }
    let each = Rational::new(BigInt::from(1), BigInt::from(keys));
    let uniform = key.len() == keys && key.iter().all(|((a, b), w)| a == b && *w == each);
    let independent = tr.iter().all(|(t, pt)| {
        key.iter().all(|(k, pk)| {
            let j = joint.get(&(t.clone(), *k)).cloned().unwrap_or_else(Rational::zero);
            j == pt * pk
        })
    });
    ExactKeys {
        agreement,
        uniform,
        independent,
    }
}
