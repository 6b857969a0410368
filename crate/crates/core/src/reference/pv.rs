//! The bidirectional pointer-verification protocol.
//!
//! Round 1 is an empty message from Alice. Bob then sends `(i_0, j_0)`, and
//! the parties alternately extend both chains: the speaker of the next round
//! sends `i_k = π_k(i_{k-1})` and `j_k = π_{r+1-k}^{-1}(j_{k-1})`. After level
//! `(r-1)/2` the next speaker owns `π_{(r+1)/2}` and sends
//! `1[π_{(r+1)/2}(i_{(r-1)/2}) = j_{(r-1)/2}]`.
//!
//! The message logic is written once against [`PvView`] and shared by the
//! protocol tree and the lazy exact enumerator.

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::prob::{OutcomeSpace, Rational, Weight};
use crate::protocol::{Flavor, Kernel, ProtocolTree};
use crate::sources::PvCodec;
use crate::tape::{exact_law, LazyPerm, Stream, Tape};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// Access to a party's share of a PV instance. Steps are 1-based.
pub trait PvView {
    /// `(i_0, j_0)`; only Bob can answer.
    fn start(&mut self) -> (usize, usize);
    fn apply(&mut self, step: usize, x: usize) -> usize;
    fn inverse(&mut self, step: usize, x: usize) -> usize;
}

/// Number of rounds, `(r+5)/2`.
pub fn pv_rounds(r: usize) -> usize {
    (r + 5) / 2
}

/// Message of round `t` (0-based) given the history so far.
pub fn pv_message(r: usize, n: usize, t: usize, hist: &[usize], view: &mut dyn PvView) -> usize {
    let last_level = (r - 1) / 2;
    match t {
        0 => 0,
        1 => {
            let (i0, j0) = view.start();
            i0 * n + j0
        }
        _ => {
            let (i, j) = (hist[t - 1] / n, hist[t - 1] % n);
            if t - 1 == last_level + 1 {
                let mid = r.div_ceil(2);
                (view.apply(mid, i) == j) as usize
            } else {
                let k = t - 1;
                view.apply(k, i) * n + view.inverse(r + 1 - k, j)
            }
        }
    }
}

/// One party's permutations (by step) and, for Bob, the start pair.
struct Share {
    start: Option<(usize, usize)>,
    perms: Vec<(usize, Perm)>,
}

impl Share {
    fn perm(&self, step: usize) -> &Perm {
        &self
            .perms
            .iter()
            .find(|(s, _)| *s == step)
            .unwrap_or_else(|| panic!("step {step} belongs to the other party"))
            .1
    }
}

impl PvView for Share {
    fn start(&mut self) -> (usize, usize) {
        self.start.expect("only Bob holds the start pair")
    }
    fn apply(&mut self, step: usize, x: usize) -> usize {
        self.perm(step).apply(x)
    }
    fn inverse(&mut self, step: usize, x: usize) -> usize {
        self.perm(step).inverse().apply(x)
    }
}

fn alice_share(codec: &PvCodec, x: usize) -> Share {
    let perms = codec.decode_alice(x).into_iter().enumerate().map(|(k, p)| (2 * k + 1, p)).collect();
    Share { start: None, perms }
}

fn bob_share(codec: &PvCodec, y: usize) -> Share {
    let (i0, j0, ps) = codec.decode_bob(y);
    let perms = ps.into_iter().enumerate().map(|(k, p)| (2 * k + 2, p)).collect();
    Share {
        start: Some((i0, j0)),
        perms,
    }
}

fn check_odd(r: usize) -> Result<()> {
    if r % 2 == 0 {
        return Err(Error::InvalidParams(format!("pointer verification needs odd r (got {r})")));
    }
    Ok(())
}

/// Deterministic decision protocol over the PV input spaces. The last
/// message is the verdict bit.
pub fn pv_bidirectional_protocol<W: Weight>(r: usize, n: usize) -> Result<ProtocolTree<W>> {
    check_odd(r)?;
    let codec = Arc::new(PvCodec::new(r, n)?);
    let mut b = ProtocolTree::<W>::builder(codec.alice_space(), codec.bob_space()).flavor(Flavor::Deterministic);
    let rounds = pv_rounds(r);
    for t in 0..rounds {
        let alphabet = match t {
            0 => OutcomeSpace::unit(),
            _ if t == rounds - 1 => OutcomeSpace::indexed("verdict", 2),
            _ => OutcomeSpace::indexed("pair", n * n),
        };
        let c = codec.clone();
        let kernel = if t % 2 == 0 {
            Kernel::deterministic(move |h: &[usize], x, _| pv_message(r, n, t, h, &mut alice_share(&c, x)))
        } else {
            Kernel::deterministic(move |h: &[usize], y, _| pv_message(r, n, t, h, &mut bob_share(&c, y)))
        };
        b = b.round(alphabet, kernel);
    }
    b.build()
}

/// Transcript of the protocol on a full instance.
pub fn pv_transcript(r: usize, n: usize, perms: &[Perm], i0: usize, j0: usize) -> Vec<usize> {
    let mut view = Share {
        start: Some((i0, j0)),
        perms: perms.iter().cloned().enumerate().map(|(k, p)| (k + 1, p)).collect(),
    };
    let mut hist = Vec::with_capacity(pv_rounds(r));
    for t in 0..pv_rounds(r) {
        let m = pv_message(r, n, t, &hist, &mut view);
        hist.push(m);
    }
    hist
}

struct LazyInstance<'a> {
    tape: &'a mut dyn Tape,
    perms: Vec<LazyPerm>,
    start: (usize, usize),
}

impl PvView for LazyInstance<'_> {
    fn start(&mut self) -> (usize, usize) {
        self.start
    }
    fn apply(&mut self, step: usize, x: usize) -> usize {
        self.perms[step - 1].apply(self.tape, x)
    }
    fn inverse(&mut self, step: usize, x: usize) -> usize {
        self.perms[step - 1].inverse(self.tape, x)
    }
}

/// Exact transcript laws under the yes and no families, by enumerating only
/// the permutation entries the protocol (and, on yes inputs, the chase that
/// defines `j_0`) actually reads.
pub fn pv_transcript_laws(r: usize, n: usize, cap: usize) -> Result<[BTreeMap<Vec<usize>, Rational>; 2]> {
    check_odd(r)?;
    let run = |yes: bool| {
        exact_law::<_, Rational, _>(cap, |tape| {
            let mut perms: Vec<LazyPerm> = (0..r).map(|_| LazyPerm::new(n, Stream::Source)).collect();
            let i0 = tape.below(Stream::Source, n);
            let j0 = if yes {
                perms.iter_mut().fold(i0, |i, p| p.apply(tape, i))
            } else {
                tape.below(Stream::Source, n)
            };
            let mut view = LazyInstance {
                tape,
                perms,
                start: (i0, j0),
            };
            let mut hist = Vec::with_capacity(pv_rounds(r));
            for t in 0..pv_rounds(r) {
                let m = pv_message(r, n, t, &hist, &mut view);
                hist.push(m);
            }
            hist
        })
    };
    Ok([run(true)?, run(false)?])
}

/// `Δ` between two laws over the same outcome type.
pub fn law_distance<T: Ord + Clone, W: Weight>(p: &BTreeMap<T, W>, q: &BTreeMap<T, W>) -> W {
    let keys: BTreeSet<&T> = p.keys().chain(q.keys()).collect();
    let zero = W::zero();
    let total = keys.into_iter().fold(W::zero(), |acc, k| {
        let a = p.get(k).unwrap_or(&zero);
        let b = q.get(k).unwrap_or(&zero);
        acc + if a > b { a.clone() - b.clone() } else { b.clone() - a.clone() }
    });
    total * W::ratio(1, 2)
}

/// Exact distinguishing advantage of the protocol between the yes and no
/// families, computed lazily.
pub fn pv_exact_advantage(r: usize, n: usize, cap: usize) -> Result<Rational> {
    let [yes, no] = pv_transcript_laws(r, n, cap)?;
    Ok(law_distance(&yes, &no))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::transcript_law;
    use crate::sources::{sample_pv, Answer, PvParams, SourceHandle};

    fn one_minus_inv(n: usize) -> Rational {
        Rational::new((n as i64 - 1).into(), (n as i64).into())
    }

    #[test]
    fn shape_and_cost() {
        let p = pv_bidirectional_protocol::<f64>(1, 4).unwrap();
        assert_eq!(p.rounds(), 3);
        assert!(p.cc_bits() <= 1 + 2 * 2);
        let p = pv_bidirectional_protocol::<f64>(3, 2).unwrap();
        assert_eq!(p.rounds(), 4);
        assert!(p.cc_bits() <= 5);
        assert!(pv_bidirectional_protocol::<f64>(2, 4).is_err());
    }

    #[test]
    fn yes_instances_accept() {
        for (r, n) in [(1, 5), (3, 6), (5, 4), (7, 9)] {
            let p = PvParams::new(r, n, Answer::Yes).unwrap();
            for seed in 0..50 {
                let s = sample_pv(&p, seed);
                assert_eq!(*pv_transcript(r, n, &s.perms, s.i0, s.j0).last().unwrap(), 1);
            }
        }
    }

    #[test]
    fn lazy_advantage_is_exact() {
        for (r, n) in [(1, 2), (1, 3), (3, 4), (5, 3)] {
            assert_eq!(pv_exact_advantage(r, n, crate::ATOM_CAP).unwrap(), one_minus_inv(n), "r={r} n={n}");
        }
    }

    #[test]
    fn lazy_laws_match_the_protocol_tree() {
        for (r, n) in [(1, 3), (3, 3)] {
            let p = pv_bidirectional_protocol::<Rational>(r, n).unwrap();
            let [yes, no] = pv_transcript_laws(r, n, crate::ATOM_CAP).unwrap();
            for (ans, lazy) in [(Answer::Yes, yes), (Answer::No, no)] {
                let src = SourceHandle::pv(PvParams::new(r, n, ans).unwrap());
                let joint = src.exact::<Rational>(crate::ATOM_CAP).unwrap();
                let law = transcript_law(&p, &joint, crate::STATE_CAP).unwrap();
                // Tree keys carry the coin index first.
                let stripped: BTreeMap<Vec<usize>, Rational> = law.into_iter().map(|(k, w)| (k[1..].to_vec(), w)).collect();
                assert_eq!(stripped, lazy);
            }
        }
    }
}
