//! Sources of randomness.
//!
//! Samplers, reductions, and protocols draw randomness through the [`Tape`]
//! trait. A [`SeededTape`] backs each named [`Stream`] with its own ChaCha
//! generator keyed by `(seed, stream, counter)`, so Alice's, Bob's, and the
//! public randomness are reproducible independently. [`exact_law`] runs the
//! same code against every possible tape and returns the exact output law.

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::prob::Weight;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use std::collections::{BTreeMap, HashMap};

/// Independent randomness streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stream {
    /// Randomness of the source itself.
    Source,
    /// Shared public coins.
    Public,
    /// Alice's private coins.
    Alice,
    /// Bob's private coins.
    Bob,
    /// A second independent draw from the source, used for product laws.
    SourceAux,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Source => 1,
            Stream::Public => 2,
            Stream::Alice => 3,
            Stream::Bob => 4,
            Stream::SourceAux => 5,
        }
    }
}

pub trait Tape {
    /// Uniform draw from `0..k` (`k >= 1`).
    fn below(&mut self, stream: Stream, k: usize) -> usize;

    /// Uniform `width`-bit string.
    fn bits(&mut self, stream: Stream, width: u32) -> u64 {
        let mut out = 0u64;
        let mut left = width;
        while left > 0 {
            let chunk = left.min(16);
            out = (out << chunk) | self.below(stream, 1 << chunk) as u64;
            left -= chunk;
        }
        out
    }

    /// Uniform permutation of `0..n` (Fisher-Yates).
    fn perm(&mut self, stream: Stream, n: usize) -> Perm {
        let mut v: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below(stream, i + 1);
            v.swap(i, j);
        }
        Perm::from_images(v).expect("shuffle yields a permutation")
    }

    /// Uniform `k`-subset of `pool`, returned sorted.
    fn subset(&mut self, stream: Stream, pool: &[usize], k: usize) -> Vec<usize> {
        let mut v = pool.to_vec();
        for i in 0..k {
            let j = i + self.below(stream, v.len() - i);
            v.swap(i, j);
        }
        v.truncate(k);
        v.sort_unstable();
        v
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the 64-bit key of stream `(seed, stream, counter)`.
pub fn stream_key(seed: u64, stream: Stream, counter: u64) -> u64 {
    splitmix(splitmix(seed) ^ splitmix(stream.id().wrapping_mul(0x1000_0000_01B3)) ^ splitmix(counter ^ 0xA5A5_5A5A))
}

/// Tape backed by seeded generators, one per stream.
pub struct SeededTape {
    seed: u64,
    counter: u64,
    streams: HashMap<Stream, ChaCha12Rng>,
}

impl SeededTape {
    pub fn new(seed: u64, counter: u64) -> Self {
        Self {
            seed,
            counter,
            streams: HashMap::new(),
        }
    }

    pub fn rng(&mut self, stream: Stream) -> &mut ChaCha12Rng {
        let (seed, counter) = (self.seed, self.counter);
        self.streams
            .entry(stream)
            .or_insert_with(|| ChaCha12Rng::seed_from_u64(stream_key(seed, stream, counter)))
    }

    pub fn uniform_f64(&mut self, stream: Stream) -> f64 {
        self.rng(stream).gen::<f64>()
    }
}

impl Tape for SeededTape {
    fn below(&mut self, stream: Stream, k: usize) -> usize {
        assert!(k >= 1, "draw from an empty range");
        if k == 1 {
            return 0;
        }
        self.rng(stream).gen_range(0..k)
    }
}

/// Replays a recorded prefix of choices and extends it with zeros.
struct ReplayTape {
    path: Vec<(usize, usize)>,
    pos: usize,
}

impl Tape for ReplayTape {
    fn below(&mut self, _stream: Stream, k: usize) -> usize {
        assert!(k >= 1, "draw from an empty range");
        if k == 1 {
            return 0;
        }
        if self.pos < self.path.len() {
            let (c, recorded) = self.path[self.pos];
            assert_eq!(recorded, k, "program is not deterministic given its tape");
            self.pos += 1;
            return c;
        }
        self.path.push((0, k));
        self.pos += 1;
        0
    }
}

/// Exact output law of `program` over all tapes, by depth-first enumeration
/// of every branch. Fails once more than `cap` branches are visited.
pub fn exact_law<T, W, F>(cap: usize, mut program: F) -> Result<BTreeMap<T, W>>
where
    T: Ord,
    W: Weight,
    F: FnMut(&mut dyn Tape) -> T,
{
    // Accumulate counts per denominator, then convert once at the end.
    let mut acc: BTreeMap<T, BTreeMap<u128, u64>> = BTreeMap::new();
    let mut tape = ReplayTape { path: Vec::new(), pos: 0 };
    let mut visited = 0usize;
    loop {
        visited += 1;
        if visited > cap {
            return Err(Error::CapExceeded {
                what: "exact enumeration",
                needed: visited as u128,
                cap: cap as u128,
            });
        }
        tape.pos = 0;
        let out = program(&mut tape);
        let den = tape
            .path
            .iter()
            .try_fold(1u128, |a, &(_, k)| a.checked_mul(k as u128))
            .ok_or_else(|| Error::InvalidParams("branch probability underflows".into()))?;
        *acc.entry(out).or_default().entry(den).or_default() += 1;
        // Advance to the next branch.
        loop {
            match tape.path.last_mut() {
                None => return Ok(finish(acc)),
                Some((c, k)) if *c + 1 < *k => {
                    *c += 1;
                    break;
                }
                Some(_) => {
                    tape.path.pop();
                }
            }
        }
    }
}

fn finish<T: Ord, W: Weight>(acc: BTreeMap<T, BTreeMap<u128, u64>>) -> BTreeMap<T, W> {
    acc.into_iter()
        .map(|(t, per_den)| {
            let w = per_den.into_iter().fold(W::zero(), |s, (den, count)| {
                s + W::from_rational(&crate::prob::Rational::new(count.into(), den.into()))
            });
            (t, w)
        })
        .collect()
}

/// A uniformly random permutation whose entries are drawn only when queried.
///
/// Conditioned on the pairs revealed so far, the rest of a uniform
/// permutation is a uniform bijection between the unrevealed domain and
/// range, so each query draws uniformly from what is still free.
#[derive(Clone, Debug)]
pub struct LazyPerm {
    stream: Stream,
    fwd: Vec<Option<usize>>,
    inv: Vec<Option<usize>>,
}

impl LazyPerm {
    pub fn new(n: usize, stream: Stream) -> Self {
        Self {
            stream,
            fwd: vec![None; n],
            inv: vec![None; n],
        }
    }

    pub fn apply(&mut self, tape: &mut dyn Tape, a: usize) -> usize {
        if let Some(b) = self.fwd[a] {
            return b;
        }
        let b = nth_free(&self.inv, tape.below(self.stream, free_count(&self.inv)));
        self.fwd[a] = Some(b);
        self.inv[b] = Some(a);
        b
    }

    pub fn inverse(&mut self, tape: &mut dyn Tape, b: usize) -> usize {
        if let Some(a) = self.inv[b] {
            return a;
        }
        let a = nth_free(&self.fwd, tape.below(self.stream, free_count(&self.fwd)));
        self.fwd[a] = Some(b);
        self.inv[b] = Some(a);
        a
    }
}

fn free_count(v: &[Option<usize>]) -> usize {
    v.iter().filter(|x| x.is_none()).count()
}

fn nth_free(v: &[Option<usize>], n: usize) -> usize {
    v.iter()
        .enumerate()
        .filter(|(_, x)| x.is_none())
        .nth(n)
        .map(|(i, _)| i)
        .expect("free slot exists")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Rational;

    #[test]
    fn streams_are_reproducible_and_independent() {
        let mut a = SeededTape::new(7, 0);
        let mut b = SeededTape::new(7, 0);
        let xa: Vec<usize> = (0..20).map(|_| a.below(Stream::Alice, 1000)).collect();
        // Interleaving another stream must not disturb Alice's draws.
        let xb: Vec<usize> = (0..20)
            .map(|_| {
                b.below(Stream::Bob, 1000);
                b.below(Stream::Alice, 1000)
            })
            .collect();
        assert_eq!(xa, xb);
        let mut c = SeededTape::new(7, 1);
        let xc: Vec<usize> = (0..20).map(|_| c.below(Stream::Alice, 1000)).collect();
        assert_ne!(xa, xc);
    }

    #[test]
    fn exact_law_of_uniform_perm() {
        let law = exact_law::<_, Rational, _>(1000, |t| t.perm(Stream::Source, 3)).unwrap();
        assert_eq!(law.len(), 6);
        assert!(law.values().all(|w| *w == Rational::ratio(1, 6)));
    }

    #[test]
    fn exact_law_of_subset_and_sum() {
        let law = exact_law::<_, Rational, _>(1000, |t| t.subset(Stream::Source, &[0, 1, 2, 3], 2)).unwrap();
        assert_eq!(law.len(), 6);
        assert!(law.values().all(|w| *w == Rational::ratio(1, 6)));
        let law = exact_law::<_, Rational, _>(1000, |t| t.below(Stream::Source, 2) + t.below(Stream::Source, 2)).unwrap();
        assert_eq!(law[&1], Rational::ratio(1, 2));
    }

    #[test]
    fn lazy_perm_is_uniform_under_mixed_queries() {
        let law = exact_law::<_, Rational, _>(1000, |t| {
            let mut p = LazyPerm::new(3, Stream::Source);
            let b = p.inverse(t, 1);
            let c = p.apply(t, 2);
            let a = p.apply(t, 0);
            let d = p.apply(t, 1);
            let images = vec![a, d, c];
            assert_eq!(images[b], 1);
            images
        })
        .unwrap();
        assert_eq!(law.len(), 6);
        assert!(law.values().all(|w| *w == Rational::ratio(1, 6)));
    }

    #[test]
    fn cap_stops_enumeration() {
        let r = exact_law::<_, f64, _>(10, |t| t.perm(Stream::Source, 4));
        assert!(matches!(r, Err(Error::CapExceeded { .. })));
    }
}
