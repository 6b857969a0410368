//! The pointer-chasing source and its planted variants.

use crate::error::{Error, Result};
use crate::perm::{all_perms, factorial, Perm};
use crate::prob::{JointDist, MixedRadix, OutcomeSpace, Weight};
use crate::tape::{SeededTape, Stream, Tape};
use serde::{Deserialize, Serialize};

/// Parameters `(r, n, ell)` of the pointer-chasing source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PcsParams {
    /// Number of permutations.
    pub r: usize,
    /// Pointer universe size.
    pub n: usize,
    /// String length in bits.
    pub ell: u32,
}

impl PcsParams {
    pub fn new(r: usize, n: usize, ell: u32) -> Result<Self> {
        if r == 0 || n < 2 || ell == 0 {
            return Err(Error::InvalidParams(format!(
                "pointer-chasing source needs r >= 1, n >= 2, ell >= 1 (got r={r}, n={n}, ell={ell})"
            )));
        }
        if ell > 32 {
            return Err(Error::InvalidParams("string length above 32 bits is not supported".into()));
        }
        Ok(Self { r, n, ell })
    }

    pub fn alice_perm_count(&self) -> usize {
        self.r.div_ceil(2)
    }

    pub fn bob_perm_count(&self) -> usize {
        self.r / 2
    }

    /// Number of atoms with positive mass: `(n!)^r * n * 2^(ell(2n-1))`.
    pub fn atom_count(&self) -> u128 {
        let f = factorial(self.n).map(|f| f as u128).unwrap_or(u128::MAX);
        let mut total: u128 = 1;
        for _ in 0..self.r {
            total = total.saturating_mul(f);
        }
        let bits = self.ell as u128 * (2 * self.n as u128 - 1);
        let strings = if bits >= 127 { u128::MAX } else { 1u128 << bits };
        total.saturating_mul(self.n as u128).saturating_mul(strings)
    }

    pub(crate) fn string_count(&self) -> usize {
        1usize << self.ell
    }
}

/// One sample: Alice holds the odd-indexed permutations and strings `A`,
/// Bob holds the start pointer, the even-indexed permutations, and `B`.
/// All indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PcsInstance {
    pub n: usize,
    pub ell: u32,
    /// `perms[t]` is the permutation applied at step `t+1`; Alice owns even
    /// positions of this vector (steps 1, 3, ...), Bob the odd positions.
    pub perms: Vec<Perm>,
    pub i0: usize,
    pub a: Vec<u64>,
    pub b: Vec<u64>,
}

/// Forward and reverse pointers of a sample.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChaseTrace {
    /// `i_0 .. i_r` with `i_t = π_t(i_{t-1})`.
    pub forward: Vec<usize>,
    /// `j_0 .. j_r` with `j_0` the endpoint and `j_t = π_{r+1-t}^{-1}(j_{t-1})`.
    pub reverse: Vec<usize>,
}

impl PcsInstance {
    pub fn r(&self) -> usize {
        self.perms.len()
    }

    pub fn pointers(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.r() + 1);
        let mut i = self.i0;
        v.push(i);
        for p in &self.perms {
            i = p.apply(i);
            v.push(i);
        }
        v
    }

    pub fn endpoint(&self) -> usize {
        *self.pointers().last().expect("non-empty")
    }

    pub fn trace(&self) -> ChaseTrace {
        let forward = self.pointers();
        let mut reverse = Vec::with_capacity(self.r() + 1);
        let mut j = *forward.last().expect("non-empty");
        reverse.push(j);
        for p in self.perms.iter().rev() {
            j = p.inverse().apply(j);
            reverse.push(j);
        }
        ChaseTrace { forward, reverse }
    }

    pub fn alice_perms(&self) -> impl Iterator<Item = &Perm> {
        self.perms.iter().step_by(2)
    }

    pub fn bob_perms(&self) -> impl Iterator<Item = &Perm> {
        self.perms.iter().skip(1).step_by(2)
    }

    /// Indices where Alice's and Bob's strings agree.
    pub fn matched(&self) -> Vec<usize> {
        (0..self.n).filter(|&j| self.a[j] == self.b[j]).collect()
    }

    /// Alice's part of `self` combined with Bob's part of `other`.
    pub fn splice(&self, other: &PcsInstance) -> PcsInstance {
        let perms = self
            .perms
            .iter()
            .zip(&other.perms)
            .enumerate()
            .map(|(t, (mine, theirs))| if t % 2 == 0 { mine.clone() } else { theirs.clone() })
            .collect();
        PcsInstance {
            n: self.n,
            ell: self.ell,
            perms,
            i0: other.i0,
            a: self.a.clone(),
            b: other.b.clone(),
        }
    }
}

/// Atom indexing for PCS inputs. Alice's atom packs the ranks of her
/// permutations followed by `A_1..A_n`; Bob's packs `i_0`, his permutation
/// ranks, then `B_1..B_n`.
#[derive(Clone, Debug)]
pub struct PcsCodec {
    pub params: PcsParams,
    alice: MixedRadix,
    bob: MixedRadix,
}

impl PcsCodec {
    pub fn new(params: PcsParams) -> Result<Self> {
        let f = factorial(params.n).ok_or_else(|| Error::InvalidParams("n! overflows".into()))?;
        let s = params.string_count();
        let mut ar = vec![f; params.alice_perm_count()];
        ar.extend(std::iter::repeat_n(s, params.n));
        let mut br = vec![params.n];
        br.extend(std::iter::repeat_n(f, params.bob_perm_count()));
        br.extend(std::iter::repeat_n(s, params.n));
        for r in [&ar, &br] {
            if r.iter().try_fold(1usize, |acc, &x| acc.checked_mul(x)).is_none() {
                return Err(Error::InvalidParams("input space does not fit in a machine word".into()));
            }
        }
        Ok(Self {
            params,
            alice: MixedRadix::new(ar),
            bob: MixedRadix::new(br),
        })
    }

    pub fn alice_space(&self) -> OutcomeSpace {
        OutcomeSpace::indexed("pcs-x", self.alice.total())
    }

    pub fn bob_space(&self) -> OutcomeSpace {
        OutcomeSpace::indexed("pcs-y", self.bob.total())
    }

    pub fn encode(&self, s: &PcsInstance) -> (usize, usize) {
        let mut ad: Vec<usize> = s.alice_perms().map(Perm::rank).collect();
        ad.extend(s.a.iter().map(|&x| x as usize));
        let mut bd = vec![s.i0];
        bd.extend(s.bob_perms().map(Perm::rank));
        bd.extend(s.b.iter().map(|&x| x as usize));
        (self.alice.encode(&ad), self.bob.encode(&bd))
    }

    /// Alice's view: her permutations (by step index) and strings.
    pub fn decode_alice(&self, x: usize) -> AliceView {
        let d = self.alice.decode(x);
        let k = self.params.alice_perm_count();
        AliceView {
            perms: d[..k].iter().map(|&r| Perm::unrank(self.params.n, r)).collect(),
            strings: d[k..].iter().map(|&v| v as u64).collect(),
        }
    }

    pub fn decode_bob(&self, y: usize) -> BobView {
        let d = self.bob.decode(y);
        let k = self.params.bob_perm_count();
        BobView {
            i0: d[0],
            perms: d[1..1 + k].iter().map(|&r| Perm::unrank(self.params.n, r)).collect(),
            strings: d[1 + k..].iter().map(|&v| v as u64).collect(),
        }
    }

    pub fn decode(&self, x: usize, y: usize) -> PcsInstance {
        let a = self.decode_alice(x);
        let b = self.decode_bob(y);
        let mut perms = Vec::with_capacity(self.params.r);
        for t in 0..self.params.r {
            perms.push(if t % 2 == 0 { a.perms[t / 2].clone() } else { b.perms[t / 2].clone() });
        }
        PcsInstance {
            n: self.params.n,
            ell: self.params.ell,
            perms,
            i0: b.i0,
            a: a.strings,
            b: b.strings,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AliceView {
    /// Permutations for steps 1, 3, 5, ...
    pub perms: Vec<Perm>,
    pub strings: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct BobView {
    pub i0: usize,
    /// Permutations for steps 2, 4, ...
    pub perms: Vec<Perm>,
    pub strings: Vec<u64>,
}

/// Parameters of the planted variants: strings agree exactly on a random
/// set `P`, which is forced to contain the chase endpoint iff
/// `contains_endpoint`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PlantedParams {
    pub base: PcsParams,
    pub planted_size: usize,
    pub contains_endpoint: bool,
}

impl PlantedParams {
    pub fn new(base: PcsParams, planted_size: usize, contains_endpoint: bool) -> Result<Self> {
        if planted_size == 0 || planted_size > base.n {
            return Err(Error::InvalidParams(format!(
                "planted set size {planted_size} must lie in 1..={}",
                base.n
            )));
        }
        Ok(Self {
            base,
            planted_size,
            contains_endpoint,
        })
    }

    /// The default planted size `⌊√n⌋`.
    pub fn default_size(n: usize) -> usize {
        n.isqrt().max(1)
    }
}

/// Draws strings that agree exactly on `planted` and are independent elsewhere.
pub(crate) fn draw_strings(tape: &mut dyn Tape, stream: Stream, n: usize, ell: u32, planted: &[usize]) -> (Vec<u64>, Vec<u64>) {
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for j in 0..n {
        if planted.contains(&j) {
            let v = tape.bits(stream, ell);
            a.push(v);
            b.push(v);
        } else {
            a.push(tape.bits(stream, ell));
            b.push(tape.bits(stream, ell));
        }
    }
    (a, b)
}

pub(crate) fn draw_perms(tape: &mut dyn Tape, stream: Stream, r: usize, n: usize) -> Vec<Perm> {
    (0..r).map(|_| tape.perm(stream, n)).collect()
}

/// Draw from a planted law on the given tape stream.
pub fn draw_planted(tape: &mut dyn Tape, stream: Stream, p: &PlantedParams) -> PcsInstance {
    let PcsParams { r, n, ell } = p.base;
    let perms = draw_perms(tape, stream, r, n);
    let i0 = tape.below(stream, n);
    let mut inst = PcsInstance {
        n,
        ell,
        perms,
        i0,
        a: vec![],
        b: vec![],
    };
    let all: Vec<usize> = (0..n).collect();
    let planted = if p.contains_endpoint {
        let end = inst.endpoint();
        let rest: Vec<usize> = all.iter().copied().filter(|&j| j != end).collect();
        let mut s = tape.subset(stream, &rest, p.planted_size - 1);
        s.push(end);
        s.sort_unstable();
        s
    } else {
        tape.subset(stream, &all, p.planted_size)
    };
    let (a, b) = draw_strings(tape, stream, n, ell, &planted);
    inst.a = a;
    inst.b = b;
    inst
}

/// Draw from the pointer-chasing source on the given tape stream.
pub fn draw_pcs(tape: &mut dyn Tape, stream: Stream, p: &PcsParams) -> PcsInstance {
    let planted = PlantedParams {
        base: *p,
        planted_size: 1,
        contains_endpoint: true,
    };
    draw_planted(tape, stream, &planted)
}

pub fn sample_pcs(p: &PcsParams, seed: u64) -> PcsInstance {
    draw_pcs(&mut SeededTape::new(seed, 0), Stream::Source, p)
}

pub fn sample_planted(p: &PlantedParams, seed: u64) -> PcsInstance {
    draw_planted(&mut SeededTape::new(seed, 0), Stream::Source, p)
}

/// Exact joint law of `(X, Y)` by direct enumeration of the support.
pub fn enumerate_pcs<W: Weight>(p: &PcsParams, cap: usize) -> Result<JointDist<W>> {
    let atoms = p.atom_count();
    if atoms > cap as u128 {
        return Err(Error::CapExceeded {
            what: "pointer-chasing source",
            needed: atoms,
            cap: cap as u128,
        });
    }
    let codec = PcsCodec::new(*p)?;
    let perms = all_perms(p.n);
    let strings = p.string_count();
    let mass = W::ratio(1, atoms as u64);
    let mut entries = Vec::with_capacity(atoms as usize);
    let mut choice = vec![0usize; p.r];
    loop {
        let chosen: Vec<Perm> = choice.iter().map(|&c| perms[c].clone()).collect();
        for i0 in 0..p.n {
            let end = chosen.iter().fold(i0, |i, pi| pi.apply(i));
            // Free strings: the shared one at the endpoint, then A and B elsewhere.
            let free = 2 * p.n - 1;
            let total = strings.pow(free as u32);
            for code in 0..total {
                let mut c = code;
                let mut next = || {
                    let v = (c % strings) as u64;
                    c /= strings;
                    v
                };
                let shared = next();
                let mut a = vec![0; p.n];
                let mut b = vec![0; p.n];
                for j in 0..p.n {
                    if j == end {
                        a[j] = shared;
                        b[j] = shared;
                    } else {
                        a[j] = next();
                        b[j] = next();
                    }
                }
                let inst = PcsInstance {
                    n: p.n,
                    ell: p.ell,
                    perms: chosen.clone(),
                    i0,
                    a,
                    b,
                };
                let (x, y) = codec.encode(&inst);
                entries.push((vec![x, y], mass.clone()));
            }
        }
        // Odometer over permutation tuples.
        let mut t = 0;
        loop {
            if t == p.r {
                return JointDist::from_sparse(
                    vec![codec.alice_space(), codec.bob_space()],
                    entries,
                    crate::STATE_CAP,
                );
            }
            choice[t] += 1;
            if choice[t] < perms.len() {
                break;
            }
            choice[t] = 0;
            t += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Rational;

    #[test]
    fn atom_counts_match_formula() {
        let cases = [((1, 2, 1), 32u128), ((1, 3, 1), 576), ((2, 2, 1), 64), ((1, 2, 2), 256)];
        for ((r, n, ell), want) in cases {
            let p = PcsParams::new(r, n, ell).unwrap();
            assert_eq!(p.atom_count(), want);
            let j = enumerate_pcs::<Rational>(&p, 1_000_000).unwrap();
            assert_eq!(j.support_len() as u128, want);
        }
    }

    #[test]
    fn endpoint_strings_match() {
        let p = PcsParams::new(3, 5, 3).unwrap();
        for seed in 0..200 {
            let s = sample_pcs(&p, seed);
            let e = s.endpoint();
            assert_eq!(s.a[e], s.b[e]);
            let tr = s.trace();
            for t in 0..=3 {
                assert_eq!(tr.forward[t], tr.reverse[3 - t]);
            }
        }
    }

    #[test]
    fn codec_round_trip() {
        let p = PcsParams::new(3, 3, 2).unwrap();
        let codec = PcsCodec::new(p).unwrap();
        for seed in 0..50 {
            let s = sample_pcs(&p, seed);
            let (x, y) = codec.encode(&s);
            assert_eq!(codec.decode(x, y), s);
        }
    }

    #[test]
    fn cap_reports_atom_count() {
        let p = PcsParams::new(2, 4, 2).unwrap();
        match enumerate_pcs::<f64>(&p, 1000) {
            Err(Error::CapExceeded { needed, .. }) => assert_eq!(needed, p.atom_count()),
            other => panic!("expected cap error, got {other:?}"),
        }
    }
}
