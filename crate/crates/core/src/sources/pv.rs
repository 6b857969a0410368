//! Pointer verification: decide whether `j_0` is the end of the chase from `i_0`.

use crate::error::{Error, Result};
use crate::perm::{factorial, Perm};
use crate::prob::{MixedRadix, OutcomeSpace};
use crate::tape::{SeededTape, Stream, Tape};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PvParams {
    /// Number of permutations; must be odd.
    pub r: usize,
    pub n: usize,
    pub answer: Answer,
}

impl PvParams {
    pub fn new(r: usize, n: usize, answer: Answer) -> Result<Self> {
        if r % 2 == 0 {
            return Err(Error::InvalidParams(format!("pointer verification needs odd r (got {r})")));
        }
        if n < 2 {
            return Err(Error::InvalidParams("pointer verification needs n >= 2".into()));
        }
        Ok(Self { r, n, answer })
    }
}

/// Alice holds the odd-step permutations; Bob holds `i_0`, `j_0`, and the
/// even-step permutations. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PvInstance {
    pub n: usize,
    pub perms: Vec<Perm>,
    pub i0: usize,
    pub j0: usize,
}

impl PvInstance {
    pub fn chase(&self) -> usize {
        self.perms.iter().fold(self.i0, |i, p| p.apply(i))
    }

    pub fn is_yes(&self) -> bool {
        self.chase() == self.j0
    }

    pub fn splice(&self, other: &PvInstance) -> PvInstance {
        let perms = self
            .perms
            .iter()
            .zip(&other.perms)
            .enumerate()
            .map(|(t, (m, o))| if t % 2 == 0 { m.clone() } else { o.clone() })
            .collect();
        PvInstance {
            n: self.n,
            perms,
            i0: other.i0,
            j0: other.j0,
        }
    }
}

pub fn draw_pv(tape: &mut dyn Tape, stream: Stream, p: &PvParams) -> PvInstance {
    let perms: Vec<Perm> = (0..p.r).map(|_| tape.perm(stream, p.n)).collect();
    let i0 = tape.below(stream, p.n);
    let mut inst = PvInstance {
        n: p.n,
        perms,
        i0,
        j0: 0,
    };
    inst.j0 = match p.answer {
        Answer::Yes => inst.chase(),
        Answer::No => tape.below(stream, p.n),
    };
    inst
}

pub fn sample_pv(p: &PvParams, seed: u64) -> PvInstance {
    draw_pv(&mut SeededTape::new(seed, 0), Stream::Source, p)
}

/// Atom indexing for PV inputs: Alice packs her permutation ranks, Bob packs
/// `(i_0, j_0)` followed by his permutation ranks.
#[derive(Clone, Debug)]
pub struct PvCodec {
    pub r: usize,
    pub n: usize,
    alice: MixedRadix,
    bob: MixedRadix,
}

impl PvCodec {
    pub fn new(r: usize, n: usize) -> Result<Self> {
        let f = factorial(n).ok_or_else(|| Error::InvalidParams("n! overflows".into()))?;
        let ar = vec![f; r.div_ceil(2)];
        let mut br = vec![n, n];
        br.extend(std::iter::repeat_n(f, r / 2));
        for v in [&ar, &br] {
            if v.iter().try_fold(1usize, |a, &x| a.checked_mul(x)).is_none() {
                return Err(Error::InvalidParams("input space does not fit in a machine word".into()));
            }
        }
        Ok(Self {
            r,
            n,
            alice: MixedRadix::new(ar),
            bob: MixedRadix::new(br),
        })
    }

    pub fn alice_space(&self) -> OutcomeSpace {
        OutcomeSpace::indexed("pv-x", self.alice.total())
    }

    pub fn bob_space(&self) -> OutcomeSpace {
        OutcomeSpace::indexed("pv-y", self.bob.total())
    }

    pub fn encode(&self, s: &PvInstance) -> (usize, usize) {
        let ad: Vec<usize> = s.perms.iter().step_by(2).map(Perm::rank).collect();
        let mut bd = vec![s.i0, s.j0];
        bd.extend(s.perms.iter().skip(1).step_by(2).map(Perm::rank));
        (self.alice.encode(&ad), self.bob.encode(&bd))
    }

    /// Alice's permutations, for steps 1, 3, ...
    pub fn decode_alice(&self, x: usize) -> Vec<Perm> {
        self.alice.decode(x).into_iter().map(|r| Perm::unrank(self.n, r)).collect()
    }

    /// `(i_0, j_0, permutations for steps 2, 4, ...)`.
    pub fn decode_bob(&self, y: usize) -> (usize, usize, Vec<Perm>) {
        let d = self.bob.decode(y);
        (d[0], d[1], d[2..].iter().map(|&r| Perm::unrank(self.n, r)).collect())
    }

    pub fn decode(&self, x: usize, y: usize) -> PvInstance {
        let a = self.decode_alice(x);
        let (i0, j0, b) = self.decode_bob(y);
        let perms = (0..self.r)
            .map(|t| if t % 2 == 0 { a[t / 2].clone() } else { b[t / 2].clone() })
            .collect();
        PvInstance {
            n: self.n,
            perms,
            i0,
            j0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn even_rounds_rejected() {
        assert!(PvParams::new(2, 4, Answer::Yes).is_err());
    }

    #[test]
    fn yes_case_satisfies_chase() {
        let p = PvParams::new(3, 6, Answer::Yes).unwrap();
        for seed in 0..100 {
            assert!(sample_pv(&p, seed).is_yes());
        }
        let p1 = PvParams::new(1, 5, Answer::Yes).unwrap();
        let s = sample_pv(&p1, 9);
        assert_eq!(s.j0, s.perms[0].apply(s.i0));
    }

    #[test]
    fn codec_round_trip() {
        let codec = PvCodec::new(3, 4).unwrap();
        let p = PvParams::new(3, 4, Answer::No).unwrap();
        for seed in 0..30 {
            let s = sample_pv(&p, seed);
            let (x, y) = codec.encode(&s);
            assert_eq!(codec.decode(x, y), s);
        }
    }
}
