//! Appending a hash-equality check to a keyed protocol.

use super::analysis::keyed_states;
use super::run::KeyedRun;
use super::tree::{ceil_log2, Flavor, Kernel, KeyedProtocol, Party};
use crate::error::{Error, Result};
use crate::prob::{JointDist, OutcomeSpace, Weight};
use crate::tape::{SeededTape, Stream, Tape};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A uniformly random GF(2)-linear map from `in_bits` to `out_bits` bits.
/// Distinct inputs collide with probability exactly `2^-out_bits` over the
/// choice of map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinearHash {
    pub in_bits: u32,
    pub out_bits: u32,
    rows: Vec<u64>,
}

impl LinearHash {
    pub fn from_seed(seed: u64, in_bits: u32, out_bits: u32) -> Result<Self> {
        if in_bits > 64 || out_bits == 0 || out_bits > 63 {
            return Err(Error::InvalidParams(format!(
                "hash widths must satisfy in_bits <= 64 and 1 <= out_bits <= 63, got {in_bits} and {out_bits}"
            )));
        }
        let mut tape = SeededTape::new(seed, 0);
        let rows = (0..out_bits).map(|_| tape.bits(Stream::Public, in_bits)).collect();
        Ok(Self {
            in_bits,
            out_bits,
            rows,
        })
    }

    pub fn hash(&self, k: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0, |acc, (i, row)| acc | (((row & k).count_ones() & 1) as u64) << i)
    }
}

/// Output length used for a target failure level `gamma`:
/// `⌈2 log2(1/γ)⌉ + 10` bits.
pub fn hash_bits(gamma: f64) -> Result<u32> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParams("gamma must lie in (0, 1)".into()));
    }
    Ok((2.0 * (1.0 / gamma).log2()).ceil() as u32 + 10)
}

/// A keyed protocol extended by one round in which the next speaker sends
/// the hash of its key. The receiver accepts iff its own key hashes to the
/// same value.
#[derive(Clone, Debug)]
pub struct HashChecked<W = f64> {
    pub keyed: KeyedProtocol<W>,
    pub hash: LinearHash,
    pub sender: Party,
    base_rounds: usize,
}

impl<W: Weight> HashChecked<W> {
    pub fn receiver(&self) -> Party {
        self.sender.other()
    }

    /// The receiver's accept bit on a run of [`Self::keyed`].
    pub fn verdict(&self, run: &KeyedRun) -> bool {
        let msg = run.transcript.messages[self.base_rounds];
        let own = match self.receiver() {
            Party::Alice => run.key_a,
            Party::Bob => run.key_b,
        };
        self.hash.hash(own as u64) == msg as u64
    }

    /// Exact acceptance probability on a source.
    pub fn accept_probability(&self, s: &JointDist<W>, cap: usize) -> Result<W> {
        let mut acc = W::zero();
        for st in keyed_states(&self.keyed, s, cap)? {
            let msg = st.path.hist[self.base_rounds];
            let own = match self.receiver() {
                Party::Alice => st.key_a,
                Party::Bob => st.key_b,
            };
            if self.hash.hash(own as u64) == msg as u64 {
                acc = acc + st.path.w;
            }
        }
        Ok(acc)
    }
}

/// Appends a hash round with `⌈2 log2(1/γ)⌉ + 10` output bits. The sender
/// is the party whose turn follows the last round. A randomized sender key
/// is drawn before hashing, so the sender's final key is its original key
/// conditioned on the hash it sent.
pub fn append_hash_check<W: Weight>(kp: &KeyedProtocol<W>, gamma: f64, seed: u64) -> Result<HashChecked<W>> {
    let p = &kp.protocol;
    let r = p.rounds();
    let hash = LinearHash::from_seed(seed, ceil_log2(kp.key_space().len()), hash_bits(gamma)?)?;
    let sender = Party::of_round(r);
    let base = Arc::new(kp.clone());
    let h = Arc::new(hash.clone());
    let send = {
        let (base, h) = (base.clone(), h.clone());
        Kernel::func(move |hist: &[usize], input: usize, coin: usize| {
            let row = base.key_row(sender, hist, input, coin).ok()??;
            let mut out: BTreeMap<usize, W> = BTreeMap::new();
            for (k, w) in row {
                let e = out.entry(h.hash(k as u64) as usize).or_insert_with(W::zero);
                *e = e.clone() + w;
            }
            Some(out.into_iter().collect())
        })
    };
    let halting = p.halting();
    let sender_key = {
        let (base, h) = (base.clone(), h.clone());
        let halt = (halting && r > 0).then(|| p.halt_symbol(r - 1));
        Kernel::func(move |hist: &[usize], input: usize, coin: usize| {
            let row = base.key_row(sender, &hist[..r], input, coin).ok()??;
            if halt.is_some_and(|hs| hist[r - 1] == hs) {
                return Some(row);
            }
            let kept: Vec<(usize, W)> = row.into_iter().filter(|(k, _)| h.hash(*k as u64) == hist[r] as u64).collect();
            let total = kept.iter().fold(W::zero(), |a, (_, w)| a + w.clone());
            if total.is_zero() {
                return None;
            }
            Some(kept.into_iter().map(|(k, w)| (k, w / total.clone())).collect())
        })
    };
    let receiver_key = {
        let base = base.clone();
        Kernel::func(move |hist: &[usize], input: usize, coin: usize| base.key_row(sender.other(), &hist[..r], input, coin).ok()?)
    };

    let mut protocol = p.clone();
    protocol.alphabets.push(OutcomeSpace::bits(hash.out_bits));
    protocol.kernels.push(send);
    if protocol.flavor == Flavor::Deterministic && !point_table(kp.key_map(sender)) {
        protocol.flavor = Flavor::PrivateCoin;
    }
    let (alice_key, bob_key) = match sender {
        Party::Alice => (sender_key, receiver_key),
        Party::Bob => (receiver_key, sender_key),
    };
    let keyed = KeyedProtocol::new(protocol, kp.key_space().clone(), alice_key, bob_key)?;
    Ok(HashChecked {
        keyed,
        hash,
        sender,
        base_rounds: r,
    })
}

fn point_table<W: Weight>(k: &Kernel<W>) -> bool {
    match k {
        Kernel::Table { width, rows } => rows.chunks(*width).all(|r| r.iter().filter(|w| !w.is_zero()).count() <= 1),
        Kernel::Func(_) => false,
    }
}

/// Fraction of `seeds` hash draws under which the fixed keys `a != b`
/// collide.
pub fn collision_rate(a: u64, b: u64, in_bits: u32, out_bits: u32, seeds: std::ops::Range<u64>) -> Result<(u64, u64)> {
    let mut hits = 0;
    let total = seeds.end - seeds.start;
    for seed in seeds {
        let h = LinearHash::from_seed(seed, in_bits, out_bits)?;
        if h.hash(a) == h.hash(b) {
            hits += 1;
        }
    }
    Ok((hits, total))
}
