use super::compress::{compress_min_entropy, couple_to_uniform, Compression, KeyMap};
use crate::error::{Error, Result};
use crate::prob::{entropy, min_entropy, tv, Dist, JointDist, OutcomeSpace, Weight};
use crate::protocol::{keyed_states, Flavor, Kernel, KeyedProtocol, Party, ProtocolTree, Row};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Marginal key laws of a keyed protocol and its exact disagreement.
#[derive(Clone, Debug)]
pub struct KeyLaws<W> {
    pub alice: Dist<W>,
    pub bob: Dist<W>,
    /// `P[K_A ≠ K_B]`.
    pub disagreement: W,
}

pub fn key_laws<W: Weight>(kp: &KeyedProtocol<W>, s: &JointDist<W>, cap: usize) -> Result<KeyLaws<W>> {
    let k = kp.key_space().len();
    let mut a = vec![W::zero(); k];
    let mut b = vec![W::zero(); k];
    let mut off = W::zero();
    for st in keyed_states(kp, s, cap)? {
        let w = st.path.w;
        a[st.key_a] = a[st.key_a].clone() + w.clone();
        b[st.key_b] = b[st.key_b].clone() + w.clone();
        if st.key_a != st.key_b {
            off = off + w;
        }
    }
    Ok(KeyLaws {
        alice: Dist::new(kp.key_space().clone(), a)?,
        bob: Dist::new(kp.key_space().clone(), b)?,
        disagreement: off,
    })
}

fn mapped<W: Weight>(row: Row<W>, map: &KeyMap<W>) -> Row<W> {
    let mut acc: BTreeMap<usize, W> = BTreeMap::new();
    for (k, w) in row {
        for (k2, w2) in map.row(k) {
            let e = acc.entry(k2).or_insert_with(W::zero);
            *e = e.clone() + w.clone() * w2;
        }
    }
    acc.into_iter().collect()
}

/// Same protocol with each party's key passed through its own map.
fn compose<W: Weight>(kp: &KeyedProtocol<W>, alice: KeyMap<W>, bob: KeyMap<W>) -> Result<KeyedProtocol<W>> {
    if alice.codomain.len() != bob.codomain.len() {
        return Err(Error::InvalidParams("key maps disagree on the new key space".into()));
    }
    let space = alice.codomain.clone();
    let inner = Arc::new(kp.clone());
    let kernel = |party: Party, map: KeyMap<W>| {
        let inner = inner.clone();
        Kernel::func(move |h: &[usize], x, c| {
            inner.key_row(party, h, x, c).ok().flatten().map(|row| mapped(row, &map))
        })
    };
    KeyedProtocol::new(
        kp.protocol.clone(),
        space,
        kernel(Party::Alice, alice),
        kernel(Party::Bob, bob),
    )
}

/// Outcome of turning a min-entropy key into a near-uniform one.
#[derive(Clone, Debug)]
pub struct QuasiReport<W> {
    pub protocol: KeyedProtocol<W>,
    pub compression: Compression<W>,
    /// `log2 |K'|`.
    pub key_bits: f64,
    /// Disagreement of the input protocol.
    pub epsilon: f64,
    /// Exact `Δ(f(K_A), U)`.
    pub uniformity: f64,
    /// Exact `P[f(K_A) ≠ f(K_B)]`.
    pub disagreement: f64,
    /// `1 − ε − sqrt(δ/2)`.
    pub certified_agreement: f64,
}

impl<W> QuasiReport<W> {
    /// Agreement with a uniform key under the best coupling is at least
    /// `1 − disagreement − uniformity`; the certified bound must not exceed it.
    pub fn certificate_holds(&self) -> bool {
        1.0 - self.disagreement - self.uniformity >= self.certified_agreement - 1e-12
            && self.uniformity <= (self.certified_gap()).sqrt() + 1e-12
    }

    fn certified_gap(&self) -> f64 {
        let s = 1.0 - self.epsilon - self.certified_agreement;
        s * s
    }
}

/// Both parties apply the greedy compression built from Alice's key law.
/// The compressed key has `D(f(K_A) ‖ U) ≤ ln(1+δ)` nats, so Pinsker
/// certifies `Δ(f(K_A), U) ≤ sqrt(δ/2)`.
pub fn quasi_to_achievable<W: Weight>(
    kp: &KeyedProtocol<W>,
    s: &JointDist<W>,
    l_bits: f64,
    delta: f64,
    cap: usize,
) -> Result<QuasiReport<W>> {
    let laws = key_laws(kp, s, cap)?;
    let hb = min_entropy(&laws.bob);
    if hb < l_bits - 1e-12 {
        return Err(Error::Precondition(format!("Bob's key min-entropy {hb} is below {l_bits}")));
    }
    let compression = compress_min_entropy(&laws.alice, l_bits, delta)?;
    let f = compression.map.clone();
    let protocol = compose(kp, f.clone(), f.clone())?;
    let after = key_laws(&protocol, s, cap)?;
    let uniformity = tv(&after.alice, &Dist::uniform(after.alice.space().clone()))?.to_f64();
    let epsilon = laws.disagreement.to_f64();
    Ok(QuasiReport {
        key_bits: (f.codomain.len() as f64).log2(),
        compression,
        epsilon,
        uniformity,
        disagreement: after.disagreement.to_f64(),
        certified_agreement: 1.0 - epsilon - (delta / 2.0).sqrt(),
        protocol,
    })
}

/// Outcome of turning a near-uniform key into an exactly uniform one.
#[derive(Clone, Debug, Serialize)]
pub struct AchievableReport {
    /// `Δ(K_A, U)` and `Δ(K_B, U)`.
    pub uniformity: (f64, f64),
    pub disagreement_before: f64,
    pub disagreement_after: f64,
    /// `P[K_A ≠ K_B] + Δ(K_A, U) + Δ(K_B, U)`, at most `3ε`.
    pub bound: f64,
    /// Min-entropy of each output key, `log2 |K|`.
    pub min_entropy: (f64, f64),
}

/// Each party re-randomizes its key with the optimal coupling to the uniform
/// law, so both outputs are exactly uniform.
pub fn achievable_to_quasi<W: Weight>(
    kp: &KeyedProtocol<W>,
    s: &JointDist<W>,
    cap: usize,
) -> Result<(KeyedProtocol<W>, AchievableReport)> {
    let laws = key_laws(kp, s, cap)?;
    let u = Dist::uniform(kp.key_space().clone());
    let ga = couple_to_uniform(&laws.alice);
    let gb = couple_to_uniform(&laws.bob);
    let ua = (W::one() - ga.agreement.clone()).to_f64();
    let ub = (W::one() - gb.agreement.clone()).to_f64();
    let protocol = compose(kp, ga.map, gb.map)?;
    let after = key_laws(&protocol, s, cap)?;
    debug_assert!(tv(&after.alice, &u)?.to_f64() < 1e-9);
    let before = laws.disagreement.to_f64();
    let report = AchievableReport {
        uniformity: (ua, ub),
        disagreement_before: before,
        disagreement_after: after.disagreement.to_f64(),
        bound: before + ua + ub,
        min_entropy: (min_entropy(&after.alice), min_entropy(&after.bob)),
    };
    Ok((protocol, report))
}

/// The one-bit protocol that looks like a long key under Shannon entropy
/// but not under min-entropy. It is a negative example, not a key generator.
#[derive(Clone, Debug)]
pub struct ShannonExhibit<W> {
    pub protocol: KeyedProtocol<W>,
    pub source: JointDist<W>,
    pub key_bits: u32,
    pub agreement: f64,
    pub entropy: f64,
    pub min_entropy: f64,
}

/// Alice sends `B ~ Bern(ε)`. On `B = 0` both keys are zero; on `B = 1` each
/// party draws its own uniform key of `⌈L/ε⌉` bits.
pub fn shannon_entropy_exhibit<W: Weight>(l_bits: u32, eps: W) -> Result<ShannonExhibit<W>> {
    let e = eps.to_f64();
    if !(e > 0.0 && e <= 1.0) {
        return Err(Error::InvalidParams(format!("ε must lie in (0, 1], got {e}")));
    }
    let key_bits = (l_bits as f64 / e - 1e-9).ceil().max(0.0) as u32;
    if key_bits > 12 {
        return Err(Error::CapExceeded {
            what: "exhibit key bits",
            needed: key_bits as u128,
            cap: 12,
        });
    }
    let unit = OutcomeSpace::unit();
    let one = eps.clone();
    let protocol = ProtocolTree::builder(unit.clone(), unit.clone())
        .flavor(Flavor::PrivateCoin)
        .round(
            OutcomeSpace::bits(1),
            Kernel::func(move |_, _, _| Some(vec![(0, W::one() - one.clone()), (1, one.clone())])),
        )
        .build()?;
    let size = 1usize << key_bits;
    let key = move |h: &[usize], _: usize, _: usize| {
        Some(if h[0] == 0 {
            vec![(0, W::one())]
        } else {
            (0..size).map(|k| (k, W::ratio(1, size as u64))).collect()
        })
    };
    let kp = KeyedProtocol::new(protocol, OutcomeSpace::bits(key_bits), Kernel::func(key), Kernel::func(key))?;
    let source = JointDist::new(vec![unit.clone(), unit], vec![W::one()])?;
    let laws = key_laws(&kp, &source, crate::STATE_CAP)?;
    Ok(ShannonExhibit {
        agreement: 1.0 - laws.disagreement.to_f64(),
        entropy: entropy(&laws.alice),
        min_entropy: min_entropy(&laws.alice),
        protocol: kp,
        source,
        key_bits,
    })
}
