//! Samplers and exact enumerators for the sources under study.

mod disj;
mod pcs;
mod pv;
mod spec;

pub use disj::{draw_disj, pad_disjointness, sample_disj, DisjParams};
pub use pcs::{
    draw_pcs, draw_planted, enumerate_pcs, sample_pcs, sample_planted, AliceView, BobView, ChaseTrace, PcsCodec,
    PcsInstance, PcsParams, PlantedParams,
};
pub use pv::{draw_pv, sample_pv, Answer, PvCodec, PvInstance, PvParams};
pub use spec::parse_source_spec;

pub(crate) use disj::intersection_size;

use crate::error::{Error, Result};
use crate::prob::{JointDist, OutcomeSpace, Rational, Weight};
use crate::tape::{exact_law, SeededTape, Stream, Tape};
use serde::Serialize;
use std::sync::Arc;

/// Which source a handle samples from.
#[derive(Clone, Debug)]
pub enum SourceKind {
    Pcs(PcsParams),
    /// Planted law with the endpoint forced into the planted set.
    PcsHat(PlantedParams),
    /// Planted law with an unconditioned planted set.
    PcsMid(PlantedParams),
    /// Product of the marginals of another source.
    Product(Box<SourceHandle>),
    Disj(DisjParams),
    Pv(PvParams),
    /// Binary symmetric source: `X` uniform, `Y = X` flipped with probability `p`.
    Bss(Rational),
    /// `X = Y` a uniform bit.
    PerfectBit,
    Explicit(Arc<JointDist<Rational>>),
    /// Another source with `bits` independent uniform coin bits appended to
    /// each party's input: `x' = x·2^bits + q`.
    Coins { inner: Box<SourceHandle>, bits: u32 },
}

/// One draw from a source, in the natural representation of its kind.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Sample {
    Pcs(PcsInstance),
    Disj { u: Vec<usize>, v: Vec<usize> },
    Pv(PvInstance),
    Atoms { x: usize, y: usize },
}

impl Sample {
    /// Alice's part of `self` with Bob's part of `other`.
    fn splice(&self, other: &Sample) -> Sample {
        match (self, other) {
            (Sample::Pcs(a), Sample::Pcs(b)) => Sample::Pcs(a.splice(b)),
            (Sample::Pv(a), Sample::Pv(b)) => Sample::Pv(a.splice(b)),
            (Sample::Disj { u, .. }, Sample::Disj { v, .. }) => Sample::Disj {
                u: u.clone(),
                v: v.clone(),
            },
            (Sample::Atoms { x, .. }, Sample::Atoms { y, .. }) => Sample::Atoms { x: *x, y: *y },
            _ => unreachable!("splicing samples of different kinds"),
        }
    }
}

/// A seedable source with an optional exact table.
#[derive(Clone, Debug)]
pub struct SourceHandle {
    kind: SourceKind,
}

impl SourceHandle {
    pub fn new(kind: SourceKind) -> Self {
        Self { kind }
    }

    pub fn pcs(p: PcsParams) -> Self {
        Self::new(SourceKind::Pcs(p))
    }

    pub fn planted(p: PlantedParams) -> Self {
        if p.contains_endpoint {
            Self::new(SourceKind::PcsHat(p))
        } else {
            Self::new(SourceKind::PcsMid(p))
        }
    }

    pub fn pv(p: PvParams) -> Self {
        Self::new(SourceKind::Pv(p))
    }

    pub fn disj(p: DisjParams) -> Self {
        Self::new(SourceKind::Disj(p))
    }

    pub fn bss(p: Rational) -> Result<Self> {
        if p < Rational::ratio(0, 1) || p > Rational::ratio(1, 1) {
            return Err(Error::InvalidParams("crossover probability must lie in [0, 1]".into()));
        }
        Ok(Self::new(SourceKind::Bss(p)))
    }

    pub fn perfect_bit() -> Self {
        Self::new(SourceKind::PerfectBit)
    }

    pub fn explicit(j: JointDist<Rational>) -> Result<Self> {
        if j.arity() != 2 {
            return Err(Error::InvalidParams("explicit sources need a joint over (X, Y)".into()));
        }
        Ok(Self::new(SourceKind::Explicit(Arc::new(j))))
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            SourceKind::Pcs(_) => "pcs",
            SourceKind::PcsHat(_) => "pcs-hat",
            SourceKind::PcsMid(_) => "pcs-mid",
            SourceKind::Product(_) => "product",
            SourceKind::Disj(_) => "disj",
            SourceKind::Pv(_) => "pv",
            SourceKind::Bss(_) => "bss",
            SourceKind::PerfectBit => "perfect-bit",
            SourceKind::Explicit(_) => "explicit",
            SourceKind::Coins { .. } => "coins",
        }
    }

    /// Product of the marginals; idempotent.
    pub fn product_of_marginals(&self) -> Self {
        match &self.kind {
            SourceKind::Product(_) => self.clone(),
            _ => Self::new(SourceKind::Product(Box::new(self.clone()))),
        }
    }

    /// Draws one sample, using `stream` for the source randomness.
    pub fn draw(&self, tape: &mut dyn Tape, stream: Stream) -> Sample {
        match &self.kind {
            SourceKind::Pcs(p) => Sample::Pcs(draw_pcs(tape, stream, p)),
            SourceKind::PcsHat(p) | SourceKind::PcsMid(p) => Sample::Pcs(draw_planted(tape, stream, p)),
            SourceKind::Product(inner) => {
                let first = inner.draw(tape, stream);
                let second = inner.draw(tape, Stream::SourceAux);
                first.splice(&second)
            }
            SourceKind::Disj(p) => {
                let (u, v) = draw_disj(tape, stream, p);
                Sample::Disj { u, v }
            }
            SourceKind::Pv(p) => Sample::Pv(draw_pv(tape, stream, p)),
            SourceKind::Bss(p) => {
                let x = tape.below(stream, 2);
                let num: usize = p.numer().try_into().expect("numerator fits");
                let den: usize = p.denom().try_into().expect("denominator fits");
                let flip = tape.below(stream, den) < num;
                Sample::Atoms {
                    x,
                    y: x ^ flip as usize,
                }
            }
            SourceKind::PerfectBit => {
                let x = tape.below(stream, 2);
                Sample::Atoms { x, y: x }
            }
            SourceKind::Explicit(j) => {
                let u = tape.bits(stream, 53) as f64 / (1u64 << 53) as f64;
                let mut acc = 0.0;
                let radix = j.radix();
                let mut last = 0;
                for (i, m) in j.masses().iter().enumerate() {
                    let m = m.to_f64();
                    if m == 0.0 {
                        continue;
                    }
                    last = i;
                    acc += m;
                    if u < acc {
                        break;
                    }
                }
                let t = radix.decode(last);
                Sample::Atoms { x: t[0], y: t[1] }
            }
            SourceKind::Coins { inner, bits } => {
                let s = inner.draw(tape, stream);
                let (x, y) = inner.encode(&s).expect("attach_coins checked the inner spaces");
                let qa = tape.bits(stream, *bits) as usize;
                let qb = tape.bits(stream, *bits) as usize;
                Sample::Atoms {
                    x: (x << bits) | qa,
                    y: (y << bits) | qb,
                }
            }
        }
    }

    /// Sample number `counter` under `seed`.
    pub fn sample(&self, seed: u64, counter: u64) -> Sample {
        self.draw(&mut SeededTape::new(seed, counter), Stream::Source)
    }

    /// Alice's and Bob's input spaces.
    pub fn spaces(&self) -> Result<(OutcomeSpace, OutcomeSpace)> {
        match &self.kind {
            SourceKind::Pcs(p) => {
                let c = PcsCodec::new(*p)?;
                Ok((c.alice_space(), c.bob_space()))
            }
            SourceKind::PcsHat(p) | SourceKind::PcsMid(p) => {
                let c = PcsCodec::new(p.base)?;
                Ok((c.alice_space(), c.bob_space()))
            }
            SourceKind::Product(inner) => inner.spaces(),
            SourceKind::Disj(p) => {
                if p.n > 20 {
                    return Err(Error::InvalidParams("disjointness atoms are bitmasks; n must be at most 20".into()));
                }
                Ok((OutcomeSpace::indexed("set", 1 << p.n), OutcomeSpace::indexed("set", 1 << p.n)))
            }
            SourceKind::Pv(p) => {
                let c = PvCodec::new(p.r, p.n)?;
                Ok((c.alice_space(), c.bob_space()))
            }
            SourceKind::Bss(_) | SourceKind::PerfectBit => {
                let b = OutcomeSpace::labeled(["0", "1"])?;
                Ok((b.clone(), b))
            }
            SourceKind::Explicit(j) => Ok((j.factors()[0].clone(), j.factors()[1].clone())),
            SourceKind::Coins { inner, bits } => {
                let (x, y) = inner.spaces()?;
                let q = OutcomeSpace::bits(*bits);
                Ok((OutcomeSpace::product(&[x, q.clone()])?, OutcomeSpace::product(&[y, q])?))
            }
        }
    }

    /// Atom indices of a sample in [`Self::spaces`].
    pub fn encode(&self, s: &Sample) -> Result<(usize, usize)> {
        let root = self.root();
        match (&root.kind, s) {
            (SourceKind::Pcs(p), Sample::Pcs(i)) => Ok(PcsCodec::new(*p)?.encode(i)),
            (SourceKind::PcsHat(p) | SourceKind::PcsMid(p), Sample::Pcs(i)) => Ok(PcsCodec::new(p.base)?.encode(i)),
            (SourceKind::Pv(p), Sample::Pv(i)) => Ok(PvCodec::new(p.r, p.n)?.encode(i)),
            (SourceKind::Disj(_), Sample::Disj { u, v }) => {
                let mask = |s: &[usize]| s.iter().fold(0usize, |m, &x| m | 1 << x);
                Ok((mask(u), mask(v)))
            }
            (_, Sample::Atoms { x, y }) => Ok((*x, *y)),
            _ => Err(Error::InvalidParams("sample does not belong to this source".into())),
        }
    }

    fn root(&self) -> &SourceHandle {
        match &self.kind {
            SourceKind::Product(inner) => inner.root(),
            _ => self,
        }
    }

    /// Exact joint law of `(X, Y)`. Fails when enumeration would visit more
    /// than `cap` branches.
    pub fn exact<W: Weight>(&self, cap: usize) -> Result<JointDist<W>> {
        match &self.kind {
            SourceKind::Pcs(p) => enumerate_pcs(p, cap),
            SourceKind::Product(inner) => inner.exact::<W>(cap)?.product_of_marginals(),
            SourceKind::Bss(p) => {
                let p = W::from_rational(p);
                let half = W::ratio(1, 2);
                let stay = half.clone() * (W::one() - p.clone());
                let flip = half * p;
                let (x, y) = self.spaces()?;
                JointDist::new(vec![x, y], vec![stay.clone(), flip.clone(), flip, stay])
            }
            SourceKind::PerfectBit => {
                let (x, y) = self.spaces()?;
                let h = W::ratio(1, 2);
                JointDist::new(vec![x, y], vec![h.clone(), W::zero(), W::zero(), h])
            }
            SourceKind::Explicit(j) => Ok(j.convert()),
            SourceKind::Coins { inner, bits } => with_coin_blocks(&inner.exact::<W>(cap)?, *bits),
            _ => self.exact_by_enumeration(cap),
        }
    }

    /// Exact law obtained by running the sampler on every tape.
    pub fn exact_by_enumeration<W: Weight>(&self, cap: usize) -> Result<JointDist<W>> {
        let (xs, ys) = self.spaces()?;
        let mut failure = None;
        let law = exact_law::<_, W, _>(cap, |t| {
            let s = self.draw(t, Stream::Source);
            match self.encode(&s) {
                Ok(xy) => xy,
                Err(e) => {
                    failure.get_or_insert(e);
                    (0, 0)
                }
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        JointDist::from_sparse(
            vec![xs, ys],
            law.into_iter().map(|((x, y), w)| (vec![x, y], w)),
            crate::STATE_CAP,
        )
    }
}

/// Appends independent uniform coin blocks of `bits` bits to both parties.
pub fn attach_coins(s: &SourceHandle, bits: u32) -> Result<SourceHandle> {
    if bits > 16 {
        return Err(Error::InvalidParams("at most 16 coin bits per party".into()));
    }
    s.spaces()?;
    Ok(SourceHandle::new(SourceKind::Coins {
        inner: Box::new(s.clone()),
        bits,
    }))
}

/// Exact law of `(X·2^b + Q_A, Y·2^b + Q_B)` with `Q_A, Q_B` uniform and
/// independent of everything else.
pub fn with_coin_blocks<W: Weight>(mu: &JointDist<W>, bits: u32) -> Result<JointDist<W>> {
    if mu.arity() != 2 {
        return Err(Error::InvalidParams("coin blocks attach to a joint over (X, Y)".into()));
    }
    let q = OutcomeSpace::bits(bits);
    let xs = OutcomeSpace::product(&[mu.factors()[0].clone(), q.clone()])?;
    let ys = OutcomeSpace::product(&[mu.factors()[1].clone(), q.clone()])?;
    let w = W::ratio(1, 1u64 << (2 * bits));
    let mut entries = Vec::new();
    for (t, m) in mu.support() {
        for qa in 0..q.len() {
            for qb in 0..q.len() {
                entries.push((vec![(t[0] << bits) | qa, (t[1] << bits) | qb], m.clone() * w.clone()));
            }
        }
    }
    JointDist::from_sparse(vec![xs, ys], entries, crate::STATE_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn micro() -> PcsParams {
        PcsParams::new(1, 2, 1).unwrap()
    }

    #[test]
    fn hand_enumerator_matches_sampler_enumeration() {
        for (r, n, ell) in [(1, 2, 1), (2, 2, 1), (1, 3, 1)] {
            let h = SourceHandle::pcs(PcsParams::new(r, n, ell).unwrap());
            let a = h.exact::<Rational>(1_000_000).unwrap();
            let b = h.exact_by_enumeration::<Rational>(1_000_000).unwrap();
            assert_eq!(a, b, "({r},{n},{ell})");
        }
    }

    #[test]
    fn coin_blocks_match_enumerated_sampler() {
        let h = attach_coins(&SourceHandle::bss(Rational::ratio(1, 4)).unwrap(), 1).unwrap();
        let a = h.exact::<Rational>(1_000_000).unwrap();
        let b = h.exact_by_enumeration::<Rational>(1_000_000).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.factors()[0].len(), 4);
    }

    #[test]
    fn planted_size_one_with_endpoint_is_the_source() {
        let p = PlantedParams::new(micro(), 1, true).unwrap();
        let a = SourceHandle::planted(p).exact::<Rational>(1_000_000).unwrap();
        let b = SourceHandle::pcs(micro()).exact::<Rational>(1_000_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn hat_and_mid_share_product_of_marginals() {
        let base = PcsParams::new(1, 4, 1).unwrap();
        let hat = SourceHandle::planted(PlantedParams::new(base, 2, true).unwrap());
        let mid = SourceHandle::planted(PlantedParams::new(base, 2, false).unwrap());
        let a = hat.product_of_marginals().exact::<Rational>(1_000_000).unwrap();
        let b = mid.product_of_marginals().exact::<Rational>(1_000_000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn product_sampler_splices_independent_draws() {
        let h = SourceHandle::pcs(PcsParams::new(2, 5, 2).unwrap()).product_of_marginals();
        let mut hits = 0;
        for seed in 0..2000 {
            if let Sample::Pcs(s) = h.sample(seed, 0) {
                let e = s.endpoint();
                hits += (s.a[e] == s.b[e]) as usize;
            }
        }
        // Agreement at the endpoint drops to 2^-ell = 1/4.
        assert!((hits as f64 / 2000.0 - 0.25).abs() < 0.05);
    }

    #[test]
    fn bss_table_is_exact() {
        let h = SourceHandle::bss(Rational::ratio(11, 100)).unwrap();
        let j = h.exact::<Rational>(10).unwrap();
        assert_eq!(j.masses()[1], Rational::ratio(11, 200));
        let i = j.mutual_info(&[0], &[1], &[]);
        assert!((i - (1.0 - crate::prob::binary_entropy(0.11))).abs() < 1e-12);
    }
}
