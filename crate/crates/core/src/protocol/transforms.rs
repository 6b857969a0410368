//! Protocol transforms: time-sharing mixtures, key augmentation, and
//! absorbing explicit coin blocks into private randomness.

use super::analysis::{info_costs, IcReport};
use super::tree::{Flavor, Kernel, KeyedProtocol, Party, ProtocolTree, Row};
use crate::error::{Error, Result};
use crate::prob::{Dist, JointDist, OutcomeSpace, Weight};
use crate::sources::with_coin_blocks;
use serde::Serialize;
use std::sync::Arc;

/// Symbols of round `t`, or the single padding symbol past the last round.
fn padded_len<W: Weight>(p: &ProtocolTree<W>, t: usize) -> usize {
    if t < p.rounds() {
        p.alphabets()[t].len()
    } else {
        1
    }
}

fn inner_row<W: Weight>(p: &ProtocolTree<W>, t: usize, hist: &[usize], input: usize, coin: usize) -> Option<Row<W>> {
    if t >= p.rounds() {
        return Some(vec![(0, W::one())]);
    }
    p.row(t, hist, input, coin).ok().flatten()
}

/// Time-sharing: Alice draws a private bit `B` (1 with probability `delta`)
/// and runs `p1` when `B = 1`, `p2` otherwise. `B` travels in the first
/// message, whose alphabet is the disjoint union of both first alphabets.
/// The shorter protocol is padded with one-symbol rounds; the public coin
/// is the product of both coins.
pub fn mix_protocols<W: Weight>(p1: &ProtocolTree<W>, p2: &ProtocolTree<W>, delta: W) -> Result<ProtocolTree<W>> {
    if p1.alice_inputs().len() != p2.alice_inputs().len() || p1.bob_inputs().len() != p2.bob_inputs().len() {
        return Err(Error::InvalidParams("mixed protocols must share input spaces".into()));
    }
    if p1.halting() || p2.halting() {
        return Err(Error::InvalidParams("mixing halting protocols is not supported".into()));
    }
    if delta.is_negative() || delta > W::one() {
        return Err(Error::InvalidParams("mixing weight must lie in [0, 1]".into()));
    }
    let rounds = p1.rounds().max(p2.rounds()).max(1);
    let n1 = padded_len(p1, 0);
    let label = |p: &ProtocolTree<W>, tag: &str| -> Vec<String> {
        if p.rounds() == 0 {
            vec![format!("({tag},-)")]
        } else {
            p.alphabets()[0].labels().into_iter().map(|l| format!("({tag},{l})")).collect()
        }
    };
    let mut first = label(p1, "1");
    first.extend(label(p2, "0"));
    let mut alphabets = vec![OutcomeSpace::labeled(first)?];
    for t in 1..rounds {
        let same = t < p1.rounds() && t < p2.rounds() && p1.alphabets()[t] == p2.alphabets()[t];
        alphabets.push(if same {
            p1.alphabets()[t].clone()
        } else {
            OutcomeSpace::range(padded_len(p1, t).max(padded_len(p2, t)))
        });
    }

    let k2 = p2.coin_count();
    let public_coin = match (p1.public_coin(), p2.public_coin()) {
        (None, None) => None,
        (a, b) => {
            let unit = |d: Option<&Dist<W>>| d.cloned().unwrap_or_else(|| Dist::point(OutcomeSpace::unit(), 0));
            let (a, b) = (unit(a), unit(b));
            let mut mass = Vec::with_capacity(a.len() * b.len());
            for wa in a.masses() {
                for wb in b.masses() {
                    mass.push(wa.clone() * wb.clone());
                }
            }
            Some(Dist::new(OutcomeSpace::product(&[a.space().clone(), b.space().clone()])?, mass)?)
        }
    };

    let (a, b) = (Arc::new(p1.clone()), Arc::new(p2.clone()));
    let mut kernels = Vec::with_capacity(rounds);
    for t in 0..rounds {
        let (a, b, delta) = (a.clone(), b.clone(), delta.clone());
        kernels.push(Kernel::func(move |hist: &[usize], input: usize, coin: usize| {
            let (c1, c2) = (coin / k2, coin % k2);
            if t == 0 {
                let mut row = Vec::new();
                if !delta.is_zero() {
                    for (s, w) in inner_row(&a, 0, &[], input, c1)? {
                        row.push((s, w * delta.clone()));
                    }
                }
                let rest = W::one() - delta.clone();
                if !rest.is_zero() {
                    for (s, w) in inner_row(&b, 0, &[], input, c2)? {
                        row.push((n1 + s, w * rest.clone()));
                    }
                }
                return Some(row);
            }
            let mut inner: Vec<usize> = hist.to_vec();
            if hist[0] < n1 {
                inner_row(&a, t, &inner, input, c1)
            } else {
                inner[0] -= n1;
                inner_row(&b, t, &inner, input, c2)
            }
        }));
    }
    let flavor = if public_coin.is_some() {
        Flavor::PublicCoin
    } else {
        Flavor::PrivateCoin
    };
    Ok(ProtocolTree {
        alice: p1.alice_inputs().clone(),
        bob: p1.bob_inputs().clone(),
        alphabets,
        kernels,
        public_coin,
        flavor,
        halting: false,
    })
}

/// The last speaker appends its key to the final message, so the final
/// alphabet becomes `U_r × K`. Only deterministic keyed protocols qualify.
pub fn augment_with_key<W: Weight>(kp: &KeyedProtocol<W>) -> Result<ProtocolTree<W>> {
    let p = &kp.protocol;
    if p.flavor() != Flavor::Deterministic {
        return Err(Error::Precondition("key augmentation needs a deterministic protocol".into()));
    }
    if p.rounds() == 0 || p.halting() {
        return Err(Error::Precondition("key augmentation needs at least one round and no halting".into()));
    }
    for party in [Party::Alice, Party::Bob] {
        if let Kernel::Table { width, rows } = kp.key_map(party) {
            let randomized = rows
                .chunks(*width)
                .any(|r| r.iter().filter(|w| !w.is_zero()).count() > 1);
            if randomized {
                return Err(Error::Precondition("key augmentation needs deterministic key maps".into()));
            }
        }
    }
    let last = p.rounds() - 1;
    let speaker = p.speaker(last);
    let keys = kp.key_space().len();
    let mut out = p.clone();
    out.alphabets[last] = OutcomeSpace::product(&[p.alphabets()[last].clone(), kp.key_space().clone()])?;
    let kp = Arc::new(kp.clone());
    out.kernels[last] = Kernel::func(move |hist: &[usize], input: usize, coin: usize| {
        let row = kp.protocol.row(last, hist, input, coin).ok()??;
        let mut full = hist.to_vec();
        let mut out = Vec::new();
        for (m, w) in row {
            full.push(m);
            for (k, wk) in kp.key_row(speaker, &full, input, coin).ok()?? {
                out.push((m * keys + k, w.clone() * wk));
            }
            full.pop();
        }
        Some(out)
    });
    Ok(out)
}

/// Simulates a protocol written for inputs `(x·2^b + q_A, y·2^b + q_B)` on
/// the plain inputs, with each party drawing its coin block privately.
///
/// The speaker's row is its posterior-weighted mixture over its own coin
/// block given the history so far; the other party's messages carry no
/// information about that block beyond the speaker's own likelihoods.
pub fn strip_coins<W: Weight>(p: &ProtocolTree<W>, bits: u32) -> Result<ProtocolTree<W>> {
    if p.halting() {
        return Err(Error::InvalidParams("coin stripping of halting protocols is not supported".into()));
    }
    let q = 1usize << bits;
    let shrink = |s: &OutcomeSpace| -> Result<OutcomeSpace> {
        if s.len() % q != 0 {
            return Err(Error::InvalidParams(format!("input space of {} atoms has no {bits}-bit coin block", s.len())));
        }
        Ok(OutcomeSpace::indexed("input", s.len() / q))
    };
    let alice = shrink(p.alice_inputs())?;
    let bob = shrink(p.bob_inputs())?;
    let inner = Arc::new(p.clone());
    let mut kernels = Vec::with_capacity(p.rounds());
    for t in 0..p.rounds() {
        let inner = inner.clone();
        kernels.push(Kernel::func(move |hist: &[usize], x: usize, coin: usize| {
            let who = Party::of_round(t);
            let mut mixed: Vec<W> = vec![W::zero(); inner.alphabets()[t].len()];
            let mut total = W::zero();
            for qa in 0..q {
                let xq = x * q + qa;
                let mut like = W::one();
                for s in (0..t).filter(|&s| Party::of_round(s) == who) {
                    let row = inner.row(s, &hist[..s], xq, coin).ok()??;
                    like = like * row.iter().find(|(m, _)| *m == hist[s]).map_or_else(W::zero, |(_, w)| w.clone());
                    if like.is_zero() {
                        break;
                    }
                }
                if like.is_zero() {
                    continue;
                }
                total = total + like.clone();
                for (m, w) in inner.row(t, hist, xq, coin).ok()?? {
                    mixed[m] = mixed[m].clone() + like.clone() * w;
                }
            }
            if total.is_zero() {
                return None;
            }
            Some(
                mixed
                    .into_iter()
                    .enumerate()
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(m, w)| (m, w / total.clone()))
                    .collect(),
            )
        }));
    }
    let flavor = if p.public_coin().is_some() {
        Flavor::PublicCoin
    } else {
        Flavor::PrivateCoin
    };
    Ok(ProtocolTree {
        alice,
        bob,
        alphabets: p.alphabets().to_vec(),
        kernels,
        public_coin: p.public_coin().cloned(),
        flavor,
        halting: false,
    })
}

/// Costs before and after absorbing the coin blocks.
#[derive(Clone, Debug, Serialize)]
pub struct AlphaReport {
    pub bits: u32,
    /// `IC^ext` on the coin-attached source minus `IC^ext` of the stripped protocol.
    pub alpha: f64,
    /// The same difference for internal cost.
    pub alpha_int: f64,
    pub with_coins: IcReport,
    pub stripped: IcReport,
}

/// `α = IC^ext_ν(Π) − IC^ext_μ(Π')` where `ν` is `μ` with coin blocks and
/// `Π'` the stripped protocol. Fails with [`Error::MismatchAlpha`] when the
/// internal difference disagrees or `α` is negative beyond `tol`.
pub fn strip_coins_alpha<W: Weight>(
    p: &ProtocolTree<W>,
    mu: &JointDist<W>,
    nu: &JointDist<W>,
    tol: f64,
    cap: usize,
) -> Result<AlphaReport> {
    if mu.arity() != 2 || nu.arity() != 2 {
        return Err(Error::InvalidParams("sources must be joints over (X, Y)".into()));
    }
    let ratio = nu.factors()[0].len() / mu.factors()[0].len();
    if !ratio.is_power_of_two() || ratio * mu.factors()[0].len() != nu.factors()[0].len() {
        return Err(Error::SupportMismatch("coin-attached source is not a coin extension".into()));
    }
    let bits = ratio.trailing_zeros();
    let expect = with_coin_blocks(mu, bits)?;
    let same = expect.size() == nu.size()
        && expect.masses().iter().zip(nu.masses()).all(|(a, b)| a.approx_eq(b, 1e-12));
    if !same {
        return Err(Error::SupportMismatch(
            "coin-attached source is not the base source times uniform coin blocks".into(),
        ));
    }
    let with_coins = info_costs(p, nu, cap)?;
    let stripped = info_costs(&strip_coins(p, bits)?, mu, cap)?;
    let alpha = with_coins.ic_ext - stripped.ic_ext;
    let alpha_int = with_coins.ic_int - stripped.ic_int;
    if (alpha - alpha_int).abs() > tol || alpha < -tol {
        return Err(Error::MismatchAlpha {
            internal: alpha_int,
            external: alpha,
        });
    }
    Ok(AlphaReport {
        bits,
        alpha,
        alpha_int,
        with_coins,
        stripped,
    })
}
