//! Exact analysis of protocols on finite sources.

use super::tree::{KeyedProtocol, Party, ProtocolTree};
use crate::error::{Error, Result};
use crate::prob::{JointDist, OutcomeSpace, Weight};
use serde::Serialize;
use std::collections::BTreeMap;

/// One execution path with positive probability.
#[derive(Clone, Debug)]
pub struct PathState<W> {
    pub x: usize,
    pub y: usize,
    pub coin: usize,
    pub hist: Vec<usize>,
    pub w: W,
}

fn check_source<W: Weight>(p: &ProtocolTree<W>, s: &JointDist<W>) -> Result<()> {
    if s.arity() != 2
        || s.factors()[0].len() != p.alice_inputs().len()
        || s.factors()[1].len() != p.bob_inputs().len()
    {
        return Err(Error::SupportMismatch(format!(
            "source over {:?} does not match protocol inputs ({} x {})",
            s.factors().iter().map(OutcomeSpace::len).collect::<Vec<_>>(),
            p.alice_inputs().len(),
            p.bob_inputs().len()
        )));
    }
    Ok(())
}

/// All execution paths with positive probability, by forward dynamic
/// programming over histories.
pub fn forward_states<W: Weight>(p: &ProtocolTree<W>, s: &JointDist<W>, cap: usize) -> Result<Vec<PathState<W>>> {
    check_source(p, s)?;
    let coins: Vec<(usize, W)> = match p.public_coin() {
        Some(d) => d.masses().iter().cloned().enumerate().filter(|(_, w)| !w.is_zero()).collect(),
        None => vec![(0, W::one())],
    };
    let mut states = Vec::new();
    for (xy, w) in s.support() {
        for (c, wc) in &coins {
            states.push(PathState {
                x: xy[0],
                y: xy[1],
                coin: *c,
                hist: Vec::with_capacity(p.rounds()),
                w: w.clone() * wc.clone(),
            });
        }
    }
    for t in 0..p.rounds() {
        let mut next = Vec::with_capacity(states.len());
        for st in states {
            let halted = st.hist.last().is_some_and(|&m| p.halting() && t > 0 && m == p.halt_symbol(t - 1));
            let row = if halted {
                None
            } else {
                let input = match p.speaker(t) {
                    Party::Alice => st.x,
                    Party::Bob => st.y,
                };
                p.row(t, &st.hist, input, st.coin)?
            };
            let row = match row {
                Some(r) => r,
                None if p.halting() => vec![(p.halt_symbol(t), W::one())],
                None => return Err(Error::UndefinedRow { round: t }),
            };
            for (m, pm) in row {
                if pm.is_zero() {
                    continue;
                }
                let mut hist = st.hist.clone();
                hist.push(m);
                next.push(PathState {
                    x: st.x,
                    y: st.y,
                    coin: st.coin,
                    hist,
                    w: st.w.clone() * pm,
                });
            }
            if next.len() > cap {
                return Err(Error::CapExceeded {
                    what: "protocol execution paths",
                    needed: next.len() as u128,
                    cap: cap as u128,
                });
            }
        }
        states = next;
    }
    Ok(states)
}

/// Factor spaces of the transcript rounds (with the halt atom when enabled).
pub fn transcript_spaces<W: Weight>(p: &ProtocolTree<W>) -> Vec<OutcomeSpace> {
    (0..p.rounds())
        .map(|t| {
            if p.halting() {
                let mut labels = p.alphabets()[t].labels();
                labels.push("halt".into());
                OutcomeSpace::labeled(labels).unwrap_or_else(|_| OutcomeSpace::indexed("msg", p.symbol_count(t)))
            } else {
                p.alphabets()[t].clone()
            }
        })
        .collect()
}

fn coin_space<W: Weight>(p: &ProtocolTree<W>) -> OutcomeSpace {
    p.public_coin().map_or_else(OutcomeSpace::unit, |d| d.space().clone())
}

/// Exact joint law of `(X, Y, R_pub, Π_1, .., Π_r)`.
pub fn transcript_joint<W: Weight>(p: &ProtocolTree<W>, s: &JointDist<W>, cap: usize) -> Result<JointDist<W>> {
    let states = forward_states(p, s, cap)?;
    let mut factors = vec![s.factors()[0].clone(), s.factors()[1].clone(), coin_space(p)];
    factors.extend(transcript_spaces(p));
    let entries = states.into_iter().map(|st| {
        let mut t = vec![st.x, st.y, st.coin];
        t.extend(st.hist);
        (t, st.w)
    });
    JointDist::from_sparse(factors, entries, cap)
}

/// Exact law of what an observer sees: `[coin, Π_1, .., Π_r]`.
pub fn transcript_law<W: Weight>(p: &ProtocolTree<W>, s: &JointDist<W>, cap: usize) -> Result<BTreeMap<Vec<usize>, W>> {
    let mut law: BTreeMap<Vec<usize>, W> = BTreeMap::new();
    for st in forward_states(p, s, cap)? {
        let mut key = vec![st.coin];
        key.extend(st.hist);
        let e = law.entry(key).or_insert_with(W::zero);
        *e = e.clone() + st.w;
    }
    Ok(law)
}

/// Ordered grouping keeps the floating-point sum, and so every report,
/// identical from run to run.
fn grouped_entropy<K: Ord>(items: impl Iterator<Item = (K, f64)>) -> f64 {
    let mut acc: BTreeMap<K, f64> = BTreeMap::new();
    for (k, w) in items {
        *acc.entry(k).or_insert(0.0) += w;
    }
    acc.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// Communication and information costs of a protocol on a source.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IcReport {
    pub cc_bits: u32,
    pub rounds: usize,
    /// `I(Π, R; X | Y) + I(Π, R; Y | X)`.
    pub ic_int: f64,
    /// `I(Π, R; X, Y)`.
    pub ic_ext: f64,
    /// `I(X; Y | Π, R)`.
    pub residual: f64,
    /// `I(X; Y)` of the source.
    pub source_mi: f64,
}

impl IcReport {
    /// `0 <= ic_int <= ic_ext <= cc_bits` within `tol`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        -tol <= self.ic_int && self.ic_int <= self.ic_ext + tol && self.ic_ext <= self.cc_bits as f64 + tol
    }

    /// Gap in `I(X;Y|Π) = I(X;Y) + ic_int - ic_ext`.
    pub fn residual_gap(&self) -> f64 {
        (self.residual - (self.source_mi + self.ic_int - self.ic_ext)).abs()
    }
}

struct Entropies {
    t: f64,
    xt: f64,
    yt: f64,
    xyt: f64,
    x: f64,
    y: f64,
    xy: f64,
}

fn entropies<W: Weight>(states: &[PathState<W>], prefix: usize) -> Entropies {
    let ws: Vec<f64> = states.iter().map(|s| s.w.to_f64()).collect();
    let t = |s: &PathState<W>| (s.coin, s.hist[..prefix].to_vec());
    let it = || states.iter().zip(ws.iter().copied());
    Entropies {
        t: grouped_entropy(it().map(|(s, w)| (t(s), w))),
        xt: grouped_entropy(it().map(|(s, w)| ((s.x, t(s)), w))),
        yt: grouped_entropy(it().map(|(s, w)| ((s.y, t(s)), w))),
        xyt: grouped_entropy(it().map(|(s, w)| ((s.x, s.y, t(s)), w))),
        x: grouped_entropy(it().map(|(s, w)| (s.x, w))),
        y: grouped_entropy(it().map(|(s, w)| (s.y, w))),
        xy: grouped_entropy(it().map(|(s, w)| ((s.x, s.y), w))),
    }
}

/// Internal and external information cost, from the exact path law.
pub fn info_costs<W: Weight>(p: &ProtocolTree<W>, s: &JointDist<W>, cap: usize) -> Result<IcReport> {
    let states = forward_states(p, s, cap)?;
    let e = entropies(&states, p.rounds());
    let ext = e.t + e.xy - e.xyt;
    let int = (e.xy + e.yt - e.xyt - e.y) + (e.xy + e.xt - e.xyt - e.x);
    Ok(IcReport {
        cc_bits: p.cc_bits(),
        rounds: p.rounds(),
        ic_int: int,
        ic_ext: ext,
        residual: e.xt + e.yt - e.xyt - e.t,
        source_mi: e.x + e.y - e.xy,
    })
}

/// `I(X; Y | R, Π^t)` for every prefix length `t = 0..=r`.
pub fn prefix_residuals<W: Weight>(p: &ProtocolTree<W>, s: &JointDist<W>, cap: usize) -> Result<Vec<f64>> {
    let states = forward_states(p, s, cap)?;
    Ok((0..=p.rounds())
        .map(|t| {
            let e = entropies(&states, t);
            e.xt + e.yt - e.xyt - e.t
        })
        .collect())
}

/// Path together with both parties' keys.
#[derive(Clone, Debug)]
pub struct KeyedState<W> {
    pub path: PathState<W>,
    pub key_a: usize,
    pub key_b: usize,
}

pub fn keyed_states<W: Weight>(kp: &KeyedProtocol<W>, s: &JointDist<W>, cap: usize) -> Result<Vec<KeyedState<W>>> {
    let mut out = Vec::new();
    for st in forward_states(&kp.protocol, s, cap)? {
        let ra = kp
            .key_row(Party::Alice, &st.hist, st.x, st.coin)?
            .ok_or_else(|| Error::Precondition("Alice's key map is undefined on a reachable path".into()))?;
        let rb = kp
            .key_row(Party::Bob, &st.hist, st.y, st.coin)?
            .ok_or_else(|| Error::Precondition("Bob's key map is undefined on a reachable path".into()))?;
        for (ka, wa) in &ra {
            for (kb, wb) in &rb {
                let w = st.w.clone() * wa.clone() * wb.clone();
                if w.is_zero() {
                    continue;
                }
                let mut path = st.clone();
                path.w = w;
                out.push(KeyedState {
                    path,
                    key_a: *ka,
                    key_b: *kb,
                });
            }
        }
        if out.len() > cap {
            return Err(Error::CapExceeded {
                what: "keyed execution paths",
                needed: out.len() as u128,
                cap: cap as u128,
            });
        }
    }
    Ok(out)
}

/// Exact joint of `(X, Y, R_pub, Π_1..Π_r, K_A, K_B)`.
pub fn keyed_joint<W: Weight>(kp: &KeyedProtocol<W>, s: &JointDist<W>, cap: usize) -> Result<JointDist<W>> {
    let p = &kp.protocol;
    let mut factors = vec![s.factors()[0].clone(), s.factors()[1].clone(), coin_space(p)];
    factors.extend(transcript_spaces(p));
    factors.push(kp.key_space().clone());
    factors.push(kp.key_space().clone());
    let entries = keyed_states(kp, s, cap)?.into_iter().map(|k| {
        let mut t = vec![k.path.x, k.path.y, k.path.coin];
        t.extend(k.path.hist);
        t.push(k.key_a);
        t.push(k.key_b);
        (t, k.path.w)
    });
    JointDist::from_sparse(factors, entries, cap)
}

/// Agreement, uniformity, and secrecy of a keyed protocol.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrgReport {
    /// `P[K_A = K_B]`.
    pub agreement: f64,
    /// `Δ((K_A, K_B), (K, K))` with `K` uniform on the key space.
    pub uniformity: f64,
    /// `I(Π, R_pub; K_A, K_B)`.
    pub secrecy: f64,
}

pub fn crg_report<W: Weight>(kp: &KeyedProtocol<W>, s: &JointDist<W>, cap: usize) -> Result<CrgReport> {
    let states = keyed_states(kp, s, cap)?;
    let k = kp.key_space().len();
    let mut agree = W::zero();
    let mut keys: BTreeMap<(usize, usize), W> = BTreeMap::new();
    for st in &states {
        if st.key_a == st.key_b {
            agree = agree + st.path.w.clone();
        }
        let e = keys.entry((st.key_a, st.key_b)).or_insert_with(W::zero);
        *e = e.clone() + st.path.w.clone();
    }
    // Δ against the uniform diagonal law.
    let target = W::ratio(1, k as u64);
    let mut dist = W::zero();
    for kk in 0..k {
        if !keys.contains_key(&(kk, kk)) {
            dist = dist + target.clone();
        }
    }
    for ((a, b), w) in &keys {
        let d = if a == b {
            if *w > target {
                w.clone() - target.clone()
            } else {
                target.clone() - w.clone()
            }
        } else {
            w.clone()
        };
        dist = dist + d;
    }
    let uniformity = (dist / W::ratio(2, 1)).to_f64();
    let ws: Vec<f64> = states.iter().map(|s| s.path.w.to_f64()).collect();
    let it = || states.iter().zip(ws.iter().copied());
    let h_t = grouped_entropy(it().map(|(s, w)| ((s.path.coin, s.path.hist.clone()), w)));
    let h_k = grouped_entropy(it().map(|(s, w)| ((s.key_a, s.key_b), w)));
    let h_tk = grouped_entropy(it().map(|(s, w)| ((s.path.coin, s.path.hist.clone(), s.key_a, s.key_b), w)));
    Ok(CrgReport {
        agreement: agree.to_f64(),
        uniformity,
        secrecy: h_t + h_k - h_tk,
    })
}
