//! Distinguishing advantage: exact and sampled measurement of a given
//! protocol or detector, and the exact optimum over all small protocols.

use super::testi::{KeyedStrings, TestIDetector};
use crate::error::{Error, Result};
use crate::prob::{JointDist, OutcomeSpace, Rational, Weight};
use crate::protocol::{run_protocol, transcript_law, Flavor, Kernel, ProtocolTree};
use crate::reference::law_distance;
use crate::sources::SourceHandle;
use crate::tape::{SeededTape, Stream};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Two-sided 99% normal quantile.
const Z99: f64 = 2.575_829_303_548_901;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AdvantageMode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdvantageReport {
    pub advantage: f64,
    pub mode: AdvantageMode,
    /// Trials per source; 0 in exact mode.
    pub trials: usize,
    /// Two-sided 99% half-width; 0 in exact mode.
    pub half_width: f64,
    /// The exact value when it was computed in rational arithmetic.
    #[serde(skip)]
    pub exact: Option<Rational>,
}

impl AdvantageReport {
    pub fn exact<W: Weight>(value: W) -> Self {
        Self {
            advantage: value.to_f64(),
            mode: AdvantageMode::Exact,
            trials: 0,
            half_width: 0.0,
            exact: W::EXACT.then(|| value.to_rational()),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum Budget {
    /// Exact tables, each capped at `cap` atoms.
    Exact { cap: usize },
    /// `trials` runs per source on `SeededTape::new(seed, ·)`.
    MonteCarlo { trials: usize, seed: u64 },
}

/// `Δ` between the protocol's transcript laws under two joint laws.
pub fn transcript_advantage<W: Weight>(p: &ProtocolTree<W>, s1: &JointDist<W>, s2: &JointDist<W>) -> Result<W> {
    let a = transcript_law(p, s1, crate::STATE_CAP)?;
    let b = transcript_law(p, s2, crate::STATE_CAP)?;
    Ok(law_distance(&a, &b))
}

/// Advantage of a decision protocol between two sources.
///
/// Exact mode reports the transcript-law `Δ`, which is what an observer of
/// the whole transcript can achieve. Monte-Carlo mode reads the last message
/// as the verdict (`1` accepts) and reports `|P_1[accept] − P_2[accept]|`.
pub fn measure_advantage<W: Weight>(
    p: &ProtocolTree<W>,
    s1: &SourceHandle,
    s2: &SourceHandle,
    budget: Budget,
) -> Result<AdvantageReport> {
    match budget {
        Budget::Exact { cap } => {
            let j1 = s1.exact::<W>(cap)?;
            let j2 = s2.exact::<W>(cap)?;
            Ok(AdvantageReport::exact(transcript_advantage(p, &j1, &j2)?))
        }
        Budget::MonteCarlo { trials, seed } => {
            if trials == 0 {
                return Err(Error::InvalidParams("Monte-Carlo mode needs at least one trial".into()));
            }
            let rate = |s: &SourceHandle, offset: u64| -> Result<f64> {
                let hits = (0..trials as u64)
                    .into_par_iter()
                    .map(|c| {
                        let mut tape = SeededTape::new(seed, 2 * c + offset);
                        let (x, y) = s.encode(&s.draw(&mut tape, Stream::Source))?;
                        let t = run_protocol(p, x, y, &mut tape)?;
                        Ok((t.messages.last() == Some(&1)) as usize)
                    })
                    .sum::<Result<usize>>()?;
                Ok(hits as f64 / trials as f64)
            };
            let (p1, p2) = (rate(s1, 0)?, rate(s2, 1)?);
            let var = (p1 * (1.0 - p1) + p2 * (1.0 - p2)) / trials as f64;
            Ok(AdvantageReport {
                advantage: (p1 - p2).abs(),
                mode: AdvantageMode::MonteCarlo,
                trials,
                half_width: Z99 * var.sqrt(),
                exact: None,
            })
        }
    }
}

/// Exact `|E_1[f] − E_2[f]|` of a keyed string detector.
pub fn detector_advantage<W: Weight>(det: &TestIDetector, s1: &KeyedStrings<W>, s2: &KeyedStrings<W>) -> AdvantageReport {
    let (a, b) = (s1.expectation(det), s2.expectation(det));
    AdvantageReport::exact(if a > b { a - b } else { b - a })
}

/// Optimum found by [`exhaustive_advantage`].
#[derive(Clone, Debug)]
pub struct ExhaustiveResult {
    pub report: AdvantageReport,
    /// A deterministic protocol attaining the optimum.
    pub protocol: ProtocolTree<Rational>,
    /// Bits per round of the optimal allocation.
    pub bits: Vec<u32>,
    /// Partitions evaluated across all allocations.
    pub explored: u64,
}

/// Largest transcript-law `Δ` between `s1` and `s2` over all deterministic
/// `rounds`-round protocols of at most `cc_cap` bits. Randomized protocols
/// are mixtures of deterministic ones and cannot do better.
///
/// A deterministic transcript is a rectangle, so the value is a maximum over
/// recursive partitions: at each round the speaker splits their side of the
/// current rectangle into at most `2^{b_t}` blocks. Only inputs that touch
/// an atom where the laws differ are tracked, and a split is always into
/// as many blocks as allowed since refining never lowers the value.
/// `budget` caps the number of partitions evaluated.
pub fn exhaustive_advantage(
    s1: &JointDist<Rational>,
    s2: &JointDist<Rational>,
    rounds: usize,
    cc_cap: u32,
    budget: u64,
) -> Result<ExhaustiveResult> {
    if s1.factors() != s2.factors() || s1.arity() != 2 {
        return Err(Error::InvalidParams("both laws must be joints over the same (X, Y)".into()));
    }
    if rounds == 0 {
        return Err(Error::InvalidParams("need at least one round".into()));
    }
    let (nx, ny) = (s1.factors()[0].len(), s1.factors()[1].len());
    let (diff, scale) = integer_difference(s1, s2)?;
    let alice: Vec<usize> = (0..nx).filter(|&x| (0..ny).any(|y| diff[x * ny + y] != 0)).collect();
    let bob: Vec<usize> = (0..ny).filter(|&y| (0..nx).any(|x| diff[x * ny + y] != 0)).collect();
    let d: Vec<Vec<i128>> = alice.iter().map(|&x| bob.iter().map(|&y| diff[x * ny + y]).collect()).collect();

    let allocations = bit_allocations(rounds, cc_cap);
    let outcomes: Vec<Result<(i128, Vec<u32>, Plan, u64)>> = allocations
        .into_par_iter()
        .map(|bits| {
            let mut s = Search {
                d: &d,
                bits: &bits,
                memo: HashMap::new(),
                explored: 0,
                budget,
            };
            let a: Vec<u16> = (0..alice.len() as u16).collect();
            let b: Vec<u16> = (0..bob.len() as u16).collect();
            let value = s.value(0, &a, &b)?;
            let mut plan = Plan::new();
            s.extract(0, &a, &b, &mut Vec::new(), &mut plan);
            let explored = s.explored;
            drop(s);
            Ok((value, bits, plan, explored))
        })
        .collect();
    let mut best: Option<(i128, Vec<u32>, Plan)> = None;
    let mut explored = 0;
    for o in outcomes {
        let (value, bits, plan, count) = o?;
        explored += count;
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, bits, plan));
        }
    }
    let (value, bits, plan) = best.expect("at least one allocation");
    let advantage = Rational::new(value.into(), scale * 2);
    let protocol = plan_protocol(s1.factors()[0].clone(), s1.factors()[1].clone(), &bits, plan, &alice, &bob)?;
    Ok(ExhaustiveResult {
        report: AdvantageReport::exact(advantage),
        protocol,
        bits,
        explored,
    })
}

/// `(p_1 − p_2)·L` as integers, with `L` the lcm of all denominators.
fn integer_difference(s1: &JointDist<Rational>, s2: &JointDist<Rational>) -> Result<(Vec<i128>, num_bigint::BigInt)> {
    let one = num_bigint::BigInt::from(1);
    let scale = s1.masses().iter().chain(s2.masses()).fold(one, |acc, w| acc.lcm(w.denom()));
    let overflow = || Error::InvalidParams("mass denominators too large for exhaustive search".into());
    let diff = s1
        .masses()
        .iter()
        .zip(s2.masses())
        .map(|(a, b)| {
            let d = (a - b) * Rational::from_integer(scale.clone());
            d.to_integer().to_i128().ok_or_else(overflow)
        })
        .collect::<Result<Vec<_>>>()?;
    // Keeps every partial sum of |d| far from overflow.
    let total: i128 = diff.iter().map(|d| d.abs()).try_fold(0i128, |a, d| a.checked_add(d)).ok_or_else(overflow)?;
    if total > i128::MAX / 4 {
        return Err(overflow());
    }
    Ok((diff, scale))
}

/// Every `(b_1, .., b_rounds)` with `Σ b_t = cc_cap`, lexicographic.
fn bit_allocations(rounds: usize, cc_cap: u32) -> Vec<Vec<u32>> {
    fn go(left: u32, slots: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if slots == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for b in 0..=left {
            cur.push(b);
            go(left - b, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(cc_cap, rounds, &mut Vec::new(), &mut out);
    out
}

/// Restricted growth strings of length `k` using exactly `q` labels.
struct Partitions {
    labels: Vec<u16>,
    q: u16,
    fresh: bool,
}

impl Partitions {
    fn new(k: usize, q: usize) -> Self {
        let mut labels = vec![0u16; k - q + 1];
        labels.extend(1..q as u16);
        Self {
            labels,
            q: q as u16,
            fresh: true,
        }
    }

    fn advance(&mut self) -> Option<&[u16]> {
        if self.fresh {
            self.fresh = false;
            return Some(&self.labels);
        }
        let k = self.labels.len();
        for i in (1..k).rev() {
            let prefix_max = *self.labels[..i].iter().max().expect("non-empty prefix");
            let a = self.labels[i];
            if a + 1 >= self.q || a > prefix_max {
                continue;
            }
            let top = prefix_max.max(a + 1);
            let missing = (self.q - 1 - top) as usize;
            let tail = k - 1 - i;
            if tail < missing {
                continue;
            }
            self.labels[i] = a + 1;
            for (j, slot) in self.labels[i + 1..].iter_mut().enumerate() {
                *slot = if j < tail - missing { 0 } else { top + 1 + (j - (tail - missing)) as u16 };
            }
            return Some(&self.labels);
        }
        None
    }
}

type Key = (usize, Vec<u16>, Vec<u16>);

struct Search<'a> {
    d: &'a [Vec<i128>],
    bits: &'a [u32],
    /// Best value and labeling of the speaker's side.
    memo: HashMap<Key, (i128, Vec<u16>)>,
    explored: u64,
    budget: u64,
}

impl Search<'_> {
    fn rect_sum(&self, a: &[u16], b: &[u16]) -> (i128, i128) {
        let mut sum = 0;
        let mut abs = 0;
        for &x in a {
            for &y in b {
                let v = self.d[x as usize][y as usize];
                sum += v;
                abs += v.abs();
            }
        }
        (sum, abs)
    }

    fn value(&mut self, t: usize, a: &[u16], b: &[u16]) -> Result<i128> {
        let (sum, bound) = self.rect_sum(a, b);
        if t == self.bits.len() || bound == sum.abs() {
            return Ok(sum.abs());
        }
        let key = (t, a.to_vec(), b.to_vec());
        if let Some((v, _)) = self.memo.get(&key) {
            return Ok(*v);
        }
        let alice_speaks = t % 2 == 0;
        let side = if alice_speaks { a } else { b };
        let q = (1usize << self.bits[t].min(16)).min(side.len());
        let mut best = (i128::MIN, Vec::new());
        let mut parts = Partitions::new(side.len(), q);
        while let Some(labels) = parts.advance() {
            let labels = labels.to_vec();
            self.explored += 1;
            if self.explored > self.budget {
                return Err(Error::BudgetExhausted(format!(
                    "more than {} partitions needed (allocation {:?})",
                    self.budget, self.bits
                )));
            }
            let mut total = 0;
            for block in 0..q as u16 {
                let part: Vec<u16> = side.iter().zip(&labels).filter(|(_, l)| **l == block).map(|(v, _)| *v).collect();
                total += if alice_speaks { self.value(t + 1, &part, b)? } else { self.value(t + 1, a, &part)? };
            }
            if total > best.0 {
                best = (total, labels);
                if total == bound {
                    break;
                }
            }
        }
        self.memo.insert(key, best.clone());
        Ok(best.0)
    }

    /// Walks the memo from the root and records each reachable history's
    /// labeling of the speaker's tracked inputs.
    fn extract(&self, t: usize, a: &[u16], b: &[u16], hist: &mut Vec<usize>, plan: &mut Plan) {
        if t == self.bits.len() {
            return;
        }
        let alice_speaks = t % 2 == 0;
        let side = if alice_speaks { a } else { b };
        let labels = match self.memo.get(&(t, a.to_vec(), b.to_vec())) {
            Some((_, l)) => l.clone(),
            // Pruned subtree: nothing further to gain, stay silent.
            None => vec![0; side.len()],
        };
        plan.insert(hist.clone(), side.iter().zip(&labels).map(|(&v, &l)| (v, l as usize)).collect());
        let used = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
        for block in 0..used {
            let part: Vec<u16> = side.iter().zip(&labels).filter(|(_, l)| **l as usize == block).map(|(v, _)| *v).collect();
            hist.push(block);
            if alice_speaks {
                self.extract(t + 1, &part, b, hist, plan);
            } else {
                self.extract(t + 1, a, &part, hist, plan);
            }
            hist.pop();
        }
    }
}

/// History to `(tracked input, message)` assignments.
type Plan = BTreeMap<Vec<usize>, Vec<(u16, usize)>>;

fn plan_protocol(
    alice: OutcomeSpace,
    bob: OutcomeSpace,
    bits: &[u32],
    plan: Plan,
    alice_ids: &[usize],
    bob_ids: &[usize],
) -> Result<ProtocolTree<Rational>> {
    // Per round: history -> input -> message. Untracked inputs and
    // unreachable histories send 0.
    let mut per_round: Vec<HashMap<Vec<usize>, HashMap<usize, usize>>> = vec![HashMap::new(); bits.len()];
    for (hist, assign) in plan {
        let t = hist.len();
        let ids = if t % 2 == 0 { alice_ids } else { bob_ids };
        per_round[t].insert(hist, assign.into_iter().map(|(v, m)| (ids[v as usize], m)).collect());
    }
    let mut b = ProtocolTree::<Rational>::builder(alice, bob).flavor(Flavor::Deterministic);
    for (t, table) in per_round.into_iter().enumerate() {
        let alphabet = if bits[t] == 0 { OutcomeSpace::unit() } else { OutcomeSpace::range(1 << bits[t]) };
        let table = Arc::new(table);
        b = b.round(
            alphabet,
            Kernel::deterministic(move |h: &[usize], input, _| {
                table.get(h).and_then(|m| m.get(&input)).copied().unwrap_or(0)
            }),
        );
    }
    b.build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_are_counted_by_stirling_numbers() {
        // S(5, q) for q = 1..5.
        for (q, want) in [(1, 1), (2, 15), (3, 25), (4, 10), (5, 1)] {
            let mut p = Partitions::new(5, q);
            let mut n = 0;
            while let Some(l) = p.advance() {
                assert_eq!(l[0], 0);
                assert_eq!(*l.iter().max().unwrap() as usize, q - 1);
                n += 1;
            }
            assert_eq!(n, want, "q={q}");
        }
    }

    #[test]
    fn allocations_sum_to_the_cap() {
        let a = bit_allocations(3, 2);
        assert_eq!(a.len(), 6);
        assert!(a.iter().all(|b| b.iter().sum::<u32>() == 2));
    }
}
