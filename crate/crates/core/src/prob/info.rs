//! Entropic functionals, all in bits.

use super::dist::{Dist, JointDist};
use super::space::MixedRadix;
use super::weight::Weight;
use crate::error::{Error, Result};

/// `-p log p` with the `0 log 0 = 0` convention.
fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Binary entropy `h(p)`.
pub fn binary_entropy(p: f64) -> f64 {
    plogp(p) + plogp(1.0 - p)
}

pub fn entropy<W: Weight>(d: &Dist<W>) -> f64 {
    d.masses().iter().map(|m| plogp(m.to_f64())).sum()
}

pub fn min_entropy<W: Weight>(d: &Dist<W>) -> f64 {
    let max = d.masses().iter().map(Weight::to_f64).fold(0.0, f64::max);
    -max.log2()
}

/// `D(p || q)` in bits. Fails when `p` puts mass outside the support of `q`.
pub fn kl<W: Weight>(p: &Dist<W>, q: &Dist<W>) -> Result<f64> {
    same_space(p, q)?;
    let mut total = 0.0;
    for (a, b) in p.masses().iter().zip(q.masses()) {
        if a.is_zero() {
            continue;
        }
        if b.is_zero() {
            return Err(Error::SupportMismatch("kl: p has mass outside support(q)".into()));
        }
        let (a, b) = (a.to_f64(), b.to_f64());
        total += a * (a / b).log2();
    }
    Ok(total)
}

/// Total variation distance, computed in the numeric backend.
pub fn tv<W: Weight>(p: &Dist<W>, q: &Dist<W>) -> Result<W> {
    same_space(p, q)?;
    Ok(half_l1(p.masses(), q.masses()))
}

pub fn tv_joint<W: Weight>(p: &JointDist<W>, q: &JointDist<W>) -> Result<W> {
    if p.factors() != q.factors() {
        return Err(Error::SupportMismatch("joints over different factor spaces".into()));
    }
    Ok(half_l1(p.masses(), q.masses()))
}

pub(crate) fn half_l1<W: Weight>(p: &[W], q: &[W]) -> W {
    let mut total = W::zero();
    for (a, b) in p.iter().zip(q) {
        let d = if a > b { a.clone() - b.clone() } else { b.clone() - a.clone() };
        total = total + d;
    }
    total / W::ratio(2, 1)
}

fn same_space<W: Weight>(p: &Dist<W>, q: &Dist<W>) -> Result<()> {
    if p.space() != q.space() {
        return Err(Error::SupportMismatch("distributions over different spaces".into()));
    }
    Ok(())
}

/// Floating snapshot of a joint used for repeated entropy queries.
pub struct InfoView {
    radix: MixedRadix,
    mass: Vec<f64>,
}

impl InfoView {
    pub fn new<W: Weight>(j: &JointDist<W>) -> Self {
        Self {
            radix: j.radix(),
            mass: j.masses_f64(),
        }
    }

    /// Joint entropy of the listed factors.
    pub fn entropy(&self, set: &[usize]) -> f64 {
        let mut set = set.to_vec();
        set.sort_unstable();
        set.dedup();
        if set.is_empty() {
            return 0.0;
        }
        if set.len() == self.radix.radices().len() {
            return self.mass.iter().map(|&p| plogp(p)).sum();
        }
        let sub = MixedRadix::new(set.iter().map(|&k| self.radix.radices()[k]).collect());
        let mut acc = vec![0.0; sub.total()];
        let mut digits = vec![0; self.radix.radices().len()];
        let mut picked = vec![0; set.len()];
        for (i, &m) in self.mass.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            self.radix.decode_into(i, &mut digits);
            for (p, &k) in picked.iter_mut().zip(&set) {
                *p = digits[k];
            }
            acc[sub.encode(&picked)] += m;
        }
        acc.iter().map(|&p| plogp(p)).sum()
    }

    pub fn cond_entropy(&self, target: &[usize], given: &[usize]) -> f64 {
        self.entropy(&union(target, given)) - self.entropy(given)
    }

    /// `I(A ; B | C)`.
    pub fn mutual_info(&self, a: &[usize], b: &[usize], given: &[usize]) -> f64 {
        let ac = union(a, given);
        let bc = union(b, given);
        let abc = union(&ac, b);
        self.entropy(&ac) + self.entropy(&bc) - self.entropy(&abc) - self.entropy(given)
    }
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

impl<W: Weight> JointDist<W> {
    pub fn info(&self) -> InfoView {
        InfoView::new(self)
    }

    pub fn entropy_of(&self, set: &[usize]) -> f64 {
        self.info().entropy(set)
    }

    pub fn cond_entropy(&self, target: &[usize], given: &[usize]) -> f64 {
        self.info().cond_entropy(target, given)
    }

    pub fn mutual_info(&self, a: &[usize], b: &[usize], given: &[usize]) -> f64 {
        self.info().mutual_info(a, b, given)
    }
}
