//! The keyed string test: accept when some string lands in the
//! high-probability set of the key.
//!
//! Roles are named by information content. On the info-rich side the key
//! pins down the pointed string `Z_I`; on the info-poor side the key carries
//! little information about any string. The detector is built from the
//! info-rich side's exact law of `(K, Z_I)`.

use super::support::entropy_support_set;
use crate::error::{Error, Result};
use crate::prob::{entropy, Dist, JointDist, OutcomeSpace, Weight};
use serde::Serialize;

/// Exact law of `(K, Z_1..Z_n, I)` with `Z_j ∈ {0,1}^ℓ`.
#[derive(Clone, Debug)]
pub struct KeyedStrings<W> {
    pub n: usize,
    pub ell: u32,
    pub keys: usize,
    /// `(k, z, i, mass)` with positive mass.
    pub entries: Vec<(usize, Vec<u64>, usize, W)>,
}

impl<W: Weight> KeyedStrings<W> {
    /// `Z` and `I` uniform and independent, `K` drawn from `kernel(z, i)`
    /// (a list of `(key, probability)`).
    pub fn from_kernel(
        n: usize,
        ell: u32,
        keys: usize,
        cap: usize,
        kernel: impl Fn(&[u64], usize) -> Vec<(usize, W)>,
    ) -> Result<Self> {
        let strings = 1u64 << ell;
        let tuples = (strings as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        let needed = tuples.saturating_mul(n as u128);
        if needed > cap as u128 {
            return Err(Error::CapExceeded {
                what: "keyed string law",
                needed,
                cap: cap as u128,
            });
        }
        let base = W::ratio(1, needed as u64);
        let mut entries = Vec::new();
        let mut z = vec![0u64; n];
        for code in 0..tuples as u64 {
            let mut c = code;
            for s in z.iter_mut() {
                *s = c % strings;
                c /= strings;
            }
            for i in 0..n {
                for (k, w) in kernel(&z, i) {
                    if k >= keys {
                        return Err(Error::InvalidParams(format!("kernel produced key {k} outside 0..{keys}")));
                    }
                    if !w.is_zero() {
                        entries.push((k, z.clone(), i, base.clone() * w));
                    }
                }
            }
        }
        Ok(Self { n, ell, keys, entries })
    }

    /// Joint law of `(K, Z_I)`.
    pub fn key_and_pointed(&self) -> Result<JointDist<W>> {
        let factors = vec![OutcomeSpace::range(self.keys), OutcomeSpace::bits(self.ell)];
        let entries = self.entries.iter().map(|(k, z, i, w)| (vec![*k, z[*i] as usize], w.clone()));
        JointDist::from_sparse(factors, entries, crate::STATE_CAP)
    }

    /// `I(K; Z_I)`.
    pub fn pointed_info(&self) -> Result<f64> {
        Ok(self.key_and_pointed()?.mutual_info(&[0], &[1], &[]))
    }

    /// `I(K; Z_1..Z_n)`.
    pub fn key_string_info(&self) -> Result<f64> {
        let mut pairs: std::collections::BTreeMap<(usize, &[u64]), W> = Default::default();
        for (k, z, _, w) in &self.entries {
            let e = pairs.entry((*k, z.as_slice())).or_insert_with(W::zero);
            *e = e.clone() + w.clone();
        }
        let h = |it: &mut dyn Iterator<Item = f64>| -> f64 { it.filter(|p| *p > 0.0).map(|p| -p * p.log2()).sum() };
        let mut by_k = vec![0.0; self.keys];
        let mut by_z: std::collections::BTreeMap<&[u64], f64> = Default::default();
        for ((k, z), w) in &pairs {
            by_k[*k] += w.to_f64();
            *by_z.entry(z).or_default() += w.to_f64();
        }
        Ok(h(&mut by_k.into_iter()) + h(&mut by_z.into_values()) - h(&mut pairs.values().map(W::to_f64)))
    }

    /// `E[f(K, Z_1..Z_n)]`.
    pub fn expectation(&self, det: &TestIDetector) -> W {
        self.entries
            .iter()
            .filter(|(k, z, _, _)| det.decide(*k, z))
            .fold(W::zero(), |acc, (_, _, _, w)| acc + w.clone())
    }
}

/// `f(k, z) = [k ∈ S] · OR_i [z_i ∈ T_k]`.
#[derive(Clone, Debug, Serialize)]
pub struct TestIDetector {
    pub ell: u32,
    pub xi: f64,
    pub eta: f64,
    pub zeta: f64,
    /// `γ_k = H(Z_I | K = k)/ℓ`; `None` for keys of probability zero.
    pub gamma: Vec<Option<f64>>,
    /// `T_k` as sorted string lists.
    pub sets: Vec<Vec<u64>>,
    /// Good keys `S = {k : γ_k ≤ ζξ}`, ascending.
    pub good: Vec<usize>,
    /// `(1 − 1/η)(1 − 1/ζ)`, the detection guarantee on the info-rich side
    /// when `E[γ_K] ≤ ξ`.
    pub guarantee: f64,
}

impl TestIDetector {
    pub fn decide(&self, k: usize, z: &[u64]) -> bool {
        self.good.binary_search(&k).is_ok() && z.iter().any(|s| self.sets[k].binary_search(s).is_ok())
    }

    /// `Î = min {i : z_i ∈ T_k}`, or 0 when no string qualifies.
    pub fn pointed_index(&self, k: usize, z: &[u64]) -> usize {
        z.iter().position(|s| self.sets[k].binary_search(s).is_ok()).unwrap_or(0)
    }

    /// `|T_k| ≤ 2^{ηγ_kℓ}` for every key and `S = {k : γ_k ≤ ζξ}`.
    pub fn invariants_hold(&self) -> bool {
        let sizes = self.gamma.iter().zip(&self.sets).all(|(g, t)| match g {
            Some(g) => (t.len() as f64).log2() <= self.eta * g * self.ell as f64 + 1e-9,
            None => t.is_empty(),
        });
        let good = self
            .gamma
            .iter()
            .enumerate()
            .filter(|(_, g)| g.is_some_and(|g| g <= self.zeta * self.xi))
            .map(|(k, _)| k)
            .eq(self.good.iter().copied());
        sizes && good
    }
}

/// Builds the detector from the info-rich side's law of `(K, Z_I)`.
/// `η` and `ζ` default to `ξ^{-1/3}`.
pub fn build_test_i<W: Weight>(
    rich: &JointDist<W>,
    ell: u32,
    xi: f64,
    eta: Option<f64>,
    zeta: Option<f64>,
) -> Result<TestIDetector> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(Error::InvalidParams(format!("xi must lie in (0, 1), got {xi}")));
    }
    if rich.arity() != 2 || rich.factors()[1].len() != 1usize << ell {
        return Err(Error::InvalidParams("expected a joint over (K, {0,1}^ell)".into()));
    }
    let eta = eta.unwrap_or(xi.powf(-1.0 / 3.0));
    let zeta = zeta.unwrap_or(xi.powf(-1.0 / 3.0));
    if eta <= 1.0 || zeta <= 1.0 {
        return Err(Error::InvalidParams("eta and zeta must exceed 1".into()));
    }
    let keys = rich.factors()[0].len();
    let key_law = rich.marginal_dist(0)?;
    let mut gamma = Vec::with_capacity(keys);
    let mut sets = Vec::with_capacity(keys);
    let mut good = Vec::new();
    for k in 0..keys {
        if key_law.mass(k).is_zero() {
            gamma.push(None);
            sets.push(Vec::new());
            continue;
        }
        let cond: Dist<W> = rich.condition_on(0, k)?.marginal_dist(0)?;
        let g = entropy(&cond) / ell as f64;
        let t = entropy_support_set(&cond, 1.0 / eta)?;
        gamma.push(Some(g));
        sets.push(t.atoms.iter().map(|&a| a as u64).collect());
        if g <= zeta * xi {
            good.push(k);
        }
    }
    Ok(TestIDetector {
        ell,
        xi,
        eta,
        zeta,
        gamma,
        sets,
        good,
        guarantee: (1.0 - 1.0 / eta) * (1.0 - 1.0 / zeta),
    })
}

/// The smallest `ξ` allowed by `I(K; Z_I) ≥ ℓ(1−ξ)`, floored at `1e-9`.
pub fn xi_from_info<W: Weight>(rich: &JointDist<W>, ell: u32) -> f64 {
    (1.0 - rich.mutual_info(&[0], &[1], &[]) / ell as f64).max(1e-9)
}
