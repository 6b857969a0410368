//! High-probability support sets and the small-set and pointed-string
//! entropy bounds.

use crate::error::{Error, Result};
use crate::prob::{entropy, Dist, InequalityReport, JointDist, Weight};
use serde::Serialize;

/// Slack allowed when comparing log-probabilities to the threshold.
const LOG_TOL: f64 = 1e-9;

/// Atoms of probability at least `2^{-c/δ}` where `c = H(W)`.
#[derive(Clone, Debug, Serialize)]
pub struct SupportSet {
    /// Member atoms, ascending.
    pub atoms: Vec<usize>,
    pub threshold: f64,
    pub entropy: f64,
    pub delta: f64,
    /// `P[W ∉ S]`.
    pub escape: f64,
}

impl SupportSet {
    /// `2^{c/δ}`.
    pub fn size_bound(&self) -> f64 {
        (self.entropy / self.delta).exp2()
    }

    /// `|S| ≤ 2^{c/δ}` and `P[W ∉ S] ≤ δ`.
    pub fn bounds_hold(&self) -> bool {
        (self.atoms.len() as f64).log2() <= self.entropy / self.delta + LOG_TOL && self.escape <= self.delta + 1e-12
    }

    pub fn contains(&self, atom: usize) -> bool {
        self.atoms.binary_search(&atom).is_ok()
    }
}

pub fn entropy_support_set<W: Weight>(w: &Dist<W>, delta: f64) -> Result<SupportSet> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidParams(format!("delta must lie in (0, 1], got {delta}")));
    }
    let c = entropy(w);
    let cut = c / delta;
    let mut atoms = Vec::new();
    let mut escape = 0.0;
    for (i, m) in w.masses().iter().enumerate() {
        let p = m.to_f64();
        if p <= 0.0 {
            continue;
        }
        if -p.log2() <= cut + LOG_TOL {
            atoms.push(i);
        } else {
            escape += p;
        }
    }
    let set = SupportSet {
        atoms,
        threshold: (-cut).exp2(),
        entropy: c,
        delta,
        escape,
    };
    debug_assert!(set.bounds_hold(), "support-set bounds violated: {set:?}");
    Ok(set)
}

/// `P[W ∈ S] ≤ (ℓ+1−H(W))/(ℓ−c)` for `W` over `{0,1}^ℓ` and `|S| ≤ 2^c`,
/// `c < ℓ`.
pub fn check_hient_smallset<W: Weight>(w: &Dist<W>, ell: u32, set: &[usize], c: f64) -> InequalityReport {
    let ell_f = ell as f64;
    let applicable = w.len() == 1usize << ell && c < ell_f && (set.len() as f64).log2() <= c + LOG_TOL;
    let inside: f64 = set.iter().map(|&s| w.mass(s).to_f64()).sum();
    let rhs = (ell_f + 1.0 - entropy(w)) / (ell_f - c);
    InequalityReport {
        check: "hient_smallset",
        applicable,
        slacks: vec![rhs - inside],
    }
}

/// `H(Z_I) ≥ ℓ − log n` when `(Z_1..Z_n)` is uniform. `coupling` has two
/// factors: the packed strings `z = Σ_j Z_j 2^{ℓ j}` and the index `I`.
pub fn check_zi_lb<W: Weight>(n: usize, ell: u32, coupling: &JointDist<W>) -> Result<InequalityReport> {
    let strings = 1usize << ell;
    let total = strings
        .checked_pow(n as u32)
        .ok_or_else(|| Error::InvalidParams("string tuple space overflows".into()))?;
    if coupling.arity() != 2 || coupling.factors()[0].len() != total || coupling.factors()[1].len() != n {
        return Err(Error::InvalidParams("coupling must be a joint over (packed strings, index)".into()));
    }
    let zs = coupling.marginal_dist(0)?;
    let uniform = W::ratio(1, total as u64);
    let applicable = zs.masses().iter().all(|m| m.approx_eq(&uniform, 1e-12));
    let mut pointed = vec![W::zero(); strings];
    for (t, w) in coupling.support() {
        let zi = (t[0] >> (ell as usize * t[1])) & (strings - 1);
        pointed[zi] = pointed[zi].clone() + w;
    }
    let h = entropy(&Dist::from_weights(crate::prob::OutcomeSpace::range(strings), pointed)?);
    Ok(InequalityReport {
        check: "zi_lb",
        applicable,
        slacks: vec![h - (ell as f64 - (n as f64).log2())],
    })
}
