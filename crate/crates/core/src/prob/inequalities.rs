//! Predicate checks for the information inequalities used in the lower-bound
//! arguments. Each check reports the slack of every inequality it tests;
//! a check passes iff all slacks are at least `-tol`.

use super::dist::{Dist, JointDist};
use super::info::{binary_entropy, entropy, kl, tv, tv_joint};
use super::weight::Weight;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct InequalityReport {
    pub check: &'static str,
    /// Whether the inequality's hypotheses hold for this input.
    pub applicable: bool,
    /// `rhs - lhs` for each inequality of the form `lhs <= rhs`.
    pub slacks: Vec<f64>,
}

impl InequalityReport {
    pub fn min_slack(&self) -> f64 {
        self.slacks.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn passes(&self, tol: f64) -> bool {
        !self.applicable || self.min_slack() >= -tol
    }
}

/// `I(X;W|Y,Z) >= I(X;Y|W,Z) - I(X;Y|Z) >= -I(X;W|Z)` on a joint with
/// factors ordered `(X, Y, Z, W)`.
pub fn check_cond_ineq_1<W: Weight>(j: &JointDist<W>) -> Result<InequalityReport> {
    if j.arity() != 4 {
        return Err(Error::InvalidParams("cond_ineq_1 needs four factors (X, Y, Z, W)".into()));
    }
    let v = j.info();
    let (x, y, z, w) = ([0], [1], [2], [3]);
    let upper = v.mutual_info(&x, &w, &[1, 2]);
    let middle = v.mutual_info(&x, &y, &[3, 2]) - v.mutual_info(&x, &y, &z);
    let lower = -v.mutual_info(&x, &w, &z);
    Ok(InequalityReport {
        check: "cond_ineq_1",
        applicable: true,
        slacks: vec![upper - middle, middle - lower],
    })
}

/// `|H(X1) - H(X2)| <= h(d) + d log(|X|-1)` for `d = Δ(X1, X2) <= (|X|-1)/|X|`.
pub fn check_reverse_pinsker<W: Weight>(p: &Dist<W>, q: &Dist<W>) -> Result<InequalityReport> {
    let d = tv(p, q)?.to_f64();
    let n = p.len() as f64;
    let applicable = n >= 2.0 && d <= (n - 1.0) / n;
    let lhs = (entropy(p) - entropy(q)).abs();
    let rhs = binary_entropy(d.min(1.0)) + d * (n - 1.0).max(1.0).log2();
    Ok(InequalityReport {
        check: "reverse_pinsker",
        applicable,
        slacks: vec![rhs - lhs],
    })
}

/// `|H(X1|Y1) - H(X2|Y2)| <= 1 + 6 Δ(X1Y1, X2Y2) log |X|` for joints
/// with factors `(X, Y)`.
pub fn check_rev_cond_pinsker<W: Weight>(j1: &JointDist<W>, j2: &JointDist<W>) -> Result<InequalityReport> {
    if j1.arity() != 2 {
        return Err(Error::InvalidParams("conditional reverse Pinsker needs joints over (X, Y)".into()));
    }
    let d = tv_joint(j1, j2)?.to_f64();
    let nx = j1.factors()[0].len() as f64;
    let lhs = (j1.cond_entropy(&[0], &[1]) - j2.cond_entropy(&[0], &[1])).abs();
    let rhs = 1.0 + 6.0 * d * nx.log2();
    Ok(InequalityReport {
        check: "rev_cond_pinsker",
        applicable: true,
        slacks: vec![rhs - lhs],
    })
}

/// `Δ(p, q) <= sqrt(KL(p||q) / 2)` with the divergence in bits.
pub fn check_pinsker<W: Weight>(p: &Dist<W>, q: &Dist<W>) -> Result<InequalityReport> {
    let d = tv(p, q)?.to_f64();
    let applicable = p.support().iter().all(|&i| !q.mass(i).is_zero());
    let slack = if applicable { (kl(p, q)? / 2.0).sqrt() - d } else { f64::INFINITY };
    Ok(InequalityReport {
        check: "pinsker",
        applicable,
        slacks: vec![slack],
    })
}

/// `I(X;Z) <= I(X;Y)` for a joint over `(X, Y, Z)` forming a Markov chain
/// `X -> Y -> Z`. The Markov property is verified as part of the check.
pub fn check_data_processing<W: Weight>(j: &JointDist<W>) -> Result<InequalityReport> {
    if j.arity() != 3 {
        return Err(Error::InvalidParams("data processing needs factors (X, Y, Z)".into()));
    }
    let v = j.info();
    let markov_gap = v.mutual_info(&[0], &[2], &[1]);
    Ok(InequalityReport {
        check: "data_processing",
        applicable: markov_gap.abs() <= 1e-9,
        slacks: vec![v.mutual_info(&[0], &[1], &[]) - v.mutual_info(&[0], &[2], &[])],
    })
}
