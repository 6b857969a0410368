//! Communication-free reductions into the pointer-chasing family.
//!
//! Each reduction maps an input pair plus public randomness to a pair of
//! pointer-chasing inputs. Public draws (shuffles, permutations, shared
//! strings) come from [`Stream::Public`]; strings a party samples on its own
//! come from that party's private stream. Strings are drawn only at indices
//! where they are used, which leaves the output law unchanged and keeps
//! exact enumeration small.

use crate::error::{Error, Result};
use crate::perm::Perm;
use crate::sources::{intersection_size, PcsInstance, PvInstance, Sample};
use crate::tape::{Stream, Tape};
use serde::Serialize;
use std::collections::BTreeMap;

/// Which input family a reduction consumed. For disjointness inputs, `Yes`
/// means the sets intersect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Yes,
    No,
}

/// Deliberate defects for negative-control audits.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Corruption {
    #[default]
    None,
    /// Replace every public relabelling by the identity.
    SkipTauShuffle,
    /// Leave the endpoint string unmatched (the construction as printed).
    DropEndpointMatch,
    /// Use the shared string on `U ∪ V` for both parties, where one side
    /// should hold a private string.
    SharedFreshStrings,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReductionOutput {
    pub produced: Sample,
    pub branch: Branch,
    /// The chase endpoint the construction guarantees, when it guarantees one.
    pub expected_endpoint: Option<usize>,
    /// Public draws by name: relabellings and permutations as image lists,
    /// shared strings by index order.
    pub shared_randomness_log: BTreeMap<String, Vec<u64>>,
}

impl ReductionOutput {
    pub fn pcs(&self) -> Option<&PcsInstance> {
        match &self.produced {
            Sample::Pcs(p) => Some(p),
            _ => None,
        }
    }
}

fn log_perm(log: &mut BTreeMap<String, Vec<u64>>, name: String, p: &Perm) {
    log.insert(name, p.images().iter().map(|&v| v as u64).collect());
}

fn public_perm(tape: &mut dyn Tape, n: usize, corruption: Corruption) -> Perm {
    if corruption == Corruption::SkipTauShuffle {
        Perm::identity(n)
    } else {
        tape.perm(Stream::Public, n)
    }
}

fn check_sets(n: usize, u: &[usize], v: &[usize]) -> Result<usize> {
    if u.iter().chain(v).any(|&x| x >= n) {
        return Err(Error::Precondition(format!("set elements must lie in 0..{n}")));
    }
    let k = intersection_size(u, v);
    if k != 0 && k != n.isqrt() {
        return Err(Error::Precondition(format!(
            "intersection size {k} is neither 0 nor ⌊√{n}⌋ = {}",
            n.isqrt()
        )));
    }
    Ok(k)
}

/// Pair `(i, j)` of `[n] × [n]` as an index of `[n²]`.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

/// `σ || τ` on `[n²]`: `(i, j) ↦ (σ(i), τ(j))`.
pub fn pair_perm(sigma: &Perm, tau: &Perm) -> Perm {
    let n = sigma.len();
    let images = (0..n * n).map(|w| pair_index(n, sigma.apply(w / n), tau.apply(w % n))).collect();
    Perm::from_images(images).expect("product of bijections")
}

/// Side length of the smallest perfect square holding `m` indices. A
/// universe `[m]` sits inside `[s²]` for `s = square_side(m)`.
pub fn square_side(m: usize) -> usize {
    let s = m.isqrt();
    if s * s == m {
        s
    } else {
        s + 1
    }
}

/// Disjointness over `[n]` to the unplanted source versus the planted one.
///
/// A public random injection `τ : [n] → [m]` with `m = (⌊√n⌋+1)²` moves the
/// sets, `j_0` is a public uniform index outside the image of `τ`, and the
/// chase is started at `(π_r∘…∘π_1)^{-1}(j_0)` so that it ends at `j_0`.
/// Shared public strings sit on `τ(U)` for Alice, on `τ(V)` for Bob, and at
/// `j_0` for both; every other string is private. Disjoint inputs land in
/// the pointer-chasing source over `[m]`; intersecting inputs land in its
/// planted variant with `⌊√n⌋ + 1` planted indices including the endpoint.
pub fn reduce_disj_to_mu_vs_hat(
    n: usize,
    u: &[usize],
    v: &[usize],
    r: usize,
    ell: u32,
    tape: &mut dyn Tape,
    corruption: Corruption,
) -> Result<ReductionOutput> {
    let k = check_sets(n, u, v)?;
    if r == 0 || ell == 0 || ell > 32 {
        return Err(Error::InvalidParams("need r >= 1 and ell in 1..=32".into()));
    }
    let m = (n.isqrt() + 1).pow(2);
    let mut log = BTreeMap::new();
    let shuffle = public_perm(tape, m, corruption);
    let tau: Vec<usize> = (0..n).map(|x| shuffle.apply(x)).collect();
    log.insert("tau".into(), tau.iter().map(|&t| t as u64).collect());
    let outside: Vec<usize> = (0..m).filter(|w| !tau.contains(w)).collect();
    let j0 = outside[tape.below(Stream::Public, outside.len())];
    log.insert("j0".into(), vec![j0 as u64]);
    let perms: Vec<Perm> = (0..r).map(|_| tape.perm(Stream::Public, m)).collect();
    for (t, p) in perms.iter().enumerate() {
        log_perm(&mut log, format!("perm_{}", t + 1), p);
    }
    let i0 = perms.iter().rev().fold(j0, |j, p| p.inverse().apply(j));

    let in_u: Vec<bool> = (0..m).map(|w| u.iter().any(|&x| tau[x] == w)).collect();
    let in_v: Vec<bool> = (0..m).map(|w| v.iter().any(|&x| tau[x] == w)).collect();
    let mut shared = Vec::new();
    let (mut a, mut b) = (vec![0; m], vec![0; m]);
    for w in 0..m {
        let at_end = w == j0 && corruption != Corruption::DropEndpointMatch;
        let (sa, sb) = (in_u[w] || at_end, in_v[w] || at_end);
        if sa || sb {
            let c = tape.bits(Stream::Public, ell);
            shared.push(c);
            a[w] = if sa { c } else { tape.bits(Stream::Alice, ell) };
            b[w] = if sb { c } else { tape.bits(Stream::Bob, ell) };
        } else {
            a[w] = tape.bits(Stream::Alice, ell);
            b[w] = tape.bits(Stream::Bob, ell);
        }
    }
    log.insert("shared_strings".into(), shared);
    Ok(ReductionOutput {
        produced: Sample::Pcs(PcsInstance {
            n: m,
            ell,
            perms,
            i0,
            a,
            b,
        }),
        branch: if k > 0 { Branch::Yes } else { Branch::No },
        expected_endpoint: Some(j0),
        shared_randomness_log: log,
    })
}

/// Pointer verification with `2r−1` permutations over `[n]` to the planted
/// source versus the mid source over `[n²]` with `r` permutations.
///
/// The middle permutation is split as `π_r = π'_{r+1}∘π'_r` with `π'_r`
/// public and uniform, giving `2r` permutations `π'`. Step `t` of the output
/// is `τ_t ∘ (π'_t || π'_{2r+1−t}^{-1}) ∘ τ_{t−1}^{-1}` for public uniform
/// `τ_0..τ_r`, the start is `τ_0((i_0, j_0))`, and public strings are
/// planted at `τ_r((i, i))`. On yes inputs the chase ends at
/// `τ_r((i'_r, i'_r))`, a planted index.
pub fn reduce_pv_to_hat_vs_mid(pv: &PvInstance, ell: u32, tape: &mut dyn Tape, corruption: Corruption) -> Result<ReductionOutput> {
    let count = pv.perms.len();
    if count % 2 == 0 {
        return Err(Error::Precondition(format!("need an odd number of permutations, got {count}")));
    }
    if ell == 0 || ell > 32 {
        return Err(Error::InvalidParams("need ell in 1..=32".into()));
    }
    let n = pv.n;
    let r = count.div_ceil(2);
    let big = n * n;
    let mut log = BTreeMap::new();
    let taus: Vec<Perm> = (0..=r).map(|_| public_perm(tape, big, corruption)).collect();
    for (t, tau) in taus.iter().enumerate() {
        log_perm(&mut log, format!("tau_{t}"), tau);
    }
    let split = tape.perm(Stream::Public, n);
    log_perm(&mut log, "split".into(), &split);

    // primed[t-1] is π'_t for t = 1..=2r.
    let mut primed: Vec<Perm> = pv.perms[..r - 1].to_vec();
    primed.push(split.clone());
    primed.push(pv.perms[r - 1].compose(&split.inverse()));
    primed.extend(pv.perms[r..].iter().cloned());

    let perms: Vec<Perm> = (1..=r)
        .map(|t| {
            let inner = pair_perm(&primed[t - 1], &primed[2 * r - t].inverse());
            taus[t].compose(&inner).compose(&taus[t - 1].inverse())
        })
        .collect();
    let i0 = taus[0].apply(pair_index(n, pv.i0, pv.j0));

    let planted: Vec<usize> = (0..n).map(|i| taus[r].apply(pair_index(n, i, i))).collect();
    let mut shared = Vec::new();
    let (mut a, mut b) = (vec![0; big], vec![0; big]);
    for w in 0..big {
        if planted.contains(&w) {
            let c = tape.bits(Stream::Public, ell);
            shared.push(c);
            a[w] = c;
            b[w] = c;
        } else {
            a[w] = tape.bits(Stream::Alice, ell);
            b[w] = tape.bits(Stream::Bob, ell);
        }
    }
    log.insert("shared_strings".into(), shared);

    let yes = pv.is_yes();
    let expected_endpoint = yes.then(|| {
        let meet = primed[..r].iter().fold(pv.i0, |i, p| p.apply(i));
        taus[r].apply(pair_index(n, meet, meet))
    });
    Ok(ReductionOutput {
        produced: Sample::Pcs(PcsInstance {
            n: big,
            ell,
            perms,
            i0,
            a,
            b,
        }),
        branch: if yes { Branch::Yes } else { Branch::No },
        expected_endpoint,
        shared_randomness_log: log,
    })
}

/// Disjointness over `[n]` to the mid source versus the product of the
/// planted source's marginals, on the same universe.
///
/// Public strings `Z` are shared: Alice uses `Z_u` for `u ∈ U`, Bob uses
/// `Z_v` for `v ∈ V`, and every other string is private. Permutations and
/// the start pointer are public and uniform. A second public index `j` is
/// drawn and logged but not used by the output.
pub fn reduce_disj_to_mid_vs_prod(
    n: usize,
    u: &[usize],
    v: &[usize],
    r: usize,
    ell: u32,
    tape: &mut dyn Tape,
    corruption: Corruption,
) -> Result<ReductionOutput> {
    let k = check_sets(n, u, v)?;
    if r == 0 || ell == 0 || ell > 32 {
        return Err(Error::InvalidParams("need r >= 1 and ell in 1..=32".into()));
    }
    let mut log = BTreeMap::new();
    let perms: Vec<Perm> = (0..r).map(|_| tape.perm(Stream::Public, n)).collect();
    for (t, p) in perms.iter().enumerate() {
        log_perm(&mut log, format!("perm_{}", t + 1), p);
    }
    let i0 = tape.below(Stream::Public, n);
    let j = tape.below(Stream::Public, n);
    log.insert("start".into(), vec![i0 as u64, j as u64]);
    let mut shared = Vec::new();
    let (mut a, mut b) = (vec![0; n], vec![0; n]);
    for w in 0..n {
        let (mut sa, mut sb) = (u.contains(&w), v.contains(&w));
        if corruption == Corruption::SharedFreshStrings {
            sa |= sb;
            sb = sa;
        }
        if sa || sb {
            let z = tape.bits(Stream::Public, ell);
            shared.push(z);
            a[w] = if sa { z } else { tape.bits(Stream::Alice, ell) };
            b[w] = if sb { z } else { tape.bits(Stream::Bob, ell) };
        } else {
            a[w] = tape.bits(Stream::Alice, ell);
            b[w] = tape.bits(Stream::Bob, ell);
        }
    }
    log.insert("shared_strings".into(), shared);
    Ok(ReductionOutput {
        produced: Sample::Pcs(PcsInstance {
            n,
            ell,
            perms,
            i0,
            a,
            b,
        }),
        branch: if k > 0 { Branch::Yes } else { Branch::No },
        expected_endpoint: None,
        shared_randomness_log: log,
    })
}
