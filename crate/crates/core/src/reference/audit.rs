//! Checking that a reduction's output follows its target law.
//!
//! Micro mode enumerates every tape of the reduction (input source and
//! public and private randomness together) and compares the exact output
//! law with the target table. Macro mode runs seeded trials and applies χ²
//! tests to statistics whose target law is known in closed form.

use crate::error::{Error, Result};
use crate::prob::Rational;
use crate::sources::{PlantedParams, Sample, SourceHandle, SourceKind};
use crate::tape::{exact_law, SeededTape, Tape};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Result of the exact comparison.
#[derive(Clone, Debug, Serialize)]
pub struct ExactAudit {
    /// `Δ` between the reduction's output law and the target.
    pub delta: f64,
    pub exact_zero: bool,
    pub branches_support: usize,
}

/// Exact `Δ` between the law of `program`'s output and `target`.
pub fn verify_reduction_exact<F>(mut program: F, target: &SourceHandle, cap: usize) -> Result<ExactAudit>
where
    F: FnMut(&mut dyn Tape) -> Result<Sample>,
{
    let mut failure = None;
    let law = exact_law::<_, Rational, _>(cap, |t| match program(t).and_then(|s| target.encode(&s)) {
        Ok(xy) => Some(xy),
        Err(e) => {
            failure.get_or_insert(e);
            None
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let table = target.exact::<Rational>(cap)?;
    let (nx, ny) = (table.factors()[0].len(), table.factors()[1].len());
    let mut covered = Rational::zero();
    let mut gap = Rational::zero();
    for (xy, w) in &law {
        let (x, y) = xy.expect("failures returned above");
        let q = if x < nx && y < ny {
            table.mass_at(&[x, y]).clone()
        } else {
            Rational::zero()
        };
        gap += if w > &q { w - &q } else { &q - w };
        covered += q;
    }
    // Target mass outside the output's support.
    gap += Rational::from_integer(1.into()) - covered;
    let delta = gap / Rational::from_integer(2.into());
    Ok(ExactAudit {
        delta: delta.to_f64().unwrap_or(f64::NAN),
        exact_zero: delta.is_zero(),
        branches_support: law.len(),
    })
}

/// One goodness-of-fit test.
#[derive(Clone, Debug, Serialize)]
pub struct StatTest {
    pub name: String,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MacroAudit {
    pub trials: usize,
    pub alpha: f64,
    pub tests: Vec<StatTest>,
}

impl MacroAudit {
    pub fn passed(&self) -> bool {
        self.tests.iter().all(|t| t.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.tests.iter().filter(|t| !t.passed).map(|t| t.name.as_str()).collect()
    }
}

/// Per-test significance level of the macro battery.
pub const AUDIT_ALPHA: f64 = 1e-4;

/// Closed-form statistics of a pointer-chasing target.
struct Expectation {
    m: usize,
    r: usize,
    ell: u32,
    /// `(planted size, contains endpoint)`; `None` for the product law.
    planted: Option<(usize, bool)>,
}

fn expectation(target: &SourceHandle) -> Result<Expectation> {
    let of = |p: &PlantedParams| Expectation {
        m: p.base.n,
        r: p.base.r,
        ell: p.base.ell,
        planted: Some((p.planted_size, p.contains_endpoint)),
    };
    match target.kind() {
        SourceKind::Pcs(p) => Ok(of(&PlantedParams::new(*p, 1, true)?)),
        SourceKind::PcsHat(p) | SourceKind::PcsMid(p) => Ok(of(p)),
        SourceKind::Product(inner) => {
            let mut e = expectation(inner)?;
            e.planted = None;
            Ok(e)
        }
        _ => Err(Error::Precondition(format!(
            "no closed-form statistics for `{}` targets",
            target.kind_name()
        ))),
    }
}

/// χ² goodness of fit. Adjacent cells with expected count below 5 are pooled.
pub fn chi_square(name: &str, observed: &[u64], probs: &[f64], alpha: f64) -> StatTest {
    let total: u64 = observed.iter().sum();
    // An observation in a cell of probability zero refutes the law outright.
    let impossible = observed.iter().zip(probs).any(|(&o, &p)| o > 0 && p == 0.0);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        acc.0 += o as f64;
        acc.1 += p * total as f64;
        if acc.1 >= 5.0 {
            cells.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => cells.push(acc),
        }
    }
    let stat: f64 = cells.iter().filter(|c| c.1 > 0.0).map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len().saturating_sub(1);
    let p_value = if impossible {
        0.0
    } else if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64).map(|d| d.sf(stat)).unwrap_or(0.0)
    };
    StatTest {
        name: name.into(),
        statistic: if impossible { f64::INFINITY } else { stat },
        dof,
        p_value,
        passed: p_value >= alpha,
    }
}

fn binomial_pmf(n: usize, p: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for (k, slot) in out.iter_mut().enumerate() {
        let ln = ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln();
        *slot = ln.exp();
    }
    out
}

fn ln_choose(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum()
}

/// Statistics of one output sample.
struct Stats {
    endpoint: usize,
    start: usize,
    first_images: Vec<usize>,
    matched: Vec<usize>,
}

/// Macro battery: endpoint law, start law, `π_t(0)` law per step,
/// matched-count law, endpoint-matched frequency, and per-index
/// matched frequency. Trial `c` runs on `SeededTape::new(seed, c)`.
pub fn verify_reduction_stats<F>(program: F, target: &SourceHandle, trials: usize, seed: u64) -> Result<MacroAudit>
where
    F: Fn(&mut dyn Tape) -> Result<Sample> + Sync,
{
    let e = expectation(target)?;
    let stats: Vec<Stats> = (0..trials as u64)
        .into_par_iter()
        .map(|c| {
            let s = program(&mut SeededTape::new(seed, c))?;
            let Sample::Pcs(p) = s else {
                return Err(Error::Precondition("reduction did not produce a pointer-chasing sample".into()));
            };
            if p.n != e.m || p.r() != e.r || p.ell != e.ell {
                return Err(Error::Precondition("sample shape differs from the target".into()));
            }
            Ok(Stats {
                endpoint: p.endpoint(),
                start: p.i0,
                first_images: p.perms.iter().map(|q| q.apply(0)).collect(),
                matched: p.matched(),
            })
        })
        .collect::<Result<_>>()?;

    let m = e.m;
    let uniform = vec![1.0 / m as f64; m];
    let hist = |f: &dyn Fn(&Stats) -> usize| {
        let mut h = vec![0u64; m];
        for s in &stats {
            h[f(s)] += 1;
        }
        h
    };
    let mut tests = vec![
        chi_square("endpoint", &hist(&|s| s.endpoint), &uniform, AUDIT_ALPHA),
        chi_square("start", &hist(&|s| s.start), &uniform, AUDIT_ALPHA),
    ];
    for t in 0..e.r {
        tests.push(chi_square(
            &format!("perm_{}(0)", t + 1),
            &hist(&|s| s.first_images[t]),
            &uniform,
            AUDIT_ALPHA,
        ));
    }

    let collide = 0.5f64.powi(e.ell as i32);
    let (count_law, end_prob) = match e.planted {
        Some((k, with_end)) => {
            let mut law = vec![0.0; k];
            law.extend(binomial_pmf(m - k, collide));
            let frac = k as f64 / m as f64;
            let end = if with_end { 1.0 } else { frac + (1.0 - frac) * collide };
            (law, end)
        }
        None => (binomial_pmf(m, collide), collide),
    };
    let mut counts = vec![0u64; m + 1];
    for s in &stats {
        counts[s.matched.len()] += 1;
    }
    tests.push(chi_square("matched-count", &counts, &count_law, AUDIT_ALPHA));
    let hits = stats.iter().filter(|s| s.matched.contains(&s.endpoint)).count() as u64;
    tests.push(chi_square(
        "endpoint-matched",
        &[hits, trials as u64 - hits],
        &[end_prob, 1.0 - end_prob],
        AUDIT_ALPHA,
    ));
    let mut member = vec![0u64; m];
    for s in &stats {
        for &w in &s.matched {
            member[w] += 1;
        }
    }
    tests.push(chi_square("matched-index", &member, &uniform, AUDIT_ALPHA));
    Ok(MacroAudit {
        trials,
        alpha: AUDIT_ALPHA,
        tests,
    })
}
