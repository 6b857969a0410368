use super::{Check, Tally};
use crate::error::Result;
use crate::prob::{JointDist, Rational, Weight};
use crate::protocol::crg_report;
use crate::reference::{
    pointer_chase_protocol, pv_bidirectional_protocol, pv_exact_advantage, reduce_disj_to_mid_vs_prod,
    reduce_disj_to_mu_vs_hat, reduce_pv_to_hat_vs_mid, verify_reduction_exact, verify_reduction_stats, Branch,
    Corruption,
};
use crate::sources::{
    draw_disj, draw_pv, sample_pcs, Answer, DisjParams, PcsParams, PlantedParams, PvParams, Sample, SourceHandle,
};
use crate::tape::{SeededTape, Stream, Tape};
use crate::{ATOM_CAP, STATE_CAP};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;

const TOL: f64 = 1e-9;

pub(super) fn checks() -> Vec<Check> {
    vec![
        Check { id: "sources.pcs_information", default_trials: 4, run: pcs_information },
        Check { id: "sources.pointer_identity", default_trials: 1000, run: pointer_identity },
        Check { id: "sources.planted_singleton", default_trials: 3, run: planted_singleton },
        Check { id: "sources.product_hat_mid", default_trials: 3, run: product_hat_mid },
        Check { id: "sources.empirical_fit", default_trials: 100_000, run: empirical_fit },
        Check { id: "reference.chase_protocol", default_trials: 4, run: chase_protocol },
        Check { id: "reference.pv_advantage", default_trials: 8, run: pv_advantage },
        Check { id: "reference.pv_chase_identity", default_trials: 10_000, run: pv_chase_identity },
        Check { id: "reference.mu_hat_branches", default_trials: 1000, run: mu_hat_branches },
        Check { id: "reference.exact_audits", default_trials: 6, run: exact_audits },
        Check { id: "reference.macro_audits", default_trials: 20_000, run: macro_audits },
        Check { id: "reference.negative_controls", default_trials: 20_000, run: negative_controls },
        Check { id: "reference.determinism", default_trials: 200, run: determinism },
    ]
}

/// The enumerable pointer-chasing instances.
pub(crate) const MICRO_PCS: [(usize, usize, u32); 4] = [(1, 2, 1), (1, 3, 1), (2, 2, 1), (1, 2, 2)];

fn micro() -> impl Iterator<Item = PcsParams> {
    MICRO_PCS.iter().map(|&(r, n, ell)| PcsParams::new(r, n, ell).expect("valid micro parameters"))
}

fn pcs_information(_: &mut ChaCha12Rng, _: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for p in micro() {
        let j = SourceHandle::pcs(p).exact::<Rational>(ATOM_CAP)?;
        t.record((j.info().mutual_info(&[0], &[1], &[]) - p.ell as f64).abs(), TOL);
    }
    Ok(t)
}

/// `i_t = j_{r−t}` on every sample.
fn pointer_identity(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let p = PcsParams::new(rng.gen_range(1..=5), rng.gen_range(2..=8), rng.gen_range(1..=8))?;
        let tr = sample_pcs(&p, rng.gen()).trace();
        t.flag((0..=p.r).all(|k| tr.forward[k] == tr.reverse[p.r - k]));
    }
    Ok(t)
}

fn table_gap(a: &JointDist<Rational>, b: &JointDist<Rational>) -> f64 {
    if a.factors() != b.factors() {
        return f64::INFINITY;
    }
    let gap = a
        .masses()
        .iter()
        .zip(b.masses())
        .fold(Rational::from_integer(0.into()), |acc, (x, y)| acc + if x > y { x - y } else { y - x });
    gap.to_f64()
}

fn planted_singleton(_: &mut ChaCha12Rng, _: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for p in micro().take(3) {
        let mu = SourceHandle::pcs(p).exact::<Rational>(ATOM_CAP)?;
        let hat = SourceHandle::planted(PlantedParams::new(p, 1, true)?).exact::<Rational>(ATOM_CAP)?;
        t.record(table_gap(&mu, &hat), 0.0);
    }
    Ok(t)
}

fn product_hat_mid(_: &mut ChaCha12Rng, _: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for (p, k) in [(PcsParams::new(1, 2, 1)?, 1), (PcsParams::new(1, 3, 1)?, 1), (PcsParams::new(1, 3, 1)?, 2)] {
        let hat = SourceHandle::planted(PlantedParams::new(p, k, true)?).product_of_marginals();
        let mid = SourceHandle::planted(PlantedParams::new(p, k, false)?).product_of_marginals();
        t.record(table_gap(&hat.exact(ATOM_CAP)?, &mid.exact(ATOM_CAP)?), 0.0);
    }
    Ok(t)
}

/// Empirical law of `trials` samples against the exact table; the allowance
/// is `3·sqrt(atoms/trials)`.
fn empirical_fit(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let sources = [
        SourceHandle::perfect_bit(),
        SourceHandle::bss(Rational::new(1.into(), 4.into()))?,
        SourceHandle::pcs(PcsParams::new(1, 2, 1)?),
        SourceHandle::planted(PlantedParams::new(PcsParams::new(1, 3, 1)?, 2, false)?),
        SourceHandle::pv(PvParams::new(1, 3, Answer::Yes)?),
    ];
    for s in sources {
        let table = s.exact::<f64>(ATOM_CAP)?;
        let seed: u64 = rng.gen();
        let mut counts: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for c in 0..trials {
            *counts.entry(s.encode(&s.sample(seed, c))?).or_default() += 1;
        }
        let n = trials.max(1) as f64;
        let mut gap = 0.0;
        let mut seen = 0.0;
        for (&(x, y), &k) in &counts {
            let q = *table.mass_at(&[x, y]);
            gap += (k as f64 / n - q).abs();
            seen += q;
        }
        gap += 1.0 - seen;
        let allowance = 3.0 * (table.support_len() as f64 / n).sqrt();
        t.record(gap / 2.0 - allowance, 0.0);
    }
    Ok(t)
}

/// Rounds, cost, agreement, uniformity, and secrecy of the chase protocol,
/// and string-collision agreement on the product law.
fn chase_protocol(_: &mut ChaCha12Rng, _: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for p in micro() {
        let kp = pointer_chase_protocol::<Rational>(p)?;
        let logn = crate::protocol::ceil_log2(p.n);
        let shape_ok = kp.protocol.rounds() == p.r + 2 && kp.protocol.cc_bits() <= (p.r as u32 + 2) * logn;
        let mu = SourceHandle::pcs(p).exact::<Rational>(ATOM_CAP)?;
        let rep = crg_report(&kp, &mu, STATE_CAP)?;
        let prod = SourceHandle::pcs(p).product_of_marginals().exact::<Rational>(ATOM_CAP)?;
        let off = crg_report(&kp, &prod, STATE_CAP)?;
        let excess = (1.0 - rep.agreement)
            .abs()
            .max(rep.uniformity.abs())
            .max(rep.secrecy.abs())
            .max((off.agreement - 0.5f64.powi(p.ell as i32)).abs());
        t.record(if shape_ok { excess } else { f64::INFINITY }, TOL);
    }
    Ok(t)
}

fn pv_advantage(_: &mut ChaCha12Rng, _: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for r in [1usize, 3] {
        for n in [2usize, 3, 4, 8] {
            let adv = pv_exact_advantage(r, n, ATOM_CAP)?;
            let want = Rational::new((n as i64 - 1).into(), (n as i64).into());
            let p = pv_bidirectional_protocol::<f64>(r, n)?;
            let logn = crate::protocol::ceil_log2(n);
            let shape_ok = p.rounds() == (r + 5) / 2 && p.cc_bits() <= 1 + (r as u32 + 1) * logn;
            let gap = if adv == want { 0.0 } else { (adv - want).to_f64().abs().max(f64::MIN_POSITIVE) };
            t.record(if shape_ok { gap } else { f64::INFINITY }, 0.0);
        }
    }
    Ok(t)
}

/// Yes instances land on a planted endpoint whose strings agree.
fn pv_chase_identity(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let (r, n) = ([1usize, 3, 5][rng.gen_range(0..3)], rng.gen_range(2..=5));
        let ell = rng.gen_range(1..=8);
        let mut tape = SeededTape::new(rng.gen(), 0);
        let inst = draw_pv(&mut tape, Stream::Source, &PvParams::new(r, n, Answer::Yes)?);
        let out = reduce_pv_to_hat_vs_mid(&inst, ell, &mut tape, Corruption::None)?;
        let ok = out.pcs().is_some_and(|q| {
            q.n == n * n
                && q.r() == r.div_ceil(2)
                && Some(q.endpoint()) == out.expected_endpoint
                && q.a[q.endpoint()] == q.b[q.endpoint()]
        });
        t.flag(ok);
    }
    Ok(t)
}

/// Disjoint inputs match at the endpoint; intersecting inputs match on
/// exactly `⌊√n⌋ + 1` indices (32-bit strings make stray matches negligible).
fn mu_hat_branches(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for k in 0..trials {
        let n = [16usize, 25, 36][rng.gen_range(0..3)];
        let (d, branch) = if k % 2 == 0 {
            (DisjParams::standard(n, 0)?, Branch::No)
        } else {
            (DisjParams::sqrt_intersecting(n)?, Branch::Yes)
        };
        let mut tape = SeededTape::new(rng.gen(), 0);
        let (u, v) = draw_disj(&mut tape, Stream::Source, &d);
        let out = reduce_disj_to_mu_vs_hat(n, &u, &v, rng.gen_range(1..=4), 32, &mut tape, Corruption::None)?;
        let ok = out.branch == branch
            && out.pcs().is_some_and(|p| {
                let e = p.endpoint();
                let end_ok = Some(e) == out.expected_endpoint && p.a[e] == p.b[e];
                end_ok && (branch == Branch::No || p.matched().len() == n.isqrt() + 1)
            });
        t.flag(ok);
    }
    Ok(t)
}

type Program = Box<dyn Fn(&mut dyn Tape) -> Result<Sample> + Sync>;

fn mu_hat(d: DisjParams, r: usize, ell: u32, c: Corruption) -> Program {
    Box::new(move |t| {
        let (u, v) = draw_disj(t, Stream::Source, &d);
        Ok(reduce_disj_to_mu_vs_hat(d.n, &u, &v, r, ell, t, c)?.produced)
    })
}

fn mid_prod(d: DisjParams, r: usize, ell: u32, c: Corruption) -> Program {
    Box::new(move |t| {
        let (u, v) = draw_disj(t, Stream::Source, &d);
        Ok(reduce_disj_to_mid_vs_prod(d.n, &u, &v, r, ell, t, c)?.produced)
    })
}

fn pv_hat(p: PvParams, ell: u32, c: Corruption) -> Program {
    Box::new(move |t| {
        let inst = draw_pv(t, Stream::Source, &p);
        Ok(reduce_pv_to_hat_vs_mid(&inst, ell, t, c)?.produced)
    })
}

/// Micro-scale reductions whose output law equals the target exactly.
pub(crate) fn exact_cases() -> Result<Vec<(&'static str, Program, SourceHandle)>> {
    let base = PcsParams::new(1, 4, 1)?;
    let small = PcsParams::new(1, 2, 1)?;
    let planted = |p, k, e| PlantedParams::new(p, k, e).map(SourceHandle::planted);
    Ok(vec![
        ("mu_hat/disjoint", mu_hat(DisjParams::new(3, 1, 0)?, 1, 1, Corruption::None), SourceHandle::pcs(base)),
        ("mu_hat/meeting", mu_hat(DisjParams::new(3, 1, 1)?, 1, 1, Corruption::None), planted(base, 2, true)?),
        (
            "mid_prod/disjoint",
            mid_prod(DisjParams::new(2, 1, 0)?, 1, 1, Corruption::None),
            planted(small, 1, true)?.product_of_marginals(),
        ),
        ("mid_prod/meeting", mid_prod(DisjParams::new(4, 2, 2)?, 1, 1, Corruption::None), planted(base, 2, false)?),
        ("pv_hat/yes", pv_hat(PvParams::new(1, 2, Answer::Yes)?, 1, Corruption::None), planted(base, 2, true)?),
        ("pv_hat/no", pv_hat(PvParams::new(1, 2, Answer::No)?, 1, Corruption::None), planted(base, 2, false)?),
    ])
}

fn exact_audits(_: &mut ChaCha12Rng, _: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for (_, program, target) in exact_cases()? {
        let audit = verify_reduction_exact(program, &target, ATOM_CAP)?;
        t.record(if audit.exact_zero { 0.0 } else { audit.delta.max(f64::MIN_POSITIVE) }, 0.0);
    }
    Ok(t)
}

fn macro_targets() -> Result<(SourceHandle, SourceHandle)> {
    let mid = SourceHandle::planted(PlantedParams::new(PcsParams::new(2, 9, 3)?, 3, false)?);
    let mu = SourceHandle::pcs(PcsParams::new(2, 16, 2)?);
    Ok((mid, mu))
}

fn macro_audits(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let (mid, mu) = macro_targets()?;
    let pv = PvParams::new(3, 3, Answer::No)?;
    let d = DisjParams::standard(9, 0)?;
    let runs = [
        (pv_hat(pv, 3, Corruption::None), &mid),
        (mu_hat(d, 2, 2, Corruption::None), &mu),
    ];
    for (program, target) in runs {
        let audit = verify_reduction_stats(program, target, trials as usize, rng.gen())?;
        t.flag(audit.passed());
    }
    Ok(t)
}

/// Corrupted reductions must fail their audits.
fn negative_controls(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let (mid, mu) = macro_targets()?;
    let pv = PvParams::new(3, 3, Answer::No)?;
    let d = DisjParams::standard(9, 0)?;
    let runs = [
        (pv_hat(pv, 3, Corruption::SkipTauShuffle), &mid),
        (mu_hat(d, 2, 2, Corruption::SkipTauShuffle), &mu),
        (mu_hat(d, 2, 2, Corruption::DropEndpointMatch), &mu),
    ];
    for (program, target) in runs {
        let audit = verify_reduction_stats(program, target, trials as usize, rng.gen())?;
        t.flag(!audit.passed());
    }
    let base = PcsParams::new(1, 4, 1)?;
    let dropped = mu_hat(DisjParams::new(3, 1, 0)?, 1, 1, Corruption::DropEndpointMatch);
    t.flag(verify_reduction_exact(dropped, &SourceHandle::pcs(base), ATOM_CAP)?.delta > 0.0);
    let prod = SourceHandle::planted(PlantedParams::new(PcsParams::new(1, 2, 1)?, 1, true)?).product_of_marginals();
    let shared = mid_prod(DisjParams::new(2, 1, 0)?, 1, 1, Corruption::SharedFreshStrings);
    t.flag(verify_reduction_exact(shared, &prod, ATOM_CAP)?.delta > 0.0);
    Ok(t)
}

/// Same seed, same output, including the public-randomness log.
fn determinism(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let seed: u64 = rng.gen();
        let which = rng.gen_range(0..3);
        let once = |seed: u64| -> Result<String> {
            let mut tape = SeededTape::new(seed, 0);
            let out = match which {
                0 => {
                    let (u, v) = draw_disj(&mut tape, Stream::Source, &DisjParams::sqrt_intersecting(16)?);
                    reduce_disj_to_mu_vs_hat(16, &u, &v, 2, 8, &mut tape, Corruption::None)?
                }
                1 => {
                    let (u, v) = draw_disj(&mut tape, Stream::Source, &DisjParams::sqrt_intersecting(16)?);
                    reduce_disj_to_mid_vs_prod(16, &u, &v, 2, 8, &mut tape, Corruption::None)?
                }
                _ => {
                    let inst = draw_pv(&mut tape, Stream::Source, &PvParams::new(3, 3, Answer::Yes)?);
                    reduce_pv_to_hat_vs_mid(&inst, 8, &mut tape, Corruption::None)?
                }
            };
            Ok(serde_json::to_string(&out)?)
        };
        t.flag(once(seed)? == once(seed)?);
    }
    Ok(t)
}
