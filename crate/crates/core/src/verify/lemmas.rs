use super::{Check, Tally};
use crate::distinguish::{
    check_hient_smallset, check_zi_lb, entropy_support_set, exhaustive_advantage, measure_advantage, Budget,
};
use crate::error::{Error, Result};
use crate::keyops::{achievable_to_quasi, compress_min_entropy, couple_to_uniform, quasi_to_achievable};
use crate::prob::{
    check_cond_ineq_1, check_data_processing, check_pinsker, check_rev_cond_pinsker, check_reverse_pinsker, entropy,
    min_entropy, tv, Dist, JointDist, OutcomeSpace, Rational, Weight,
};
use crate::protocol::{
    info_costs, mix_protocols, prefix_residuals, run_protocol, strip_coins_alpha, transcript_law, Flavor,
};
use crate::random::{random_dist, random_joint, random_keyed, random_protocol, random_source};
use crate::reference::chi_square;
use crate::sources::{with_coin_blocks, SourceHandle};
use crate::tape::SeededTape;
use crate::STATE_CAP;
use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

const TOL: f64 = 1e-9;

pub(super) fn checks() -> Vec<Check> {
    vec![
        Check { id: "prob.chain_rule", default_trials: 1000, run: chain_rule },
        Check { id: "prob.data_processing", default_trials: 1000, run: data_processing },
        Check { id: "prob.tv_metric", default_trials: 1000, run: tv_metric },
        Check { id: "prob.exact_matches_float", default_trials: 1000, run: exact_matches_float },
        Check { id: "prob.pinsker", default_trials: 1000, run: pinsker },
        Check { id: "prob.reverse_pinsker", default_trials: 1000, run: reverse_pinsker },
        Check { id: "prob.cond_reverse_pinsker", default_trials: 1000, run: cond_reverse_pinsker },
        Check { id: "prob.cond_ineq_1", default_trials: 1000, run: cond_ineq_1 },
        Check { id: "distinguish.support_set", default_trials: 1000, run: support_set },
        Check { id: "distinguish.hient_smallset", default_trials: 1000, run: hient_smallset },
        Check { id: "distinguish.zi_lb", default_trials: 1000, run: zi_lb },
        Check { id: "distinguish.exhaustive_attained", default_trials: 60, run: exhaustive_attained },
        Check { id: "engine.cost_chain", default_trials: 500, run: cost_chain },
        Check { id: "engine.prefix_residuals", default_trials: 200, run: prefix_monotone },
        Check { id: "engine.mix_affine", default_trials: 40, run: mix_affine },
        Check { id: "engine.alpha_identity", default_trials: 200, run: alpha_identity },
        Check { id: "engine.run_frequencies", default_trials: 20, run: run_frequencies },
        Check { id: "keyops.compress_bound", default_trials: 1000, run: compress_bound },
        Check { id: "keyops.coupling_exact", default_trials: 1000, run: coupling_exact },
        Check { id: "keyops.round_trip", default_trials: 100, run: round_trip },
    ]
}

fn chain_rule(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let shape = [rng.gen_range(2..=5), rng.gen_range(2..=5)];
        let sparse = rng.gen();
        let j = random_joint::<f64>(rng, &shape, sparse);
        let v = j.info();
        t.record((v.entropy(&[0, 1]) - v.entropy(&[0]) - v.cond_entropy(&[1], &[0])).abs(), TOL);
    }
    Ok(t)
}

/// `X → Y → Z = g(Y)` with random `g`.
fn data_processing(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let (nx, ny, nz) = (rng.gen_range(2..=4), rng.gen_range(2..=4), rng.gen_range(2..=3));
        let sparse = rng.gen();
        let xy = random_joint::<f64>(rng, &[nx, ny], sparse);
        let g: Vec<usize> = (0..ny).map(|_| rng.gen_range(0..nz)).collect();
        let f = vec![OutcomeSpace::range(nx), OutcomeSpace::range(ny), OutcomeSpace::range(nz)];
        let j = JointDist::from_fn(f, STATE_CAP, |a| if g[a[1]] == a[2] { *xy.mass_at(&a[..2]) } else { 0.0 })?;
        let r = check_data_processing(&j)?;
        if !r.applicable {
            t.flag(false);
            continue;
        }
        t.record(-r.min_slack(), TOL);
    }
    Ok(t)
}

fn tv_metric(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let n = rng.gen_range(2..=8);
        let (p, q, s) = (
            random_dist::<f64>(rng, n, true),
            random_dist::<f64>(rng, n, true),
            random_dist::<f64>(rng, n, true),
        );
        let (pq, qs, ps) = (tv(&p, &q)?, tv(&q, &s)?, tv(&p, &s)?);
        t.record((-pq).max(pq - 1.0).max(ps - pq - qs), TOL);
    }
    Ok(t)
}

fn to_float(d: &Dist<Rational>) -> Result<Dist<f64>> {
    Dist::new(d.space().clone(), d.masses().iter().map(Weight::to_f64).collect())
}

fn exact_matches_float(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let n = rng.gen_range(2..=10);
        let (p, q) = (random_dist::<Rational>(rng, n, true), random_dist::<Rational>(rng, n, true));
        let (pf, qf) = (to_float(&p)?, to_float(&q)?);
        let gap = (entropy(&p) - entropy(&pf))
            .abs()
            .max((tv(&p, &q)?.to_f64() - tv(&pf, &qf)?).abs())
            .max((min_entropy(&p) - min_entropy(&pf)).abs());
        t.record(gap, TOL);
    }
    Ok(t)
}

fn pinsker(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let n = rng.gen_range(2..=8);
        let p = random_dist::<f64>(rng, n, true);
        let q = random_dist::<f64>(rng, n, false);
        t.record(-check_pinsker(&p, &q)?.min_slack(), TOL);
    }
    Ok(t)
}

/// Only pairs inside the lemma's domain `Δ ≤ (|X|−1)/|X|` count as trials.
fn reverse_pinsker(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let mut attempts = 0u64;
    while t.trials < trials {
        attempts += 1;
        if attempts > 100 * trials.max(1) {
            return Err(Error::BudgetExhausted("reverse Pinsker domain is too rarely hit".into()));
        }
        let n = rng.gen_range(2..=8);
        let (p, q) = (random_dist::<f64>(rng, n, true), random_dist::<f64>(rng, n, true));
        let r = check_reverse_pinsker(&p, &q)?;
        if r.applicable {
            t.record(-r.min_slack(), TOL);
        }
    }
    Ok(t)
}

fn cond_reverse_pinsker(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let shape = [rng.gen_range(2..=4), rng.gen_range(1..=4)];
        let a = random_joint::<f64>(rng, &shape, true);
        let b = random_joint::<f64>(rng, &shape, true);
        t.record(-check_rev_cond_pinsker(&a, &b)?.min_slack(), TOL);
    }
    Ok(t)
}

fn cond_ineq_1(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let shape: Vec<usize> = (0..4).map(|_| rng.gen_range(2..=3)).collect();
        let sparse = rng.gen();
        let j = random_joint::<f64>(rng, &shape, sparse);
        t.record(-check_cond_ineq_1(&j)?.min_slack(), TOL);
    }
    Ok(t)
}

fn support_set(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for k in 0..trials {
        let d = random_dist::<f64>(rng, 1 << 10, k % 2 == 0);
        let delta = rng.gen_range(0.05..=1.0);
        let s = entropy_support_set(&d, delta)?;
        let members = s.atoms.iter().all(|&a| d.mass(a).to_f64() >= s.threshold * (1.0 - 1e-9));
        let excess = ((s.atoms.len() as f64).log2() - s.entropy / s.delta).max(s.escape - s.delta);
        t.record(if members { excess } else { f64::INFINITY }, TOL);
    }
    Ok(t)
}

fn hient_smallset(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for k in 0..trials {
        let ell = rng.gen_range(3..=8u32);
        let w = random_dist::<f64>(rng, 1 << ell, k % 3 == 0);
        let c = rng.gen_range(0.0..(ell as f64 - 0.5));
        let size = rng.gen_range(1..=(c.exp2().floor() as usize).max(1));
        // Half the trials take the heaviest atoms, the worst case.
        let set: Vec<usize> = if k % 2 == 0 {
            let mut order: Vec<usize> = (0..1 << ell).collect();
            order.sort_by(|&a, &b| w.mass(b).total_cmp(w.mass(a)));
            order.truncate(size);
            order
        } else {
            sample(rng, 1 << ell, size).into_vec()
        };
        t.record(-check_hient_smallset(&w, ell, &set, c).min_slack(), TOL);
    }
    Ok(t)
}

fn zi_lb(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let (n, ell) = (3usize, 2u32);
    let tuples = 1usize << (ell as usize * n);
    for _ in 0..trials {
        let rows: Vec<Dist<f64>> = (0..tuples).map(|_| random_dist(rng, n, true)).collect();
        let coupling = JointDist::from_fn(vec![OutcomeSpace::range(tuples), OutcomeSpace::range(n)], STATE_CAP, |a| {
            rows[a[0]].mass(a[1]) / tuples as f64
        })?;
        t.record(-check_zi_lb(n, ell, &coupling)?.min_slack(), TOL);
    }
    Ok(t)
}

/// The searched optimum is attained by the protocol the search returns.
fn exhaustive_attained(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let (sa, sb) = (rng.gen(), rng.gen());
        let a = random_joint::<Rational>(rng, &[2, 2], sa);
        let b = random_joint::<Rational>(rng, &[2, 2], sb);
        let (rounds, cc) = (rng.gen_range(1..=2), rng.gen_range(1..=2u32));
        let found = exhaustive_advantage(&a, &b, rounds, cc, 1_000_000)?;
        let measured = measure_advantage(
            &found.protocol,
            &SourceHandle::explicit(a)?,
            &SourceHandle::explicit(b)?,
            Budget::Exact { cap: STATE_CAP },
        )?;
        let same = measured.exact.is_some() && measured.exact == found.report.exact;
        t.record(if same { 0.0 } else { (measured.advantage - found.report.advantage).abs().max(1e-300) }, 0.0);
    }
    Ok(t)
}

fn flavor(rng: &mut ChaCha12Rng) -> Flavor {
    [Flavor::Deterministic, Flavor::PrivateCoin, Flavor::PublicCoin][rng.gen_range(0..3)]
}

fn cost_chain(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let s = random_source::<f64>(rng, 3);
        let (nx, ny) = (s.factors()[0].len(), s.factors()[1].len());
        let fl = flavor(rng);
        let rounds = rng.gen_range(1..=3);
        let p = random_protocol::<f64>(rng, nx, ny, rounds, 3, fl);
        let r = info_costs(&p, &s, STATE_CAP)?;
        let chain = (-r.ic_int).max(r.ic_int - r.ic_ext).max(r.ic_ext - r.cc_bits as f64);
        t.record(chain.max(r.residual_gap()), TOL);
    }
    Ok(t)
}

fn prefix_monotone(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let s = random_source::<f64>(rng, 3);
        let (nx, ny) = (s.factors()[0].len(), s.factors()[1].len());
        let fl = flavor(rng);
        let p = random_protocol::<f64>(rng, nx, ny, 3, 3, fl);
        let res = prefix_residuals(&p, &s, STATE_CAP)?;
        t.record(res.iter().map(|r| r - res[0]).fold(f64::NEG_INFINITY, f64::max), TOL);
    }
    Ok(t)
}

fn mix_affine(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let s = random_source::<Rational>(rng, 3);
        let (nx, ny) = (s.factors()[0].len(), s.factors()[1].len());
        let (f1, f2) = (flavor(rng), flavor(rng));
        let rounds = rng.gen_range(1..=3);
        let p1 = random_protocol::<Rational>(rng, nx, ny, rounds, 3, f1);
        let rounds = rng.gen_range(1..=3);
        let p2 = random_protocol::<Rational>(rng, nx, ny, rounds, 3, f2);
        let a = info_costs(&p1, &s, STATE_CAP)?;
        let b = info_costs(&p2, &s, STATE_CAP)?;
        let mut worst = 0.0f64;
        for q in 0..=4u64 {
            let m = info_costs(&mix_protocols(&p1, &p2, Rational::ratio(q, 4))?, &s, STATE_CAP)?;
            let f = q as f64 / 4.0;
            worst = worst
                .max((m.ic_int - (f * a.ic_int + (1.0 - f) * b.ic_int)).abs())
                .max((m.ic_ext - (f * a.ic_ext + (1.0 - f) * b.ic_ext)).abs());
        }
        t.record(worst, TOL);
    }
    Ok(t)
}

fn alpha_identity(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let mu = random_source::<Rational>(rng, 2);
        let nu = with_coin_blocks(&mu, 1)?;
        let (nx, ny) = (nu.factors()[0].len(), nu.factors()[1].len());
        let fl = flavor(rng);
        let rounds = rng.gen_range(1..=3);
        let p = random_protocol::<Rational>(rng, nx, ny, rounds, 2, fl);
        match strip_coins_alpha(&p, &mu, &nu, TOL, STATE_CAP) {
            Ok(r) => t.record((r.alpha - r.alpha_int).abs().max(-r.alpha), TOL),
            Err(Error::MismatchAlpha { internal, external }) => {
                t.record((internal - external).abs().max(-external), TOL)
            }
            Err(e) => return Err(e),
        }
    }
    Ok(t)
}

/// Sampled transcripts against the exact law, by χ² at level 1e-6.
fn run_frequencies(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    const RUNS: u64 = 4000;
    let mut t = Tally::new();
    for _ in 0..trials {
        let (nx, ny) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let fl = flavor(rng);
        let rounds = rng.gen_range(1..=3);
        let p = random_protocol::<f64>(rng, nx, ny, rounds, 3, fl);
        let (x, y) = (rng.gen_range(0..nx), rng.gen_range(0..ny));
        let point = JointDist::from_fn(vec![OutcomeSpace::range(nx), OutcomeSpace::range(ny)], STATE_CAP, |a| {
            if a == [x, y] { 1.0 } else { 0.0 }
        })?;
        let law = transcript_law(&p, &point, STATE_CAP)?;
        let keys: Vec<&Vec<usize>> = law.keys().collect();
        let mut observed = vec![0u64; keys.len() + 1];
        let base: u64 = rng.gen();
        for k in 0..RUNS {
            let run = run_protocol(&p, x, y, &mut SeededTape::new(base, k))?;
            let mut key = vec![run.coin];
            key.extend(run.messages);
            match keys.binary_search(&&key) {
                Ok(i) => observed[i] += 1,
                Err(_) => observed[keys.len()] += 1,
            }
        }
        let mut probs: Vec<f64> = law.values().copied().collect();
        probs.push(0.0);
        t.flag(chi_square("transcript", &observed, &probs, 1e-6).passed);
    }
    Ok(t)
}

fn compress_bound(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let n = rng.gen_range(64..=512);
        let k = random_dist::<f64>(rng, n, false);
        let delta = rng.gen_range(0.05..=1.0);
        let c = compress_min_entropy(&k, min_entropy(&k), delta)?;
        t.record(c.max_bucket() - c.bound, 1e-12);
    }
    Ok(t)
}

fn coupling_exact(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let n = rng.gen_range(2..=10);
        let sparse = rng.gen();
        let k = random_dist::<Rational>(rng, n, sparse);
        let u = Dist::uniform(k.space().clone());
        let c = couple_to_uniform(&k);
        let off_uniform = tv(&c.map.push(&k)?, &u)?.to_f64();
        let gap = (c.agreement.clone() - (Rational::ratio(1, 1) - tv(&k, &u)?)).to_f64().abs();
        t.record(off_uniform.max(gap), 1e-12);
    }
    Ok(t)
}

/// Coupling to uniform then compressing back, with every loss accounted for.
fn round_trip(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let s = random_source::<Rational>(rng, 2);
        let (nx, ny) = (s.factors()[0].len(), s.factors()[1].len());
        let rounds = rng.gen_range(1..=2);
        let kp = random_keyed::<Rational>(rng, nx, ny, rounds, 2, 4, Flavor::PrivateCoin);
        let (uniform, rep) = achievable_to_quasi(&kp, &s, STATE_CAP)?;
        let mut excess = rep.disagreement_after - rep.bound;
        excess = excess.max(2.0 - rep.min_entropy.0).max(2.0 - rep.min_entropy.1);
        let back = quasi_to_achievable(&uniform, &s, 2.0, rng.gen_range(0.5..=1.0), STATE_CAP)?;
        if !back.certificate_holds() {
            excess = excess.max(1.0);
        }
        excess = excess.max(back.disagreement - back.epsilon);
        t.record(excess, TOL);
    }
    Ok(t)
}
