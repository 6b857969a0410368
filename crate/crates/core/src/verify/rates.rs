use super::{Check, Tally};
use crate::error::Result;
use crate::prob::Rational;
use crate::protocol::{info_costs, mix_protocols};
use crate::random::random_joint;
use crate::rate::{approx_tilfc, approx_tilfc_joint, budget_grid, certify_shape, MeshOptions, RateCurve};
use crate::sources::SourceHandle;
use crate::{ATOM_CAP, STATE_CAP};
use rand_chacha::ChaCha12Rng;

const TOL: f64 = 1e-9;

pub(super) fn checks() -> Vec<Check> {
    vec![
        Check { id: "rate.witness_reanalysis", default_trials: 2, run: witness_reanalysis },
        Check { id: "rate.cap_bound", default_trials: 2, run: cap_bound },
        Check { id: "rate.refinement", default_trials: 10, run: refinement },
        Check { id: "rate.time_sharing", default_trials: 3, run: time_sharing },
        Check { id: "rate.shape", default_trials: 20, run: shape },
    ]
}

fn coarse() -> MeshOptions {
    MeshOptions { granularity: 2, ..Default::default() }
}

fn reference_curves() -> Result<Vec<(SourceHandle, RateCurve)>> {
    let grid = budget_grid(0.0, 0.1, 1.5);
    [SourceHandle::perfect_bit(), SourceHandle::bss(Rational::new(1.into(), 4.into()))?]
        .into_iter()
        .map(|s| {
            let c = approx_tilfc(&s, 1, &grid, &MeshOptions::default())?;
            Ok((s, c))
        })
        .collect()
}

/// Each grid point's witness reproduces its claimed costs.
fn witness_reanalysis(_: &mut ChaCha12Rng, _: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for (s, curve) in reference_curves()? {
        let j = s.exact::<f64>(ATOM_CAP)?;
        for p in &curve.grid {
            let r = info_costs(&curve.witness(&p.witness_id)?, &j, STATE_CAP)?;
            let gap = (r.ic_int - p.witness_ic_int).abs().max((r.ic_ext - p.witness_ic_ext).abs());
            t.record(gap.max(p.witness_ic_int - p.c_bits), TOL);
        }
    }
    Ok(t)
}

/// `L ≤ C + I(X;Y)` at every grid point.
fn cap_bound(_: &mut ChaCha12Rng, _: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for (_, curve) in reference_curves()? {
        for p in &curve.grid {
            t.record(p.l_bits - p.c_bits - curve.source_mi, TOL);
        }
    }
    Ok(t)
}

/// A finer mesh never lowers the curve.
fn refinement(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let grid = budget_grid(0.0, 0.2, 1.2);
    for _ in 0..trials {
        let j = random_joint::<f64>(rng, &[2, 2], false);
        let a = approx_tilfc_joint(&j, 1, &grid, &coarse())?;
        let b = approx_tilfc_joint(&j, 1, &grid, &MeshOptions::default())?;
        let drop = a.grid.iter().zip(&b.grid).map(|(x, y)| x.l_bits - y.l_bits).fold(f64::NEG_INFINITY, f64::max);
        t.record(drop, 1e-12);
    }
    Ok(t)
}

/// Mixtures of envelope witnesses lie under the curve.
fn time_sharing(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    for _ in 0..trials {
        let j = random_joint::<f64>(rng, &[2, 2], false);
        let curve = approx_tilfc_joint(&j, 1, &budget_grid(0.0, 0.1, 1.0), &coarse())?;
        let ids: Vec<String> = curve.envelope.iter().map(|v| v.witness_id.clone()).collect();
        let mut worst = f64::NEG_INFINITY;
        for a in &ids {
            for b in &ids {
                for delta in [0.2, 0.5, 0.9] {
                    let m = mix_protocols(&curve.witness(a)?, &curve.witness(b)?, delta)?;
                    let r = info_costs(&m, &j, STATE_CAP)?;
                    let under = curve.value_at(r.ic_int).unwrap_or(f64::NEG_INFINITY);
                    worst = worst.max(r.ic_ext - under);
                }
            }
        }
        t.record(worst, TOL);
    }
    Ok(t)
}

fn shape(rng: &mut ChaCha12Rng, trials: u64) -> Result<Tally> {
    let mut t = Tally::new();
    let grid = budget_grid(0.0, 0.1, 2.0);
    for _ in 0..trials {
        let j = random_joint::<f64>(rng, &[2, 2], false);
        let curve = approx_tilfc_joint(&j, 1, &grid, &coarse())?;
        t.flag(certify_shape(&curve, TOL)?.passed());
    }
    Ok(t)
}
