//! Audit the reductions from disjointness and pointer verification to the
//! pointer-chasing variants, and show that corrupted versions fail.
//!
//! `cargo run --release --example reduction_audit`

use crglab::reference::{
    reduce_disj_to_mu_vs_hat, reduce_pv_to_hat_vs_mid, verify_reduction_exact, verify_reduction_stats, Corruption,
};
use crglab::sources::{draw_disj, draw_pv, Answer, DisjParams, PcsParams, PlantedParams, PvParams, SourceHandle};
use crglab::tape::{Stream, Tape};

fn main() -> crglab::Result<()> {
    let disjoint = DisjParams::new(3, 1, 0)?;
    let mu = SourceHandle::pcs(PcsParams::new(1, 4, 1)?);
    for c in [Corruption::None, Corruption::DropEndpointMatch] {
        let program = move |t: &mut dyn Tape| {
            let (u, v) = draw_disj(t, Stream::Source, &disjoint);
            Ok(reduce_disj_to_mu_vs_hat(disjoint.n, &u, &v, 1, 1, t, c)?.produced)
        };
        let audit = verify_reduction_exact(program, &mu, crglab::ATOM_CAP)?;
        println!("disjointness -> μ, {c:?}: exact Δ = {:.6} over {} outcomes", audit.delta, audit.branches_support);
    }

    let pv = PvParams::new(3, 3, Answer::No)?;
    let mid = SourceHandle::planted(PlantedParams::new(PcsParams::new(2, 9, 3)?, 3, false)?);
    for c in [Corruption::None, Corruption::SkipTauShuffle] {
        let program = move |t: &mut dyn Tape| {
            let inst = draw_pv(t, Stream::Source, &pv);
            Ok(reduce_pv_to_hat_vs_mid(&inst, 3, t, c)?.produced)
        };
        let audit = verify_reduction_stats(program, &mid, 20_000, 1)?;
        println!("pv(no) -> planted, {c:?}: passed {}, failing tests {:?}", audit.passed(), audit.failures());
    }
    Ok(())
}
