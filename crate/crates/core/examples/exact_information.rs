//! Exact tables, information quantities, and the inequality checks.
//!
//! `cargo run --example exact_information`

use crglab::prob::{check_pinsker, check_reverse_pinsker, entropy, kl, min_entropy, tv, Dist, OutcomeSpace, Rational};
use crglab::sources::{PcsParams, SourceHandle};

fn main() -> crglab::Result<()> {
    // The pointer-chasing source shares exactly one ℓ-bit block.
    for (r, n, ell) in [(1, 2, 1), (1, 3, 1), (2, 2, 1), (1, 2, 2)] {
        let mu = SourceHandle::pcs(PcsParams::new(r, n, ell)?).exact::<Rational>(crglab::ATOM_CAP)?;
        let info = mu.info();
        println!(
            "pcs({r},{n},{ell}): {} atoms in support, H(X)={:.4}, H(Y)={:.4}, I(X;Y)={:.12}",
            mu.support_len(),
            info.entropy(&[0]),
            info.entropy(&[1]),
            info.mutual_info(&[0], &[1], &[])
        );
    }

    let space = OutcomeSpace::range(3);
    let third = |a: i64| Rational::new(a.into(), 6.into());
    let p = Dist::new(space.clone(), vec![third(3), third(2), third(1)])?;
    let q = Dist::uniform(space);
    println!("H(p)={:.4} H∞(p)={:.4} D(p‖q)={:.4} Δ(p,q)={}", entropy(&p), min_entropy(&p), kl(&p, &q)?, tv(&p, &q)?);
    for report in [check_pinsker(&p, &q)?, check_reverse_pinsker(&p, &q)?] {
        println!("{}: applicable={} min slack {:.4}", report.check, report.applicable, report.min_slack());
    }
    Ok(())
}
