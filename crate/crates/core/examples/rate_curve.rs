//! Achieved rate curves for the perfect bit and a binary symmetric source,
//! with the minimum interaction for maximum key rate and the key-per-bit
//! ratio read off each curve.
//!
//! `cargo run --release --example rate_curve`

use crglab::prob::{binary_entropy, Rational};
use crglab::rate::{approx_tilfc, budget_grid, certify_shape, gamma_cbib, mimk_estimate, MeshOptions};
use crglab::sources::SourceHandle;

fn main() -> crglab::Result<()> {
    let grid = budget_grid(0.0, 0.1, 1.5);
    let opts = MeshOptions::default();
    for (name, src) in [
        ("perfect bit", SourceHandle::perfect_bit()),
        ("bss(1/4)", SourceHandle::bss(Rational::new(1.into(), 4.into()))?),
        ("bss(1/10)", SourceHandle::bss(Rational::new(1.into(), 10.into()))?),
    ] {
        let curve = approx_tilfc(&src, 1, &grid, &opts)?;
        println!("== {name}: I(X;Y) = {:.4}, {} protocols evaluated", curve.source_mi, curve.evaluated);
        print!("{}", curve.to_csv());
        match mimk_estimate(&curve, curve.source_mi) {
            Ok(m) => println!("MIMK ≈ {} via {}", m.value, m.witness_id),
            Err(e) => println!("MIMK not reached on this grid: {e}"),
        }
        println!("Γ = {:?}, shape {:?}", gamma_cbib(&curve), certify_shape(&curve, 0.05)?.violations);
    }
    println!("h(1/4) = {:.4}", binary_entropy(0.25));
    Ok(())
}
