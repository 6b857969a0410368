//! Grid approximation of the single-letter rate function, with the
//! minimum interaction for maximum key rate, the key-bits-per-bit ratio,
//! and shape certification.

mod curve;
mod grid;

pub use curve::{
    certify_shape, gamma_cbib, mimk_estimate, Branch, EnvelopeVertex, Gamma, MimkEstimate, RateCurve, RatePoint,
    ShapeReport,
};
pub use grid::{approx_tilfc, approx_tilfc_joint, curve_from_witnesses, support_caps, MeshOptions};

/// `start, start + step, ..` up to `stop` inclusive (within `1e-9`).
pub fn budget_grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return vec![start];
    }
    let k = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=k).map(|i| start + i as f64 * step).collect()
}

#[cfg(test)]
mod tests;
