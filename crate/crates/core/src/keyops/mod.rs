//! Key post-processing: greedy min-entropy compression, coupling a key to
//! the uniform law, and the transforms between min-entropy keys and
//! near-uniform keys.

mod compress;
mod convert;

pub use compress::{compress_min_entropy, couple_to_uniform, Compression, Coupling, KeyMap, KeyRule};
pub use convert::{
    achievable_to_quasi, key_laws, quasi_to_achievable, shannon_entropy_exhibit, AchievableReport, KeyLaws,
    QuasiReport, ShannonExhibit,
};
