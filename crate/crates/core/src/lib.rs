pub mod cli;
pub mod distinguish;
pub mod error;
pub mod keyops;
pub mod perm;
pub mod prob;
pub mod protocol;
pub mod random;
pub mod rate;
pub mod reference;
pub mod sources;
pub mod tape;
pub mod verify;

pub use error::{Error, Result};

/// Default cap on atoms visited by exact enumerators.
pub const ATOM_CAP: usize = 1_000_000;
/// Default cap on dense joint tables (inputs times transcript states).
pub const STATE_CAP: usize = 10_000_000;
