//! Reference protocols and reductions for the pointer-chasing family.

mod audit;
mod chase;
mod pv;
mod reductions;

pub use audit::{chi_square, verify_reduction_exact, verify_reduction_stats, ExactAudit, MacroAudit, StatTest, AUDIT_ALPHA};
pub use chase::{pointer_chase_protocol, pointer_chase_reveal};
pub use pv::{
    law_distance, pv_bidirectional_protocol, pv_exact_advantage, pv_message, pv_rounds, pv_transcript, pv_transcript_laws,
    PvView,
};
pub use reductions::{
    pair_index, pair_perm, reduce_disj_to_mid_vs_prod, reduce_disj_to_mu_vs_hat, reduce_pv_to_hat_vs_mid, square_side,
    Branch, Corruption, ReductionOutput,
};
