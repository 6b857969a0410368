//! Alternating two-party protocols: representation, execution, exact
//! analysis, and transforms.

mod analysis;
mod hash;
mod json;
mod run;
mod transforms;
mod tree;

pub use analysis::{
    crg_report, forward_states, info_costs, keyed_joint, keyed_states, prefix_residuals, transcript_joint,
    transcript_law, transcript_spaces, CrgReport, IcReport, KeyedState, PathState,
};
pub use hash::{append_hash_check, collision_rate, hash_bits, HashChecked, LinearHash};
pub use json::{keyed_from_json, keyed_to_json, protocol_from_json, protocol_to_json, ProtocolDoc};
pub use run::{draw_row, run_keyed, run_protocol, KeyedRun, Transcript};
pub use transforms::{augment_with_key, mix_protocols, strip_coins, strip_coins_alpha, AlphaReport};
pub use tree::{ceil_log2, Flavor, Kernel, KernelFn, KeyedProtocol, Party, ProtocolBuilder, ProtocolTree, Row};
