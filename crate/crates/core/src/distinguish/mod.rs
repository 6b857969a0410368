//! Distinguishers: high-probability support sets, the keyed string test,
//! and advantage measurement including the exact optimum over small
//! protocols.

mod advantage;
mod support;
mod testi;

pub use advantage::{
    detector_advantage, exhaustive_advantage, measure_advantage, transcript_advantage, AdvantageMode,
    AdvantageReport, Budget, ExhaustiveResult,
};
pub use support::{check_hient_smallset, check_zi_lb, entropy_support_set, SupportSet};
pub use testi::{build_test_i, xi_from_info, KeyedStrings, TestIDetector};

#[cfg(test)]
mod tests;
