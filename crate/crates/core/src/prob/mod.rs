//! Finite distributions, joint laws, and entropic functionals.

mod dist;
mod info;
mod inequalities;
mod space;
mod weight;

pub use dist::{Dist, JointDist};
pub use info::{binary_entropy, entropy, kl, min_entropy, tv, tv_joint, InfoView};
pub use inequalities::{
    check_cond_ineq_1, check_data_processing, check_pinsker, check_rev_cond_pinsker, check_reverse_pinsker,
    InequalityReport,
};
pub use space::{MixedRadix, OutcomeSpace};
pub use weight::{parse_rational, Rational, Weight};

#[allow(unused_imports)]
pub(crate) use info::half_l1;
