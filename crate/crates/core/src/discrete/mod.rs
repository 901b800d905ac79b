//! Exact information measures on finite alphabets. These are the ground-truth
//! oracles for everything else in the crate.

pub mod fdiv;
pub mod measures;
pub mod random;
pub mod tables;
pub mod text;

pub use fdiv::{
    f_divergence, js_divergence, total_variation, ConvexFn, FGenerator, JensenShannon, Kl,
    TotalVariation,
};
pub use measures::{
    conditional_entropy, conditional_kl, conditional_mutual_information,
    conditional_mutual_information_direct, conditional_mutual_information_groups, entropy,
    entropy_of_axes, joint_entropy, kl_divergence, mi_chain_rule_terms, mutual_information,
    mutual_information_groups, mutual_information_via_conditional,
    mutual_information_via_conditional_kl, mutual_information_via_entropies,
    mutual_information_via_kl,
};
pub use tables::{Axis, Axis3, CondPmf, ExtReal, JointPmf2, JointPmf3, JointPmfN, Pmf};
pub use text::{format_table, parse_table, read_table};
