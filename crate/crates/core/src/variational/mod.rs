//! Executable forms of the variational identities and inequalities for
//! mutual information on finite alphabets.

pub mod dv;
pub mod golden;
pub mod gyp;
pub mod markov;
pub mod probes;
pub mod product;

pub use dv::{dv_supremum, dv_value, CriticVector, DvFit, DV_DEFAULT_LR, DV_DEFAULT_STEPS};
pub use golden::{golden_decomposition, GoldenTerms};
pub use gyp::{
    gyp_mi_supremum, gyp_supremum, restricted_growth_strings, GypFit, GypMiFit, Partition,
};
pub use markov::{dpi_check, markov_joint, DpiReport, MarkovChainSpec};
pub use probes::{
    alpha_grid, entropy_concavity_probe, entropy_continuity_probe, jensen_probe,
    kl_convexity_probe, mi_concavity_convexity_probe, MiShapeReport, ProbeReport,
};
pub use product::{product_distance_minimize, ProductFit};
