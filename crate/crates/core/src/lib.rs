//! Mutual-information toolkit: exact information measures on finite
//! alphabets, executable forms of the classic identities and inequalities,
//! and trainable variational estimators benchmarked on correlated Gaussians.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod bench;
pub mod critic;
pub mod discrete;
pub mod error;
pub mod estimators;
pub mod gaussian;
pub mod rng;
pub mod scalar;
pub mod variational;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{log_sum_exp, Scalar};

pub type PmfF64 = discrete::Pmf<f64>;
pub type JointPmf2F64 = discrete::JointPmf2<f64>;
pub type JointPmf3F64 = discrete::JointPmf3<f64>;
pub type CondPmfF64 = discrete::CondPmf<f64>;
pub type GaussianTaskF64 = gaussian::GaussianTask<f64>;
pub type SampleBatchF64 = gaussian::SampleBatch<f64>;
pub type CriticParamsF64 = critic::CriticParams<f64>;
pub type EstimateTrajectoryF64 = estimators::EstimateTrajectory<f64>;

pub type PmfF32 = discrete::Pmf<f32>;
pub type JointPmf2F32 = discrete::JointPmf2<f32>;
pub type GaussianTaskF32 = gaussian::GaussianTask<f32>;
pub type CriticParamsF32 = critic::CriticParams<f32>;
