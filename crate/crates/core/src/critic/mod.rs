//! Trainable score functions with hand-written reverse-mode gradients.

pub mod adam;
pub mod mlp;
pub mod params;
pub mod score;

pub use adam::{AdamConfig, AdamState};
pub use mlp::{Dense, Mlp, MlpCache};
pub use params::ParamSet;
pub use score::{
    backward, critic_backward, init_critic, score_forward, score_matrix, BaselineParams,
    CriticArch, CriticForm, CriticParams, ScoreCache,
};
