//! Variational mutual-information estimators on Gaussian tasks.

pub mod bounds;
pub mod decoder;
pub mod estimate;
pub mod kind;
pub mod train;

pub use bounds::{
    dv_bound, dv_bound_grad, infonce_bound, infonce_bound_grad, l1out_bound, nwj_bound,
    nwj_bound_grad, tuba_bound, tuba_bound_grad, uba_diagnostic,
};
pub use decoder::DecoderParams;
pub use estimate::{
    est_ba_lower, est_ba_upper, est_dv, est_infonce, est_l1out, est_nwj, est_tuba,
    est_uba_diagnostic,
};
pub use kind::{Direction, EstimatorKind};
pub use train::{
    csv_file_name, evaluate, evaluate_fresh, format_sig9, mi_label, train_estimator,
    train_with_model, trajectory_csv, write_trajectory_csv, EstimateTrajectory, Model, TrainConfig,
    TrajectoryPoint, CSV_HEADER,
};
