//! Estimators evaluated on a sample batch.

use crate::critic::{score_matrix, BaselineParams, CriticParams};
use crate::error::Result;
use crate::gaussian::SampleBatch;
use crate::scalar::Scalar;

use super::bounds;
use super::decoder::DecoderParams;

/// `(1/n) Σ_i [log p(y_i | x_i) − log q(y_i)]`. With `q` the true marginal
/// this is unbiased for the mutual information; any other `q` adds
/// `KL(P_Y ‖ q)` in expectation.
pub fn est_ba_upper<T, C, M>(
    batch: &SampleBatch<T>,
    cond_log_density: C,
    marginal_log_density: M,
) -> Result<T>
where
    T: Scalar,
    C: Fn(&[T], &[T]) -> Result<T>,
    M: Fn(&[T]) -> Result<T>,
{
    let mut total = T::zero();
    for (x, y) in batch.xs.outer_iter().zip(batch.ys.outer_iter()) {
        let (x, y) = (x.to_vec(), y.to_vec());
        total += cond_log_density(&y, &x)? - marginal_log_density(&y)?;
    }
    Ok(total / T::c(batch.len() as f64))
}

/// `(1/n) Σ_i log q(x_i | y_i) + h(X)`.
pub fn est_ba_lower<T: Scalar>(
    batch: &SampleBatch<T>,
    decoder: &DecoderParams<T>,
    entropy_hx: T,
) -> Result<T> {
    let vals = decoder.log_density(batch.xs.view(), batch.ys.view())?;
    Ok(vals.into_iter().sum::<T>() / T::c(batch.len() as f64) + entropy_hx)
}

/// Leave-one-out upper bound using the task's exact conditional density.
pub fn est_l1out<T: Scalar>(batch: &SampleBatch<T>) -> Result<T> {
    bounds::l1out_bound(batch.task.cond_log_density_matrix(batch).view())
}

pub fn est_dv<T: Scalar>(batch: &SampleBatch<T>, critic: &CriticParams<T>) -> Result<T> {
    bounds::dv_bound(score_matrix(critic, batch)?.view())
}

pub fn est_tuba<T: Scalar>(
    batch: &SampleBatch<T>,
    critic: &CriticParams<T>,
    baseline: &BaselineParams<T>,
) -> Result<T> {
    let log_a = baseline.log_a(batch.ys.view())?;
    bounds::tuba_bound(score_matrix(critic, batch)?.view(), &log_a)
}

pub fn est_nwj<T: Scalar>(batch: &SampleBatch<T>, critic: &CriticParams<T>) -> Result<T> {
    bounds::nwj_bound(score_matrix(critic, batch)?.view())
}

pub fn est_infonce<T: Scalar>(batch: &SampleBatch<T>, critic: &CriticParams<T>) -> Result<T> {
    bounds::infonce_bound(score_matrix(critic, batch)?.view())
}

/// Biased: the intractable log partition is replaced by its batch estimate.
pub fn est_uba_diagnostic<T: Scalar>(
    batch: &SampleBatch<T>,
    critic: &CriticParams<T>,
) -> Result<T> {
    bounds::uba_diagnostic(score_matrix(critic, batch)?.view())
}
