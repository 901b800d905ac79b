use crate::discrete::measures::kl_of;
use crate::discrete::{JointPmf2, Pmf};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Result of minimizing `D(P_{X,Y} ‖ Q_X ⊗ Q_Y)` over product distributions.
#[derive(Clone, Debug)]
pub struct ProductFit<T> {
    pub qx: Pmf<T>,
    pub qy: Pmf<T>,
    pub value: T,
    /// Objective at the uniform start and after every half-step.
    pub history: Vec<T>,
}

fn product_kl<T: Scalar>(j: &JointPmf2<T>, qx: &[T], qy: &[T]) -> T {
    let p: Vec<T> = j.probs().iter().copied().collect();
    let q: Vec<T> = qx
        .iter()
        .flat_map(|&a| qy.iter().map(move |&b| a * b))
        .collect();
    kl_of(&p, &q).value()
}

/// Exact coordinate minimizer over one factor: with the other factor fixed,
/// the objective is a cross-entropy in the free factor plus constants, so the
/// minimizer is proportional to the joint's mass along that axis.
fn coordinate_update<T: Scalar>(j: &JointPmf2<T>, axis: usize) -> Vec<T> {
    let raw = j.probs().sum_axis(ndarray::Axis(1 - axis));
    let total: T = raw.iter().copied().sum();
    raw.iter().map(|&v| v / total).collect()
}

/// Alternating minimization starting from uniform `Q_X`, `Q_Y`.
pub fn product_distance_minimize<T: Scalar>(
    j: &JointPmf2<T>,
    iters: usize,
) -> Result<ProductFit<T>> {
    if iters == 0 {
        return Err(Error::InvalidArgument("iters must be at least 1".into()));
    }
    let (nr, nc) = j.probs().dim();
    let mut qx = vec![T::one() / T::c(nr as f64); nr];
    let mut qy = vec![T::one() / T::c(nc as f64); nc];
    let mut history = vec![product_kl(j, &qx, &qy)];
    for _ in 0..iters {
        qx = coordinate_update(j, 0);
        history.push(product_kl(j, &qx, &qy));
        qy = coordinate_update(j, 1);
        history.push(product_kl(j, &qx, &qy));
    }
    let value = *history.last().expect("nonempty");
    Ok(ProductFit {
        qx: Pmf::new(j.row_labels().to_vec(), qx)?,
        qy: Pmf::new(j.col_labels().to_vec(), qy)?,
        value,
        history,
    })
}
