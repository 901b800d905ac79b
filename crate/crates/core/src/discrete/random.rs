//! Random full-support tables: exponential draws, normalized.

use ndarray::{Array2, Array3, ArrayD, IxDyn};
use rand::Rng;

use crate::scalar::Scalar;

use super::tables::{CondPmf, JointPmf2, JointPmf3, JointPmfN, Pmf};

fn exp_draw<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // u in (0, 1]
    let u: f64 = 1.0 - rng.random::<f64>();
    -u.ln()
}

fn normalized<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| exp_draw(rng).max(1e-300)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn cast<T: Scalar>(v: Vec<f64>) -> Vec<T> {
    v.into_iter().map(T::c).collect()
}

pub fn random_pmf<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Pmf<T> {
    Pmf::from_probs(cast(normalized(rng, n))).expect("normalized draw is valid")
}

pub fn random_joint2<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    rows: usize,
    cols: usize,
) -> JointPmf2<T> {
    let arr = Array2::from_shape_vec((rows, cols), cast(normalized(rng, rows * cols)))
        .expect("shape matches");
    JointPmf2::from_array(arr).expect("normalized draw is valid")
}

pub fn random_joint3<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    shape: (usize, usize, usize),
) -> JointPmf3<T> {
    let n = shape.0 * shape.1 * shape.2;
    let arr = Array3::from_shape_vec(shape, cast(normalized(rng, n))).expect("shape matches");
    JointPmf3::from_array(arr).expect("normalized draw is valid")
}

pub fn random_joint_n<T: Scalar, R: Rng + ?Sized>(rng: &mut R, shape: &[usize]) -> JointPmfN<T> {
    let n = shape.iter().product();
    let arr =
        ArrayD::from_shape_vec(IxDyn(shape), cast(normalized(rng, n))).expect("shape matches");
    JointPmfN::from_array(arr).expect("normalized draw is valid")
}

pub fn random_cond<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    given: usize,
    target: usize,
) -> CondPmf<T> {
    let flat: Vec<f64> = (0..given).flat_map(|_| normalized(rng, target)).collect();
    let arr = Array2::from_shape_vec((given, target), cast(flat)).expect("shape matches");
    CondPmf::from_array(arr).expect("normalized rows are valid")
}
